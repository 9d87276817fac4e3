#include "fg/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fg::ref {

void matmul_nt(const double* a, const double* b, double* c, size_t m, size_t k, size_t n) {
  for (size_t i = 0; i < m; ++i) {
    const double* ai = a + i * k;
    for (size_t j = 0; j < n; ++j) {
      const double* bj = b + j * k;
      double acc = 0.0;
      for (size_t p = 0; p < k; ++p) acc += ai[p] * bj[p];
      c[i * n + j] = acc;
    }
  }
}

void matmul_nn(const double* a, const double* b, double* c, size_t m, size_t k, size_t n) {
  for (size_t i = 0; i < m; ++i) {
    const double* ai = a + i * k;
    for (size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (size_t p = 0; p < k; ++p) acc += ai[p] * b[p * n + j];
      c[i * n + j] = acc;
    }
  }
}

void matmul_tn(const double* a, const double* b, double* c, size_t m, size_t k, size_t n) {
  for (size_t i = 0; i < k; ++i) {
    for (size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (size_t p = 0; p < m; ++p) acc += a[p * k + i] * b[p * n + j];
      c[i * n + j] = acc;
    }
  }
}

void add_bias_rows(double* y, const double* bias, size_t rows, size_t cols) {
  for (size_t i = 0; i < rows; ++i)
    for (size_t j = 0; j < cols; ++j) y[i * cols + j] += bias[j];
}

void relu(double* x, size_t n) {
  for (size_t i = 0; i < n; ++i)
    if (x[i] < 0.0) x[i] = 0.0;
}

void relu_backward(double* dx, const double* pre, size_t n) {
  for (size_t i = 0; i < n; ++i)
    if (!(pre[i] > 0.0)) dx[i] = 0.0;
}

void col_sums(const double* a, double* out, size_t rows, size_t cols) {
  for (size_t j = 0; j < cols; ++j) out[j] = 0.0;
  for (size_t i = 0; i < rows; ++i)
    for (size_t j = 0; j < cols; ++j) out[j] += a[i * cols + j];
}

}  // namespace fg::ref

namespace fg::kern {

// Parallelism is always across independent output elements; the inner
// accumulation over k stays serial, matching fg::ref bit for bit.

void matmul_nt(const double* a, const double* b, double* c, size_t m, size_t k, size_t n) {
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(m); ++i) {
    const double* ai = a + i * k;
    for (size_t j = 0; j < n; ++j) {
      const double* bj = b + j * k;
      double acc = 0.0;
      for (size_t p = 0; p < k; ++p) acc += ai[p] * bj[p];
      c[i * n + j] = acc;
    }
  }
}

void matmul_nn(const double* a, const double* b, double* c, size_t m, size_t k, size_t n) {
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(m); ++i) {
    const double* ai = a + i * k;
    for (size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (size_t p = 0; p < k; ++p) acc += ai[p] * b[p * n + j];
      c[i * n + j] = acc;
    }
  }
}

void matmul_tn(const double* a, const double* b, double* c, size_t m, size_t k, size_t n) {
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(k); ++i) {
    for (size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (size_t p = 0; p < m; ++p) acc += a[p * k + i] * b[p * n + j];
      c[i * n + j] = acc;
    }
  }
}

void add_bias_rows(double* y, const double* bias, size_t rows, size_t cols) {
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(rows); ++i)
    for (size_t j = 0; j < cols; ++j) y[i * cols + j] += bias[j];
}

void relu(double* x, size_t n) {
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(n); ++i)
    if (x[i] < 0.0) x[i] = 0.0;
}

void relu_backward(double* dx, const double* pre, size_t n) {
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(n); ++i)
    if (!(pre[i] > 0.0)) dx[i] = 0.0;
}

void col_sums(const double* a, double* out, size_t rows, size_t cols) {
#pragma omp parallel for schedule(static)
  for (long long j = 0; j < static_cast<long long>(cols); ++j) {
    double acc = 0.0;
    for (size_t i = 0; i < rows; ++i) acc += a[i * cols + j];
    out[j] = acc;
  }
}

}  // namespace fg::kern

namespace fg {

void set_worker_count(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

int worker_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace fg
