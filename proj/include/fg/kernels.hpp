#pragma once

#include <cstddef>

// Dense kernels behind the network code. fg::kern is the OpenMP path used in
// production; fg::ref is the serial reference kept for testing. Both compute
// every output element with the same serial accumulation order, so results
// are bit-identical regardless of thread count (asserted by tests and
// compared by the bench target).

namespace fg::ref {

// c[m,n] = a[m,k] * b[n,k]^T   (row-major; linear layer forward with w=[out,in])
void matmul_nt(const double* a, const double* b, double* c, size_t m, size_t k, size_t n);

// c[m,n] = a[m,k] * b[k,n]     (input gradient: dX = dY * W)
void matmul_nn(const double* a, const double* b, double* c, size_t m, size_t k, size_t n);

// c[k,n] = a[m,k]^T * b[m,n]   (weight gradient: dW = dY^T * X, m = batch)
void matmul_tn(const double* a, const double* b, double* c, size_t m, size_t k, size_t n);

void add_bias_rows(double* y, const double* bias, size_t rows, size_t cols);
void relu(double* x, size_t n);
// dx[i] *= 1 if pre[i] > 0 else 0 (subgradient at 0 chosen as 0)
void relu_backward(double* dx, const double* pre, size_t n);
void col_sums(const double* a, double* out, size_t rows, size_t cols);

}  // namespace fg::ref

namespace fg::kern {

void matmul_nt(const double* a, const double* b, double* c, size_t m, size_t k, size_t n);
void matmul_nn(const double* a, const double* b, double* c, size_t m, size_t k, size_t n);
void matmul_tn(const double* a, const double* b, double* c, size_t m, size_t k, size_t n);
void add_bias_rows(double* y, const double* bias, size_t rows, size_t cols);
void relu(double* x, size_t n);
void relu_backward(double* dx, const double* pre, size_t n);
void col_sums(const double* a, double* out, size_t rows, size_t cols);

}  // namespace fg::kern

namespace fg {
// caps OpenMP worker count for this process; n <= 0 leaves the default
void set_worker_count(int n);
int worker_count();
}  // namespace fg
