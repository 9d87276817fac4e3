#include <doctest.h>

#include <vector>

#include "fg/kernels.hpp"
#include "fg/rng.hpp"

namespace {

std::vector<double> random_vec(size_t n, fg::Rng& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-2.0, 2.0);
  return v;
}

// Independent accumulation written as plainly as possible; the reference
// kernels must match it exactly because they accumulate in the same order.
void naive_nt(const double* a, const double* b, double* c, size_t m, size_t k, size_t n) {
  for (size_t i = 0; i < m; ++i)
    for (size_t j = 0; j < n; ++j) {
      double acc = 0;
      for (size_t p = 0; p < k; ++p) acc += a[i * k + p] * b[j * k + p];
      c[i * n + j] = acc;
    }
}

void naive_nn(const double* a, const double* b, double* c, size_t m, size_t k, size_t n) {
  for (size_t i = 0; i < m; ++i)
    for (size_t j = 0; j < n; ++j) {
      double acc = 0;
      for (size_t p = 0; p < k; ++p) acc += a[i * k + p] * b[p * n + j];
      c[i * n + j] = acc;
    }
}

void naive_tn(const double* a, const double* b, double* c, size_t m, size_t k, size_t n) {
  for (size_t i = 0; i < k; ++i)
    for (size_t j = 0; j < n; ++j) {
      double acc = 0;
      for (size_t p = 0; p < m; ++p) acc += a[p * k + i] * b[p * n + j];
      c[i * n + j] = acc;
    }
}

struct Shape {
  size_t m, k, n;
};

const Shape kShapes[] = {{1, 1, 1}, {2, 3, 4}, {16, 102, 34}, {7, 512, 32}, {16, 512, 512}};

}  // namespace

TEST_CASE("reference matmuls equal a naive oracle bit for bit") {
  fg::Rng rng(21);
  for (const auto& s : kShapes) {
    auto a = random_vec(s.m * s.k, rng);
    auto bt = random_vec(s.n * s.k, rng);
    auto b = random_vec(s.k * s.n, rng);

    std::vector<double> want(s.m * s.n), got(s.m * s.n);
    naive_nt(a.data(), bt.data(), want.data(), s.m, s.k, s.n);
    fg::ref::matmul_nt(a.data(), bt.data(), got.data(), s.m, s.k, s.n);
    CHECK(want == got);

    naive_nn(a.data(), b.data(), want.data(), s.m, s.k, s.n);
    fg::ref::matmul_nn(a.data(), b.data(), got.data(), s.m, s.k, s.n);
    CHECK(want == got);

    std::vector<double> want_t(s.k * s.n), got_t(s.k * s.n);
    auto bm = random_vec(s.m * s.n, rng);
    naive_tn(a.data(), bm.data(), want_t.data(), s.m, s.k, s.n);
    fg::ref::matmul_tn(a.data(), bm.data(), got_t.data(), s.m, s.k, s.n);
    CHECK(want_t == got_t);
  }
}

TEST_CASE("parallel kernels are bit-identical to the serial reference") {
  fg::Rng rng(34);
  for (int workers : {1, 2, 4}) {
    fg::set_worker_count(workers);
    for (const auto& s : kShapes) {
      auto a = random_vec(s.m * s.k, rng);
      auto bt = random_vec(s.n * s.k, rng);
      auto b = random_vec(s.k * s.n, rng);
      auto bm = random_vec(s.m * s.n, rng);

      std::vector<double> want(s.m * s.n), got(s.m * s.n);
      fg::ref::matmul_nt(a.data(), bt.data(), want.data(), s.m, s.k, s.n);
      fg::kern::matmul_nt(a.data(), bt.data(), got.data(), s.m, s.k, s.n);
      CHECK(want == got);

      fg::ref::matmul_nn(a.data(), b.data(), want.data(), s.m, s.k, s.n);
      fg::kern::matmul_nn(a.data(), b.data(), got.data(), s.m, s.k, s.n);
      CHECK(want == got);

      std::vector<double> want_t(s.k * s.n), got_t(s.k * s.n);
      fg::ref::matmul_tn(a.data(), bm.data(), want_t.data(), s.m, s.k, s.n);
      fg::kern::matmul_tn(a.data(), bm.data(), got_t.data(), s.m, s.k, s.n);
      CHECK(want_t == got_t);
    }
  }
  fg::set_worker_count(0);
}

TEST_CASE("elementwise kernels agree between paths") {
  fg::Rng rng(55);
  const size_t rows = 9, cols = 33;
  auto y = random_vec(rows * cols, rng);
  auto bias = random_vec(cols, rng);

  for (int workers : {1, 3}) {
    fg::set_worker_count(workers);

    auto y1 = y, y2 = y;
    fg::ref::add_bias_rows(y1.data(), bias.data(), rows, cols);
    fg::kern::add_bias_rows(y2.data(), bias.data(), rows, cols);
    CHECK(y1 == y2);

    auto r1 = y, r2 = y;
    fg::ref::relu(r1.data(), r1.size());
    fg::kern::relu(r2.data(), r2.size());
    CHECK(r1 == r2);
    for (double v : r1) CHECK(v >= 0.0);

    auto dx1 = random_vec(rows * cols, rng);
    auto dx2 = dx1;
    fg::ref::relu_backward(dx1.data(), y.data(), y.size());
    fg::kern::relu_backward(dx2.data(), y.data(), y.size());
    CHECK(dx1 == dx2);
    for (size_t i = 0; i < y.size(); ++i)
      if (y[i] <= 0) CHECK(dx1[i] == 0.0);

    std::vector<double> s1(cols), s2(cols);
    fg::ref::col_sums(y.data(), s1.data(), rows, cols);
    fg::kern::col_sums(y.data(), s2.data(), rows, cols);
    CHECK(s1 == s2);
  }
  fg::set_worker_count(0);
}

TEST_CASE("worker count round-trips through the cap") {
  fg::set_worker_count(2);
  CHECK(fg::worker_count() == 2);
  fg::set_worker_count(1);
  CHECK(fg::worker_count() == 1);
  fg::set_worker_count(0);  // back to the runtime default
  CHECK(fg::worker_count() >= 1);
}
