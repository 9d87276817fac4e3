#include "fg/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace fg {

size_t shape_product(const std::vector<size_t>& shape) {
  size_t n = 1;
  for (size_t d : shape) n *= d;
  return n;
}

std::string shape_str(const std::vector<size_t>& shape) {
  std::string s = "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor::Tensor(std::vector<size_t> s) : shape(std::move(s)), data(shape_product(shape), 0.0) {}

void Tensor::fill(double v) { std::fill(data.begin(), data.end(), v); }

void debug_check_finite(const double* p, size_t n, const char* what) {
#ifndef NDEBUG
  for (size_t i = 0; i < n; ++i) {
    if (!std::isfinite(p[i])) {
      std::fprintf(stderr, "non-finite value in %s at index %zu\n", what, i);
      std::abort();
    }
  }
#else
  (void)p;
  (void)n;
  (void)what;
#endif
}

void debug_check_finite(const Tensor& t, const char* what) {
  debug_check_finite(t.data.data(), t.data.size(), what);
}

}  // namespace fg
