#pragma once

#include <cassert>
#include <cstddef>
#include <string>
#include <vector>

namespace fg {

// Dense row-major f64 tensor. Deliberately minimal: shape + flat storage.
struct Tensor {
  std::vector<size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<size_t> s);

  static Tensor zeros(std::vector<size_t> s) { return Tensor(std::move(s)); }

  size_t size() const { return data.size(); }
  size_t rows() const { return shape.empty() ? 0 : shape[0]; }
  size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

  double& at(size_t r, size_t c) { return data[r * cols() + c]; }
  double at(size_t r, size_t c) const { return data[r * cols() + c]; }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
  void fill(double v);
};

size_t shape_product(const std::vector<size_t>& shape);
std::string shape_str(const std::vector<size_t>& shape);

// Debug-build guard: aborts with a message if any element is NaN/Inf.
// Compiles to nothing in release builds.
void debug_check_finite(const Tensor& t, const char* what);
void debug_check_finite(const double* p, size_t n, const char* what);

}  // namespace fg
