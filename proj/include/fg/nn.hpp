#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

#include "fg/rng.hpp"
#include "fg/tensor.hpp"

// Minimal dense-network toolkit: Linear layers, a ReLU MLP with exact
// reverse-mode gradients, Adam, and a two-part checkpoint format (JSON header
// line followed by a raw little-endian f64 payload).

namespace fg {

// Fully connected layer, weights stored [out, in].
struct Linear {
  Tensor w, b;
  Tensor dw, db;

  Linear() = default;
  // He-uniform weights (limit sqrt(6/in)), zero bias. A positive init_limit
  // overrides the He limit; useful when inputs are sparse rather than dense
  // unit-variance, where fan-in scaling would leave the layer output tiny.
  Linear(size_t in, size_t out, Rng& init, double init_limit = 0.0);

  size_t in_dim() const { return w.cols(); }
  size_t out_dim() const { return w.rows(); }

  // y[batch,out] = x[batch,in] * w^T + b
  Tensor forward(const Tensor& x) const;
  // Overwrites dw/db from (cached input x, upstream dy); returns dx.
  Tensor backward(const Tensor& x, const Tensor& dy);
};

struct MlpCache {
  std::vector<Tensor> inputs;  // input fed to each layer
  std::vector<Tensor> pre;     // pre-activation output of each layer
};

// ReLU MLP: dims = [in, hidden..., out]; the last layer is linear.
class Mlp {
 public:
  Mlp() = default;
  Mlp(const std::vector<size_t>& dims, Rng& init);

  size_t in_dim() const { return layers_.front().in_dim(); }
  size_t out_dim() const { return layers_.back().out_dim(); }
  const std::vector<size_t>& dims() const { return dims_; }

  // cache may be null for inference-only calls
  Tensor forward(const Tensor& x, MlpCache* cache = nullptr) const;
  // Overwrites layer gradients; returns gradient w.r.t. the input.
  Tensor backward(const MlpCache& cache, const Tensor& dout);

  std::vector<Tensor*> params();
  std::vector<Tensor*> grads();
  std::vector<const Tensor*> params() const;

 private:
  std::vector<size_t> dims_;
  std::vector<Linear> layers_;
};

// Adam with bias correction; moment buffers are allocated on first step.
class Adam {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(std::span<Tensor* const> params, std::span<Tensor* const> grads);
  int64_t steps_taken() const { return t_; }
  // Change the step size mid-run (learning-rate schedules); moments persist.
  void set_lr(double lr) { lr_ = lr; }

 private:
  double lr_, beta1_, beta2_, eps_;
  int64_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

// Checkpoint layout: one JSON line {"format","schema_version","shapes","meta"}
// then the concatenated parameter payload as little-endian f64.
void save_checkpoint(const std::filesystem::path& path, const nlohmann::json& meta,
                     std::span<const Tensor* const> params);
// Fills pre-shaped tensors; throws ValidationError("checkpoint.*") on any
// format or shape mismatch. Returns the stored meta block.
nlohmann::json load_checkpoint(const std::filesystem::path& path, std::span<Tensor* const> params);

}  // namespace fg
