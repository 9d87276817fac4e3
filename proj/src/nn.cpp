#include "fg/nn.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "fg/error.hpp"
#include "fg/kernels.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint payload assumes a little-endian host");

namespace fg {

using nlohmann::json;

Linear::Linear(size_t in, size_t out, Rng& init, double init_limit)
    : w(Tensor::zeros({out, in})),
      b(Tensor::zeros({out})),
      dw(Tensor::zeros({out, in})),
      db(Tensor::zeros({out})) {
  double limit = init_limit > 0 ? init_limit : std::sqrt(6.0 / static_cast<double>(in));
  for (double& x : w.data) x = (init.uniform() * 2.0 - 1.0) * limit;
}

Tensor Linear::forward(const Tensor& x) const {
  size_t batch = x.rows();
  assert(x.cols() == in_dim());
  Tensor y = Tensor::zeros({batch, out_dim()});
  kern::matmul_nt(x.data.data(), w.data.data(), y.data.data(), batch, in_dim(), out_dim());
  kern::add_bias_rows(y.data.data(), b.data.data(), batch, out_dim());
  return y;
}

Tensor Linear::backward(const Tensor& x, const Tensor& dy) {
  size_t batch = x.rows();
  assert(dy.rows() == batch && dy.cols() == out_dim());
  kern::matmul_tn(dy.data.data(), x.data.data(), dw.data.data(), batch, out_dim(), in_dim());
  kern::col_sums(dy.data.data(), db.data.data(), batch, out_dim());
  Tensor dx = Tensor::zeros({batch, in_dim()});
  kern::matmul_nn(dy.data.data(), w.data.data(), dx.data.data(), batch, out_dim(), in_dim());
  return dx;
}

Mlp::Mlp(const std::vector<size_t>& dims, Rng& init) : dims_(dims) {
  if (dims.size() < 2) throw ValidationError("mlp.dims", "an MLP needs at least [in, out] dims");
  for (size_t d : dims)
    if (d == 0) throw ValidationError("mlp.dims", "zero-sized MLP dimension");
  layers_.reserve(dims.size() - 1);
  for (size_t i = 0; i + 1 < dims.size(); ++i) layers_.emplace_back(dims[i], dims[i + 1], init);
}

Tensor Mlp::forward(const Tensor& x, MlpCache* cache) const {
  if (cache) {
    cache->inputs.clear();
    cache->pre.clear();
  }
  Tensor h = x;
  for (size_t i = 0; i < layers_.size(); ++i) {
    if (cache) cache->inputs.push_back(h);
    Tensor pre = layers_[i].forward(h);
    if (cache) cache->pre.push_back(pre);
    if (i + 1 < layers_.size()) kern::relu(pre.data.data(), pre.size());
    h = std::move(pre);
  }
  debug_check_finite(h, "mlp.forward");
  return h;
}

Tensor Mlp::backward(const MlpCache& cache, const Tensor& dout) {
  assert(cache.inputs.size() == layers_.size());
  Tensor d = dout;
  for (size_t i = layers_.size(); i-- > 0;) {
    if (i + 1 < layers_.size())
      kern::relu_backward(d.data.data(), cache.pre[i].data.data(), d.size());
    d = layers_[i].backward(cache.inputs[i], d);
  }
  return d;
}

std::vector<Tensor*> Mlp::params() {
  std::vector<Tensor*> out;
  for (Linear& l : layers_) {
    out.push_back(&l.w);
    out.push_back(&l.b);
  }
  return out;
}

std::vector<Tensor*> Mlp::grads() {
  std::vector<Tensor*> out;
  for (Linear& l : layers_) {
    out.push_back(&l.dw);
    out.push_back(&l.db);
  }
  return out;
}

std::vector<const Tensor*> Mlp::params() const {
  std::vector<const Tensor*> out;
  for (const Linear& l : layers_) {
    out.push_back(&l.w);
    out.push_back(&l.b);
  }
  return out;
}

void Adam::step(std::span<Tensor* const> params, std::span<Tensor* const> grads) {
  if (params.size() != grads.size())
    throw ValidationError("adam.args", "params/grads count mismatch");
  if (m_.empty()) {
    m_.resize(params.size());
    v_.resize(params.size());
    for (size_t i = 0; i < params.size(); ++i) {
      m_[i].assign(params[i]->size(), 0.0);
      v_[i].assign(params[i]->size(), 0.0);
    }
  }
  ++t_;
  double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (size_t i = 0; i < params.size(); ++i) {
    double* p = params[i]->data.data();
    const double* g = grads[i]->data.data();
    double* m = m_[i].data();
    double* v = v_[i].data();
    size_t n = params[i]->size();
    if (m_[i].size() != n) throw ValidationError("adam.args", "parameter shape changed mid-run");
    for (size_t j = 0; j < n; ++j) {
      m[j] = beta1_ * m[j] + (1.0 - beta1_) * g[j];
      v[j] = beta2_ * v[j] + (1.0 - beta2_) * g[j] * g[j];
      double mhat = m[j] / bc1;
      double vhat = v[j] / bc2;
      p[j] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

// ---------------- checkpoints ----------------

static constexpr const char* kCheckpointFormat = "forcegrasp-checkpoint";

void save_checkpoint(const std::filesystem::path& path, const json& meta,
                     std::span<const Tensor* const> params) {
  json shapes = json::array();
  size_t total = 0;
  for (const Tensor* t : params) {
    shapes.push_back(t->shape);
    total += t->size();
  }
  json header = {{"format", kCheckpointFormat},
                 {"schema_version", 1},
                 {"shapes", shapes},
                 {"meta", meta}};
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("io.open", "cannot open " + path.string() + " for writing");
  out << header.dump() << '\n';
  for (const Tensor* t : params)
    out.write(reinterpret_cast<const char*>(t->data.data()),
              static_cast<std::streamsize>(t->size() * sizeof(double)));
  if (!out) throw ValidationError("io.write", "failed writing " + path.string());
  (void)total;
}

json load_checkpoint(const std::filesystem::path& path, std::span<Tensor* const> params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("io.open", "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line))
    throw ValidationError("checkpoint.header", "empty checkpoint file", 1);
  json header;
  try {
    header = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ValidationError("checkpoint.header", e.what(), 1);
  }
  if (header.value("format", "") != kCheckpointFormat ||
      header.value("schema_version", -1) != 1)
    throw ValidationError("checkpoint.header", "not a recognized checkpoint", 1);

  const json& shapes = header.at("shapes");
  if (shapes.size() != params.size())
    throw ValidationError("checkpoint.shape",
                          "checkpoint holds " + std::to_string(shapes.size()) +
                              " tensors, expected " + std::to_string(params.size()));
  for (size_t i = 0; i < params.size(); ++i) {
    std::vector<size_t> stored = shapes[i].get<std::vector<size_t>>();
    if (stored != params[i]->shape)
      throw ValidationError("checkpoint.shape",
                            "tensor " + std::to_string(i) + " is " + shape_str(stored) +
                                " in the checkpoint but " + shape_str(params[i]->shape) +
                                " in the model");
  }
  for (Tensor* t : params) {
    in.read(reinterpret_cast<char*>(t->data.data()),
            static_cast<std::streamsize>(t->size() * sizeof(double)));
    if (in.gcount() != static_cast<std::streamsize>(t->size() * sizeof(double)))
      throw ValidationError("checkpoint.payload", "truncated parameter payload");
  }
  char extra;
  if (in.read(&extra, 1); in.gcount() != 0)
    throw ValidationError("checkpoint.payload", "trailing bytes after parameter payload");
  return header.value("meta", json::object());
}

}  // namespace fg
