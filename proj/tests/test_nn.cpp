#include <doctest.h>

#include <cmath>
#include <fstream>
#include <vector>

#include "fg/nn.hpp"
#include "fg/policy.hpp"
#include "test_util.hpp"

using namespace fg;
using fgtest::TempDir;

namespace {

// Central finite differences against the analytic gradient, checking every
// parameter and the input gradient. loss = 0.5 * sum(y^2) so dL/dy = y.
template <typename Net, typename Forward, typename Backward>
double max_rel_grad_error(Net& net, std::vector<Tensor*> params, std::vector<Tensor*> grads,
                          Forward fwd, Backward bwd, double h = 1e-5) {
  auto loss = [&] {
    Tensor y = fwd();
    double l = 0;
    for (double v : y.data) l += 0.5 * v * v;
    return l;
  };
  Tensor y = fwd();
  Tensor dy = y;  // dL/dy = y
  bwd(dy);

  std::vector<std::vector<double>> analytic;
  for (Tensor* g : grads) analytic.push_back(g->data);

  double worst = 0;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    for (size_t i = 0; i < params[pi]->data.size(); ++i) {
      double keep = params[pi]->data[i];
      params[pi]->data[i] = keep + h;
      double lp = loss();
      params[pi]->data[i] = keep - h;
      double lm = loss();
      params[pi]->data[i] = keep;
      double fd = (lp - lm) / (2 * h);
      double an = analytic[pi][i];
      double denom = std::max({std::abs(fd), std::abs(an), 1e-8});
      worst = std::max(worst, std::abs(fd - an) / denom);
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("linear layer computes y = xW^T + b") {
  Rng rng(1);
  Linear lin(2, 3, rng);
  // overwrite with a hand-checkable matrix
  lin.w.data = {1, 2, 3, 4, 5, 6};  // rows: [1 2], [3 4], [5 6]
  lin.b.data = {0.5, -0.5, 1.0};
  Tensor x = Tensor::zeros({2, 2});
  x.data = {1, 1, 2, -1};
  Tensor y = lin.forward(x);
  REQUIRE(y.shape == std::vector<size_t>{2, 3});
  CHECK(y.at(0, 0) == doctest::Approx(3.5));    // 1+2+0.5
  CHECK(y.at(0, 1) == doctest::Approx(6.5));    // 3+4-0.5
  CHECK(y.at(0, 2) == doctest::Approx(12.0));   // 5+6+1
  CHECK(y.at(1, 0) == doctest::Approx(0.5));    // 2-2+0.5
  CHECK(y.at(1, 1) == doctest::Approx(1.5));    // 6-4-0.5
  CHECK(y.at(1, 2) == doctest::Approx(5.0));    // 10-6+1
}

TEST_CASE("default init respects the He-uniform limit, override respects its own") {
  Rng rng(5);
  Linear he(24, 8, rng);
  double lim = std::sqrt(6.0 / 24.0);
  double maxabs = 0;
  for (double v : he.w.data) maxabs = std::max(maxabs, std::abs(v));
  CHECK(maxabs <= lim + 1e-12);
  CHECK(maxabs > 0.5 * lim);  // actually spread out, not collapsed near zero
  for (double v : he.b.data) CHECK(v == 0.0);

  Linear wide(24, 8, rng, 1.0);
  maxabs = 0;
  for (double v : wide.w.data) maxabs = std::max(maxabs, std::abs(v));
  CHECK(maxabs <= 1.0 + 1e-12);
  CHECK(maxabs > lim);  // clearly wider than the fan-in default
}

TEST_CASE("mlp with no hidden layers is affine and exact") {
  Rng rng(2);
  Mlp net({3, 2}, rng);
  Tensor x = Tensor::zeros({1, 3});
  x.data = {1.0, -2.0, 0.5};
  Tensor y = net.forward(x);
  auto ps = net.params();
  const Tensor& w = *ps[0];
  const Tensor& b = *ps[1];
  for (size_t o = 0; o < 2; ++o) {
    double want = b.data[o];
    for (size_t i = 0; i < 3; ++i) want += w.at(o, i) * x.data[i];
    CHECK(y.data[o] == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("mlp gradients match finite differences") {
  Rng rng(7);
  Mlp net({8, 16, 4}, rng);
  Tensor x = Tensor::zeros({3, 8});
  Rng data(9);
  for (double& v : x.data) v = data.uniform(-1.0, 1.0);

  MlpCache cache;
  auto fwd = [&] { return net.forward(x, &cache); };
  auto bwd = [&](const Tensor& dy) { net.backward(cache, dy); };
  double err = max_rel_grad_error(net, net.params(), net.grads(), fwd, bwd);
  CHECK(err < 1e-4);
}

TEST_CASE("mlp input gradient matches finite differences") {
  Rng rng(11);
  Mlp net({4, 6, 2}, rng);
  Tensor x = Tensor::zeros({2, 4});
  Rng data(3);
  for (double& v : x.data) v = data.uniform(-1.0, 1.0);

  auto loss_at = [&](const Tensor& xin) {
    Tensor y = net.forward(xin);
    double l = 0;
    for (double v : y.data) l += 0.5 * v * v;
    return l;
  };
  MlpCache cache;
  Tensor y = net.forward(x, &cache);
  Tensor dx = net.backward(cache, y);

  double h = 1e-5, worst = 0;
  for (size_t i = 0; i < x.data.size(); ++i) {
    double keep = x.data[i];
    x.data[i] = keep + h;
    double lp = loss_at(x);
    x.data[i] = keep - h;
    double lm = loss_at(x);
    x.data[i] = keep;
    double fd = (lp - lm) / (2 * h);
    double denom = std::max({std::abs(fd), std::abs(dx.data[i]), 1e-8});
    worst = std::max(worst, std::abs(fd - dx.data[i]) / denom);
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("denoiser gradients match finite differences at full policy shapes") {
  // small hidden layers keep the finite-difference sweep tractable, while the
  // input plumbing (obs window, projected instruction, time embedding, x_t,
  // both skip paths) runs at its real dimensions
  PolicyConfig cfg;
  cfg.variant = Variant::forceful;
  cfg.hidden = {24};
  Rng rng(13);
  Denoiser net(cfg, rng);

  Tensor obs = Tensor::zeros({2, cfg.obs_window_dim()});
  Tensor instr = Tensor::zeros({2, kEmbeddingDim});
  Tensor xt = Tensor::zeros({2, cfg.x_dim()});
  Rng data(17);
  for (double& v : obs.data) v = data.uniform(-1.0, 1.0);
  for (double& v : instr.data) v = data.uniform(-0.1, 0.1);
  for (double& v : xt.data) v = data.uniform(-1.0, 1.0);
  std::vector<int> ts{7, 93};

  DenoiserCache cache;
  auto fwd = [&] { return net.forward(obs, instr, ts, xt, &cache); };
  auto bwd = [&](const Tensor& dy) { net.backward(cache, dy); };
  double err = max_rel_grad_error(net, net.params(), net.grads(), fwd, bwd);
  CHECK(err < 1e-4);

  PolicyConfig pcfg = cfg;
  pcfg.variant = Variant::position_only;
  Denoiser pnet(pcfg, rng);
  Tensor pobs = Tensor::zeros({2, pcfg.obs_window_dim()});
  Tensor pxt = Tensor::zeros({2, pcfg.x_dim()});
  for (double& v : pobs.data) v = data.uniform(-1.0, 1.0);
  for (double& v : pxt.data) v = data.uniform(-1.0, 1.0);
  DenoiserCache pcache;
  auto pfwd = [&] { return pnet.forward(pobs, instr, ts, pxt, &pcache); };
  auto pbwd = [&](const Tensor& dy) { pnet.backward(pcache, dy); };
  err = max_rel_grad_error(pnet, pnet.params(), pnet.grads(), pfwd, pbwd);
  CHECK(err < 1e-4);
}

TEST_CASE("relu backward uses subgradient zero at the kink") {
  Rng rng(3);
  Mlp net({1, 1, 1}, rng);
  auto ps = net.params();
  // w0 x + b0 = 0 exactly at x=0 -> pre-activation sits on the kink
  ps[0]->data = {1.0};
  ps[1]->data = {0.0};
  ps[2]->data = {1.0};
  ps[3]->data = {0.0};
  Tensor x = Tensor::zeros({1, 1});
  x.data = {0.0};
  MlpCache cache;
  Tensor y = net.forward(x, &cache);
  CHECK(y.data[0] == 0.0);
  Tensor dy = Tensor::zeros({1, 1});
  dy.data = {1.0};
  Tensor dx = net.backward(cache, dy);
  CHECK(dx.data[0] == 0.0);  // gradient does not flow through a dead ReLU
  CHECK(net.grads()[0]->data[0] == 0.0);
}

TEST_CASE("adam: zero gradient is a fixed point") {
  Tensor p = Tensor::zeros({2, 2});
  p.data = {1, 2, 3, 4};
  Tensor g = Tensor::zeros({2, 2});
  Adam opt(0.1);
  Tensor* pp = &p;
  Tensor* gg = &g;
  for (int i = 0; i < 5; ++i) opt.step(std::span(&pp, 1), std::span(&gg, 1));
  CHECK(p.data == std::vector<double>{1, 2, 3, 4});
  CHECK(opt.steps_taken() == 5);
}

TEST_CASE("adam matches a scalar oracle under constant gradient") {
  // with constant gradient, bias-corrected m̂ = g and v̂ = g², so every step
  // moves by lr * g / (|g| + eps) ≈ lr * sign(g)
  Tensor p = Tensor::zeros({1});
  p.data = {0.0};
  Tensor g = Tensor::zeros({1});
  g.data = {0.25};
  Adam opt(0.01);
  Tensor* pp = &p;
  Tensor* gg = &g;
  double expect = 0.0;
  const double eps = 1e-8;
  double m = 0, v = 0;
  for (int t = 1; t <= 50; ++t) {
    m = 0.9 * m + 0.1 * 0.25;
    v = 0.999 * v + 0.001 * 0.25 * 0.25;
    double mh = m / (1 - std::pow(0.9, t));
    double vh = v / (1 - std::pow(0.999, t));
    expect -= 0.01 * mh / (std::sqrt(vh) + eps);
    opt.step(std::span(&pp, 1), std::span(&gg, 1));
  }
  CHECK(p.data[0] == doctest::Approx(expect).epsilon(1e-12));
  CHECK(p.data[0] == doctest::Approx(-50 * 0.01).epsilon(1e-3));

  // set_lr scales subsequent steps only
  opt.set_lr(0.0);
  double frozen = p.data[0];
  opt.step(std::span(&pp, 1), std::span(&gg, 1));
  CHECK(p.data[0] == frozen);
}

TEST_CASE("adam is deterministic across runs") {
  auto run = [] {
    Rng rng(21);
    Mlp net({4, 8, 2}, rng);
    Tensor x = Tensor::zeros({4, 4});
    Rng data(22);
    for (double& v : x.data) v = data.uniform(-1.0, 1.0);
    Adam opt(3e-3);
    for (int i = 0; i < 20; ++i) {
      MlpCache cache;
      Tensor y = net.forward(x, &cache);
      net.backward(cache, y);
      auto ps = net.params();
      auto gs = net.grads();
      opt.step(std::span(ps.data(), ps.size()), std::span(gs.data(), gs.size()));
    }
    std::vector<double> flat;
    for (const Tensor* t : std::as_const(net).params())
      flat.insert(flat.end(), t->data.begin(), t->data.end());
    return flat;
  };
  CHECK(run() == run());
}

TEST_CASE("adam rejects mismatched parameter lists") {
  Tensor p = Tensor::zeros({2});
  Tensor g = Tensor::zeros({2});
  Tensor* pp = &p;
  Tensor* gg = &g;
  Adam opt(0.1);
  std::vector<Tensor*> none;
  CHECK_THROWS_AS(opt.step(std::span(&pp, 1), std::span(none.data(), 0)), ValidationError);
  opt.step(std::span(&pp, 1), std::span(&gg, 1));
  Tensor bigger = Tensor::zeros({3});
  pp = &bigger;
  Tensor g3 = Tensor::zeros({3});
  gg = &g3;
  CHECK_THROWS_AS(opt.step(std::span(&pp, 1), std::span(&gg, 1)), ValidationError);
}

TEST_CASE("checkpoints round-trip parameters bit-exactly") {
  TempDir dir("ckpt");
  Rng rng(31);
  Mlp net({6, 12, 3}, rng);
  auto params = std::as_const(net).params();
  nlohmann::json meta = {{"note", "round trip"}, {"value", 17}};
  save_checkpoint(dir.file("net.ckpt"), meta, params);

  Rng rng2(99);
  Mlp other({6, 12, 3}, rng2);
  auto mut = other.params();
  nlohmann::json back = load_checkpoint(dir.file("net.ckpt"), std::span(mut.data(), mut.size()));
  CHECK(back["note"] == "round trip");
  CHECK(back["value"] == 17);

  auto want = std::as_const(net).params();
  auto got = std::as_const(other).params();
  REQUIRE(want.size() == got.size());
  for (size_t i = 0; i < want.size(); ++i) CHECK(want[i]->data == got[i]->data);
}

TEST_CASE("checkpoint loading refuses malformed or mismatched files") {
  TempDir dir("ckptbad");
  Rng rng(33);
  Mlp net({4, 8, 2}, rng);
  auto params = std::as_const(net).params();
  save_checkpoint(dir.file("net.ckpt"), {}, params);

  auto rule_of = [&](const std::filesystem::path& p, std::vector<Tensor*>& into) {
    try {
      load_checkpoint(p, std::span(into.data(), into.size()));
    } catch (const ValidationError& e) {
      return e.rule;
    }
    return std::string("(accepted)");
  };

  // tensor count mismatch
  Mlp small({4, 2}, rng);
  auto sp = small.params();
  CHECK(rule_of(dir.file("net.ckpt"), sp) == "checkpoint.shape");

  // shape mismatch at equal count
  Mlp reshaped({4, 9, 2}, rng);
  auto rp = reshaped.params();
  CHECK(rule_of(dir.file("net.ckpt"), rp) == "checkpoint.shape");

  auto mut = net.params();

  // truncated payload
  {
    std::ifstream in(dir.file("net.ckpt"), std::ios::binary);
    std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::ofstream out(dir.file("short.ckpt"), std::ios::binary);
    out.write(all.data(), static_cast<std::streamsize>(all.size() - 16));
  }
  CHECK(rule_of(dir.file("short.ckpt"), mut) == "checkpoint.payload");

  // trailing garbage
  {
    std::ifstream in(dir.file("net.ckpt"), std::ios::binary);
    std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::ofstream out(dir.file("long.ckpt"), std::ios::binary);
    out.write(all.data(), static_cast<std::streamsize>(all.size()));
    double extra = 1.0;
    out.write(reinterpret_cast<const char*>(&extra), sizeof extra);
  }
  CHECK(rule_of(dir.file("long.ckpt"), mut) == "checkpoint.payload");

  // not a checkpoint at all
  {
    std::ofstream out(dir.file("junk.ckpt"), std::ios::binary);
    out << "{\"format\":\"something-else\"}\n1234";
  }
  CHECK(rule_of(dir.file("junk.ckpt"), mut) == "checkpoint.header");

  {
    std::ofstream out(dir.file("empty.ckpt"), std::ios::binary);
  }
  CHECK(rule_of(dir.file("empty.ckpt"), mut) == "checkpoint.header");

  CHECK(rule_of(dir.file("missing.ckpt"), mut) == "io.open");
}

TEST_CASE("mlp constructor rejects degenerate dims") {
  Rng rng(1);
  CHECK_THROWS_AS(Mlp({5}, rng), ValidationError);
  CHECK_THROWS_AS(Mlp({4, 0, 2}, rng), ValidationError);
}
