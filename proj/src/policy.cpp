#include "fg/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "fg/error.hpp"
#include "fg/expert.hpp"
#include "fg/log.hpp"

namespace fg {

using nlohmann::json;

const char* to_string(Variant v) {
  return v == Variant::forceful ? "forceful" : "position_only";
}

Variant variant_from_string(const std::string& s) {
  if (s == "forceful") return Variant::forceful;
  if (s == "position_only") return Variant::position_only;
  throw ValidationError("variant.unknown", "unknown policy variant '" + s + "'");
}

void validate_policy_config(const PolicyConfig& cfg) {
  if (cfg.obs_horizon < 1)
    throw ValidationError("policy.horizon", "obs_horizon must be at least 1");
  if (!(cfg.act_horizon_eval <= cfg.act_horizon_train &&
        cfg.act_horizon_train <= cfg.pred_horizon) ||
      cfg.act_horizon_eval < 1)
    throw ValidationError("policy.horizon",
                          "need 1 <= act_horizon_eval <= act_horizon_train <= pred_horizon");
  if (cfg.diffusion_steps < 1)
    throw ValidationError("policy.schedule", "diffusion_steps must be at least 1");
  if (!(cfg.beta_start > 0 && cfg.beta_start <= cfg.beta_end && cfg.beta_end < 1))
    throw ValidationError("policy.schedule", "betas must satisfy 0 < start <= end < 1");
  if (cfg.instr_proj_dim < 1 || cfg.time_embed_dim < 2 || cfg.time_embed_dim % 2 != 0)
    throw ValidationError("policy.dims", "bad conditioning dims");
  if (cfg.hidden.empty())
    throw ValidationError("policy.dims", "denoiser needs at least one hidden layer");
  if (cfg.train_steps < 1 || cfg.batch_size < 1 || !(cfg.learning_rate > 0))
    throw ValidationError("policy.training", "bad training hyperparameters");
  if (!(cfg.ema_decay >= 0.0 && cfg.ema_decay < 1.0))
    throw ValidationError("policy.training", "ema_decay must lie in [0, 1)");
  if (!(cfg.clamp_force_min_n >= 0 && cfg.clamp_force_min_n <= cfg.clamp_force_max_n &&
        cfg.clamp_aperture_max_mm > 0) ||
      !(cfg.constant_force_n >= cfg.clamp_force_min_n))
    throw ValidationError("policy.clamps", "bad execution clamp ranges");
}

json policy_config_to_json(const PolicyConfig& cfg) {
  return {{"variant", to_string(cfg.variant)},
          {"obs_horizon", cfg.obs_horizon},
          {"pred_horizon", cfg.pred_horizon},
          {"act_horizon_train", cfg.act_horizon_train},
          {"act_horizon_eval", cfg.act_horizon_eval},
          {"diffusion_steps", cfg.diffusion_steps},
          {"beta_start", cfg.beta_start},
          {"beta_end", cfg.beta_end},
          {"instr_proj_dim", cfg.instr_proj_dim},
          {"time_embed_dim", cfg.time_embed_dim},
          {"hidden", cfg.hidden},
          {"train_steps", cfg.train_steps},
          {"batch_size", cfg.batch_size},
          {"learning_rate", cfg.learning_rate},
          {"cosine_lr", cfg.cosine_lr},
          {"ema_decay", cfg.ema_decay},
          {"constant_force_n", cfg.constant_force_n},
          {"clamp_aperture_max_mm", cfg.clamp_aperture_max_mm},
          {"clamp_force_min_n", cfg.clamp_force_min_n},
          {"clamp_force_max_n", cfg.clamp_force_max_n}};
}

PolicyConfig policy_config_from_json(const json& j) {
  PolicyConfig cfg;
  cfg.variant = variant_from_string(j.at("variant").get<std::string>());
  cfg.obs_horizon = j.value("obs_horizon", cfg.obs_horizon);
  cfg.pred_horizon = j.value("pred_horizon", cfg.pred_horizon);
  cfg.act_horizon_train = j.value("act_horizon_train", cfg.act_horizon_train);
  cfg.act_horizon_eval = j.value("act_horizon_eval", cfg.act_horizon_eval);
  cfg.diffusion_steps = j.value("diffusion_steps", cfg.diffusion_steps);
  cfg.beta_start = j.value("beta_start", cfg.beta_start);
  cfg.beta_end = j.value("beta_end", cfg.beta_end);
  cfg.instr_proj_dim = j.value("instr_proj_dim", cfg.instr_proj_dim);
  cfg.time_embed_dim = j.value("time_embed_dim", cfg.time_embed_dim);
  cfg.hidden = j.value("hidden", cfg.hidden);
  cfg.train_steps = j.value("train_steps", cfg.train_steps);
  cfg.batch_size = j.value("batch_size", cfg.batch_size);
  cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
  cfg.cosine_lr = j.value("cosine_lr", cfg.cosine_lr);
  cfg.ema_decay = j.value("ema_decay", cfg.ema_decay);
  cfg.constant_force_n = j.value("constant_force_n", cfg.constant_force_n);
  cfg.clamp_aperture_max_mm = j.value("clamp_aperture_max_mm", cfg.clamp_aperture_max_mm);
  cfg.clamp_force_min_n = j.value("clamp_force_min_n", cfg.clamp_force_min_n);
  cfg.clamp_force_max_n = j.value("clamp_force_max_n", cfg.clamp_force_max_n);
  validate_policy_config(cfg);
  return cfg;
}

// ---------------- windowing ----------------

static double norm_v(double v, const ChannelStat& s) { return (v - s.mean) / s.stddev; }
static double denorm_v(double v, const ChannelStat& s) { return v * s.stddev + s.mean; }

static void obs_row(const StepRecord& s, const PolicyConfig& cfg, const NormStats& st,
                    double* out) {
  out[0] = norm_v(s.observation.gripper_position, st.obs_gripper_position);
  if (cfg.variant == Variant::forceful) {
    out[1] = norm_v(s.observation.applied_force, st.obs_applied_force);
    out[2] = norm_v(s.observation.contact_force, st.obs_contact_force);
  }
}

static void act_row(const StepRecord& s, const PolicyConfig& cfg, const NormStats& st,
                    double* out) {
  out[0] = norm_v(s.action[kActionGripperPos], st.act_gripper_position);
  if (cfg.variant == Variant::forceful)
    out[1] = norm_v(s.action[kActionGripperForce], st.act_gripper_force);
}

std::vector<TrainingPair> build_training_pairs(std::span<const Episode> grasp_episodes,
                                               const PolicyConfig& cfg, const NormStats& stats) {
  validate_policy_config(cfg);
  const size_t od = cfg.obs_dim(), ad = cfg.act_dim();
  std::vector<TrainingPair> pairs;
  for (const Episode& ep : grasp_episodes) {
    const size_t n = ep.steps.size();
    if (n < 2) {
      log::warn("episode %s shorter than 2 steps, no training pairs", ep.file_path.c_str());
      continue;
    }
    if (ep.steps[0].language_embedding.size() != kEmbeddingDim)
      throw ValidationError("shape.language_embedding",
                            "episode " + ep.file_path + " has a malformed embedding");
    std::vector<double> orows(n * od), arows(n * ad);
    for (size_t i = 0; i < n; ++i) {
      obs_row(ep.steps[i], cfg, stats, &orows[i * od]);
      act_row(ep.steps[i], cfg, stats, &arows[i * ad]);
    }
    for (size_t t = 0; t < n; ++t) {
      TrainingPair p;
      p.obs.resize(cfg.obs_window_dim());
      p.act.resize(cfg.x_dim());
      p.instr = ep.steps[0].language_embedding;
      for (int j = 0; j < cfg.obs_horizon; ++j) {
        // window ends at t; indices below 0 repeat the first step
        long src = static_cast<long>(t) - (cfg.obs_horizon - 1) + j;
        size_t idx = src < 0 ? 0 : static_cast<size_t>(src);
        std::memcpy(&p.obs[static_cast<size_t>(j) * od], &orows[idx * od], od * sizeof(double));
      }
      for (int j = 0; j < cfg.pred_horizon; ++j) {
        size_t idx = std::min(t + static_cast<size_t>(j), n - 1);
        std::memcpy(&p.act[static_cast<size_t>(j) * ad], &arows[idx * ad], ad * sizeof(double));
      }
      pairs.push_back(std::move(p));
    }
  }
  return pairs;
}

// ---------------- denoiser ----------------

// The instruction embedding is unit-norm with only a handful of nonzero
// buckets, so fan-in (He) scaling of the projection would hand the trunk a
// near-zero instruction signal that gradient descent is slow to amplify.
// Unit init limit gives projected features roughly the same magnitude as the
// normalized observation and action inputs.
Denoiser::Denoiser(const PolicyConfig& cfg, Rng& init)
    : cfg_(cfg),
      instr_proj_(kEmbeddingDim, static_cast<size_t>(cfg.instr_proj_dim), init,
                  /*init_limit=*/1.0),
      trunk_(
          [&cfg] {
            std::vector<size_t> dims{cfg.input_dim()};
            dims.insert(dims.end(), cfg.hidden.begin(), cfg.hidden.end());
            dims.push_back(cfg.x_dim());
            return dims;
          }(),
          init),
      skip_(cfg.x_dim(), cfg.x_dim(), init),
      cond_skip_(cfg.obs_window_dim() + static_cast<size_t>(cfg.instr_proj_dim), cfg.x_dim(),
                 init) {}

Tensor Denoiser::forward(const Tensor& obs, const Tensor& instr, std::span<const int> t,
                         const Tensor& xt, DenoiserCache* cache) const {
  const size_t b = obs.rows();
  const size_t ow = cfg_.obs_window_dim(), pd = static_cast<size_t>(cfg_.instr_proj_dim);
  const size_t td = static_cast<size_t>(cfg_.time_embed_dim), xd = cfg_.x_dim();
  if (obs.cols() != ow || instr.rows() != b || instr.cols() != kEmbeddingDim ||
      t.size() != b || xt.rows() != b || xt.cols() != xd)
    throw ValidationError("window.shape", "denoiser input shapes disagree with the config");

  Tensor proj = instr_proj_.forward(instr);
  Tensor input = Tensor::zeros({b, cfg_.input_dim()});
  Tensor cond = Tensor::zeros({b, ow + pd});
  for (size_t r = 0; r < b; ++r) {
    double* row = &input.data[r * input.cols()];
    std::memcpy(row, &obs.data[r * ow], ow * sizeof(double));
    std::memcpy(row + ow, &proj.data[r * pd], pd * sizeof(double));
    std::vector<double> temb = time_embedding(t[r], td);
    std::memcpy(row + ow + pd, temb.data(), td * sizeof(double));
    std::memcpy(row + ow + pd + td, &xt.data[r * xd], xd * sizeof(double));
    std::memcpy(&cond.data[r * (ow + pd)], row, (ow + pd) * sizeof(double));
  }
  Tensor out;
  if (cache) {
    cache->instr = instr;
    cache->xt = xt;
    cache->cond = cond;
    out = trunk_.forward(input, &cache->trunk);
  } else {
    out = trunk_.forward(input, nullptr);
  }
  Tensor bypass = skip_.forward(xt);
  Tensor offset = cond_skip_.forward(cond);
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += bypass.data[i] + offset.data[i];
  return out;
}

void Denoiser::backward(const DenoiserCache& cache, const Tensor& dout) {
  Tensor dinput = trunk_.backward(cache.trunk, dout);
  Tensor dcond = cond_skip_.backward(cache.cond, dout);
  const size_t ow = cfg_.obs_window_dim(), pd = static_cast<size_t>(cfg_.instr_proj_dim);
  const size_t b = dinput.rows();
  // The projection feeds both the trunk and the conditioning skip.
  Tensor dproj = Tensor::zeros({b, pd});
  for (size_t r = 0; r < b; ++r)
    for (size_t c = 0; c < pd; ++c)
      dproj.data[r * pd + c] =
          dinput.data[r * dinput.cols() + ow + c] + dcond.data[r * (ow + pd) + ow + c];
  instr_proj_.backward(cache.instr, dproj);
  skip_.backward(cache.xt, dout);
}

std::vector<Tensor*> Denoiser::params() {
  std::vector<Tensor*> out{&instr_proj_.w, &instr_proj_.b};
  for (Tensor* t : trunk_.params()) out.push_back(t);
  out.push_back(&skip_.w);
  out.push_back(&skip_.b);
  out.push_back(&cond_skip_.w);
  out.push_back(&cond_skip_.b);
  return out;
}

std::vector<Tensor*> Denoiser::grads() {
  std::vector<Tensor*> out{&instr_proj_.dw, &instr_proj_.db};
  for (Tensor* t : trunk_.grads()) out.push_back(t);
  out.push_back(&skip_.dw);
  out.push_back(&skip_.db);
  out.push_back(&cond_skip_.dw);
  out.push_back(&cond_skip_.db);
  return out;
}

std::vector<const Tensor*> Denoiser::params() const {
  std::vector<const Tensor*> out{&instr_proj_.w, &instr_proj_.b};
  for (const Tensor* t : trunk_.params()) out.push_back(t);
  out.push_back(&skip_.w);
  out.push_back(&skip_.b);
  out.push_back(&cond_skip_.w);
  out.push_back(&cond_skip_.b);
  return out;
}

// ---------------- training ----------------

namespace {

// Mean eps-prediction error over a pair set with noise drawn from `rng`;
// used for the periodic validation trace.
double epsilon_loss(const Denoiser& net, const NoiseSchedule& ns, const PolicyConfig& cfg,
                    std::span<const TrainingPair> pairs, Rng& rng) {
  const size_t xd = cfg.x_dim();
  double total = 0;
  size_t count = 0;
  const size_t chunk = 64;
  for (size_t base = 0; base < pairs.size(); base += chunk) {
    size_t b = std::min(chunk, pairs.size() - base);
    Tensor obs = Tensor::zeros({b, cfg.obs_window_dim()});
    Tensor instr = Tensor::zeros({b, kEmbeddingDim});
    Tensor xt = Tensor::zeros({b, xd});
    Tensor eps = Tensor::zeros({b, xd});
    std::vector<int> ts(b);
    for (size_t r = 0; r < b; ++r) {
      const TrainingPair& p = pairs[base + r];
      std::copy(p.obs.begin(), p.obs.end(), obs.data.begin() + r * obs.cols());
      std::copy(p.instr.begin(), p.instr.end(), instr.data.begin() + r * instr.cols());
      ts[r] = 1 + static_cast<int>(rng.uniform_int(static_cast<uint64_t>(ns.timesteps)));
      for (size_t i = 0; i < xd; ++i) eps.data[r * xd + i] = rng.gaussian();
      corrupt(ns, std::span(p.act), std::span(eps.data).subspan(r * xd, xd), ts[r],
              std::span(xt.data).subspan(r * xd, xd));
    }
    Tensor eps_hat = net.forward(obs, instr, ts, xt, nullptr);
    for (size_t i = 0; i < eps_hat.size(); ++i) {
      double d = eps_hat.data[i] - eps.data[i];
      total += d * d;
    }
    count += eps_hat.size();
  }
  return total / static_cast<double>(count);
}

}  // namespace

TrainResult train_policy(std::span<const TrainingPair> pairs,
                         std::span<const TrainingPair> val_pairs, const PolicyConfig& cfg,
                         const NormStats& stats, uint64_t seed, std::string policy_name) {
  validate_policy_config(cfg);
  if (pairs.empty()) throw ValidationError("train.pairs", "no training pairs");
  for (const TrainingPair& p : pairs)
    if (p.obs.size() != cfg.obs_window_dim() || p.act.size() != cfg.x_dim() ||
        p.instr.size() != kEmbeddingDim)
      throw ValidationError("window.shape", "training pair shaped for a different config");

  Rng root(seed);
  Rng init = root.split("init");
  TrainResult result;
  result.policy.cfg = cfg;
  result.policy.stats = stats;
  result.policy.schedule = NoiseSchedule::linear(cfg.diffusion_steps, cfg.beta_start, cfg.beta_end);
  result.policy.net = Denoiser(cfg, init);
  result.policy.name = std::move(policy_name);

  Denoiser& net = result.policy.net;
  const NoiseSchedule& ns = result.policy.schedule;
  Adam opt(cfg.learning_rate);
  std::vector<Tensor*> params = net.params();
  std::vector<Tensor*> grads = net.grads();

  // Optional short warmup + cosine decay; the configured rate is the peak.
  const int warmup = std::max(1, cfg.train_steps / 20);
  constexpr double kLrFloorFrac = 0.05;
  // Optional weight EMA: the averaged net is what gets returned, which takes
  // the last-step jitter out of the policy.
  std::vector<std::vector<double>> ema(cfg.ema_decay > 0 ? params.size() : 0);
  for (size_t i = 0; i < ema.size(); ++i) ema[i] = params[i]->data;

  Rng data = root.split("data");
  Rng val = root.split("val");
  const size_t b = static_cast<size_t>(cfg.batch_size);
  const size_t xd = cfg.x_dim();
  result.loss_trace.reserve(static_cast<size_t>(cfg.train_steps));

  Tensor obs = Tensor::zeros({b, cfg.obs_window_dim()});
  Tensor instr = Tensor::zeros({b, kEmbeddingDim});
  Tensor xt = Tensor::zeros({b, xd});
  Tensor eps = Tensor::zeros({b, xd});
  Tensor dout = Tensor::zeros({b, xd});
  std::vector<int> ts(b);

  for (int step = 0; step < cfg.train_steps; ++step) {
    // fixed per-sample draw order (pair index, timestep, noise) keeps the
    // trace reproducible
    for (size_t r = 0; r < b; ++r) {
      const TrainingPair& p = pairs[data.uniform_int(pairs.size())];
      ts[r] = 1 + static_cast<int>(data.uniform_int(static_cast<uint64_t>(ns.timesteps)));
      std::copy(p.obs.begin(), p.obs.end(), obs.data.begin() + r * obs.cols());
      std::copy(p.instr.begin(), p.instr.end(), instr.data.begin() + r * instr.cols());
      for (size_t i = 0; i < xd; ++i) eps.data[r * xd + i] = data.gaussian();
      corrupt(ns, std::span(p.act), std::span(eps.data).subspan(r * xd, xd), ts[r],
              std::span(xt.data).subspan(r * xd, xd));
    }
    DenoiserCache cache;
    Tensor eps_hat = net.forward(obs, instr, ts, xt, &cache);

    double loss = 0;
    const double inv_n = 1.0 / static_cast<double>(eps_hat.size());
    for (size_t i = 0; i < eps_hat.size(); ++i) {
      double d = eps_hat.data[i] - eps.data[i];
      loss += d * d;
      dout.data[i] = 2.0 * d * inv_n;
    }
    loss *= inv_n;
    if (!std::isfinite(loss))
      throw ValidationError("train.nan", "loss became non-finite at step " +
                                             std::to_string(step) + " (lr " +
                                             std::to_string(cfg.learning_rate) + ", batch " +
                                             std::to_string(cfg.batch_size) + ")");
    result.loss_trace.push_back(loss);

    net.backward(cache, dout);
    if (cfg.cosine_lr) {
      double progress = cfg.train_steps > 1
                            ? static_cast<double>(step) / static_cast<double>(cfg.train_steps - 1)
                            : 1.0;
      double ramp = std::min(1.0, static_cast<double>(step + 1) / static_cast<double>(warmup));
      double cosine = kLrFloorFrac + (1.0 - kLrFloorFrac) * 0.5 *
                                         (1.0 + std::cos(3.14159265358979 * progress));
      opt.set_lr(cfg.learning_rate * ramp * cosine);
    }
    opt.step(params, grads);
    for (size_t i = 0; i < ema.size(); ++i) {
      const std::vector<double>& p = params[i]->data;
      std::vector<double>& e = ema[i];
      for (size_t j = 0; j < p.size(); ++j)
        e[j] = cfg.ema_decay * e[j] + (1.0 - cfg.ema_decay) * p[j];
    }

    if (!val_pairs.empty() && (step + 1) % result.val_every == 0) {
      Rng vstep = val.split(static_cast<uint64_t>(step + 1));
      result.val_trace.push_back(epsilon_loss(net, ns, cfg, val_pairs, vstep));
    }
  }
  for (size_t i = 0; i < ema.size(); ++i) params[i]->data = std::move(ema[i]);
  return result;
}

// ---------------- sampling & execution ----------------

std::vector<double> sample_actions(const Policy& policy, std::span<const double> obs_window,
                                   std::span<const double> instruction_embedding, Rng& rng) {
  const PolicyConfig& cfg = policy.cfg;
  if (obs_window.size() != cfg.obs_window_dim())
    throw ValidationError("window.shape",
                          "observation window has " + std::to_string(obs_window.size()) +
                              " values, config wants " + std::to_string(cfg.obs_window_dim()));
  if (instruction_embedding.size() != kEmbeddingDim)
    throw ValidationError("window.shape", "instruction embedding must have 512 entries");

  const size_t od = cfg.obs_dim(), xd = cfg.x_dim();
  Tensor obs = Tensor::zeros({1, cfg.obs_window_dim()});
  for (size_t i = 0; i < obs_window.size(); ++i) {
    // raw channel order matches obs_row: [position] or [position, applied, contact]
    const ChannelStat* st = &policy.stats.obs_gripper_position;
    if (od == 3 && i % od == 1) st = &policy.stats.obs_applied_force;
    if (od == 3 && i % od == 2) st = &policy.stats.obs_contact_force;
    obs.data[i] = norm_v(obs_window[i], *st);
  }
  Tensor instr = Tensor::zeros({1, kEmbeddingDim});
  std::copy(instruction_embedding.begin(), instruction_embedding.end(), instr.data.begin());

  std::vector<double> x(xd);
  for (double& v : x) v = rng.gaussian();
  Tensor xt = Tensor::zeros({1, xd});
  std::vector<double> z(xd);
  for (int t = cfg.diffusion_steps; t >= 1; --t) {
    std::copy(x.begin(), x.end(), xt.data.begin());
    int ti = t;
    Tensor eps_hat = policy.net.forward(obs, instr, std::span(&ti, 1), xt, nullptr);
    const double* zp = nullptr;
    if (t > 1) {
      for (double& v : z) v = rng.gaussian();
      zp = z.data();
    }
    reverse_step(policy.schedule, x, std::span(eps_hat.data), t, zp);
  }

  const size_t ad = cfg.act_dim();
  for (size_t j = 0; j < static_cast<size_t>(cfg.pred_horizon); ++j) {
    double& pos = x[j * ad];
    pos = std::clamp(denorm_v(pos, policy.stats.act_gripper_position), 0.0,
                     cfg.clamp_aperture_max_mm);
    if (ad == 2) {
      double& f = x[j * ad + 1];
      f = std::clamp(denorm_v(f, policy.stats.act_gripper_force), cfg.clamp_force_min_n,
                     cfg.clamp_force_max_n);
    }
  }
  return x;
}

PolicyAgent::PolicyAgent(const Policy* policy, std::vector<double> instruction_embedding)
    : policy_(policy), instr_(std::move(instruction_embedding)) {
  last_cmd_.target_aperture_mm = policy_->cfg.clamp_aperture_max_mm;
  last_cmd_.force_limit_n = policy_->cfg.clamp_force_min_n;
}

GripperCommand PolicyAgent::act(const GripperObservation& obs, Rng& rng) {
  const PolicyConfig& cfg = policy_->cfg;
  if (!std::isfinite(obs.aperture_mm) || !std::isfinite(obs.applied_force_n) ||
      !std::isfinite(obs.contact_force_n)) {
    ++skipped_;
    return last_cmd_;  // repeat; the rollout budget still counts this tick
  }

  std::vector<double> row(cfg.obs_dim());
  row[0] = obs.aperture_mm;
  if (cfg.variant == Variant::forceful) {
    row[1] = obs.applied_force_n;
    row[2] = obs.contact_force_n;
  }
  history_.push_back(std::move(row));
  if (history_.size() > static_cast<size_t>(cfg.obs_horizon))
    history_.erase(history_.begin());

  std::vector<double> window(cfg.obs_window_dim());
  for (int j = 0; j < cfg.obs_horizon; ++j) {
    long src = static_cast<long>(history_.size()) - cfg.obs_horizon + j;
    const std::vector<double>& r = history_[src < 0 ? 0 : static_cast<size_t>(src)];
    std::copy(r.begin(), r.end(), window.begin() + static_cast<size_t>(j) * cfg.obs_dim());
  }

  std::vector<double> actions = sample_actions(*policy_, window, instr_, rng);
  GripperCommand cmd;
  cmd.target_aperture_mm = actions[0];
  cmd.force_limit_n =
      cfg.variant == Variant::forceful ? actions[1] : cfg.constant_force_n;
  last_cmd_ = cmd;
  return cmd;
}

AgentFactory policy_agent_factory(const Policy& policy) {
  return [&policy](const ObjectSpec& spec, Rng&) -> std::unique_ptr<GraspAgent> {
    return std::make_unique<PolicyAgent>(&policy,
                                         embed_instruction(grasp_instruction(spec.name)));
  };
}

// ---------------- persistence ----------------

static json sidecar_json(const Policy& policy) {
  return {{"policy_name", policy.name},
          {"config", policy_config_to_json(policy.cfg)},
          {"norm_stats", norm_stats_to_json(policy.stats)}};
}

void save_policy(const Policy& policy, const std::filesystem::path& path) {
  std::vector<const Tensor*> params = policy.net.params();
  save_checkpoint(path, sidecar_json(policy), params);
  std::filesystem::path side = path;
  side += ".json";
  std::ofstream out(side, std::ios::binary);
  if (!out) throw ValidationError("io.open", "cannot open " + side.string() + " for writing");
  out << sidecar_json(policy).dump(2) << '\n';
  if (!out) throw ValidationError("io.write", "failed writing " + side.string());
}

static void require_same_dims(const PolicyConfig& a, const PolicyConfig& b) {
  if (a.variant != b.variant || a.obs_horizon != b.obs_horizon ||
      a.pred_horizon != b.pred_horizon || a.instr_proj_dim != b.instr_proj_dim ||
      a.time_embed_dim != b.time_embed_dim || a.hidden != b.hidden)
    throw ValidationError("sidecar.mismatch",
                          "sidecar and checkpoint disagree on network dimensions");
}

Policy load_policy(const std::filesystem::path& path) {
  std::filesystem::path side = path;
  side += ".json";
  std::ifstream in(side, std::ios::binary);
  if (!in) throw ValidationError("io.open", "cannot open sidecar " + side.string());
  json sj;
  try {
    sj = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("sidecar.parse", e.what());
  }

  Policy policy;
  policy.cfg = policy_config_from_json(sj.at("config"));
  policy.stats = norm_stats_from_json(sj.at("norm_stats"));
  policy.name = sj.value("policy_name", "policy");
  policy.schedule =
      NoiseSchedule::linear(policy.cfg.diffusion_steps, policy.cfg.beta_start,
                            policy.cfg.beta_end);
  Rng scratch(0);
  policy.net = Denoiser(policy.cfg, scratch);

  std::vector<Tensor*> params = policy.net.params();
  json meta = load_checkpoint(path, params);
  if (meta.contains("config"))
    require_same_dims(policy.cfg, policy_config_from_json(meta.at("config")));
  return policy;
}

}  // namespace fg
