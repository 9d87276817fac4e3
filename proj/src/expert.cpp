#include "fg/expert.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "fg/dataset.hpp"
#include "fg/evaluate.hpp"
#include "fg/log.hpp"

namespace fg {

void validate_gains(const ControllerGains& gains, const SimConfig& cfg) {
  if (!(gains.kp_force > 0 && gains.kp_force <= 1.0))
    throw ValidationError("gains.kp", "kp_force must be in (0, 1]");
  if (!(gains.contact_threshold_n > cfg.sensor_noise_std_n))
    throw ValidationError("gains.contact_threshold",
                          "contact threshold must exceed the sensor noise floor");
  if (!(gains.aperture_step_mm > 0))
    throw ValidationError("gains.aperture_step", "aperture_step must be > 0");
  if (!(gains.min_force_n > 0 && gains.min_force_n <= gains.max_force_n))
    throw ValidationError("gains.force_range", "need 0 < min_force <= max_force");
  if (!(gains.max_force_step_n > 0))
    throw ValidationError("gains.force_step", "max_force_step must be > 0");
}

double target_force(const ExpertParams& params, double gravity, const ControllerGains& gains) {
  double needed = params.slip_margin * params.est_mass_kg * gravity / (2.0 * params.est_mu);
  return std::clamp(needed, gains.min_force_n, gains.max_force_n);
}

ExpertController::ExpertController(const ExpertParams& params, const ControllerGains& gains,
                                   double gravity)
    : gains_(gains),
      target_(target_force(params, gravity, gains)),
      force_limit_(gains.initial_force_n) {}

GripperCommand ExpertController::step(const GripperObservation& obs) {
  if (phase_ == ExpertPhase::approach) {
    if (obs.contact_force_n >= gains_.contact_threshold_n) {
      phase_ = ExpertPhase::ramp;  // fall through to the ramp logic below
    } else if (obs.aperture_mm <= 1e-9) {
      phase_ = ExpertPhase::missed;
      return {0.0, force_limit_};
    } else {
      return {std::max(0.0, obs.aperture_mm - gains_.aperture_step_mm), force_limit_};
    }
  }

  if (phase_ == ExpertPhase::ramp) {
    if (obs.contact_force_n >= target_) {
      phase_ = ExpertPhase::hold;
      return {obs.aperture_mm, force_limit_};
    }
    double inc = std::clamp(gains_.kp_force * (target_ - obs.contact_force_n), 0.0,
                            gains_.max_force_step_n);
    double windup_cap = obs.contact_force_n + gains_.max_force_step_n;
    double next = std::min(force_limit_ + inc, windup_cap);
    force_limit_ = std::min(gains_.max_force_n, std::max(force_limit_, next));
    return {std::max(0.0, obs.aperture_mm - gains_.aperture_step_mm), force_limit_};
  }

  return {obs.aperture_mm, force_limit_};  // hold / missed
}

std::string grasp_instruction(const std::string& object_name) {
  return "grasp the " + object_name;
}

ExpertParams exact_params(const ObjectSpec& spec) {
  ExpertParams p;
  p.est_mass_kg = spec.mass_kg;
  p.est_mu = spec.friction_mu;
  p.est_k_n_per_mm = spec.stiffness_n_per_mm;
  return p;
}

ExpertParams noisy_params(const ObjectSpec& spec, double sigma, Rng& rng) {
  ExpertParams p = exact_params(spec);
  p.est_mass_kg *= rng.log_normal_factor(sigma);
  p.est_mu *= rng.log_normal_factor(sigma);
  p.est_k_n_per_mm *= rng.log_normal_factor(sigma);
  return p;
}

bool grasp_feasible(const ObjectSpec& spec, const ControllerGains& gains, double gravity) {
  double needed = min_holding_force(spec, gravity);
  if (needed > gains.max_force_n) return false;
  if (spec.crush_force_n < needed) return false;
  return true;
}

namespace {

StepRecord make_step(const GripperObservation& obs, const GripperCommand& cmd,
                     const std::string& instruction, const std::vector<double>& embedding,
                     const char* subtask) {
  StepRecord s;
  s.action[kActionGripperPos] = cmd.target_aperture_mm;
  s.action[kActionGripperForce] = cmd.force_limit_n;
  s.action_dict.gripper_position = cmd.target_aperture_mm;
  s.action_dict.gripper_force = cmd.force_limit_n;
  s.observation.gripper_position = obs.aperture_mm;
  s.observation.applied_force = obs.applied_force_n;
  s.observation.contact_force = obs.contact_force_n;
  s.observation.state[kStateGripperPos] = obs.aperture_mm;
  s.observation.state[kStateAppliedForce] = obs.applied_force_n;
  s.observation.state[kStateContactForce] = obs.contact_force_n;
  s.language_instruction = instruction;
  s.language_embedding = embedding;
  s.subtask = subtask;
  return s;
}

}  // namespace

ExpertRollout run_expert_episode(const ObjectSpec& spec, const ExpertParams& params,
                                 const ControllerGains& gains, const SimConfig& cfg,
                                 const DemoConfig& demo, uint64_t stream,
                                 std::string file_path) {
  Rng scene(stream);
  Rng noise = scene.split("noise");

  double gap = scene.uniform(demo.start_gap_min_mm, demo.start_gap_max_mm);
  double start_aperture = std::min(cfg.max_aperture_mm, spec.rest_width_mm + gap);

  ObjectState st = ObjectState::fresh(spec);
  GripperState grip{start_aperture, 0.0};
  ExpertController ctrl(params, gains, cfg.gravity);

  std::string instruction = grasp_instruction(spec.name);
  std::vector<double> embedding = embed_instruction(instruction);

  ExpertRollout out;
  out.episode.file_path = std::move(file_path);
  out.episode.object_name = spec.name;
  out.episode.seen = spec.seen;
  auto& steps = out.episode.steps;

  GripperObservation obs = observe(spec, st, grip, cfg, noise);
  obs.applied_force_n = gains.initial_force_n;

  // approach stub: constant pose, gripper parked at the start aperture
  for (int i = 0; i < demo.approach_steps; ++i) {
    GripperCommand cmd{start_aperture, gains.initial_force_n};
    steps.push_back(make_step(obs, cmd, instruction, embedding, "approach"));
    StepResult r = step(spec, st, grip, cmd, cfg, noise);
    st = r.state;
    grip = r.gripper;
    obs = r.obs;
  }

  // grasp: close, ramp, terminate on hold
  for (int tick = 0; tick < demo.max_grasp_ticks; ++tick) {
    GripperCommand cmd = ctrl.step(obs);
    steps.push_back(make_step(obs, cmd, instruction, embedding, "grasp"));
    StepResult r = step(spec, st, grip, cmd, cfg, noise);
    st = r.state;
    grip = r.gripper;
    obs = r.obs;
    if (ctrl.done()) break;
  }
  out.grasp_ticks = static_cast<int>(steps.size()) - demo.approach_steps;

  double true_force = true_contact_force(spec, st, grip.aperture_mm);
  LiftResult lift = lift_test(spec, st, true_force, cfg);
  GraspOutcome adjudicated =
      classify(spec, st, grip.aperture_mm, ctrl.force_limit(), out.grasp_ticks,
               st.cumulative_plastic_mm, lift, EvalConfig{});
  bool terminated = ctrl.phase() == ExpertPhase::hold;
  out.success = terminated && adjudicated.label == OutcomeLabel::success;
  out.outcome = ctrl.phase() == ExpertPhase::missed ? "missed_object"
                : !terminated                       ? "timeout"
                                                    : to_string(adjudicated.label);

  if (!steps.empty()) steps.back().reward = out.success ? 1.0 : 0.0;

  // home stub: hold the final configuration
  for (int i = 0; i < demo.home_steps; ++i) {
    GripperCommand cmd{obs.aperture_mm, ctrl.force_limit()};
    steps.push_back(make_step(obs, cmd, instruction, embedding, "home"));
    StepResult r = step(spec, st, grip, cmd, cfg, noise);
    st = r.state;
    grip = r.gripper;
    obs = r.obs;
  }

  steps.front().is_first = true;
  steps.back().is_last = true;
  steps.back().is_terminal = true;
  return out;
}

std::vector<Episode> generate_demonstrations(std::span<const ObjectSpec> catalog,
                                             const DemoConfig& demo, const ControllerGains& gains,
                                             const SimConfig& cfg, uint64_t seed,
                                             DemoStats* stats) {
  struct Attempt {
    size_t object;
    int index;
    ExpertRollout rollout;
  };

  // attempt counts drawn up front so the layout is fixed before going parallel
  std::vector<int> attempts(catalog.size(), 0);
  std::vector<bool> feasible(catalog.size(), true);
  Rng counts = Rng(seed).split("attempt-counts");
  for (size_t i = 0; i < catalog.size(); ++i) {
    validate_spec(catalog[i]);
    feasible[i] = grasp_feasible(catalog[i], gains, cfg.gravity);
    int span = demo.per_object_max - demo.per_object_min + 1;
    attempts[i] = demo.per_object_min + static_cast<int>(counts.uniform_int(span));
    if (!feasible[i]) attempts[i] = 0;
  }

  std::vector<Attempt> flat;
  for (size_t i = 0; i < catalog.size(); ++i)
    for (int j = 0; j < attempts[i]; ++j) flat.push_back({i, j, {}});

#pragma omp parallel for schedule(dynamic)
  for (long long a = 0; a < static_cast<long long>(flat.size()); ++a) {
    auto& slot = flat[a];
    const ObjectSpec& spec = catalog[slot.object];
    uint64_t stream = Rng::derive(seed, slot.object, slot.index, Rng::fnv1a("demo"));
    Rng params_rng(Rng::derive(stream, Rng::fnv1a("params")));
    ExpertParams params = noisy_params(spec, demo.param_noise_sigma, params_rng);
    slot.rollout = run_expert_episode(spec, params, gains, cfg, demo, stream, "");
  }

  std::vector<Episode> kept;
  DemoStats local;
  local.per_object.resize(catalog.size());
  for (size_t i = 0; i < catalog.size(); ++i) {
    local.per_object[i].name = catalog[i].name;
    local.per_object[i].attempted = attempts[i];
    local.per_object[i].infeasible = !feasible[i];
    if (!feasible[i]) {
      ++local.objects_skipped;
      log::warn("object '%s' infeasible for the expert, skipped", catalog[i].name.c_str());
    }
  }
  for (auto& slot : flat) {
    auto& po = local.per_object[slot.object];
    if (slot.rollout.success && po.kept < demo.keep_cap) {
      Episode ep = std::move(slot.rollout.episode);
      char id[64];
      std::snprintf(id, sizeof(id), "episodes.jsonl#ep%05zu", kept.size());
      ep.file_path = id;
      kept.push_back(std::move(ep));
      ++po.kept;
    } else if (!slot.rollout.success) {
      ++po.failure_counts[slot.rollout.outcome];
    }
  }
  local.episodes = kept.size();
  if (stats) *stats = std::move(local);
  return kept;
}

}  // namespace fg
