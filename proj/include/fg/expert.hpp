#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fg/episode.hpp"
#include "fg/rng.hpp"
#include "fg/sim.hpp"

namespace fg {

// Object parameters as the expert believes them (possibly noisy estimates).
struct ExpertParams {
  double est_mass_kg = 0.05;
  double est_mu = 0.6;
  double est_k_n_per_mm = 0.3;
  double slip_margin = 1.2;
};

struct ControllerGains {
  double contact_threshold_n = 0.15;  // 3x default sensor noise std
  double aperture_step_mm = 3.0;      // per-tick closing command
  double kp_force = 0.5;              // proportional force ramp gain
  double initial_force_n = 0.15;      // pre-contact force limit (lowest setting)
  double min_force_n = 0.15;
  double max_force_n = 8.0;
  double max_force_step_n = 1.0;      // torque-limit increment quantum
};

void validate_gains(const ControllerGains& gains, const SimConfig& cfg);

// Grasp force with slip margin, clamped to [min_force, max_force]:
// clamp(margin * m*g / (2*mu), ...).
double target_force(const ExpertParams& params, double gravity, const ControllerGains& gains);

enum class ExpertPhase { approach, ramp, hold, missed };

// Adaptive grasp controller: close until contact is sensed, then ramp the
// force limit proportionally toward the target. Terminates (emits a hold
// command) once the sensed contact force reaches the target; sensor noise at
// the margin is absorbed by the slip-margin headroom in the target itself.
// The limit never decreases after first contact and never runs more than one
// increment quantum ahead of the sensed force (anti-windup).
class ExpertController {
 public:
  ExpertController(const ExpertParams& params, const ControllerGains& gains, double gravity);

  GripperCommand step(const GripperObservation& obs);

  ExpertPhase phase() const { return phase_; }
  bool done() const { return phase_ == ExpertPhase::hold || phase_ == ExpertPhase::missed; }
  double force_limit() const { return force_limit_; }
  double target() const { return target_; }

 private:
  ControllerGains gains_;
  double target_;
  ExpertPhase phase_ = ExpertPhase::approach;
  double force_limit_;
};

// The language instruction stamped on every step of an episode; evaluation
// reuses it so train- and eval-time embeddings match.
std::string grasp_instruction(const std::string& object_name);

ExpertParams exact_params(const ObjectSpec& spec);
// Log-normal multiplicative noise (log-std sigma) on mass, friction and
// stiffness estimates; stands in for upstream estimation error.
ExpertParams noisy_params(const ObjectSpec& spec, double sigma, Rng& rng);

// Infeasible objects cannot be grasped at any admissible force: either the
// minimal holding force exceeds the controller ceiling, or crushing starts
// below the force needed to hold.
bool grasp_feasible(const ObjectSpec& spec, const ControllerGains& gains, double gravity);

struct DemoConfig {
  int per_object_min = 5;
  int per_object_max = 7;
  int keep_cap = 5;               // stop keeping once this many succeeded
  double param_noise_sigma = 0.2; // log-std of the expert's parameter estimates
  double start_gap_min_mm = 5.0;
  double start_gap_max_mm = 15.0;
  int approach_steps = 3;
  int home_steps = 2;
  int max_grasp_ticks = 40;
};

struct ObjectDemoStats {
  std::string name;
  int attempted = 0;
  int kept = 0;
  bool infeasible = false;
  std::map<std::string, int> failure_counts;  // outcome label -> count
};

struct DemoStats {
  std::vector<ObjectDemoStats> per_object;
  size_t episodes = 0;
  size_t objects_skipped = 0;
};

// Single expert rollout against one object; returns the episode (approach /
// grasp / home subtasks) and whether the grasp succeeded per the outcome
// taxonomy. Used by both dataset generation and the evaluation harness.
struct ExpertRollout {
  Episode episode;
  bool success = false;
  std::string outcome;  // taxonomy label or "missed_object"
  int grasp_ticks = 0;
};

ExpertRollout run_expert_episode(const ObjectSpec& spec, const ExpertParams& params,
                                 const ControllerGains& gains, const SimConfig& cfg,
                                 const DemoConfig& demo, uint64_t stream, std::string file_path);

// Demonstration corpus: per object, 5-7 attempts with noisy parameter
// estimates and randomized start apertures; only successful grasps are kept
// (capped at keep_cap). Attempts run in parallel; output order and content
// are independent of the worker count.
std::vector<Episode> generate_demonstrations(std::span<const ObjectSpec> catalog,
                                             const DemoConfig& demo, const ControllerGains& gains,
                                             const SimConfig& cfg, uint64_t seed,
                                             DemoStats* stats);

}  // namespace fg
