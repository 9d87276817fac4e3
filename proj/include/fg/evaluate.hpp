#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fg/catalog.hpp"
#include "fg/expert.hpp"
#include "fg/rng.hpp"
#include "fg/sim.hpp"

#include <json.hpp>

namespace fg {

enum class OutcomeLabel { success, deformation_failure, slip_failure, null_grasp };

const char* to_string(OutcomeLabel label);
OutcomeLabel outcome_from_string(const std::string& s);

struct GraspOutcome {
  OutcomeLabel label = OutcomeLabel::null_grasp;
  double final_aperture_mm = 0;
  double final_applied_force_n = 0;
  double final_true_contact_n = 0;
  int ticks_used = 0;
  double plastic_incurred_mm = 0;
};

struct EvalConfig {
  int trials_per_object = 10;
  int ticks = 15;                     // fixed rollout budget per grasp
  double null_threshold_mm = 2.0;     // final gap at or above this is a null grasp
  double deform_plastic_frac = 0.10;  // plastic beyond this fraction of rest width fails
  double start_gap_min_mm = 5.0;
  double start_gap_max_mm = 15.0;
  int mushiness_trials = 10;
};

// Outcome taxonomy with precedence: deformation (crushed or plastic beyond
// the threshold) > null grasp (stopped short, no hold on the object) >
// slip > success.
GraspOutcome classify(const ObjectSpec& spec, const ObjectState& final_state,
                      double final_aperture_mm, double final_applied_n, int ticks_used,
                      double plastic_incurred_mm, LiftResult lift, const EvalConfig& ecfg);

// A grasping policy driven one observation at a time. Implementations:
// diffusion policies (policy.hpp) and the scripted expert (below).
struct GraspAgent {
  virtual ~GraspAgent() = default;
  virtual GripperCommand act(const GripperObservation& obs, Rng& rng) = 0;
};

// Builds a fresh agent for one trial of one object. The factory owns any
// checkpoint state; per-trial randomness comes from the supplied stream.
using AgentFactory =
    std::function<std::unique_ptr<GraspAgent>(const ObjectSpec& spec, Rng& rng)>;

// Expert with exact object parameters, run through the same harness as the
// learned policies.
AgentFactory expert_agent_factory(ControllerGains gains, double gravity);

struct TraceSample {
  double time_s = 0;
  double aperture_mm = 0;
  double applied_force_n = 0;
  double contact_force_n = 0;  // sensed
  double true_force_n = 0;     // adjudication channel
};

struct TrialRecord {
  std::string object;
  bool seen = false;
  bool delicate = false;
  int trial = 0;
  GraspOutcome outcome;
  std::vector<TraceSample> trace;  // exactly EvalConfig::ticks samples
};

struct MushinessTrace {
  std::string object;
  std::vector<double> rest_width_mm;  // after each of the repeated trials
  double total_degradation_mm = 0;
};

struct Aggregates {
  int trials = 0;
  double overall_success = 0;
  double seen_success = 0;
  double unseen_success = 0;
  double delicate_success = 0;
  double null_rate = 0;
  int slip_count = 0;
  int deformation_count = 0;
  double slip_share = 0;         // share of failures that are slips
  double deformation_share = 0;  // share of failures that are deformations
};

struct ObjectSummary {
  std::string object;
  bool seen = false;
  bool delicate = false;
  double success_rate = 0;
  double mean_final_aperture_mm = 0;
  double mean_final_force_n = 0;
  int success = 0, deformation = 0, slip = 0, null_grasp = 0;
};

struct EvalReport {
  std::string policy_name;
  uint64_t seed = 0;
  int ticks = 0;
  double dt_s = 0;
  std::vector<std::string> catalog_names;
  std::vector<TrialRecord> trials;
  std::vector<ObjectSummary> per_object;
  std::vector<MushinessTrace> mushiness;
  Aggregates agg;
};

// One full rollout of `ecfg.ticks` ticks against a fresh or persisted object
// state. Used by run_trials and the mushiness sub-experiment.
struct RolloutResult {
  GraspOutcome outcome;
  std::vector<TraceSample> trace;
  ObjectState final_state;
};

RolloutResult run_rollout(const ObjectSpec& spec, ObjectState start_state, GraspAgent& agent,
                          double start_aperture_mm, const EvalConfig& ecfg, const SimConfig& cfg,
                          Rng& rng);

// Paired evaluation: trial seeds derive from (seed, object, trial) only, so
// two runs with the same seed see identical objects, start apertures and
// sensor noise, and differ only through the agent. Main trials use fresh
// object state; the mushiness sub-experiment persists plastic state across
// trials_per_object repeats on every plasticity > 0 object. Trials run in
// parallel; results are identical for any worker count.
EvalReport run_trials(const AgentFactory& factory, std::span<const ObjectSpec> catalog,
                      const EvalConfig& ecfg, const SimConfig& cfg, uint64_t seed,
                      std::string policy_name);

MushinessTrace mushiness_trace(const AgentFactory& factory, const ObjectSpec& spec,
                               const EvalConfig& ecfg, const SimConfig& cfg, uint64_t seed);

struct ObjectDelta {
  std::string object;
  bool delicate = false;
  double aperture_delta_mm = 0;  // position_only minus forceful
  double force_delta_n = 0;
  double mushiness_delta_mm = 0;
};

struct Comparison {
  std::vector<ObjectDelta> deltas;
  double delicate_nonpositive_frac = 0;  // delicate objects with aperture delta <= 0
  double mushiness_total_forceful_mm = 0;
  double mushiness_total_position_only_mm = 0;
};

// Requires paired reports (same seed, catalog, trial counts); throws
// ValidationError("report.unpaired") otherwise.
Comparison compression_comparison(const EvalReport& forceful, const EvalReport& position_only);

nlohmann::json report_to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);

}  // namespace fg
