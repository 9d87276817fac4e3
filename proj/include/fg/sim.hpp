#pragma once

#include <cstdint>
#include <string>

#include "fg/error.hpp"
#include "fg/rng.hpp"

namespace fg {

struct ObjectSpec {
  std::string name;
  double rest_width_mm = 40.0;
  double mass_kg = 0.05;
  double friction_mu = 0.6;
  double stiffness_n_per_mm = 0.3;  // linear spring between the pads
  double crush_force_n = 5.0;       // at or above this true force the object is destroyed
  double yield_force_n = 2.0;       // above this true force compression turns plastic
  double plasticity = 0.3;          // fraction of over-yield compression made permanent
  bool seen = false;                // appears in the training corpus
};

void validate_spec(const ObjectSpec& spec);

struct ObjectState {
  double rest_width_mm = 0;       // current width, shrinks under plastic flow
  double compression_mm = 0;      // elastic compression at the end of the last step
  bool crushed = false;           // latched once true force reaches crush_force
  double cumulative_plastic_mm = 0;

  static ObjectState fresh(const ObjectSpec& spec) {
    ObjectState st;
    st.rest_width_mm = spec.rest_width_mm;
    return st;
  }
};

struct GripperCommand {
  double target_aperture_mm = 0;
  double force_limit_n = 0;  // actuator torque limit expressed as pad force
};

struct GripperObservation {
  double aperture_mm = 0;
  double applied_force_n = 0;  // realized force limit (known, noise-free)
  double contact_force_n = 0;  // sensed: true + gaussian noise, quantized, >= 0
  double timestamp_s = 0;
  bool command_clamped = false;  // set when a degenerate command had to be clamped
};

struct GripperState {
  double aperture_mm = 0;
  double time_s = 0;
};

struct SimConfig {
  double dt_s = 0.2;              // 0.2 -> 5 Hz collection, 0.25 -> 4 Hz evaluation
  double max_aperture_mm = 85.0;
  double closing_speed_mm_s = 20.0;
  double gravity = 9.81;
  double sensor_noise_std_n = 0.05;
  double sensor_quantum_n = 0.01;
  uint64_t rng_seed = 0;
};

// Spring force at a given aperture against the object's current rest width.
// Zero out of contact; never negative.
double true_contact_force(const ObjectSpec& spec, const ObjectState& st, double aperture_mm);

struct StepResult {
  ObjectState state;
  GripperState gripper;
  GripperObservation obs;
};

// Advances one control tick: rate-limited move toward the commanded aperture,
// clamp at the force-limit equilibrium, plastic flow past yield, crush latch,
// then a noisy quantized force reading. Degenerate commands are clamped and
// flagged on the observation.
StepResult step(const ObjectSpec& spec, const ObjectState& st, const GripperState& grip,
                const GripperCommand& cmd, const SimConfig& cfg, Rng& rng);

// Observation of the current configuration without advancing time.
GripperObservation observe(const ObjectSpec& spec, const ObjectState& st,
                           const GripperState& grip, const SimConfig& cfg, Rng& rng);

enum class LiftResult { held, slipped };

// Quasi-static lift check with two friction pads: held iff 2*mu*F >= m*g.
// Adjudication uses the true (noise-free) contact force.
LiftResult lift_test(const ObjectSpec& spec, const ObjectState& st, double contact_force_n,
                     const SimConfig& cfg);

// Minimal pad force that holds the object: m*g / (2*mu).
double min_holding_force(const ObjectSpec& spec, double gravity);

}  // namespace fg
