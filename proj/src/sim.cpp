#include "fg/sim.hpp"

#include <algorithm>
#include <cmath>

namespace fg {

void validate_spec(const ObjectSpec& spec) {
  if (spec.name.empty()) throw ValidationError("spec.name", "object name must be non-empty");
  if (!(spec.rest_width_mm > 0))
    throw ValidationError("spec.rest_width", spec.name + ": rest_width must be > 0");
  if (!(spec.mass_kg >= 0.001 && spec.mass_kg <= 0.5))
    throw ValidationError("spec.mass_range", spec.name + ": mass must lie in [0.001, 0.5] kg");
  if (!(spec.friction_mu > 0))
    throw ValidationError("spec.friction", spec.name + ": friction_mu must be > 0");
  if (!(spec.stiffness_n_per_mm > 0))
    throw ValidationError("spec.stiffness", spec.name + ": stiffness must be > 0");
  if (!(spec.crush_force_n > 0))
    throw ValidationError("spec.crush", spec.name + ": crush_force must be > 0");
  if (!(spec.yield_force_n > 0 && spec.yield_force_n <= spec.crush_force_n))
    throw ValidationError("spec.yield", spec.name + ": yield_force must be in (0, crush_force]");
  if (!(spec.plasticity >= 0.0 && spec.plasticity <= 1.0))
    throw ValidationError("spec.plasticity", spec.name + ": plasticity must be in [0, 1]");
}

double true_contact_force(const ObjectSpec& spec, const ObjectState& st, double aperture_mm) {
  if (aperture_mm >= st.rest_width_mm) return 0.0;
  return spec.stiffness_n_per_mm * (st.rest_width_mm - aperture_mm);
}

static double quantize(double v, double quantum) {
  if (quantum <= 0) return v;
  return std::round(v / quantum) * quantum;
}

GripperObservation observe(const ObjectSpec& spec, const ObjectState& st,
                           const GripperState& grip, const SimConfig& cfg, Rng& rng) {
  GripperObservation obs;
  obs.aperture_mm = grip.aperture_mm;
  obs.applied_force_n = 0.0;
  obs.timestamp_s = grip.time_s;
  double sensed = true_contact_force(spec, st, grip.aperture_mm);
  if (cfg.sensor_noise_std_n > 0) sensed += cfg.sensor_noise_std_n * rng.gaussian();
  obs.contact_force_n = quantize(std::max(0.0, sensed), cfg.sensor_quantum_n);
  return obs;
}

StepResult step(const ObjectSpec& spec, const ObjectState& st0, const GripperState& grip,
                const GripperCommand& cmd, const SimConfig& cfg, Rng& rng) {
  ObjectState st = st0;
  bool clamped = false;

  double target = cmd.target_aperture_mm;
  if (target < 0.0 || target > cfg.max_aperture_mm || !std::isfinite(target)) {
    target = std::isfinite(target) ? std::clamp(target, 0.0, cfg.max_aperture_mm) : 0.0;
    clamped = true;
  }
  double limit = cmd.force_limit_n;
  if (limit < 0.0 || !std::isfinite(limit)) {
    limit = 0.0;
    clamped = true;
  }

  // kinematics: move toward the target by at most closing_speed * dt
  double max_move = cfg.closing_speed_mm_s * cfg.dt_s;
  double delta = std::clamp(target - grip.aperture_mm, -max_move, max_move);
  double aperture = grip.aperture_mm + delta;

  // torque limit: the spring wins against the motor beyond the equilibrium
  // aperture, so the fingers settle exactly there (not below 0)
  if (true_contact_force(spec, st, aperture) > limit) {
    aperture = std::max(0.0, st.rest_width_mm - limit / spec.stiffness_n_per_mm);
  }
  aperture = std::clamp(aperture, 0.0, cfg.max_aperture_mm);

  // peak force this step, before any plastic relaxation
  double peak = true_contact_force(spec, st, aperture);

  // plastic flow: the over-yield part of newly incurred compression becomes
  // permanent, shrinking the rest width (and relaxing the spring)
  double yield_comp = spec.yield_force_n / spec.stiffness_n_per_mm;
  double comp_new = std::max(0.0, st.rest_width_mm - aperture);
  double over_prev = std::max(0.0, st.compression_mm - yield_comp);
  double over_new = std::max(0.0, comp_new - yield_comp);
  if (over_new > over_prev) {
    double dw = spec.plasticity * (over_new - over_prev);
    st.rest_width_mm -= dw;
    st.cumulative_plastic_mm += dw;
    comp_new = std::max(0.0, st.rest_width_mm - aperture);
  }
  st.compression_mm = comp_new;

  if (peak >= spec.crush_force_n) st.crushed = true;

  StepResult out;
  out.state = st;
  out.gripper.aperture_mm = aperture;
  out.gripper.time_s = grip.time_s + cfg.dt_s;

  double sensed = peak;
  if (cfg.sensor_noise_std_n > 0) sensed += cfg.sensor_noise_std_n * rng.gaussian();
  out.obs.aperture_mm = aperture;
  out.obs.applied_force_n = limit;
  out.obs.contact_force_n = quantize(std::max(0.0, sensed), cfg.sensor_quantum_n);
  out.obs.timestamp_s = out.gripper.time_s;
  out.obs.command_clamped = clamped;
  return out;
}

LiftResult lift_test(const ObjectSpec& spec, const ObjectState& st, double contact_force_n,
                     const SimConfig& cfg) {
  (void)st;
  double grip = 2.0 * spec.friction_mu * contact_force_n;
  return grip >= spec.mass_kg * cfg.gravity ? LiftResult::held : LiftResult::slipped;
}

double min_holding_force(const ObjectSpec& spec, double gravity) {
  return spec.mass_kg * gravity / (2.0 * spec.friction_mu);
}

}  // namespace fg
