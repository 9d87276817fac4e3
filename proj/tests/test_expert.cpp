#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "fg/catalog.hpp"
#include "fg/dataset.hpp"
#include "fg/expert.hpp"
#include "fg/kernels.hpp"
#include "fg/sim.hpp"

using namespace fg;

namespace {

// Gaussian sensor noise off; quantization (a deterministic sensor property)
// stays at its default so readings still cross thresholds exactly.
SimConfig noise_free_cfg() {
  SimConfig cfg;
  cfg.sensor_noise_std_n = 0.0;
  return cfg;
}

GripperObservation obs_at(double aperture, double contact, double applied = 0.15) {
  GripperObservation o;
  o.aperture_mm = aperture;
  o.contact_force_n = contact;
  o.applied_force_n = applied;
  return o;
}

}  // namespace

TEST_CASE("target force worked values") {
  ControllerGains gains;
  ExpertParams p;
  p.slip_margin = 1.2;

  p.est_mass_kg = 0.1;
  p.est_mu = 0.5;
  CHECK(target_force(p, 9.81, gains) == doctest::Approx(1.1772).epsilon(1e-9));

  p.est_mass_kg = 0.001;  // tiny object clamps to the floor
  CHECK(target_force(p, 9.81, gains) == doctest::Approx(0.15).epsilon(1e-12));

  p.est_mass_kg = 0.5;
  CHECK(target_force(p, 9.81, gains) == doctest::Approx(5.886).epsilon(1e-9));
}

TEST_CASE("pre-contact rule closes one step at the initial force") {
  ControllerGains gains;
  gains.aperture_step_mm = 2.0;
  ExpertParams p;
  ExpertController ctrl(p, gains, 9.81);

  auto cmd = ctrl.step(obs_at(50.0, 0.0));
  CHECK(cmd.target_aperture_mm == doctest::Approx(48.0).epsilon(1e-12));
  CHECK(cmd.force_limit_n == doctest::Approx(0.15).epsilon(1e-12));
  CHECK(ctrl.phase() == ExpertPhase::approach);
}

TEST_CASE("proportional ramp worked value") {
  // contact 0.5 N against target 1.177 N at kp 0.5: limit rises to
  // 0.15 + 0.5 * (target - 0.5)
  ControllerGains gains;
  gains.kp_force = 0.5;
  ExpertParams p;
  p.est_mass_kg = 0.1;
  p.est_mu = 0.5;
  p.slip_margin = 1.2;
  ExpertController ctrl(p, gains, 9.81);
  double target = target_force(p, 9.81, gains);

  auto cmd = ctrl.step(obs_at(38.0, 0.5));
  CHECK(ctrl.phase() == ExpertPhase::ramp);
  CHECK(cmd.force_limit_n == doctest::Approx(0.15 + 0.5 * (target - 0.5)).epsilon(1e-12));
  CHECK(cmd.force_limit_n == doctest::Approx(0.489).epsilon(1e-3));
  // squeeze is maintained: aperture command keeps pressing inward
  CHECK(cmd.target_aperture_mm < 38.0);
}

TEST_CASE("force limit never decreases after contact and respects anti-windup") {
  ControllerGains gains;
  ExpertParams p;
  p.est_mass_kg = 0.3;
  p.est_mu = 0.4;
  ExpertController ctrl(p, gains, 9.81);

  Rng rng(17);
  double last = gains.initial_force_n;
  double aperture = 45.0;
  for (int i = 0; i < 60; ++i) {
    double contact = std::max(0.0, last + rng.uniform(-0.3, 0.1));  // noisy, lagging
    auto cmd = ctrl.step(obs_at(aperture, contact));
    CHECK(cmd.force_limit_n >= last - 1e-12);
    CHECK(cmd.force_limit_n <= contact + gains.max_force_step_n + 1e-12);
    CHECK(cmd.force_limit_n <= gains.max_force_n);
    last = cmd.force_limit_n;
    aperture = cmd.target_aperture_mm;
    if (ctrl.done()) break;
  }
}

TEST_CASE("noise-free rollout terminates within 10 ticks of contact and holds") {
  // (m 0.1, mu 0.5, k 0.3, crush 5): run the controller against the
  // simulator with exact parameters and exact sensing
  ObjectSpec spec;
  spec.name = "test block";
  spec.rest_width_mm = 40.0;
  spec.mass_kg = 0.1;
  spec.friction_mu = 0.5;
  spec.stiffness_n_per_mm = 0.3;
  spec.crush_force_n = 5.0;
  spec.yield_force_n = 5.0;
  spec.plasticity = 0.0;

  SimConfig cfg = noise_free_cfg();
  Rng rng(3);
  ControllerGains gains;
  ExpertController ctrl(exact_params(spec), gains, cfg.gravity);

  ObjectState st = ObjectState::fresh(spec);
  GripperState grip{50.0, 0.0};
  GripperObservation obs = observe(spec, st, grip, cfg, rng);
  obs.applied_force_n = gains.initial_force_n;

  int first_contact = -1;
  int done_at = -1;
  for (int tick = 0; tick < 40; ++tick) {
    GripperCommand cmd = ctrl.step(obs);
    auto r = step(spec, st, grip, cmd, cfg, rng);
    st = r.state;
    grip = r.gripper;
    obs = r.obs;
    if (first_contact < 0 && obs.contact_force_n > 0) first_contact = tick;
    if (ctrl.done()) {
      done_at = tick;
      break;
    }
  }
  REQUIRE(ctrl.phase() == ExpertPhase::hold);
  REQUIRE(first_contact >= 0);
  CHECK(done_at - first_contact <= 10);

  double true_force = true_contact_force(spec, st, grip.aperture_mm);
  CHECK(lift_test(spec, st, true_force, cfg) == LiftResult::held);

  // the realized force lands within a quantum of the target (the hold fires
  // on the quantized reading) and overshoot is bounded by one proportional step
  double target = ctrl.target();
  CHECK(true_force >= target - cfg.sensor_quantum_n - 1e-9);
  CHECK(true_force <= target + gains.kp_force * target + cfg.sensor_quantum_n + 1e-9);
  CHECK_FALSE(st.crushed);
}

TEST_CASE("controller reports a miss when it runs out of travel") {
  ControllerGains gains;
  ExpertParams p;
  ExpertController ctrl(p, gains, 9.81);
  double aperture = 7.0;
  for (int i = 0; i < 10 && !ctrl.done(); ++i) {
    auto cmd = ctrl.step(obs_at(aperture, 0.0));
    aperture = cmd.target_aperture_mm;
  }
  CHECK(ctrl.phase() == ExpertPhase::missed);
}

TEST_CASE("gain validation names the violated rule") {
  SimConfig cfg;
  ControllerGains g;
  CHECK_NOTHROW(validate_gains(g, cfg));

  g = ControllerGains{};
  g.kp_force = 0.0;
  CHECK_THROWS_AS(validate_gains(g, cfg), ValidationError);
  g.kp_force = 1.5;  // proportional gain above 1 over-shoots on clean readings
  CHECK_THROWS_AS(validate_gains(g, cfg), ValidationError);

  g = ControllerGains{};
  g.contact_threshold_n = cfg.sensor_noise_std_n / 2;  // inside the noise floor
  CHECK_THROWS_AS(validate_gains(g, cfg), ValidationError);

  g = ControllerGains{};
  g.min_force_n = 9.0;  // above max
  CHECK_THROWS_AS(validate_gains(g, cfg), ValidationError);
}

TEST_CASE("feasibility screens hopeless objects") {
  ControllerGains gains;
  ObjectSpec s;
  s.name = "x";
  s.mass_kg = 0.05;
  s.friction_mu = 0.6;
  s.crush_force_n = 5.0;
  CHECK(grasp_feasible(s, gains, 9.81));

  // crushes below the force needed to hold it
  s.crush_force_n = 0.3;
  s.mass_kg = 0.5;
  s.friction_mu = 0.3;
  CHECK_FALSE(grasp_feasible(s, gains, 9.81));
}

TEST_CASE("expert success rate and grasp length meet the bar") {
  // >= 95% success over >= 200 rollouts on feasible objects with default
  // sensing noise and estimate noise; median grasp phase < 10 ticks
  SimConfig cfg;  // default noise
  ControllerGains gains;
  DemoConfig demo;
  Rng cat_rng(404);
  auto catalog = sample_object_catalog(30, cat_rng);

  int rollouts = 0, successes = 0;
  std::vector<int> grasp_ticks;
  for (size_t i = 0; i < catalog.size(); ++i) {
    const auto& spec = catalog[i];
    if (!grasp_feasible(spec, gains, cfg.gravity)) continue;
    for (int trial = 0; trial < 7; ++trial) {
      uint64_t stream = Rng::derive(2025, i, trial);
      Rng params_rng(Rng::derive(stream, 1));
      ExpertParams params = noisy_params(spec, demo.param_noise_sigma, params_rng);
      auto r = run_expert_episode(spec, params, gains, cfg, demo, stream, "t");
      ++rollouts;
      successes += r.success ? 1 : 0;
      grasp_ticks.push_back(r.grasp_ticks);
    }
  }
  REQUIRE(rollouts >= 200);
  CHECK(static_cast<double>(successes) / rollouts >= 0.95);

  std::sort(grasp_ticks.begin(), grasp_ticks.end());
  CHECK(grasp_ticks[grasp_ticks.size() / 2] < 10);
}

TEST_CASE("demonstration batches keep only successful grasps") {
  SimConfig cfg;
  ControllerGains gains;
  DemoConfig demo;
  Rng cat_rng(11);
  auto catalog = sample_object_catalog(10, cat_rng);

  DemoStats stats;
  auto episodes = generate_demonstrations(catalog, demo, gains, cfg, 99, &stats);

  CHECK(stats.per_object.size() == catalog.size());
  for (const auto& po : stats.per_object) {
    CHECK(po.kept <= demo.keep_cap);
    if (!po.infeasible) {
      CHECK(po.attempted >= demo.per_object_min);
      CHECK(po.attempted <= demo.per_object_max);
    }
  }
  CHECK(episodes.size() == stats.episodes);

  for (const auto& ep : episodes) {
    CHECK_NOTHROW(validate_episode(ep));
    CHECK(ep.steps.back().reward == 1.0);  // only successes are kept
    int grasp_steps = 0;
    for (const auto& s : ep.steps) grasp_steps += s.subtask == "grasp" ? 1 : 0;
    CHECK(grasp_steps >= 2);
  }
}

TEST_CASE("demonstration output is independent of the worker count") {
  SimConfig cfg;
  ControllerGains gains;
  DemoConfig demo;
  Rng cat_rng(12);
  auto catalog = sample_object_catalog(6, cat_rng);

  set_worker_count(1);
  auto serial = generate_demonstrations(catalog, demo, gains, cfg, 31, nullptr);
  set_worker_count(4);
  auto parallel = generate_demonstrations(catalog, demo, gains, cfg, 31, nullptr);
  set_worker_count(0);

  REQUIRE(serial.size() == parallel.size());
  for (size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].object_name == parallel[i].object_name);
    REQUIRE(serial[i].steps.size() == parallel[i].steps.size());
    for (size_t k = 0; k < serial[i].steps.size(); ++k) {
      CHECK(serial[i].steps[k].action == parallel[i].steps[k].action);
      CHECK(serial[i].steps[k].observation.contact_force ==
            parallel[i].steps[k].observation.contact_force);
    }
  }
}

TEST_CASE("instruction text is stable") {
  CHECK(grasp_instruction("raspberry") == "grasp the raspberry");
  CHECK(grasp_instruction("paper cup with water") == "grasp the paper cup with water");
}

TEST_CASE("noisy parameter estimates stay positive and scale log-normally") {
  ObjectSpec s;
  s.name = "x";
  s.mass_kg = 0.1;
  s.friction_mu = 0.5;
  s.stiffness_n_per_mm = 0.3;
  Rng rng(5);
  for (int i = 0; i < 500; ++i) {
    auto p = noisy_params(s, 0.2, rng);
    CHECK(p.est_mass_kg > 0);
    CHECK(p.est_mu > 0);
    CHECK(p.est_k_n_per_mm > 0);
  }
  auto exact = exact_params(s);
  CHECK(exact.est_mass_kg == s.mass_kg);
  CHECK(exact.est_mu == s.friction_mu);
  CHECK(exact.est_k_n_per_mm == s.stiffness_n_per_mm);
}
