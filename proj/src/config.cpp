#include "fg/config.hpp"

#include <fstream>
#include <initializer_list>

#include "fg/error.hpp"

namespace fg {

using nlohmann::json;

namespace {

void check_keys(const json& j, const char* section, std::initializer_list<const char*> allowed) {
  if (!j.is_object())
    throw ValidationError("config.section", std::string(section) + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok |= key == a;
    if (!ok)
      throw ValidationError("config.unknown",
                            "unknown key '" + key + "' in config section " + section);
  }
}

SimConfig sim_from_json(const json& j, const SimConfig& d) {
  check_keys(j, "sim",
             {"dt_s", "max_aperture_mm", "closing_speed_mm_s", "gravity", "sensor_noise_std_n",
              "sensor_quantum_n"});
  SimConfig c = d;
  c.dt_s = j.value("dt_s", c.dt_s);
  c.max_aperture_mm = j.value("max_aperture_mm", c.max_aperture_mm);
  c.closing_speed_mm_s = j.value("closing_speed_mm_s", c.closing_speed_mm_s);
  c.gravity = j.value("gravity", c.gravity);
  c.sensor_noise_std_n = j.value("sensor_noise_std_n", c.sensor_noise_std_n);
  c.sensor_quantum_n = j.value("sensor_quantum_n", c.sensor_quantum_n);
  return c;
}

ControllerGains gains_from_json(const json& j, const ControllerGains& d) {
  check_keys(j, "gains",
             {"contact_threshold_n", "aperture_step_mm", "kp_force", "initial_force_n",
              "min_force_n", "max_force_n", "max_force_step_n"});
  ControllerGains c = d;
  c.contact_threshold_n = j.value("contact_threshold_n", c.contact_threshold_n);
  c.aperture_step_mm = j.value("aperture_step_mm", c.aperture_step_mm);
  c.kp_force = j.value("kp_force", c.kp_force);
  c.initial_force_n = j.value("initial_force_n", c.initial_force_n);
  c.min_force_n = j.value("min_force_n", c.min_force_n);
  c.max_force_n = j.value("max_force_n", c.max_force_n);
  c.max_force_step_n = j.value("max_force_step_n", c.max_force_step_n);
  return c;
}

DemoConfig demo_from_json(const json& j, const DemoConfig& d) {
  check_keys(j, "demo",
             {"per_object_min", "per_object_max", "keep_cap", "param_noise_sigma",
              "start_gap_min_mm", "start_gap_max_mm", "approach_steps", "home_steps",
              "max_grasp_ticks"});
  DemoConfig c = d;
  c.per_object_min = j.value("per_object_min", c.per_object_min);
  c.per_object_max = j.value("per_object_max", c.per_object_max);
  c.keep_cap = j.value("keep_cap", c.keep_cap);
  c.param_noise_sigma = j.value("param_noise_sigma", c.param_noise_sigma);
  c.start_gap_min_mm = j.value("start_gap_min_mm", c.start_gap_min_mm);
  c.start_gap_max_mm = j.value("start_gap_max_mm", c.start_gap_max_mm);
  c.approach_steps = j.value("approach_steps", c.approach_steps);
  c.home_steps = j.value("home_steps", c.home_steps);
  c.max_grasp_ticks = j.value("max_grasp_ticks", c.max_grasp_ticks);
  return c;
}

EvalConfig eval_from_json(const json& j, const EvalConfig& d) {
  check_keys(j, "eval",
             {"trials_per_object", "ticks", "null_threshold_mm", "deform_plastic_frac",
              "start_gap_min_mm", "start_gap_max_mm", "mushiness_trials"});
  EvalConfig c = d;
  c.trials_per_object = j.value("trials_per_object", c.trials_per_object);
  c.ticks = j.value("ticks", c.ticks);
  c.null_threshold_mm = j.value("null_threshold_mm", c.null_threshold_mm);
  c.deform_plastic_frac = j.value("deform_plastic_frac", c.deform_plastic_frac);
  c.start_gap_min_mm = j.value("start_gap_min_mm", c.start_gap_min_mm);
  c.start_gap_max_mm = j.value("start_gap_max_mm", c.start_gap_max_mm);
  c.mushiness_trials = j.value("mushiness_trials", c.mushiness_trials);
  return c;
}

}  // namespace

AppConfig app_config_from_json(const json& j) {
  check_keys(j, "config",
             {"sim", "eval_dt_s", "gains", "demo", "policy", "eval", "catalog_objects",
              "train_ratio", "seed"});
  AppConfig cfg;
  if (j.contains("sim")) cfg.sim = sim_from_json(j.at("sim"), cfg.sim);
  cfg.eval_dt_s = j.value("eval_dt_s", cfg.eval_dt_s);
  if (j.contains("gains")) cfg.gains = gains_from_json(j.at("gains"), cfg.gains);
  if (j.contains("demo")) cfg.demo = demo_from_json(j.at("demo"), cfg.demo);
  if (j.contains("policy")) {
    // policy section reuses the sidecar field names; overlay onto defaults
    json p = policy_config_to_json(cfg.policy);
    check_keys(j.at("policy"), "policy",
               {"variant", "obs_horizon", "pred_horizon", "act_horizon_train",
                "act_horizon_eval", "diffusion_steps", "beta_start", "beta_end",
                "instr_proj_dim", "time_embed_dim", "hidden", "train_steps", "batch_size",
                "learning_rate", "cosine_lr", "ema_decay", "constant_force_n",
                "clamp_aperture_max_mm", "clamp_force_min_n", "clamp_force_max_n"});
    p.update(j.at("policy"));
    cfg.policy = policy_config_from_json(p);
  }
  if (j.contains("eval")) cfg.eval = eval_from_json(j.at("eval"), cfg.eval);
  cfg.catalog_objects = j.value("catalog_objects", cfg.catalog_objects);
  cfg.train_ratio = j.value("train_ratio", cfg.train_ratio);
  cfg.seed = j.value("seed", cfg.seed);

  if (cfg.catalog_objects < 1)
    throw ValidationError("config.catalog", "catalog_objects must be positive");
  if (!(cfg.train_ratio > 0 && cfg.train_ratio < 1))
    throw ValidationError("config.split", "train_ratio must lie in (0, 1)");
  if (!(cfg.eval_dt_s > 0))
    throw ValidationError("config.dt", "eval_dt_s must be positive");
  validate_gains(cfg.gains, cfg.sim);
  validate_policy_config(cfg.policy);
  return cfg;
}

json app_config_to_json(const AppConfig& cfg) {
  return {{"sim",
           {{"dt_s", cfg.sim.dt_s},
            {"max_aperture_mm", cfg.sim.max_aperture_mm},
            {"closing_speed_mm_s", cfg.sim.closing_speed_mm_s},
            {"gravity", cfg.sim.gravity},
            {"sensor_noise_std_n", cfg.sim.sensor_noise_std_n},
            {"sensor_quantum_n", cfg.sim.sensor_quantum_n}}},
          {"eval_dt_s", cfg.eval_dt_s},
          {"gains",
           {{"contact_threshold_n", cfg.gains.contact_threshold_n},
            {"aperture_step_mm", cfg.gains.aperture_step_mm},
            {"kp_force", cfg.gains.kp_force},
            {"initial_force_n", cfg.gains.initial_force_n},
            {"min_force_n", cfg.gains.min_force_n},
            {"max_force_n", cfg.gains.max_force_n},
            {"max_force_step_n", cfg.gains.max_force_step_n}}},
          {"demo",
           {{"per_object_min", cfg.demo.per_object_min},
            {"per_object_max", cfg.demo.per_object_max},
            {"keep_cap", cfg.demo.keep_cap},
            {"param_noise_sigma", cfg.demo.param_noise_sigma},
            {"start_gap_min_mm", cfg.demo.start_gap_min_mm},
            {"start_gap_max_mm", cfg.demo.start_gap_max_mm},
            {"approach_steps", cfg.demo.approach_steps},
            {"home_steps", cfg.demo.home_steps},
            {"max_grasp_ticks", cfg.demo.max_grasp_ticks}}},
          {"policy", policy_config_to_json(cfg.policy)},
          {"eval",
           {{"trials_per_object", cfg.eval.trials_per_object},
            {"ticks", cfg.eval.ticks},
            {"null_threshold_mm", cfg.eval.null_threshold_mm},
            {"deform_plastic_frac", cfg.eval.deform_plastic_frac},
            {"start_gap_min_mm", cfg.eval.start_gap_min_mm},
            {"start_gap_max_mm", cfg.eval.start_gap_max_mm},
            {"mushiness_trials", cfg.eval.mushiness_trials}}},
          {"catalog_objects", cfg.catalog_objects},
          {"train_ratio", cfg.train_ratio},
          {"seed", cfg.seed}};
}

AppConfig load_app_config(const std::filesystem::path& path) {
  if (path.empty()) {
    AppConfig cfg;
    validate_gains(cfg.gains, cfg.sim);
    validate_policy_config(cfg.policy);
    return cfg;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("io.open", "cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("config.parse", e.what());
  }
  return app_config_from_json(j);
}

}  // namespace fg
