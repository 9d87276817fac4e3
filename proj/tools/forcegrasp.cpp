// forcegrasp CLI: catalog/demonstration generation, policy training, paired
// evaluation, and report/plot emission. Exit codes: 0 success, 2 validation
// failure (bad flags, malformed inputs), 3 runtime failure.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fg/catalog.hpp"
#include "fg/config.hpp"
#include "fg/dataset.hpp"
#include "fg/error.hpp"
#include "fg/evaluate.hpp"
#include "fg/expert.hpp"
#include "fg/kernels.hpp"
#include "fg/log.hpp"
#include "fg/policy.hpp"
#include "fg/report.hpp"

namespace fs = std::filesystem;
using fg::log::error;
using fg::log::info;
using nlohmann::json;

namespace {

struct CommonOpts {
  std::string config_path;
  uint64_t seed = 0;
  bool seed_set = false;
  int jobs = 0;
  std::string out = "out";
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "JSON config file (defaults used when absent)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "override the config seed")
      ->each([&o](const std::string&) { o.seed_set = true; });
  cmd->add_option("--jobs", o.jobs, "cap parallel workers (default: OpenMP's choice)");
  cmd->add_option("--out", o.out, "output directory");
}

fg::AppConfig load_config(const CommonOpts& o) {
  fg::AppConfig cfg = fg::load_app_config(o.config_path);
  if (o.seed_set) cfg.seed = o.seed;
  if (o.jobs > 0) fg::set_worker_count(o.jobs);
  return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw fg::ValidationError("io.open", "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw fg::ValidationError("io.write", "failed writing " + path.string());
}

fg::Variant parse_variant(std::string v) {
  std::replace(v.begin(), v.end(), '-', '_');
  return fg::variant_from_string(v);
}

// ---------------- gen-data ----------------

int cmd_gen_data(const CommonOpts& opts) {
  fg::AppConfig cfg = load_config(opts);
  fs::create_directories(opts.out);

  fg::Rng catalog_rng = fg::Rng(cfg.seed).split("catalog");
  std::vector<fg::ObjectSpec> catalog =
      fg::sample_object_catalog(static_cast<size_t>(cfg.catalog_objects), catalog_rng);

  fg::DemoStats stats;
  std::vector<fg::Episode> episodes =
      fg::generate_demonstrations(catalog, cfg.demo, cfg.gains, cfg.sim, cfg.seed, &stats);
  fs::path dataset_path = fs::path(opts.out) / "episodes.jsonl";
  fg::write_episodes(episodes, dataset_path);

  json per_object = json::array();
  for (const fg::ObjectDemoStats& s : stats.per_object)
    per_object.push_back({{"name", s.name},
                          {"attempted", s.attempted},
                          {"kept", s.kept},
                          {"infeasible", s.infeasible},
                          {"failures", json(s.failure_counts)}});
  json catalog_json = json::array();
  for (const fg::ObjectSpec& s : catalog) catalog_json.push_back(fg::object_spec_to_json(s));
  json manifest = {{"format", "forcegrasp-manifest"},
                   {"schema_version", 1},
                   {"seed", cfg.seed},
                   {"episodes", stats.episodes},
                   {"objects", catalog.size()},
                   {"objects_skipped", stats.objects_skipped},
                   {"config", fg::app_config_to_json(cfg)},
                   {"catalog", catalog_json},
                   {"per_object", per_object}};
  write_text(fs::path(opts.out) / "manifest.json", manifest.dump(2) + "\n");

  double skip_rate =
      catalog.empty() ? 0.0 : static_cast<double>(stats.objects_skipped) / catalog.size();
  std::printf("catalog objects:  %zu\n", catalog.size());
  std::printf("episodes kept:    %zu\n", stats.episodes);
  std::printf("objects skipped:  %zu (%.1f%%)\n", stats.objects_skipped, skip_rate * 100);
  std::printf("dataset:          %s\n", dataset_path.string().c_str());
  if (skip_rate > 0.20) {
    error("skipped-object rate %.1f%% exceeds the 20%% budget", skip_rate * 100);
    return 3;
  }
  return 0;
}

// ---------------- train ----------------

int cmd_train(const CommonOpts& opts, const std::string& variant_str,
              const std::string& data_path) {
  fg::AppConfig cfg = load_config(opts);
  cfg.policy.variant = parse_variant(variant_str);
  const std::string name = fg::to_string(cfg.policy.variant);

  std::vector<fg::Episode> episodes = fg::read_episodes(data_path);
  std::vector<fg::Episode> grasp = fg::grasp_only(episodes);
  auto [train_eps, val_eps] = fg::split_episodes(grasp, cfg.train_ratio, cfg.seed);
  fg::NormStats stats = fg::compute_norm_stats(train_eps);
  std::vector<fg::TrainingPair> pairs = fg::build_training_pairs(train_eps, cfg.policy, stats);
  std::vector<fg::TrainingPair> val_pairs =
      fg::build_training_pairs(val_eps, cfg.policy, stats);
  info("training '%s' on %zu pairs (%zu episodes, %zu held out)", name.c_str(), pairs.size(),
       train_eps.size(), val_eps.size());

  fg::TrainResult result =
      fg::train_policy(pairs, val_pairs, cfg.policy, stats, cfg.seed, name);

  fs::create_directories(opts.out);
  fs::path ckpt = fs::path(opts.out) / (name + ".ckpt");
  fg::save_policy(result.policy, ckpt);
  fg::write_loss_csv(result.loss_trace, result.val_trace, result.val_every,
                     fs::path(opts.out) / (name + "_loss.csv"));

  size_t decile = std::max<size_t>(1, result.loss_trace.size() / 10);
  double first = 0, last = 0;
  for (size_t i = 0; i < decile; ++i) {
    first += result.loss_trace[i];
    last += result.loss_trace[result.loss_trace.size() - 1 - i];
  }
  std::printf("checkpoint:       %s\n", ckpt.string().c_str());
  std::printf("training pairs:   %zu\n", pairs.size());
  std::printf("first-decile loss %.6f\n", first / decile);
  std::printf("final-decile loss %.6f\n", last / decile);
  return 0;
}

// ---------------- eval ----------------

int cmd_eval(const CommonOpts& opts, const std::vector<std::string>& policy_paths,
             bool with_expert, const std::string& expect_variant) {
  fg::AppConfig cfg = load_config(opts);
  fg::SimConfig esim = cfg.sim;
  esim.dt_s = cfg.eval_dt_s;
  std::vector<fg::ObjectSpec> catalog = fg::eval_catalog();
  fs::create_directories(opts.out);

  std::vector<fg::EvalReport> reports;
  if (with_expert) {
    info("evaluating scripted expert baseline");
    reports.push_back(fg::run_trials(fg::expert_agent_factory(cfg.gains, esim.gravity), catalog,
                                     cfg.eval, esim, cfg.seed, "expert"));
  }
  for (const std::string& path : policy_paths) {
    fg::Policy policy = fg::load_policy(path);
    if (!expect_variant.empty() && policy.cfg.variant != parse_variant(expect_variant))
      throw fg::ValidationError("variant.mismatch",
                                "checkpoint " + path + " holds a " +
                                    fg::to_string(policy.cfg.variant) + " policy, expected " +
                                    expect_variant);
    info("evaluating policy '%s' from %s", policy.name.c_str(), path.c_str());
    reports.push_back(fg::run_trials(fg::policy_agent_factory(policy), catalog, cfg.eval, esim,
                                     cfg.seed, policy.name));
  }
  if (reports.empty())
    throw fg::ValidationError("eval.nothing", "pass --policy and/or --expert");

  std::map<std::string, int> name_counts;
  for (const fg::EvalReport& rep : reports) {
    std::string stem = "report_" + rep.policy_name;
    int n = name_counts[rep.policy_name]++;
    if (n > 0) stem += "_" + std::to_string(n + 1);
    write_text(fs::path(opts.out) / (stem + ".json"), fg::report_to_json(rep).dump() + "\n");
  }
  fg::write_aggregates_csv(reports, fs::path(opts.out) / "aggregates.csv");
  std::printf("%s", fg::format_aggregate_table(reports).c_str());

  const fg::EvalReport* forceful = nullptr;
  const fg::EvalReport* position_only = nullptr;
  for (const fg::EvalReport& rep : reports) {
    if (rep.policy_name == "forceful" && !forceful) forceful = &rep;
    if (rep.policy_name == "position_only" && !position_only) position_only = &rep;
  }
  if (forceful && position_only) {
    fg::Comparison cmp = fg::compression_comparison(*forceful, *position_only);
    fg::write_comparison_csv(cmp, fs::path(opts.out) / "comparison.csv");
    std::printf("delicate aperture deltas <= 0: %.0f%% of objects\n",
                cmp.delicate_nonpositive_frac * 100);
    std::printf("mushiness degradation (mm):    forceful %.2f, position_only %.2f\n",
                cmp.mushiness_total_forceful_mm, cmp.mushiness_total_position_only_mm);
  }
  return 0;
}

// ---------------- report ----------------

int cmd_report(const CommonOpts& opts, const std::vector<std::string>& report_paths) {
  if (report_paths.empty() || report_paths.size() > 2)
    throw fg::ValidationError("report.args", "pass one or two evaluation report JSON files");
  std::vector<fg::EvalReport> reports;
  for (const std::string& p : report_paths) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw fg::ValidationError("io.open", "cannot open " + p);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw fg::ValidationError("report.parse", e.what());
    }
    reports.push_back(fg::report_from_json(j));
  }
  fs::create_directories(opts.out);
  for (const fg::EvalReport& rep : reports) {
    fg::write_summary_csv(rep, fs::path(opts.out) / ("summary_" + rep.policy_name + ".csv"));
    fg::write_trace_csv(rep, fs::path(opts.out) / ("traces_" + rep.policy_name + ".csv"));
  }
  fg::write_aggregates_csv(reports, fs::path(opts.out) / "aggregates.csv");

  // forceful (or the first report) carries the three-series plot; the other
  // report contributes its aperture trace
  const fg::EvalReport* primary = &reports[0];
  const fg::EvalReport* secondary = reports.size() > 1 ? &reports[1] : nullptr;
  if (secondary && secondary->policy_name == "forceful") std::swap(primary, secondary);
  if (secondary) {
    fg::Comparison cmp = fg::compression_comparison(
        primary->policy_name == "forceful" ? *primary : *secondary,
        primary->policy_name == "forceful" ? *secondary : *primary);
    fg::write_comparison_csv(cmp, fs::path(opts.out) / "comparison.csv");
  }
  fg::write_object_svgs(*primary, secondary, fs::path(opts.out) / "plots");
  std::printf("%s", fg::format_aggregate_table(reports).c_str());
  std::printf("wrote CSV tables and per-object SVG plots under %s\n", opts.out.c_str());
  return 0;
}

// ---------------- inspect ----------------

int inspect_dataset(const fs::path& path) {
  std::vector<fg::Episode> episodes = fg::read_episodes(path);
  size_t steps = 0, grasp_steps = 0, successes = 0;
  std::map<std::string, int> histogram;
  for (const fg::Episode& ep : episodes) {
    steps += ep.steps.size();
    ++histogram[ep.object_name];
    bool rewarded = false;
    for (const fg::StepRecord& s : ep.steps) {
      grasp_steps += s.subtask == "grasp";
      rewarded |= s.reward > 0;
    }
    successes += rewarded;
  }
  std::printf("episodes:     %zu\n", episodes.size());
  std::printf("steps:        %zu (%zu grasp)\n", steps, grasp_steps);
  std::printf("successful:   %zu\n", successes);
  std::printf("objects:      %zu\n", histogram.size());
  for (const auto& [name, count] : histogram) std::printf("  %-28s %d\n", name.c_str(), count);

  fs::path manifest_path = path.parent_path() / "manifest.json";
  std::ifstream in(manifest_path, std::ios::binary);
  if (in) {
    json manifest;
    try {
      manifest = json::parse(in);
    } catch (const json::parse_error&) {
      return 0;  // dataset stands alone; a broken manifest is not its problem
    }
    if (manifest.contains("catalog")) {
      double lo = 1e300, hi = 0;
      for (const json& js : manifest.at("catalog")) {
        double m = js.value("mass_kg", 0.0);
        lo = std::min(lo, m);
        hi = std::max(hi, m);
      }
      std::printf("mass range:   %.0fg - %.0fg\n", lo * 1000, hi * 1000);
    }
  }
  return 0;
}

int inspect_checkpoint(const fs::path& path) {
  fg::Policy policy = fg::load_policy(path);
  size_t params = 0;
  for (const fg::Tensor* t : policy.net.params()) params += t->size();
  std::printf("policy:       %s\n", policy.name.c_str());
  std::printf("variant:      %s\n", fg::to_string(policy.cfg.variant));
  std::printf("obs window:   %d x %zu channels\n", policy.cfg.obs_horizon,
              policy.cfg.obs_dim());
  std::printf("pred window:  %d x %zu channels\n", policy.cfg.pred_horizon,
              policy.cfg.act_dim());
  std::printf("denoiser in:  %zu\n", policy.cfg.input_dim());
  std::printf("parameters:   %zu\n", params);
  std::printf("diffusion:    %d steps, betas %.2g..%.2g\n", policy.cfg.diffusion_steps,
              policy.cfg.beta_start, policy.cfg.beta_end);
  return 0;
}

int inspect_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw fg::ValidationError("io.open", "cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw fg::ValidationError("json.parse", e.what());
  }
  std::string format = j.value("format", "");
  if (format == "forcegrasp-eval-report") {
    fg::EvalReport rep = fg::report_from_json(j);
    std::vector<fg::EvalReport> reports{std::move(rep)};
    std::printf("%s", fg::format_aggregate_table(reports).c_str());
    std::printf("catalog: %zu objects, %zu trials, %d ticks at %.2fs\n",
                reports[0].catalog_names.size(), reports[0].trials.size(), reports[0].ticks,
                reports[0].dt_s);
    return 0;
  }
  if (format == "forcegrasp-manifest") {
    std::printf("manifest: seed %llu, %zu episodes, %zu objects (%zu skipped)\n",
                static_cast<unsigned long long>(j.value("seed", 0ull)),
                j.value("episodes", size_t{0}), j.value("objects", size_t{0}),
                j.value("objects_skipped", size_t{0}));
    return 0;
  }
  throw fg::ValidationError("inspect.format", "unrecognized JSON artifact " + path.string());
}

int cmd_inspect(const std::string& target) {
  fs::path path(target);
  if (!fs::exists(path))
    throw fg::ValidationError("io.open", "no such file: " + path.string());
  std::string ext = path.extension().string();
  if (ext == ".jsonl") return inspect_dataset(path);
  if (ext == ".ckpt") return inspect_checkpoint(path);
  if (ext == ".json") return inspect_json(path);
  throw fg::ValidationError("inspect.format",
                            "cannot inspect '" + ext + "' files (want .jsonl/.ckpt/.json)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"forcegrasp: force-feedback grasping laboratory"};
  app.require_subcommand(1);

  CommonOpts gen_opts;
  gen_opts.out = "data";
  CLI::App* gen = app.add_subcommand("gen-data", "sample a catalog and collect demonstrations");
  add_common(gen, gen_opts);

  CommonOpts train_opts;
  std::string train_variant = "forceful";
  std::string train_data;
  CLI::App* train = app.add_subcommand("train", "train a diffusion policy on a dataset");
  add_common(train, train_opts);
  train->add_option("--variant", train_variant, "policy variant")
      ->check(CLI::IsMember({"forceful", "position-only", "position_only"}));
  train->add_option("--data", train_data, "episode dataset (episodes.jsonl)")
      ->required()
      ->check(CLI::ExistingFile);

  CommonOpts eval_opts;
  std::vector<std::string> eval_policies;
  std::string eval_variant;
  bool eval_expert = false;
  CLI::App* eval = app.add_subcommand("eval", "run the evaluation protocol on checkpoints");
  add_common(eval, eval_opts);
  eval->add_option("--policy", eval_policies, "policy checkpoint(s) to evaluate")
      ->check(CLI::ExistingFile);
  eval->add_flag("--expert", eval_expert, "also evaluate the scripted expert");
  eval->add_option("--variant", eval_variant, "refuse checkpoints of any other variant")
      ->check(CLI::IsMember({"forceful", "position-only", "position_only"}));

  CommonOpts report_opts;
  std::vector<std::string> report_paths;
  CLI::App* report = app.add_subcommand("report", "emit CSV tables and SVG plots from reports");
  add_common(report, report_opts);
  report->add_option("reports", report_paths, "evaluation report JSON (one or two)")
      ->check(CLI::ExistingFile);

  std::string inspect_target;
  CLI::App* inspect = app.add_subcommand("inspect", "summarize a dataset/checkpoint/report");
  inspect->add_option("path", inspect_target, "artifact to inspect")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(gen)) return cmd_gen_data(gen_opts);
    if (app.got_subcommand(train)) return cmd_train(train_opts, train_variant, train_data);
    if (app.got_subcommand(eval)) return cmd_eval(eval_opts, eval_policies, eval_expert, eval_variant);
    if (app.got_subcommand(report)) return cmd_report(report_opts, report_paths);
    if (app.got_subcommand(inspect)) return cmd_inspect(inspect_target);
  } catch (const fg::ValidationError& e) {
    if (e.line)
      error("%s (rule %s, line %zu)", e.what(), e.rule.c_str(), e.line);
    else
      error("%s (rule %s)", e.what(), e.rule.c_str());
    return 2;
  } catch (const std::exception& e) {
    error("%s", e.what());
    return 3;
  }
  return 0;
}
