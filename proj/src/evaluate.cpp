#include "fg/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "fg/error.hpp"
#include "fg/log.hpp"

namespace fg {

using nlohmann::json;

const char* to_string(OutcomeLabel label) {
  switch (label) {
    case OutcomeLabel::success: return "success";
    case OutcomeLabel::deformation_failure: return "deformation_failure";
    case OutcomeLabel::slip_failure: return "slip_failure";
    case OutcomeLabel::null_grasp: return "null_grasp";
  }
  return "unknown";
}

OutcomeLabel outcome_from_string(const std::string& s) {
  if (s == "success") return OutcomeLabel::success;
  if (s == "deformation_failure") return OutcomeLabel::deformation_failure;
  if (s == "slip_failure") return OutcomeLabel::slip_failure;
  if (s == "null_grasp") return OutcomeLabel::null_grasp;
  throw ValidationError("outcome.unknown", "unknown outcome label '" + s + "'");
}

GraspOutcome classify(const ObjectSpec& spec, const ObjectState& final_state,
                      double final_aperture_mm, double final_applied_n, int ticks_used,
                      double plastic_incurred_mm, LiftResult lift, const EvalConfig& ecfg) {
  GraspOutcome out;
  out.final_aperture_mm = final_aperture_mm;
  out.final_applied_force_n = final_applied_n;
  out.final_true_contact_n = true_contact_force(spec, final_state, final_aperture_mm);
  out.ticks_used = ticks_used;
  out.plastic_incurred_mm = plastic_incurred_mm;

  double gap_mm = final_aperture_mm - final_state.rest_width_mm;
  bool deformed = final_state.crushed ||
                  plastic_incurred_mm > ecfg.deform_plastic_frac * spec.rest_width_mm;
  if (deformed)
    out.label = OutcomeLabel::deformation_failure;
  else if (gap_mm >= ecfg.null_threshold_mm)
    out.label = OutcomeLabel::null_grasp;  // gap implies zero contact force
  else if (lift == LiftResult::slipped)
    out.label = OutcomeLabel::slip_failure;
  else
    out.label = OutcomeLabel::success;
  return out;
}

namespace {

struct ExpertAgent : GraspAgent {
  ExpertController ctrl;
  ExpertAgent(const ExpertParams& params, const ControllerGains& gains, double gravity)
      : ctrl(params, gains, gravity) {}
  GripperCommand act(const GripperObservation& obs, Rng&) override { return ctrl.step(obs); }
};

}  // namespace

AgentFactory expert_agent_factory(ControllerGains gains, double gravity) {
  return [gains, gravity](const ObjectSpec& spec, Rng&) -> std::unique_ptr<GraspAgent> {
    return std::make_unique<ExpertAgent>(exact_params(spec), gains, gravity);
  };
}

RolloutResult run_rollout(const ObjectSpec& spec, ObjectState start_state, GraspAgent& agent,
                          double start_aperture_mm, const EvalConfig& ecfg, const SimConfig& cfg,
                          Rng& rng) {
  // Separate streams so the sensor-noise sequence is identical no matter how
  // much randomness the agent consumes (paired-evaluation guarantee).
  Rng sim_rng = rng.split("sim");
  Rng agent_rng = rng.split("agent");

  ObjectState st = start_state;
  GripperState grip;
  grip.aperture_mm = start_aperture_mm;
  double plastic_before = st.cumulative_plastic_mm;

  RolloutResult rr;
  rr.trace.reserve(static_cast<size_t>(ecfg.ticks));
  GripperCommand last{start_aperture_mm, 0.0};
  // Observations after the first come from step() so the applied-force
  // channel reports the force limit actually in effect, exactly as the
  // demonstration episodes record it.
  GripperObservation obs = observe(spec, st, grip, cfg, sim_rng);
  for (int tick = 0; tick < ecfg.ticks; ++tick) {
    GripperCommand cmd = agent.act(obs, agent_rng);
    StepResult sr = step(spec, st, grip, cmd, cfg, sim_rng);
    st = sr.state;
    grip = sr.gripper;
    obs = sr.obs;
    last = cmd;
    TraceSample ts;
    ts.time_s = grip.time_s;
    ts.aperture_mm = grip.aperture_mm;
    ts.applied_force_n = cmd.force_limit_n;
    ts.contact_force_n = sr.obs.contact_force_n;
    ts.true_force_n = true_contact_force(spec, st, grip.aperture_mm);
    rr.trace.push_back(ts);
  }

  double true_f = true_contact_force(spec, st, grip.aperture_mm);
  LiftResult lift = lift_test(spec, st, true_f, cfg);
  rr.outcome = classify(spec, st, grip.aperture_mm, last.force_limit_n, ecfg.ticks,
                        st.cumulative_plastic_mm - plastic_before, lift, ecfg);
  rr.final_state = st;
  return rr;
}

namespace {

double trial_start_aperture(const ObjectSpec& spec, const EvalConfig& ecfg, Rng& rng) {
  return spec.rest_width_mm + ecfg.start_gap_min_mm +
         rng.uniform() * (ecfg.start_gap_max_mm - ecfg.start_gap_min_mm);
}

Aggregates aggregate(const std::vector<TrialRecord>& trials) {
  Aggregates a;
  a.trials = static_cast<int>(trials.size());
  int succ = 0, seen_n = 0, seen_s = 0, unseen_n = 0, unseen_s = 0;
  int deli_n = 0, deli_s = 0, nulls = 0;
  for (const TrialRecord& t : trials) {
    bool s = t.outcome.label == OutcomeLabel::success;
    succ += s;
    (t.seen ? seen_n : unseen_n) += 1;
    if (t.seen)
      seen_s += s;
    else
      unseen_s += s;
    if (t.delicate) {
      ++deli_n;
      deli_s += s;
    }
    switch (t.outcome.label) {
      case OutcomeLabel::null_grasp: ++nulls; break;
      case OutcomeLabel::slip_failure: ++a.slip_count; break;
      case OutcomeLabel::deformation_failure: ++a.deformation_count; break;
      default: break;
    }
  }
  auto rate = [](int num, int den) { return den ? static_cast<double>(num) / den : 0.0; };
  a.overall_success = rate(succ, a.trials);
  a.seen_success = rate(seen_s, seen_n);
  a.unseen_success = rate(unseen_s, unseen_n);
  a.delicate_success = rate(deli_s, deli_n);
  a.null_rate = rate(nulls, a.trials);
  // failure shares exclude nulls, which the taxonomy keeps separate
  int failures = a.slip_count + a.deformation_count;
  a.slip_share = rate(a.slip_count, failures);
  a.deformation_share = rate(a.deformation_count, failures);
  return a;
}

std::vector<ObjectSummary> summarize(std::span<const ObjectSpec> catalog,
                                     const std::vector<TrialRecord>& trials) {
  std::vector<ObjectSummary> out;
  for (const ObjectSpec& spec : catalog) {
    ObjectSummary s;
    s.object = spec.name;
    s.seen = spec.seen;
    s.delicate = is_delicate(spec);
    double ap = 0, f = 0;
    int n = 0;
    for (const TrialRecord& t : trials) {
      if (t.object != spec.name) continue;
      ++n;
      ap += t.outcome.final_aperture_mm;
      f += t.outcome.final_applied_force_n;
      switch (t.outcome.label) {
        case OutcomeLabel::success: ++s.success; break;
        case OutcomeLabel::deformation_failure: ++s.deformation; break;
        case OutcomeLabel::slip_failure: ++s.slip; break;
        case OutcomeLabel::null_grasp: ++s.null_grasp; break;
      }
    }
    if (n) {
      s.success_rate = static_cast<double>(s.success) / n;
      s.mean_final_aperture_mm = ap / n;
      s.mean_final_force_n = f / n;
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace

MushinessTrace mushiness_trace(const AgentFactory& factory, const ObjectSpec& spec,
                               const EvalConfig& ecfg, const SimConfig& cfg, uint64_t seed) {
  MushinessTrace mt;
  mt.object = spec.name;
  ObjectState st = ObjectState::fresh(spec);
  for (int trial = 0; trial < ecfg.mushiness_trials; ++trial) {
    Rng rng(Rng::derive(seed, Rng::fnv1a(spec.name), static_cast<uint64_t>(trial),
                        Rng::fnv1a("mushiness")));
    double start = trial_start_aperture(spec, ecfg, rng);
    std::unique_ptr<GraspAgent> agent = factory(spec, rng);
    RolloutResult rr = run_rollout(spec, st, *agent, start, ecfg, cfg, rng);
    st = rr.final_state;  // plastic state persists across the repeats
    mt.rest_width_mm.push_back(st.rest_width_mm);
  }
  mt.total_degradation_mm = spec.rest_width_mm - st.rest_width_mm;
  return mt;
}

EvalReport run_trials(const AgentFactory& factory, std::span<const ObjectSpec> catalog,
                      const EvalConfig& ecfg, const SimConfig& cfg, uint64_t seed,
                      std::string policy_name) {
  if (catalog.empty()) throw ValidationError("catalog.empty", "no objects to evaluate");
  if (ecfg.trials_per_object < 1 || ecfg.ticks < 1)
    throw ValidationError("eval.config", "trials_per_object and ticks must be positive");
  for (const ObjectSpec& spec : catalog) validate_spec(spec);

  EvalReport rep;
  rep.policy_name = std::move(policy_name);
  rep.seed = seed;
  rep.ticks = ecfg.ticks;
  rep.dt_s = cfg.dt_s;
  for (const ObjectSpec& spec : catalog) rep.catalog_names.push_back(spec.name);

  const int per = ecfg.trials_per_object;
  const size_t total = catalog.size() * static_cast<size_t>(per);
  rep.trials.resize(total);

  std::string error;
  bool failed = false;
#pragma omp parallel for schedule(dynamic)
  for (long long idx = 0; idx < static_cast<long long>(total); ++idx) {
    const ObjectSpec& spec = catalog[static_cast<size_t>(idx) / per];
    int trial = static_cast<int>(idx % per);
    try {
      // trial stream depends only on (seed, object, trial): paired across policies
      Rng rng(Rng::derive(seed, Rng::fnv1a(spec.name), static_cast<uint64_t>(trial),
                          Rng::fnv1a("trial")));
      double start = trial_start_aperture(spec, ecfg, rng);
      std::unique_ptr<GraspAgent> agent = factory(spec, rng);
      RolloutResult rr = run_rollout(spec, ObjectState::fresh(spec), *agent, start, ecfg, cfg, rng);
      TrialRecord& tr = rep.trials[static_cast<size_t>(idx)];
      tr.object = spec.name;
      tr.seen = spec.seen;
      tr.delicate = is_delicate(spec);
      tr.trial = trial;
      tr.outcome = rr.outcome;
      tr.trace = std::move(rr.trace);
    } catch (const std::exception& e) {
#pragma omp critical
      {
        if (!failed) {
          failed = true;
          error = e.what();
        }
      }
    }
  }
  if (failed) throw ValidationError("eval.rollout", "rollout failed: " + error);

  for (const ObjectSpec& spec : catalog)
    if (spec.plasticity > 0)
      rep.mushiness.push_back(mushiness_trace(factory, spec, ecfg, cfg, seed));

  rep.per_object = summarize(catalog, rep.trials);
  rep.agg = aggregate(rep.trials);
  return rep;
}

// ---------------- comparison ----------------

Comparison compression_comparison(const EvalReport& forceful, const EvalReport& position_only) {
  if (forceful.seed != position_only.seed || forceful.ticks != position_only.ticks ||
      forceful.catalog_names != position_only.catalog_names ||
      forceful.trials.size() != position_only.trials.size())
    throw ValidationError("report.unpaired",
                          "reports were not produced by a paired evaluation run");
  for (size_t i = 0; i < forceful.trials.size(); ++i)
    if (forceful.trials[i].object != position_only.trials[i].object ||
        forceful.trials[i].trial != position_only.trials[i].trial)
      throw ValidationError("report.unpaired", "trial tables are not aligned");

  std::map<std::string, double> mush_f, mush_po;
  for (const MushinessTrace& m : forceful.mushiness) mush_f[m.object] = m.total_degradation_mm;
  for (const MushinessTrace& m : position_only.mushiness)
    mush_po[m.object] = m.total_degradation_mm;

  Comparison cmp;
  int delicate_n = 0, delicate_nonpos = 0;
  for (size_t i = 0; i < forceful.per_object.size(); ++i) {
    const ObjectSummary& f = forceful.per_object[i];
    const ObjectSummary& p = position_only.per_object[i];
    ObjectDelta d;
    d.object = f.object;
    d.delicate = f.delicate;
    d.aperture_delta_mm = p.mean_final_aperture_mm - f.mean_final_aperture_mm;
    d.force_delta_n = p.mean_final_force_n - f.mean_final_force_n;
    auto itf = mush_f.find(f.object);
    auto itp = mush_po.find(f.object);
    if (itf != mush_f.end() && itp != mush_po.end())
      d.mushiness_delta_mm = itp->second - itf->second;
    cmp.deltas.push_back(d);
    if (f.delicate) {
      ++delicate_n;
      delicate_nonpos += d.aperture_delta_mm <= 0.0;
    }
  }
  cmp.delicate_nonpositive_frac =
      delicate_n ? static_cast<double>(delicate_nonpos) / delicate_n : 0.0;
  for (const auto& [name, v] : mush_f) cmp.mushiness_total_forceful_mm += v;
  for (const auto& [name, v] : mush_po) cmp.mushiness_total_position_only_mm += v;
  return cmp;
}

// ---------------- report JSON ----------------

static json outcome_to_json(const GraspOutcome& o) {
  return {{"label", to_string(o.label)},
          {"final_aperture_mm", o.final_aperture_mm},
          {"final_applied_force_n", o.final_applied_force_n},
          {"final_true_contact_n", o.final_true_contact_n},
          {"ticks_used", o.ticks_used},
          {"plastic_incurred_mm", o.plastic_incurred_mm}};
}

static GraspOutcome outcome_from_json(const json& j) {
  GraspOutcome o;
  o.label = outcome_from_string(j.at("label").get<std::string>());
  o.final_aperture_mm = j.at("final_aperture_mm").get<double>();
  o.final_applied_force_n = j.at("final_applied_force_n").get<double>();
  o.final_true_contact_n = j.at("final_true_contact_n").get<double>();
  o.ticks_used = j.at("ticks_used").get<int>();
  o.plastic_incurred_mm = j.at("plastic_incurred_mm").get<double>();
  return o;
}

json report_to_json(const EvalReport& rep) {
  json trials = json::array();
  for (const TrialRecord& t : rep.trials) {
    json trace = json::array();
    for (const TraceSample& s : t.trace)
      trace.push_back(
          {s.time_s, s.aperture_mm, s.applied_force_n, s.contact_force_n, s.true_force_n});
    trials.push_back({{"object", t.object},
                      {"seen", t.seen},
                      {"delicate", t.delicate},
                      {"trial", t.trial},
                      {"outcome", outcome_to_json(t.outcome)},
                      {"trace", trace}});
  }
  json per_object = json::array();
  for (const ObjectSummary& s : rep.per_object)
    per_object.push_back({{"object", s.object},
                          {"seen", s.seen},
                          {"delicate", s.delicate},
                          {"success_rate", s.success_rate},
                          {"mean_final_aperture_mm", s.mean_final_aperture_mm},
                          {"mean_final_force_n", s.mean_final_force_n},
                          {"success", s.success},
                          {"deformation", s.deformation},
                          {"slip", s.slip},
                          {"null_grasp", s.null_grasp}});
  json mush = json::array();
  for (const MushinessTrace& m : rep.mushiness)
    mush.push_back({{"object", m.object},
                    {"rest_width_mm", m.rest_width_mm},
                    {"total_degradation_mm", m.total_degradation_mm}});
  return {{"format", "forcegrasp-eval-report"},
          {"schema_version", 1},
          {"policy_name", rep.policy_name},
          {"seed", rep.seed},
          {"ticks", rep.ticks},
          {"dt_s", rep.dt_s},
          {"catalog", rep.catalog_names},
          {"aggregates",
           {{"trials", rep.agg.trials},
            {"overall_success", rep.agg.overall_success},
            {"seen_success", rep.agg.seen_success},
            {"unseen_success", rep.agg.unseen_success},
            {"delicate_success", rep.agg.delicate_success},
            {"null_rate", rep.agg.null_rate},
            {"slip_count", rep.agg.slip_count},
            {"deformation_count", rep.agg.deformation_count},
            {"slip_share", rep.agg.slip_share},
            {"deformation_share", rep.agg.deformation_share}}},
          {"per_object", per_object},
          {"mushiness", mush},
          {"trials", trials}};
}

EvalReport report_from_json(const json& j) {
  if (j.value("format", "") != "forcegrasp-eval-report" || j.value("schema_version", -1) != 1)
    throw ValidationError("report.format", "not a recognized evaluation report");
  EvalReport rep;
  rep.policy_name = j.at("policy_name").get<std::string>();
  rep.seed = j.at("seed").get<uint64_t>();
  rep.ticks = j.at("ticks").get<int>();
  rep.dt_s = j.at("dt_s").get<double>();
  rep.catalog_names = j.at("catalog").get<std::vector<std::string>>();
  for (const json& t : j.at("trials")) {
    TrialRecord tr;
    tr.object = t.at("object").get<std::string>();
    tr.seen = t.at("seen").get<bool>();
    tr.delicate = t.at("delicate").get<bool>();
    tr.trial = t.at("trial").get<int>();
    tr.outcome = outcome_from_json(t.at("outcome"));
    for (const json& s : t.at("trace")) {
      if (!s.is_array() || s.size() != 5)
        throw ValidationError("report.trace", "trace samples must have 5 columns");
      tr.trace.push_back({s[0].get<double>(), s[1].get<double>(), s[2].get<double>(),
                          s[3].get<double>(), s[4].get<double>()});
    }
    rep.trials.push_back(std::move(tr));
  }
  for (const json& s : j.at("per_object")) {
    ObjectSummary os;
    os.object = s.at("object").get<std::string>();
    os.seen = s.at("seen").get<bool>();
    os.delicate = s.at("delicate").get<bool>();
    os.success_rate = s.at("success_rate").get<double>();
    os.mean_final_aperture_mm = s.at("mean_final_aperture_mm").get<double>();
    os.mean_final_force_n = s.at("mean_final_force_n").get<double>();
    os.success = s.at("success").get<int>();
    os.deformation = s.at("deformation").get<int>();
    os.slip = s.at("slip").get<int>();
    os.null_grasp = s.at("null_grasp").get<int>();
    rep.per_object.push_back(std::move(os));
  }
  for (const json& m : j.at("mushiness")) {
    MushinessTrace mt;
    mt.object = m.at("object").get<std::string>();
    mt.rest_width_mm = m.at("rest_width_mm").get<std::vector<double>>();
    mt.total_degradation_mm = m.at("total_degradation_mm").get<double>();
    rep.mushiness.push_back(std::move(mt));
  }
  const json& a = j.at("aggregates");
  rep.agg.trials = a.at("trials").get<int>();
  rep.agg.overall_success = a.at("overall_success").get<double>();
  rep.agg.seen_success = a.at("seen_success").get<double>();
  rep.agg.unseen_success = a.at("unseen_success").get<double>();
  rep.agg.delicate_success = a.at("delicate_success").get<double>();
  rep.agg.null_rate = a.at("null_rate").get<double>();
  rep.agg.slip_count = a.at("slip_count").get<int>();
  rep.agg.deformation_count = a.at("deformation_count").get<int>();
  rep.agg.slip_share = a.at("slip_share").get<double>();
  rep.agg.deformation_share = a.at("deformation_share").get<double>();
  if (rep.agg.trials != static_cast<int>(rep.trials.size()))
    throw ValidationError("report.counts", "aggregate trial count disagrees with the table");
  return rep;
}

}  // namespace fg
