#include "fg/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "fg/error.hpp"

namespace fg {

// shortest round-trip decimal form, as in the JSON emitters
static std::string fmt(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

static std::string fmt(int v) { return std::to_string(v); }

static std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("io.open", "cannot open " + path.string() + " for writing");
  return out;
}

std::optional<ReferenceRates> reference_rates(const std::string& policy_name) {
  // published real-robot rates the simulated numbers are printed beside
  if (policy_name == "forceful") return ReferenceRates{0.82, 0.85, 0.80, 0.115};
  if (policy_name == "position_only") return ReferenceRates{0.54, 0.45, 0.60, 0.20};
  return std::nullopt;
}

void write_summary_csv(const EvalReport& rep, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "policy,object,seen,delicate,success_rate,success,deformation,slip,null_grasp,"
         "mean_final_aperture_mm,mean_final_force_n\n";
  for (const ObjectSummary& s : rep.per_object)
    out << rep.policy_name << ',' << s.object << ',' << s.seen << ',' << s.delicate << ','
        << fmt(s.success_rate) << ',' << s.success << ',' << s.deformation << ',' << s.slip
        << ',' << s.null_grasp << ',' << fmt(s.mean_final_aperture_mm) << ','
        << fmt(s.mean_final_force_n) << '\n';
  if (!out) throw ValidationError("io.write", "failed writing " + path.string());
}

void write_aggregates_csv(std::span<const EvalReport> reports,
                          const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "policy,trials,overall_success,seen_success,unseen_success,delicate_success,"
         "null_rate,slip_share,deformation_share,"
         "reference_overall,reference_seen,reference_unseen,reference_null_rate\n";
  for (const EvalReport& rep : reports) {
    const Aggregates& a = rep.agg;
    out << rep.policy_name << ',' << a.trials << ',' << fmt(a.overall_success) << ','
        << fmt(a.seen_success) << ',' << fmt(a.unseen_success) << ','
        << fmt(a.delicate_success) << ',' << fmt(a.null_rate) << ',' << fmt(a.slip_share)
        << ',' << fmt(a.deformation_share) << ',';
    if (auto ref = reference_rates(rep.policy_name))
      out << fmt(ref->overall) << ',' << fmt(ref->seen) << ',' << fmt(ref->unseen) << ','
          << fmt(ref->nulls);
    else
      out << ",,,";
    out << '\n';
  }
  if (!out) throw ValidationError("io.write", "failed writing " + path.string());
}

void write_trace_csv(const EvalReport& rep, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "policy,object,trial,tick,time_s,aperture_mm,applied_force_n,contact_force_n,"
         "true_force_n\n";
  for (const TrialRecord& t : rep.trials)
    for (size_t k = 0; k < t.trace.size(); ++k) {
      const TraceSample& s = t.trace[k];
      out << rep.policy_name << ',' << t.object << ',' << t.trial << ',' << k << ','
          << fmt(s.time_s) << ',' << fmt(s.aperture_mm) << ',' << fmt(s.applied_force_n) << ','
          << fmt(s.contact_force_n) << ',' << fmt(s.true_force_n) << '\n';
    }
  if (!out) throw ValidationError("io.write", "failed writing " + path.string());
}

void write_comparison_csv(const Comparison& cmp, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "object,delicate,aperture_delta_mm,force_delta_n,mushiness_delta_mm\n";
  for (const ObjectDelta& d : cmp.deltas)
    out << d.object << ',' << d.delicate << ',' << fmt(d.aperture_delta_mm) << ','
        << fmt(d.force_delta_n) << ',' << fmt(d.mushiness_delta_mm) << '\n';
  out << "# delicate_nonpositive_frac," << fmt(cmp.delicate_nonpositive_frac) << '\n';
  out << "# mushiness_total_forceful_mm," << fmt(cmp.mushiness_total_forceful_mm) << '\n';
  out << "# mushiness_total_position_only_mm," << fmt(cmp.mushiness_total_position_only_mm)
      << '\n';
  if (!out) throw ValidationError("io.write", "failed writing " + path.string());
}

void write_loss_csv(std::span<const double> loss, std::span<const double> val, int val_every,
                    const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "step,train_loss,val_loss\n";
  for (size_t i = 0; i < loss.size(); ++i) {
    out << (i + 1) << ',' << fmt(loss[i]) << ',';
    if (val_every > 0 && (i + 1) % static_cast<size_t>(val_every) == 0) {
      size_t vi = (i + 1) / static_cast<size_t>(val_every) - 1;
      if (vi < val.size()) out << fmt(val[vi]);
    }
    out << '\n';
  }
  if (!out) throw ValidationError("io.write", "failed writing " + path.string());
}

// ---------------- SVG ----------------

namespace {

struct Series {
  std::vector<double> x, y;
  const char* color;
  bool dashed;
  std::string label;
};

std::string polyline(const Series& s, double x0, double x1, double y0, double y1, double w,
                     double h, double left, double top) {
  std::string pts;
  for (size_t i = 0; i < s.x.size(); ++i) {
    double px = left + (s.x[i] - x0) / (x1 - x0) * w;
    double py = top + h - (s.y[i] - y0) / (y1 - y0) * h;
    pts += fmt(px) + "," + fmt(py) + " ";
  }
  std::string line = "<polyline fill=\"none\" stroke=\"" + std::string(s.color) +
                     "\" stroke-width=\"1.5\"";
  if (s.dashed) line += " stroke-dasharray=\"5,3\"";
  line += " points=\"" + pts + "\"/>\n";
  return line;
}

const TrialRecord* first_trial(const EvalReport& rep, const std::string& object) {
  for (const TrialRecord& t : rep.trials)
    if (t.object == object && t.trial == 0) return &t;
  return nullptr;
}

}  // namespace

std::string render_object_svg(const EvalReport& primary, const EvalReport* secondary,
                              const std::string& object) {
  const TrialRecord* tp = first_trial(primary, object);
  if (!tp) throw ValidationError("report.object", "object '" + object + "' not in the report");
  const TrialRecord* ts = secondary ? first_trial(*secondary, object) : nullptr;

  // left axis: aperture (mm); right axis: force (N)
  std::vector<Series> series;
  Series ap{{}, {}, "#1f77b4", false, primary.policy_name + " aperture"};
  Series af{{}, {}, "#2ca02c", true, primary.policy_name + " applied force"};
  Series cf{{}, {}, "#9467bd", true, primary.policy_name + " contact force"};
  for (const TraceSample& s : tp->trace) {
    ap.x.push_back(s.time_s);
    ap.y.push_back(s.aperture_mm);
    af.x.push_back(s.time_s);
    af.y.push_back(s.applied_force_n);
    cf.x.push_back(s.time_s);
    cf.y.push_back(s.contact_force_n);
  }
  Series ap2{{}, {}, "#d62728", false,
             (secondary ? secondary->policy_name : std::string()) + " aperture"};
  if (ts)
    for (const TraceSample& s : ts->trace) {
      ap2.x.push_back(s.time_s);
      ap2.y.push_back(s.aperture_mm);
    }

  double t_max = ap.x.empty() ? 1.0 : ap.x.back();
  double mm_max = 1.0, n_max = 1.0;
  for (double v : ap.y) mm_max = std::max(mm_max, v);
  for (double v : ap2.y) mm_max = std::max(mm_max, v);
  for (double v : af.y) n_max = std::max(n_max, v);
  for (double v : cf.y) n_max = std::max(n_max, v);
  mm_max *= 1.05;
  n_max *= 1.05;

  const double W = 640, H = 360, left = 56, right = 56, top = 32, bottom = 40;
  const double pw = W - left - right, ph = H - top - bottom;

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(W) +
                    "\" height=\"" + fmt(H) + "\" viewBox=\"0 0 " + fmt(W) + " " + fmt(H) +
                    "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + fmt(W / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" +
         object + "</text>\n";
  // frame
  svg += "<rect x=\"" + fmt(left) + "\" y=\"" + fmt(top) + "\" width=\"" + fmt(pw) +
         "\" height=\"" + fmt(ph) + "\" fill=\"none\" stroke=\"#444\"/>\n";
  // axis labels
  svg += "<text x=\"14\" y=\"" + fmt(top + ph / 2) + "\" font-size=\"11\" transform=\"rotate(-90 14 " +
         fmt(top + ph / 2) + ")\" text-anchor=\"middle\">aperture (mm)</text>\n";
  svg += "<text x=\"" + fmt(W - 14) + "\" y=\"" + fmt(top + ph / 2) +
         "\" font-size=\"11\" transform=\"rotate(90 " + fmt(W - 14) + " " + fmt(top + ph / 2) +
         ")\" text-anchor=\"middle\">force (N)</text>\n";
  svg += "<text x=\"" + fmt(left + pw / 2) + "\" y=\"" + fmt(H - 8) +
         "\" font-size=\"11\" text-anchor=\"middle\">time (s)</text>\n";
  // scale ticks (extremes only)
  svg += "<text x=\"" + fmt(left - 4) + "\" y=\"" + fmt(top + 10) +
         "\" font-size=\"10\" text-anchor=\"end\">" + fmt(mm_max) + "</text>\n";
  svg += "<text x=\"" + fmt(left + pw + 4) + "\" y=\"" + fmt(top + 10) +
         "\" font-size=\"10\">" + fmt(n_max) + "</text>\n";

  svg += polyline(ap, 0, t_max, 0, mm_max, pw, ph, left, top);
  svg += polyline(af, 0, t_max, 0, n_max, pw, ph, left, top);
  svg += polyline(cf, 0, t_max, 0, n_max, pw, ph, left, top);
  if (!ap2.x.empty()) svg += polyline(ap2, 0, t_max, 0, mm_max, pw, ph, left, top);

  // legend
  double ly = top + 14;
  auto legend = [&](const Series& s) {
    svg += "<line x1=\"" + fmt(left + 8) + "\" y1=\"" + fmt(ly - 4) + "\" x2=\"" +
           fmt(left + 32) + "\" y2=\"" + fmt(ly - 4) + "\" stroke=\"" + s.color + "\"" +
           (s.dashed ? " stroke-dasharray=\"5,3\"" : "") + "/>";
    svg += "<text x=\"" + fmt(left + 38) + "\" y=\"" + fmt(ly) + "\" font-size=\"10\">" +
           s.label + "</text>\n";
    ly += 14;
  };
  legend(ap);
  legend(af);
  legend(cf);
  if (!ap2.x.empty()) legend(ap2);

  svg += "</svg>\n";
  return svg;
}

void write_object_svgs(const EvalReport& primary, const EvalReport* secondary,
                       const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const std::string& object : primary.catalog_names) {
    std::string name = object;
    std::replace(name.begin(), name.end(), ' ', '-');
    std::ofstream out(dir / (name + ".svg"), std::ios::binary);
    if (!out)
      throw ValidationError("io.open", "cannot open " + (dir / (name + ".svg")).string());
    out << render_object_svg(primary, secondary, object);
    if (!out) throw ValidationError("io.write", "failed writing object plot for " + object);
  }
}

std::string format_aggregate_table(std::span<const EvalReport> reports) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-16s %7s %9s %9s %9s %9s %7s | %9s %9s\n", "policy",
                "trials", "overall", "seen", "unseen", "delicate", "null", "ref.ovr",
                "ref.null");
  out += line;
  for (const EvalReport& rep : reports) {
    const Aggregates& a = rep.agg;
    std::string ref_o = "-", ref_n = "-";
    if (auto ref = reference_rates(rep.policy_name)) {
      char b[32];
      std::snprintf(b, sizeof(b), "%.1f%%", ref->overall * 100);
      ref_o = b;
      std::snprintf(b, sizeof(b), "%.1f%%", ref->nulls * 100);
      ref_n = b;
    }
    std::snprintf(line, sizeof(line),
                  "%-16s %7d %8.1f%% %8.1f%% %8.1f%% %8.1f%% %6.1f%% | %9s %9s\n",
                  rep.policy_name.c_str(), a.trials, a.overall_success * 100,
                  a.seen_success * 100, a.unseen_success * 100, a.delicate_success * 100,
                  a.null_rate * 100, ref_o.c_str(), ref_n.c_str());
    out += line;
  }
  return out;
}

}  // namespace fg
