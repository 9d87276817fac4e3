#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>

#include "fg/evaluate.hpp"

// CSV tables and SVG time-series plots derived from evaluation reports.
// Numeric cells use shortest-round-trip formatting, so identical reports
// produce byte-identical files.

namespace fg {

// Published reference rates a policy's measured numbers are printed beside
// (overall/seen/unseen success and null-grasp rate). Known for the two stock
// policy names; nullopt otherwise.
struct ReferenceRates {
  double overall, seen, unseen, nulls;
};
std::optional<ReferenceRates> reference_rates(const std::string& policy_name);

// One row per object: outcome counts, success rate, mean final aperture/force.
void write_summary_csv(const EvalReport& rep, const std::filesystem::path& path);

// Aggregates with the reference columns (empty when no reference is known).
void write_aggregates_csv(std::span<const EvalReport> reports,
                          const std::filesystem::path& path);

// Long-format per-tick samples: policy,object,trial,tick,time_s,aperture_mm,
// applied_force_n,contact_force_n,true_force_n.
void write_trace_csv(const EvalReport& rep, const std::filesystem::path& path);

void write_comparison_csv(const Comparison& cmp, const std::filesystem::path& path);

// step,train_loss,val_loss — val_loss present every val_every rows.
void write_loss_csv(std::span<const double> loss, std::span<const double> val, int val_every,
                    const std::filesystem::path& path);

// Time-series plot for one object, first trial: aperture, applied force and
// sensed contact force for the primary report plus the aperture of the
// optional comparison report. Returns the SVG document.
std::string render_object_svg(const EvalReport& primary, const EvalReport* secondary,
                              const std::string& object);

// One SVG per catalog object into dir/<object>.svg (spaces dashed).
void write_object_svgs(const EvalReport& primary, const EvalReport* secondary,
                       const std::filesystem::path& dir);

// Fixed-width console table of the aggregates next to the reference rates.
std::string format_aggregate_table(std::span<const EvalReport> reports);

}  // namespace fg
