#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "fg/episode.hpp"
#include "fg/sim.hpp"

#include <json.hpp>

namespace fg {

// Full invariant check for one episode; throws ValidationError with a rule
// name ("flags.is_first", "shape.action", "subtask.order", ...).
void validate_episode(const Episode& ep);

// JSON-lines corpus: one header line (format + schema version), then one
// step object per line. Episode boundaries come from is_first/is_last;
// episode-level metadata rides on the is_first line. Numbers round-trip
// bit-exactly. Readers validate everything and report rule + line number.
void write_episodes(std::span<const Episode> episodes, const std::filesystem::path& path);
std::vector<Episode> read_episodes(const std::filesystem::path& path);

// Keeps only the grasp-subtask span of each episode and restamps boundary
// flags. Episodes without grasp steps are dropped with a log entry.
// Idempotent: applying it twice equals applying it once.
std::vector<Episode> grasp_only(std::span<const Episode> episodes);

struct ChannelStat {
  double mean = 0;
  double stddev = 1;
};

// Per-channel normalization statistics for the channels the policies use.
// Computed over grasp-subtask steps of the training split only; stddev is
// floored at 1e-6 so constant channels stay harmless.
struct NormStats {
  ChannelStat obs_gripper_position;
  ChannelStat obs_applied_force;
  ChannelStat obs_contact_force;
  ChannelStat act_gripper_position;
  ChannelStat act_gripper_force;
};

NormStats compute_norm_stats(std::span<const Episode> train_grasp_episodes);

nlohmann::json norm_stats_to_json(const NormStats& s);
NormStats norm_stats_from_json(const nlohmann::json& j);

// Deterministic per-object stratified split; every object keeps at least one
// training episode. Returns (train, validation).
std::pair<std::vector<Episode>, std::vector<Episode>> split_episodes(
    std::span<const Episode> episodes, double train_ratio, uint64_t seed);

// Hashed bag-of-words embedding: whitespace tokens hashed into kEmbeddingDim
// signed buckets, then L2-normalized. Deterministic; distinct nouns land
// nearly orthogonal. Throws on text with no tokens.
std::vector<double> embed_instruction(std::string_view text);

}  // namespace fg
