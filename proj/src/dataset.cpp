#include "fg/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include "fg/log.hpp"
#include "fg/rng.hpp"

namespace fg {

using nlohmann::json;

static constexpr const char* kFormatName = "forcegrasp-episodes";
static constexpr int kSchemaVersion = 1;

static int subtask_rank(const std::string& s) {
  if (s == "approach") return 0;
  if (s == "grasp") return 1;
  if (s == "home") return 2;
  return -1;
}

void validate_episode(const Episode& ep) {
  if (ep.steps.size() < 2)
    throw ValidationError("episode.length", "episode must have at least 2 steps");
  if (ep.object_name.empty())
    throw ValidationError("episode.metadata", "episode is missing an object name");
  int prev_rank = 0;
  for (size_t i = 0; i < ep.steps.size(); ++i) {
    const StepRecord& s = ep.steps[i];
    if (s.is_first != (i == 0))
      throw ValidationError("flags.is_first", "is_first must be set exactly on the first step");
    if (s.is_last != (i + 1 == ep.steps.size()))
      throw ValidationError("flags.is_last", "is_last must be set exactly on the last step");
    if (s.language_embedding.size() != kEmbeddingDim)
      throw ValidationError("shape.language_embedding", "language_embedding must have 512 entries");
    int rank = subtask_rank(s.subtask);
    if (rank < 0) throw ValidationError("subtask.value", "unknown subtask '" + s.subtask + "'");
    if (rank < prev_rank)
      throw ValidationError("subtask.order", "subtask order must follow approach->grasp->home");
    prev_rank = rank;
    if (s.observation.applied_force < 0 || s.observation.contact_force < 0 ||
        s.action[kActionGripperForce] < 0)
      throw ValidationError("force.negative", "forces must be non-negative");
    for (double v : s.action)
      if (!std::isfinite(v)) throw ValidationError("value.nonfinite", "non-finite action value");
    for (double v : s.observation.state)
      if (!std::isfinite(v)) throw ValidationError("value.nonfinite", "non-finite state value");
    for (double v : s.language_embedding)
      if (!std::isfinite(v)) throw ValidationError("value.nonfinite", "non-finite embedding value");
    if (s.observation.state[kStateGripperPos] != s.observation.gripper_position ||
        s.observation.state[kStateAppliedForce] != s.observation.applied_force ||
        s.observation.state[kStateContactForce] != s.observation.contact_force)
      throw ValidationError("state.mirror",
                            "state vector must mirror the scalar observation fields");
  }
  const StepRecord& last = ep.steps.back();
  if (last.reward > 0 && !last.is_terminal)
    throw ValidationError("flags.terminal", "a rewarded final step must be terminal");
}

// ---------------- serialization ----------------

static json step_to_json(const Episode& ep, const StepRecord& s) {
  json j;
  j["action"] = s.action;
  j["action_dict"] = {{"cartesian_position", s.action_dict.cartesian_position},
                      {"gripper_force", s.action_dict.gripper_force},
                      {"gripper_position", s.action_dict.gripper_position},
                      {"rotation", s.action_dict.rotation},
                      {"translation", s.action_dict.translation}};
  j["observation"] = {{"state", s.observation.state},
                      {"applied_force", s.observation.applied_force},
                      {"cartesian_position", s.observation.cartesian_position},
                      {"contact_force", s.observation.contact_force},
                      {"gripper_position", s.observation.gripper_position},
                      {"joint_position", s.observation.joint_position},
                      {"image_ref", s.observation.image_ref},
                      {"wrist_image_ref", s.observation.wrist_image_ref}};
  j["language_instruction"] = s.language_instruction;
  j["language_embedding"] = s.language_embedding;
  j["subtask"] = s.subtask;
  j["is_first"] = s.is_first;
  j["is_last"] = s.is_last;
  j["is_terminal"] = s.is_terminal;
  j["discount"] = s.discount;
  j["reward"] = s.reward;
  if (s.is_first)
    j["episode_metadata"] = {{"file_path", ep.file_path},
                             {"object_name", ep.object_name},
                             {"seen", ep.seen}};
  return j;
}

void write_episodes(std::span<const Episode> episodes, const std::filesystem::path& path) {
  for (const Episode& ep : episodes) validate_episode(ep);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("io.open", "cannot open " + path.string() + " for writing");
  json header = {{"format", kFormatName}, {"schema_version", kSchemaVersion}};
  out << header.dump() << '\n';
  for (const Episode& ep : episodes)
    for (const StepRecord& s : ep.steps) out << step_to_json(ep, s).dump() << '\n';
  if (!out) throw ValidationError("io.write", "failed writing " + path.string());
}

namespace {

const json& need(const json& j, const char* key, size_t line) {
  auto it = j.find(key);
  if (it == j.end())
    throw ValidationError("field.missing", std::string("missing field '") + key + "'", line);
  return *it;
}

void read_fixed(const json& a, double* out, size_t n, const char* rule, size_t line) {
  if (!a.is_array() || a.size() != n)
    throw ValidationError(rule, "expected an array of length " + std::to_string(n), line);
  for (size_t i = 0; i < n; ++i) {
    if (!a[i].is_number()) throw ValidationError(rule, "expected numeric entries", line);
    out[i] = a[i].get<double>();
  }
}

StepRecord parse_step(const json& j, size_t line) {
  StepRecord s;
  read_fixed(need(j, "action", line), s.action.data(), kActionDim, "shape.action", line);

  const json& ad = need(j, "action_dict", line);
  read_fixed(need(ad, "cartesian_position", line), s.action_dict.cartesian_position.data(), 6,
             "shape.action_dict", line);
  s.action_dict.gripper_force = need(ad, "gripper_force", line).get<double>();
  s.action_dict.gripper_position = need(ad, "gripper_position", line).get<double>();
  read_fixed(need(ad, "rotation", line), s.action_dict.rotation.data(), 3, "shape.action_dict",
             line);
  read_fixed(need(ad, "translation", line), s.action_dict.translation.data(), 3,
             "shape.action_dict", line);

  const json& ob = need(j, "observation", line);
  read_fixed(need(ob, "state", line), s.observation.state.data(), kStateDim, "shape.state", line);
  s.observation.applied_force = need(ob, "applied_force", line).get<double>();
  read_fixed(need(ob, "cartesian_position", line), s.observation.cartesian_position.data(), 6,
             "shape.observation", line);
  s.observation.contact_force = need(ob, "contact_force", line).get<double>();
  s.observation.gripper_position = need(ob, "gripper_position", line).get<double>();
  read_fixed(need(ob, "joint_position", line), s.observation.joint_position.data(), 6,
             "shape.observation", line);
  s.observation.image_ref = need(ob, "image_ref", line).get<std::string>();
  s.observation.wrist_image_ref = need(ob, "wrist_image_ref", line).get<std::string>();

  s.language_instruction = need(j, "language_instruction", line).get<std::string>();
  const json& emb = need(j, "language_embedding", line);
  if (!emb.is_array() || emb.size() != kEmbeddingDim)
    throw ValidationError("shape.language_embedding",
                          "language_embedding must have 512 entries", line);
  s.language_embedding.resize(kEmbeddingDim);
  for (size_t i = 0; i < kEmbeddingDim; ++i) s.language_embedding[i] = emb[i].get<double>();

  s.subtask = need(j, "subtask", line).get<std::string>();
  if (subtask_rank(s.subtask) < 0)
    throw ValidationError("subtask.value", "unknown subtask '" + s.subtask + "'", line);
  s.is_first = need(j, "is_first", line).get<bool>();
  s.is_last = need(j, "is_last", line).get<bool>();
  s.is_terminal = need(j, "is_terminal", line).get<bool>();
  s.discount = need(j, "discount", line).get<double>();
  s.reward = need(j, "reward", line).get<double>();

  if (s.observation.applied_force < 0 || s.observation.contact_force < 0 ||
      s.action[kActionGripperForce] < 0)
    throw ValidationError("force.negative", "forces must be non-negative", line);
  return s;
}

}  // namespace

std::vector<Episode> read_episodes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("io.open", "cannot open " + path.string());

  std::string text;
  size_t line_no = 0;

  if (!std::getline(in, text))
    throw ValidationError("header.missing", "empty file, expected a schema header", 1);
  ++line_no;
  json header;
  try {
    header = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError("json.parse", std::string("header: ") + e.what(), line_no);
  }
  if (!header.is_object() || header.value("format", "") != kFormatName)
    throw ValidationError("header.version", "not a " + std::string(kFormatName) + " file",
                          line_no);
  if (header.value("schema_version", -1) != kSchemaVersion)
    throw ValidationError("header.version", "unsupported schema_version", line_no);

  std::vector<Episode> episodes;
  Episode open;
  bool has_open = false;
  int prev_rank = 0;

  while (std::getline(in, text)) {
    ++line_no;
    if (text.empty()) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ValidationError("json.parse", e.what(), line_no);
    }
    StepRecord s = parse_step(j, line_no);

    if (s.is_first) {
      if (has_open)
        throw ValidationError("flags.is_first", "new episode started before is_last", line_no);
      auto meta = j.find("episode_metadata");
      if (meta == j.end())
        throw ValidationError("episode.metadata", "is_first step lacks episode_metadata",
                              line_no);
      open = Episode{};
      open.file_path = need(*meta, "file_path", line_no).get<std::string>();
      open.object_name = need(*meta, "object_name", line_no).get<std::string>();
      open.seen = need(*meta, "seen", line_no).get<bool>();
      has_open = true;
      prev_rank = 0;
    } else if (!has_open) {
      throw ValidationError("flags.is_first", "step outside any episode", line_no);
    }

    int rank = subtask_rank(s.subtask);
    if (rank < prev_rank)
      throw ValidationError("subtask.order", "subtask order must follow approach->grasp->home",
                            line_no);
    prev_rank = rank;

    bool last = s.is_last;
    double reward = s.reward;
    bool terminal = s.is_terminal;
    open.steps.push_back(std::move(s));

    if (last) {
      if (open.steps.size() < 2)
        throw ValidationError("episode.length", "episode must have at least 2 steps", line_no);
      if (reward > 0 && !terminal)
        throw ValidationError("flags.terminal", "a rewarded final step must be terminal",
                              line_no);
      validate_episode(open);
      episodes.push_back(std::move(open));
      has_open = false;
    }
  }
  if (has_open)
    throw ValidationError("flags.is_last", "file ended inside an episode", line_no);
  return episodes;
}

// ---------------- transforms ----------------

std::vector<Episode> grasp_only(std::span<const Episode> episodes) {
  std::vector<Episode> out;
  out.reserve(episodes.size());
  for (const Episode& ep : episodes) {
    size_t first = ep.steps.size(), last = 0;
    for (size_t i = 0; i < ep.steps.size(); ++i) {
      if (ep.steps[i].subtask == "grasp") {
        first = std::min(first, i);
        last = i;
      }
    }
    if (first == ep.steps.size()) {
      log::warn("episode %s has no grasp steps, dropped", ep.file_path.c_str());
      continue;
    }
    Episode g;
    g.file_path = ep.file_path;
    g.object_name = ep.object_name;
    g.seen = ep.seen;
    g.steps.assign(ep.steps.begin() + first, ep.steps.begin() + last + 1);
    for (size_t i = 0; i < g.steps.size(); ++i) {
      g.steps[i].is_first = (i == 0);
      g.steps[i].is_last = (i + 1 == g.steps.size());
      g.steps[i].is_terminal = g.steps[i].is_last;
    }
    if (g.steps.size() < 2) {
      log::warn("episode %s has fewer than 2 grasp steps, dropped", ep.file_path.c_str());
      continue;
    }
    out.push_back(std::move(g));
  }
  return out;
}

namespace {

struct Welford {
  double sum = 0, sum_sq = 0;
  size_t n = 0;
  void add(double v) {
    sum += v;
    sum_sq += v * v;
    ++n;
  }
  ChannelStat stat() const {
    ChannelStat s;
    if (n == 0) return s;
    s.mean = sum / static_cast<double>(n);
    double var = std::max(0.0, sum_sq / static_cast<double>(n) - s.mean * s.mean);
    s.stddev = std::max(std::sqrt(var), 1e-6);
    return s;
  }
};

}  // namespace

NormStats compute_norm_stats(std::span<const Episode> train_grasp_episodes) {
  Welford gp, af, cf, agp, agf;
  for (const Episode& ep : train_grasp_episodes) {
    for (const StepRecord& s : ep.steps) {
      if (s.subtask != "grasp") continue;
      gp.add(s.observation.gripper_position);
      af.add(s.observation.applied_force);
      cf.add(s.observation.contact_force);
      agp.add(s.action[kActionGripperPos]);
      agf.add(s.action[kActionGripperForce]);
    }
  }
  if (gp.n == 0)
    throw ValidationError("stats.empty", "no grasp steps available for normalization stats");
  NormStats st;
  st.obs_gripper_position = gp.stat();
  st.obs_applied_force = af.stat();
  st.obs_contact_force = cf.stat();
  st.act_gripper_position = agp.stat();
  st.act_gripper_force = agf.stat();
  return st;
}

static json stat_to_json(const ChannelStat& c) {
  return {{"mean", c.mean}, {"stddev", c.stddev}};
}

static ChannelStat stat_from_json(const json& j) {
  return {j.at("mean").get<double>(), j.at("stddev").get<double>()};
}

json norm_stats_to_json(const NormStats& s) {
  return {{"obs_gripper_position", stat_to_json(s.obs_gripper_position)},
          {"obs_applied_force", stat_to_json(s.obs_applied_force)},
          {"obs_contact_force", stat_to_json(s.obs_contact_force)},
          {"act_gripper_position", stat_to_json(s.act_gripper_position)},
          {"act_gripper_force", stat_to_json(s.act_gripper_force)}};
}

NormStats norm_stats_from_json(const json& j) {
  NormStats s;
  s.obs_gripper_position = stat_from_json(j.at("obs_gripper_position"));
  s.obs_applied_force = stat_from_json(j.at("obs_applied_force"));
  s.obs_contact_force = stat_from_json(j.at("obs_contact_force"));
  s.act_gripper_position = stat_from_json(j.at("act_gripper_position"));
  s.act_gripper_force = stat_from_json(j.at("act_gripper_force"));
  return s;
}

std::pair<std::vector<Episode>, std::vector<Episode>> split_episodes(
    std::span<const Episode> episodes, double train_ratio, uint64_t seed) {
  if (!(train_ratio > 0.0 && train_ratio < 1.0))
    throw ValidationError("split.ratio", "train_ratio must lie in (0, 1)");

  // group by object, preserving first-appearance order
  std::vector<std::string> order;
  std::map<std::string, std::vector<size_t>> groups;
  for (size_t i = 0; i < episodes.size(); ++i) {
    auto [it, inserted] = groups.try_emplace(episodes[i].object_name);
    if (inserted) order.push_back(episodes[i].object_name);
    it->second.push_back(i);
  }

  size_t want_val = static_cast<size_t>(
      std::llround((1.0 - train_ratio) * static_cast<double>(episodes.size())));

  // largest-remainder allocation of validation slots, one training episode
  // always left per object
  struct Quota {
    std::string name;
    size_t floor_n;
    double remainder;
    size_t cap;
  };
  std::vector<Quota> quotas;
  size_t assigned = 0;
  for (const auto& name : order) {
    double exact = (1.0 - train_ratio) * static_cast<double>(groups[name].size());
    Quota q;
    q.name = name;
    q.floor_n = static_cast<size_t>(exact);
    q.remainder = exact - static_cast<double>(q.floor_n);
    q.cap = groups[name].size() - 1;
    q.floor_n = std::min(q.floor_n, q.cap);
    assigned += q.floor_n;
    quotas.push_back(q);
  }
  std::vector<size_t> by_remainder(quotas.size());
  std::iota(by_remainder.begin(), by_remainder.end(), 0);
  std::stable_sort(by_remainder.begin(), by_remainder.end(), [&](size_t a, size_t b) {
    return quotas[a].remainder > quotas[b].remainder;
  });
  for (size_t idx : by_remainder) {
    if (assigned >= want_val) break;
    if (quotas[idx].floor_n < quotas[idx].cap) {
      ++quotas[idx].floor_n;
      ++assigned;
    }
  }

  Rng shuffle = Rng(seed).split("shuffle");
  std::vector<Episode> train, val;
  for (const Quota& q : quotas) {
    std::vector<size_t> idx = groups[q.name];
    Rng stream = shuffle.split(Rng::fnv1a(q.name));
    for (size_t i = idx.size(); i > 1; --i)
      std::swap(idx[i - 1], idx[stream.uniform_int(i)]);
    for (size_t i = 0; i < idx.size(); ++i) {
      if (i < q.floor_n)
        val.push_back(episodes[idx[i]]);
      else
        train.push_back(episodes[idx[i]]);
    }
  }
  return {std::move(train), std::move(val)};
}

std::vector<double> embed_instruction(std::string_view text) {
  std::vector<double> v(kEmbeddingDim, 0.0);
  size_t tokens = 0;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) {
      uint64_t h = Rng::fnv1a(text.substr(i, j - i));
      size_t bucket = (h >> 1) % kEmbeddingDim;
      double sign = (h & 1) ? 1.0 : -1.0;
      v[bucket] += sign;
      ++tokens;
    }
    i = j;
  }
  if (tokens == 0)
    throw ValidationError("instruction.empty", "instruction has no tokens to embed");
  double norm = 0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm > 0)
    for (double& x : v) x /= norm;
  return v;
}

}  // namespace fg
