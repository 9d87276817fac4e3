#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fg/dataset.hpp"
#include "fg/diffusion.hpp"
#include "fg/episode.hpp"
#include "fg/evaluate.hpp"
#include "fg/nn.hpp"
#include "fg/rng.hpp"

// Diffusion policy over gripper action sequences: an MLP noise predictor
// conditioned on a short observation history, a projected instruction
// embedding and the diffusion timestep, trained with the standard
// epsilon-prediction MSE objective and executed with receding-horizon
// replanning (one action per tick).

namespace fg {

// Channel selection. forceful reads [gripper_position, applied_force,
// contact_force] and emits [gripper_position, gripper_force]; position_only
// reads [gripper_position], emits [gripper_position] and applies a constant
// force at execution. The separation is structural: a position_only network
// has no input dimension a force value could enter through.
enum class Variant { forceful, position_only };

const char* to_string(Variant v);
Variant variant_from_string(const std::string& s);

struct PolicyConfig {
  Variant variant = Variant::forceful;
  int obs_horizon = 2;         // observation history length per window
  int pred_horizon = 16;       // predicted actions per window
  int act_horizon_train = 8;   // nominal executed-action span in training pairs
  int act_horizon_eval = 1;    // actions executed per replan
  int diffusion_steps = 100;
  double beta_start = 1e-4;
  double beta_end = 0.02;
  int instr_proj_dim = 32;     // learned 512 -> 32 projection
  int time_embed_dim = 32;
  std::vector<size_t> hidden = {512, 512};
  int train_steps = 3000;
  int batch_size = 16;
  double learning_rate = 1e-3;
  bool cosine_lr = false;          // warmup + cosine decay instead of constant rate
  double ema_decay = 0.0;          // weight EMA used for the returned net; 0 disables
  double constant_force_n = 2.0;   // position_only execution force
  double clamp_aperture_max_mm = 85.0;
  double clamp_force_min_n = 0.15;
  double clamp_force_max_n = 8.0;

  size_t obs_dim() const { return variant == Variant::forceful ? 3 : 1; }
  size_t act_dim() const { return variant == Variant::forceful ? 2 : 1; }
  size_t obs_window_dim() const { return static_cast<size_t>(obs_horizon) * obs_dim(); }
  size_t x_dim() const { return static_cast<size_t>(pred_horizon) * act_dim(); }
  size_t input_dim() const {
    return obs_window_dim() + static_cast<size_t>(instr_proj_dim) +
           static_cast<size_t>(time_embed_dim) + x_dim();
  }
};

void validate_policy_config(const PolicyConfig& cfg);

nlohmann::json policy_config_to_json(const PolicyConfig& cfg);
PolicyConfig policy_config_from_json(const nlohmann::json& j);

// One supervised pair: normalized observation window, raw instruction
// embedding and normalized action window (the diffusion target x0).
struct TrainingPair {
  std::vector<double> obs;    // obs_horizon * obs_dim, channel-normalized
  std::vector<double> instr;  // kEmbeddingDim
  std::vector<double> act;    // pred_horizon * act_dim, channel-normalized
};

// One pair per step of each grasp-only episode: the observation window ends
// at the step (front-padded by repeating the first step), the action window
// starts at it (back-padded by repeating the last action). Episodes shorter
// than 2 steps are skipped with a log line.
std::vector<TrainingPair> build_training_pairs(std::span<const Episode> grasp_episodes,
                                               const PolicyConfig& cfg, const NormStats& stats);

struct DenoiserCache {
  Tensor instr;   // [batch, 512]
  Tensor xt;      // [batch, x_dim], kept for the noise-skip gradient
  Tensor cond;    // [batch, obs_window+proj], kept for the cond-skip gradient
  MlpCache trunk; // trunk.inputs[0] is the assembled conditioning row
};

// eps_hat = trunk([obs_window, proj(instr), time_embedding(t), x_t])
//           + skip(x_t) + cond_skip([obs_window, proj(instr)])
//
// The noise skip carries the near-identity part of noise prediction (at low
// timesteps eps is almost readable from x_t directly) and the conditioning
// skip carries per-instruction output offsets, so the trunk spends its
// capacity on the nonlinear structure instead of relearning either.
class Denoiser {
 public:
  Denoiser() = default;
  Denoiser(const PolicyConfig& cfg, Rng& init);

  Tensor forward(const Tensor& obs, const Tensor& instr, std::span<const int> t,
                 const Tensor& xt, DenoiserCache* cache = nullptr) const;
  // Overwrites parameter gradients from the cached forward pass.
  void backward(const DenoiserCache& cache, const Tensor& dout);

  std::vector<Tensor*> params();
  std::vector<Tensor*> grads();
  std::vector<const Tensor*> params() const;

 private:
  PolicyConfig cfg_;
  Linear instr_proj_;
  Mlp trunk_;
  Linear skip_;
  Linear cond_skip_;
};

struct Policy {
  PolicyConfig cfg;
  NormStats stats;
  NoiseSchedule schedule;
  Denoiser net;
  std::string name;  // e.g. "forceful" / "position_only"
};

struct TrainResult {
  Policy policy;
  std::vector<double> loss_trace;      // one entry per optimization step
  std::vector<double> val_trace;       // validation loss every val_every steps
  int val_every = 100;
};

// Deterministic under (pairs, cfg, seed); throws ValidationError("train.nan")
// with step diagnostics if the loss leaves the reals.
TrainResult train_policy(std::span<const TrainingPair> pairs,
                         std::span<const TrainingPair> val_pairs, const PolicyConfig& cfg,
                         const NormStats& stats, uint64_t seed, std::string policy_name);

// Full reverse diffusion from Gaussian noise; returns pred_horizon * act_dim
// denormalized actions, clamped to the aperture/force ranges. obs_window is
// raw (unnormalized) channel values, oldest first.
std::vector<double> sample_actions(const Policy& policy, std::span<const double> obs_window,
                                   std::span<const double> instruction_embedding, Rng& rng);

// Receding-horizon wrapper around sample_actions: keeps the observation
// history, executes the first predicted action each tick. Invalid (non-finite)
// observations are skipped and counted; the previous command is repeated.
class PolicyAgent : public GraspAgent {
 public:
  PolicyAgent(const Policy* policy, std::vector<double> instruction_embedding);

  GripperCommand act(const GripperObservation& obs, Rng& rng) override;
  int skipped_ticks() const { return skipped_; }

 private:
  const Policy* policy_;
  std::vector<double> instr_;
  std::vector<std::vector<double>> history_;  // raw obs rows, newest last
  GripperCommand last_cmd_;
  int skipped_ = 0;
};

// Factory for the evaluation harness; the policy must outlive it.
AgentFactory policy_agent_factory(const Policy& policy);

// Two files: <path> in the nn-core checkpoint format and <path>.json with the
// policy config + normalization stats. Loading rebuilds the network from the
// sidecar and refuses mismatched checkpoint shapes.
void save_policy(const Policy& policy, const std::filesystem::path& path);
Policy load_policy(const std::filesystem::path& path);

}  // namespace fg
