#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ilsel/matrix.hpp"

namespace ilsel {

// One trajectory: T states aligned with T actions (the state observed before
// each action). A trailing terminal state may be stored; metrics ignore it.
struct Episode {
  std::int64_t episode_id = 0;
  Matrix states;   // T or T+1 rows
  Matrix actions;  // T rows
  std::optional<std::vector<double>> env_rewards;  // length T when present

  std::size_t steps() const { return actions.rows; }
  double return_sum() const;

  void validate() const;  // throws on shape violations
};

struct EnvMeta {
  std::string env_id;
  std::size_t obs_dim = 0;
  std::size_t action_dim = 0;
  std::vector<double> action_low;
  std::vector<double> action_high;
  double random_return = 0.0;  // normalized-return anchor 0
  double demo_return = 0.0;    // normalized-return anchor 1

  void validate() const;
};

struct NormStats {
  std::vector<double> mean;
  std::vector<double> std;  // degenerate coordinates replaced by 1.0
};

struct DemoSet {
  std::vector<Episode> train;
  std::vector<Episode> valid;
  std::uint64_t split_seed = 0;
  NormStats norm_stats;
};

// Deterministic shuffle by seed, first n_train to train, next n_valid to
// valid. Normalization statistics cover the selected train+valid states.
DemoSet split_demos(const std::vector<Episode>& episodes, std::size_t n_train,
                    std::size_t n_valid, std::uint64_t seed);

NormStats compute_norm_stats(const std::vector<const Episode*>& episodes);

// Per-coordinate division by std; no mean-centering.
Matrix standardize_states(const Matrix& states, const NormStats& stats);

// Affine map [low, high] -> [-1, 1] per coordinate. Out-of-range inputs are
// clamped; the clamp count is reported through `clamped` when non-null.
std::vector<double> rescale_action(std::span<const double> action, const EnvMeta& meta,
                                   std::size_t* clamped = nullptr);
std::vector<double> unscale_action(std::span<const double> scaled, const EnvMeta& meta);

double normalize_return(double raw_return, const EnvMeta& meta);

// Aligned (pre-action) states of the first `max_episodes` episodes pooled
// into one matrix; pass SIZE_MAX for all episodes.
Matrix pool_states(const std::vector<Episode>& episodes, std::size_t max_episodes = SIZE_MAX);

// One (config, seed, checkpoint) evaluation record.
struct EvalBundle {
  int config_id = 0;
  int seed = 0;
  int checkpoint = 0;
  std::vector<Episode> rollouts;  // agent-generated, with env_rewards
  Matrix probe_actions_train;     // one action per train demo state, aligned
  Matrix probe_actions_valid;
  std::optional<std::vector<std::vector<double>>> imitation_rewards;  // per rollout, per step

  void validate() const;
};

}  // namespace ilsel
