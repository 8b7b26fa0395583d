#include "ilsel/data.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ilsel/rng.hpp"
#include "ilsel/stats.hpp"

namespace ilsel {

double Episode::return_sum() const {
  if (!env_rewards) throw std::runtime_error("episode has no environment rewards");
  return ordered_sum(*env_rewards);
}

void Episode::validate() const {
  const std::size_t t = actions.rows;
  if (t < 1) throw std::invalid_argument("episode must have at least one step");
  if (states.rows != t && states.rows != t + 1)
    throw std::invalid_argument("episode states must have T or T+1 rows (T=" + std::to_string(t) +
                                ", got " + std::to_string(states.rows) + ")");
  if (env_rewards && env_rewards->size() != t)
    throw std::invalid_argument("episode rewards length must equal action count");
  for (double x : states.v)
    if (!std::isfinite(x)) throw std::invalid_argument("episode contains non-finite state");
  for (double x : actions.v)
    if (!std::isfinite(x)) throw std::invalid_argument("episode contains non-finite action");
}

void EnvMeta::validate() const {
  if (obs_dim == 0 || action_dim == 0)
    throw std::invalid_argument("EnvMeta: dimensions must be positive");
  if (action_low.size() != action_dim || action_high.size() != action_dim)
    throw std::invalid_argument("EnvMeta: action bounds must have action_dim entries");
  for (std::size_t i = 0; i < action_dim; ++i)
    if (!(action_low[i] < action_high[i]))
      throw std::invalid_argument("EnvMeta: action_low must be strictly below action_high");
  if (demo_return == random_return)
    throw std::invalid_argument("EnvMeta: demo_return must differ from random_return");
}

NormStats compute_norm_stats(const std::vector<const Episode*>& episodes) {
  if (episodes.empty()) throw std::invalid_argument("compute_norm_stats: no episodes");
  const std::size_t dim = episodes[0]->states.cols;
  NormStats stats;
  stats.mean.assign(dim, 0.0);
  stats.std.assign(dim, 0.0);

  std::size_t count = 0;
  for (const Episode* ep : episodes) {
    const std::size_t t = ep->steps();
    for (std::size_t r = 0; r < t; ++r) {
      auto row = ep->states.row(r);
      for (std::size_t c = 0; c < dim; ++c) stats.mean[c] += row[c];
    }
    count += t;
  }
  for (std::size_t c = 0; c < dim; ++c) stats.mean[c] /= static_cast<double>(count);

  if (count >= 2) {
    for (const Episode* ep : episodes) {
      const std::size_t t = ep->steps();
      for (std::size_t r = 0; r < t; ++r) {
        auto row = ep->states.row(r);
        for (std::size_t c = 0; c < dim; ++c) {
          const double d = row[c] - stats.mean[c];
          stats.std[c] += d * d;
        }
      }
    }
    for (std::size_t c = 0; c < dim; ++c)
      stats.std[c] = std::sqrt(stats.std[c] / static_cast<double>(count - 1));
  }
  // Constant coordinates would blow up the division; scale them by 1.
  for (std::size_t c = 0; c < dim; ++c)
    if (stats.std[c] < 1e-8) stats.std[c] = 1.0;
  return stats;
}

DemoSet split_demos(const std::vector<Episode>& episodes, std::size_t n_train,
                    std::size_t n_valid, std::uint64_t seed) {
  if (n_train < 1 || n_valid < 1)
    throw std::invalid_argument("split_demos: counts must be at least 1");
  if (n_train + n_valid > episodes.size())
    throw std::invalid_argument("split_demos: need " + std::to_string(n_train + n_valid) +
                                " episodes (" + std::to_string(n_train) + " train + " +
                                std::to_string(n_valid) + " valid), got " +
                                std::to_string(episodes.size()));
  for (const Episode& ep : episodes) ep.validate();

  std::vector<std::size_t> order(episodes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = substream(seed, "split");
  rng.shuffle(order);

  DemoSet set;
  set.split_seed = seed;
  set.train.reserve(n_train);
  set.valid.reserve(n_valid);
  for (std::size_t i = 0; i < n_train; ++i) set.train.push_back(episodes[order[i]]);
  for (std::size_t i = 0; i < n_valid; ++i) set.valid.push_back(episodes[order[n_train + i]]);

  std::vector<const Episode*> selected;
  for (const Episode& ep : set.train) selected.push_back(&ep);
  for (const Episode& ep : set.valid) selected.push_back(&ep);
  set.norm_stats = compute_norm_stats(selected);
  return set;
}

Matrix standardize_states(const Matrix& states, const NormStats& stats) {
  if (states.cols != stats.std.size())
    throw std::invalid_argument("standardize_states: dimension mismatch (" +
                                std::to_string(states.cols) + " vs " +
                                std::to_string(stats.std.size()) + ")");
  Matrix out = states;
  for (std::size_t r = 0; r < out.rows; ++r) {
    auto row = out.row(r);
    for (std::size_t c = 0; c < out.cols; ++c) row[c] /= stats.std[c];
  }
  return out;
}

std::vector<double> rescale_action(std::span<const double> action, const EnvMeta& meta,
                                   std::size_t* clamped) {
  if (action.size() != meta.action_dim)
    throw std::invalid_argument("rescale_action: dimension mismatch");
  std::vector<double> out(action.size());
  for (std::size_t i = 0; i < action.size(); ++i) {
    double a = action[i];
    if (a < meta.action_low[i] || a > meta.action_high[i]) {
      a = std::clamp(a, meta.action_low[i], meta.action_high[i]);
      if (clamped) ++*clamped;
    }
    out[i] = 2.0 * (a - meta.action_low[i]) / (meta.action_high[i] - meta.action_low[i]) - 1.0;
  }
  return out;
}

std::vector<double> unscale_action(std::span<const double> scaled, const EnvMeta& meta) {
  if (scaled.size() != meta.action_dim)
    throw std::invalid_argument("unscale_action: dimension mismatch");
  std::vector<double> out(scaled.size());
  for (std::size_t i = 0; i < scaled.size(); ++i)
    out[i] = meta.action_low[i] +
             (scaled[i] + 1.0) * 0.5 * (meta.action_high[i] - meta.action_low[i]);
  return out;
}

double normalize_return(double raw_return, const EnvMeta& meta) {
  return (raw_return - meta.random_return) / (meta.demo_return - meta.random_return);
}

Matrix pool_states(const std::vector<Episode>& episodes, std::size_t max_episodes) {
  const std::size_t n = std::min(max_episodes, episodes.size());
  if (n == 0) throw std::invalid_argument("pool_states: no episodes");
  const std::size_t dim = episodes[0].states.cols;
  std::size_t total = 0;
  for (std::size_t e = 0; e < n; ++e) total += episodes[e].steps();
  Matrix pool(total, dim);
  std::size_t r = 0;
  for (std::size_t e = 0; e < n; ++e) {
    const Episode& ep = episodes[e];
    if (ep.states.cols != dim) throw std::invalid_argument("pool_states: dimension mismatch");
    const std::size_t t = ep.steps();
    std::copy_n(ep.states.v.data(), t * dim, pool.v.data() + r * dim);
    r += t;
  }
  return pool;
}

void EvalBundle::validate() const {
  if (checkpoint < 0) throw std::invalid_argument("EvalBundle: checkpoint must be >= 0");
  for (const Episode& ep : rollouts) ep.validate();
  if (imitation_rewards) {
    if (imitation_rewards->size() != rollouts.size())
      throw std::invalid_argument("EvalBundle: imitation_rewards must cover every rollout");
    for (std::size_t e = 0; e < rollouts.size(); ++e)
      if ((*imitation_rewards)[e].size() != rollouts[e].steps())
        throw std::invalid_argument("EvalBundle: imitation_rewards length mismatch on rollout " +
                                    std::to_string(e));
  }
}

}  // namespace ilsel
