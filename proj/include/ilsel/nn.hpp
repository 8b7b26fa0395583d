#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "ilsel/matrix.hpp"

namespace ilsel::nn {

// Feed-forward network, rectified-linear hidden layers, identity output.
// weights[l] is (layer_sizes[l] x layer_sizes[l+1]) row-major (input-major),
// so the batched forward pass accumulates outputs without cross-lane sums.
struct Mlp {
  std::vector<std::size_t> layer_sizes;
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;

  std::size_t input_dim() const { return layer_sizes.front(); }
  std::size_t output_dim() const { return layer_sizes.back(); }
  std::size_t layer_count() const { return weights.size(); }
  std::size_t param_count() const;
};

// Fan-in-scaled uniform weights in (-1/sqrt(fan_in), 1/sqrt(fan_in)),
// zero biases; bit-deterministic in the seed.
Mlp init_mlp(const std::vector<std::size_t>& layer_sizes, std::uint64_t seed);

Matrix forward(const Mlp& net, const Matrix& batch);
Matrix forward_serial(const Mlp& net, const Matrix& batch);

struct Gradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
};

// Mean over batch and output coordinates of the squared error, plus the full
// parameter gradient by reverse accumulation.
std::pair<double, Gradients> mse_grad(const Mlp& net, const Matrix& batch, const Matrix& targets);

struct AdamState {
  std::vector<std::vector<double>> m_weights, v_weights;
  std::vector<std::vector<double>> m_biases, v_biases;
  std::int64_t step_count = 0;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_hat = 1e-8;
};

AdamState init_adam(const Mlp& net, double learning_rate = 1e-3);

// Standard bias-corrected Adam update, in place.
void adam_step(Mlp& net, const Gradients& grads, AdamState& state);

// Trains `net` to regress `targets`; full-batch when the set has at most
// 4096 rows, otherwise minibatches of 256 with a seeded shuffle per epoch.
// Returns the per-epoch average loss.
std::vector<double> train_mse(Mlp& net, const Matrix& batch, const Matrix& targets, int epochs,
                              double learning_rate, std::uint64_t shuffle_seed);

void save_mlp(const Mlp& net, const std::filesystem::path& path);
Mlp load_mlp(const std::filesystem::path& path);

// FNV-1a over the exact parameter bytes; detects any mutation.
std::uint64_t param_hash(const Mlp& net);

inline constexpr std::size_t kFullBatchLimit = 4096;
inline constexpr std::size_t kMinibatchSize = 256;

}  // namespace ilsel::nn
