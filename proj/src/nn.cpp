#include "ilsel/nn.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "ilsel/rng.hpp"

namespace ilsel::nn {

namespace {

void affine_row(const double* x, std::size_t in_dim, const double* w, const double* b,
                std::size_t out_dim, double* out) {
  std::memcpy(out, b, out_dim * sizeof(double));
  for (std::size_t i = 0; i < in_dim; ++i) {
    const double xi = x[i];
    const double* wrow = w + i * out_dim;
    for (std::size_t o = 0; o < out_dim; ++o) out[o] += xi * wrow[o];
  }
}

void relu_inplace(double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void check_batch(const Mlp& net, const Matrix& batch) {
  if (batch.cols != net.input_dim())
    throw std::invalid_argument("forward: input dim " + std::to_string(batch.cols) +
                                " does not match network input " +
                                std::to_string(net.input_dim()));
}

// All layer activations for the batch; acts[0] is the input itself.
std::vector<Matrix> forward_all(const Mlp& net, const Matrix& batch) {
  std::vector<Matrix> acts;
  acts.reserve(net.layer_count() + 1);
  acts.push_back(batch);
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const std::size_t in_dim = net.layer_sizes[l];
    const std::size_t out_dim = net.layer_sizes[l + 1];
    Matrix next(batch.rows, out_dim);
    const Matrix& cur = acts.back();
    const bool hidden = l + 1 < net.layer_count();
    const auto rows = static_cast<std::int64_t>(batch.rows);
#pragma omp parallel for schedule(static)
    for (std::int64_t k = 0; k < rows; ++k) {
      double* out = next.v.data() + k * out_dim;
      affine_row(cur.v.data() + k * in_dim, in_dim, net.weights[l].data(), net.biases[l].data(),
                 out_dim, out);
      if (hidden) relu_inplace(out, out_dim);
    }
    acts.push_back(std::move(next));
  }
  return acts;
}

}  // namespace

std::size_t Mlp::param_count() const {
  std::size_t n = 0;
  for (const auto& w : weights) n += w.size();
  for (const auto& b : biases) n += b.size();
  return n;
}

Mlp init_mlp(const std::vector<std::size_t>& layer_sizes, std::uint64_t seed) {
  if (layer_sizes.size() < 2)
    throw std::invalid_argument("init_mlp: need at least input and output sizes");
  for (std::size_t s : layer_sizes)
    if (s == 0) throw std::invalid_argument("init_mlp: layer sizes must be positive");

  Mlp net;
  net.layer_sizes = layer_sizes;
  Rng rng = substream(seed, "mlp-init");
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const std::size_t in_dim = layer_sizes[l];
    const std::size_t out_dim = layer_sizes[l + 1];
    const double limit = 1.0 / std::sqrt(static_cast<double>(in_dim));
    std::vector<double> w(in_dim * out_dim);
    for (double& x : w) x = rng.uniform(-limit, limit);
    net.weights.push_back(std::move(w));
    net.biases.emplace_back(out_dim, 0.0);
  }
  return net;
}

Matrix forward(const Mlp& net, const Matrix& batch) {
  check_batch(net, batch);
  if (batch.rows == 0) return Matrix(0, net.output_dim());
  std::size_t widest = 0;
  for (std::size_t s : net.layer_sizes) widest = std::max(widest, s);

  Matrix out(batch.rows, net.output_dim());
  const auto rows = static_cast<std::int64_t>(batch.rows);
#pragma omp parallel
  {
    std::vector<double> a(widest), b(widest);
#pragma omp for schedule(static)
    for (std::int64_t k = 0; k < rows; ++k) {
      const double* cur = batch.v.data() + k * batch.cols;
      for (std::size_t l = 0; l < net.layer_count(); ++l) {
        const std::size_t in_dim = net.layer_sizes[l];
        const std::size_t out_dim = net.layer_sizes[l + 1];
        const bool last = l + 1 == net.layer_count();
        double* dst = last ? out.v.data() + k * out_dim : (cur == a.data() ? b.data() : a.data());
        affine_row(cur, in_dim, net.weights[l].data(), net.biases[l].data(), out_dim, dst);
        if (!last) relu_inplace(dst, out_dim);
        cur = dst;
      }
    }
  }
  return out;
}

Matrix forward_serial(const Mlp& net, const Matrix& batch) {
  check_batch(net, batch);
  std::size_t widest = 0;
  for (std::size_t s : net.layer_sizes) widest = std::max(widest, s);
  std::vector<double> a(widest), b(widest);
  Matrix out(batch.rows, net.output_dim());
  for (std::size_t k = 0; k < batch.rows; ++k) {
    const double* cur = batch.v.data() + k * batch.cols;
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
      const std::size_t in_dim = net.layer_sizes[l];
      const std::size_t out_dim = net.layer_sizes[l + 1];
      const bool last = l + 1 == net.layer_count();
      double* dst = last ? out.v.data() + k * out_dim : (cur == a.data() ? b.data() : a.data());
      affine_row(cur, in_dim, net.weights[l].data(), net.biases[l].data(), out_dim, dst);
      if (!last) relu_inplace(dst, out_dim);
      cur = dst;
    }
  }
  return out;
}

std::pair<double, Gradients> mse_grad(const Mlp& net, const Matrix& batch, const Matrix& targets) {
  check_batch(net, batch);
  if (targets.rows != batch.rows || targets.cols != net.output_dim())
    throw std::invalid_argument("mse_grad: target shape mismatch");
  if (batch.rows == 0) throw std::invalid_argument("mse_grad: empty batch");

  const std::vector<Matrix> acts = forward_all(net, batch);
  const Matrix& pred = acts.back();
  const std::size_t out_dim = net.output_dim();
  const auto rows = static_cast<std::int64_t>(batch.rows);
  const double scale = 1.0 / (static_cast<double>(batch.rows) * static_cast<double>(out_dim));

  std::vector<double> row_loss(batch.rows);
  Matrix delta(batch.rows, out_dim);
#pragma omp parallel for schedule(static)
  for (std::int64_t k = 0; k < rows; ++k) {
    const double* p = pred.v.data() + k * out_dim;
    const double* t = targets.v.data() + k * out_dim;
    double* d = delta.v.data() + k * out_dim;
    double s = 0.0;
    for (std::size_t o = 0; o < out_dim; ++o) {
      const double e = p[o] - t[o];
      s += e * e;
      d[o] = 2.0 * scale * e;
    }
    row_loss[k] = s;
  }
  double loss = 0.0;
  for (double s : row_loss) loss += s;
  loss *= scale;

  Gradients grads;
  grads.weights.resize(net.layer_count());
  grads.biases.resize(net.layer_count());

  for (std::size_t l = net.layer_count(); l-- > 0;) {
    const std::size_t in_dim = net.layer_sizes[l];
    const std::size_t odim = net.layer_sizes[l + 1];
    const Matrix& input = acts[l];

    std::vector<double>& dw = grads.weights[l];
    dw.assign(in_dim * odim, 0.0);
    const auto in_dim_i = static_cast<std::int64_t>(in_dim);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < in_dim_i; ++i) {
      double* dwrow = dw.data() + i * odim;
      for (std::int64_t k = 0; k < rows; ++k) {
        const double a = input.v[k * in_dim + i];
        if (a == 0.0) continue;
        const double* drow = delta.v.data() + k * odim;
        for (std::size_t o = 0; o < odim; ++o) dwrow[o] += a * drow[o];
      }
    }

    std::vector<double>& db = grads.biases[l];
    db.assign(odim, 0.0);
    for (std::int64_t k = 0; k < rows; ++k) {
      const double* drow = delta.v.data() + k * odim;
      for (std::size_t o = 0; o < odim; ++o) db[o] += drow[o];
    }

    if (l > 0) {
      Matrix prev_delta(batch.rows, in_dim);
#pragma omp parallel for schedule(static)
      for (std::int64_t k = 0; k < rows; ++k) {
        const double* drow = delta.v.data() + k * odim;
        const double* arow = input.v.data() + k * in_dim;
        double* prow = prev_delta.v.data() + k * in_dim;
        for (std::size_t i = 0; i < in_dim; ++i) {
          if (arow[i] <= 0.0) {  // rectifier gate
            prow[i] = 0.0;
            continue;
          }
          const double* wrow = net.weights[l].data() + i * odim;
          double s = 0.0;
          for (std::size_t o = 0; o < odim; ++o) s += drow[o] * wrow[o];
          prow[i] = s;
        }
      }
      delta = std::move(prev_delta);
    }
  }
  return {loss, std::move(grads)};
}

AdamState init_adam(const Mlp& net, double learning_rate) {
  AdamState st;
  st.learning_rate = learning_rate;
  for (const auto& w : net.weights) {
    st.m_weights.emplace_back(w.size(), 0.0);
    st.v_weights.emplace_back(w.size(), 0.0);
  }
  for (const auto& b : net.biases) {
    st.m_biases.emplace_back(b.size(), 0.0);
    st.v_biases.emplace_back(b.size(), 0.0);
  }
  return st;
}

namespace {
void adam_update(std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m,
                 std::vector<double>& v, const AdamState& st, double bc1, double bc2) {
  if (g.size() != p.size()) throw std::invalid_argument("adam_step: gradient shape mismatch");
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!std::isfinite(g[i])) throw std::runtime_error("adam_step: non-finite gradient");
    m[i] = st.beta1 * m[i] + (1.0 - st.beta1) * g[i];
    v[i] = st.beta2 * v[i] + (1.0 - st.beta2) * g[i] * g[i];
    const double m_hat = m[i] / bc1;
    const double v_hat = v[i] / bc2;
    p[i] -= st.learning_rate * m_hat / (std::sqrt(v_hat) + st.eps_hat);
  }
}
}  // namespace

void adam_step(Mlp& net, const Gradients& grads, AdamState& state) {
  if (grads.weights.size() != net.layer_count() || grads.biases.size() != net.layer_count())
    throw std::invalid_argument("adam_step: gradient layer count mismatch");
  ++state.step_count;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    adam_update(net.weights[l], grads.weights[l], state.m_weights[l], state.v_weights[l], state,
                bc1, bc2);
    adam_update(net.biases[l], grads.biases[l], state.m_biases[l], state.v_biases[l], state, bc1,
                bc2);
  }
}

std::vector<double> train_mse(Mlp& net, const Matrix& batch, const Matrix& targets, int epochs,
                              double learning_rate, std::uint64_t shuffle_seed) {
  if (batch.rows == 0) throw std::invalid_argument("train_mse: empty training set");
  AdamState state = init_adam(net, learning_rate);
  std::vector<double> epoch_losses;
  epoch_losses.reserve(static_cast<std::size_t>(epochs));

  if (batch.rows <= kFullBatchLimit) {
    for (int e = 0; e < epochs; ++e) {
      auto [loss, grads] = mse_grad(net, batch, targets);
      adam_step(net, grads, state);
      epoch_losses.push_back(loss);
    }
    return epoch_losses;
  }

  std::vector<std::size_t> order(batch.rows);
  Matrix mb(kMinibatchSize, batch.cols), mt(kMinibatchSize, targets.cols);
  for (int e = 0; e < epochs; ++e) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng = substream(shuffle_seed, "epoch-shuffle", static_cast<std::uint64_t>(e));
    rng.shuffle(order);
    double weighted = 0.0;
    for (std::size_t start = 0; start < batch.rows; start += kMinibatchSize) {
      const std::size_t sz = std::min(kMinibatchSize, batch.rows - start);
      mb.rows = sz;
      mt.rows = sz;
      for (std::size_t r = 0; r < sz; ++r) {
        const std::size_t src = order[start + r];
        std::copy_n(batch.v.data() + src * batch.cols, batch.cols, mb.v.data() + r * batch.cols);
        std::copy_n(targets.v.data() + src * targets.cols, targets.cols,
                    mt.v.data() + r * targets.cols);
      }
      auto [loss, grads] = mse_grad(net, mb, mt);
      adam_step(net, grads, state);
      weighted += loss * static_cast<double>(sz);
    }
    epoch_losses.push_back(weighted / static_cast<double>(batch.rows));
  }
  return epoch_losses;
}

void save_mlp(const Mlp& net, const std::filesystem::path& path) {
  nlohmann::json j;
  j["layer_sizes"] = net.layer_sizes;
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t l = 0; l < net.layer_count(); ++l)
    layers.push_back({{"weights", net.weights[l]}, {"biases", net.biases[l]}});
  j["layers"] = std::move(layers);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << j.dump() << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Mlp load_mlp(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  nlohmann::json j = nlohmann::json::parse(in);
  Mlp net;
  net.layer_sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
  for (const auto& layer : j.at("layers")) {
    net.weights.push_back(layer.at("weights").get<std::vector<double>>());
    net.biases.push_back(layer.at("biases").get<std::vector<double>>());
  }
  if (net.weights.size() + 1 != net.layer_sizes.size())
    throw std::runtime_error("mlp checkpoint: layer count mismatch in " + path.string());
  for (std::size_t l = 0; l < net.weights.size(); ++l)
    if (net.weights[l].size() != net.layer_sizes[l] * net.layer_sizes[l + 1] ||
        net.biases[l].size() != net.layer_sizes[l + 1])
      throw std::runtime_error("mlp checkpoint: parameter shape mismatch in " + path.string());
  return net;
}

std::uint64_t param_hash(const Mlp& net) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const std::vector<double>& xs) {
    for (double x : xs) {
      std::uint64_t bits;
      std::memcpy(&bits, &x, sizeof(bits));
      for (int b = 0; b < 8; ++b) {
        h ^= (bits >> (8 * b)) & 0xff;
        h *= 0x100000001b3ULL;
      }
    }
  };
  for (const auto& w : net.weights) feed(w);
  for (const auto& b : net.biases) feed(b);
  return h;
}

}  // namespace ilsel::nn
