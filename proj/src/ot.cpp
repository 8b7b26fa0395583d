#include "ilsel/ot.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace ilsel::ot {

namespace {

void check_inputs(const Matrix& x, const Matrix& y) {
  if (x.empty() || y.empty()) throw std::invalid_argument("build_cost: empty point set");
  if (x.cols != y.cols)
    throw std::invalid_argument("build_cost: dimension mismatch (" + std::to_string(x.cols) +
                                " vs " + std::to_string(y.cols) + ")");
}

void fill_cost_row(const Matrix& x, const Matrix& y, std::size_t i, double* out) {
  const auto xi = x.row(i);
  for (std::size_t j = 0; j < y.rows; ++j)
    out[j] = std::sqrt(squared_distance(xi, y.row(j)));
}

void check_cost(const CostMatrix& cost, double epsilon) {
  if (epsilon <= 0.0) throw std::invalid_argument("sinkhorn_cost: epsilon must be positive");
  if (cost.n == 0 || cost.m == 0) throw std::invalid_argument("sinkhorn_cost: empty cost matrix");
  for (double v : cost.c)
    if (!std::isfinite(v)) throw std::invalid_argument("sinkhorn_cost: non-finite cost entry");
}

double max_cost(const CostMatrix& cost) {
  double mx = 0.0;
  for (double v : cost.c) mx = std::max(mx, v);
  return mx;
}

// Degenerate marginals admit exactly one plan: the product coupling.
SinkhornResult trivial_plan(const CostMatrix& cost) {
  const double an = 1.0 / static_cast<double>(cost.n);
  const double bm = 1.0 / static_cast<double>(cost.m);
  SinkhornResult res;
  if (cost.n == 1 && cost.m == 1) {
    res.transport_cost = cost.c[0];
  } else {
    double total = 0.0;
    for (std::size_t i = 0; i < cost.n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < cost.m; ++j) row += cost.at(i, j) * bm;
      total += row * an;
    }
    res.transport_cost = total;
  }
  res.converged = true;
  return res;
}

double logsumexp(const double* xs, std::size_t n) {
  double mx = xs[0];
  for (std::size_t k = 1; k < n; ++k) mx = std::max(mx, xs[k]);
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += std::exp(xs[k] - mx);
  return mx + std::log(s);
}

}  // namespace

CostMatrix build_cost_serial(const Matrix& x, const Matrix& y) {
  check_inputs(x, y);
  CostMatrix cost;
  cost.n = x.rows;
  cost.m = y.rows;
  cost.c.resize(cost.n * cost.m);
  for (std::size_t i = 0; i < cost.n; ++i) fill_cost_row(x, y, i, cost.c.data() + i * cost.m);
  return cost;
}

CostMatrix build_cost(const Matrix& x, const Matrix& y) {
  check_inputs(x, y);
  CostMatrix cost;
  cost.n = x.rows;
  cost.m = y.rows;
  cost.c.resize(cost.n * cost.m);
  const auto n = static_cast<std::int64_t>(cost.n);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i)
    fill_cost_row(x, y, static_cast<std::size_t>(i), cost.c.data() + i * cost.m);
  return cost;
}

SinkhornResult sinkhorn_cost(const CostMatrix& cost, double epsilon, double tol, int max_iter) {
  check_cost(cost, epsilon);
  if (cost.n == 1 || cost.m == 1) return trivial_plan(cost);
  // The scaling route underflows once exp(-C/eps) leaves double range.
  if (max_cost(cost) / epsilon > 60.0) return sinkhorn_cost_logdomain(cost, epsilon, tol, max_iter);
  return sinkhorn_cost_scaling(cost, epsilon, tol, max_iter);
}

SinkhornResult sinkhorn_cost_scaling(const CostMatrix& cost, double epsilon, double tol,
                                     int max_iter) {
  check_cost(cost, epsilon);
  if (cost.n == 1 || cost.m == 1) return trivial_plan(cost);
  const auto n = static_cast<std::int64_t>(cost.n);
  const auto m = static_cast<std::int64_t>(cost.m);
  const double a = 1.0 / static_cast<double>(n);
  const double b = 1.0 / static_cast<double>(m);

  std::vector<double> kernel(cost.c.size());
  std::vector<double> kernel_t(cost.c.size());  // transposed copy for the column pass
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const double* crow = cost.c.data() + i * m;
    double* krow = kernel.data() + i * m;
    for (std::int64_t j = 0; j < m; ++j) krow[j] = std::exp(-crow[j] / epsilon);
  }
#pragma omp parallel for schedule(static)
  for (std::int64_t j = 0; j < m; ++j)
    for (std::int64_t i = 0; i < n; ++i) kernel_t[j * n + i] = kernel[i * m + j];

  std::vector<double> u(cost.n, 1.0), v(cost.m, 1.0), kv(cost.n);
  std::vector<double> row_err(cost.n);

  SinkhornResult res;
  res.marginal_error = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iter; ++it) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
      const double* krow = kernel.data() + i * m;
      double s = 0.0;
      for (std::int64_t j = 0; j < m; ++j) s += krow[j] * v[j];
      kv[i] = s;
      row_err[i] = std::abs(u[i] * s - a);
    }
    double err = 0.0;
    for (std::int64_t i = 0; i < n; ++i) err = std::max(err, row_err[i]);
    res.marginal_error = err;
    // Columns are only feasible once v has been updated at least once.
    if (it > 0 && err < tol) {
      res.converged = true;
      break;
    }
    ++res.iterations;
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) u[i] = a / kv[i];
#pragma omp parallel for schedule(static)
    for (std::int64_t j = 0; j < m; ++j) {
      const double* kcol = kernel_t.data() + j * n;
      double s = 0.0;
      for (std::int64_t i = 0; i < n; ++i) s += kcol[i] * u[i];
      v[j] = b / s;
    }
  }

  std::vector<double> row_cost(cost.n);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const double* krow = kernel.data() + i * m;
    const double* crow = cost.c.data() + i * m;
    double s = 0.0;
    for (std::int64_t j = 0; j < m; ++j) s += krow[j] * crow[j] * v[j];
    row_cost[i] = u[i] * s;
  }
  double total = 0.0;
  for (std::int64_t i = 0; i < n; ++i) total += row_cost[i];
  res.transport_cost = total;
  return res;
}

SinkhornResult sinkhorn_cost_logdomain(const CostMatrix& cost, double epsilon, double tol,
                                       int max_iter) {
  check_cost(cost, epsilon);
  if (cost.n == 1 || cost.m == 1) return trivial_plan(cost);
  const auto n = static_cast<std::int64_t>(cost.n);
  const auto m = static_cast<std::int64_t>(cost.m);
  const double log_a = -std::log(static_cast<double>(n));
  const double log_b = -std::log(static_cast<double>(m));

  std::vector<double> f(cost.n, 0.0), g(cost.m, 0.0);
  std::vector<double> row_err(cost.n);

  SinkhornResult res;
  res.marginal_error = std::numeric_limits<double>::infinity();
  std::vector<double> scratch_row(cost.m), scratch_col(cost.n);

  for (int it = 0; it < max_iter; ++it) {
    // Row-marginal violation of the current plan; columns are exact after
    // every g update.
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
      const double* crow = cost.c.data() + i * m;
      double s = 0.0;
      for (std::int64_t j = 0; j < m; ++j) s += std::exp((f[i] + g[j] - crow[j]) / epsilon);
      row_err[i] = std::abs(s - std::exp(log_a));
    }
    double err = 0.0;
    for (std::int64_t i = 0; i < n; ++i) err = std::max(err, row_err[i]);
    res.marginal_error = err;
    if (it > 0 && err < tol) {
      res.converged = true;
      break;
    }
    ++res.iterations;

#pragma omp parallel for schedule(static) firstprivate(scratch_row)
    for (std::int64_t i = 0; i < n; ++i) {
      const double* crow = cost.c.data() + i * m;
      for (std::int64_t j = 0; j < m; ++j) scratch_row[j] = (g[j] - crow[j]) / epsilon;
      f[i] = epsilon * (log_a - logsumexp(scratch_row.data(), cost.m));
    }
#pragma omp parallel for schedule(static) firstprivate(scratch_col)
    for (std::int64_t j = 0; j < m; ++j) {
      for (std::int64_t i = 0; i < n; ++i) scratch_col[i] = (f[i] - cost.c[i * m + j]) / epsilon;
      g[j] = epsilon * (log_b - logsumexp(scratch_col.data(), cost.n));
    }
  }

  std::vector<double> row_cost(cost.n);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const double* crow = cost.c.data() + i * m;
    double s = 0.0;
    for (std::int64_t j = 0; j < m; ++j)
      s += std::exp((f[i] + g[j] - crow[j]) / epsilon) * crow[j];
    row_cost[i] = s;
  }
  double total = 0.0;
  for (std::int64_t i = 0; i < n; ++i) total += row_cost[i];
  res.transport_cost = total;
  return res;
}

double assignment_cost(const CostMatrix& cost) {
  if (cost.n != cost.m) throw std::invalid_argument("assignment_cost: matrix must be square");
  const auto n = static_cast<std::int64_t>(cost.n);
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // Shortest augmenting paths with dual potentials, 1-based scratch arrays.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::int64_t> match(n + 1, 0), way(n + 1, 0);
  for (std::int64_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::int64_t j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::int64_t i0 = match[j0];
      double delta = kInf;
      std::int64_t j1 = 0;
      for (std::int64_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost.at(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::int64_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::int64_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0);
  }

  double total = 0.0;
  for (std::int64_t j = 1; j <= n; ++j)
    if (match[j]) total += cost.at(match[j] - 1, j - 1);
  return total;
}

double exact_w1(const Matrix& x, const Matrix& y) {
  if (x.rows != y.rows)
    throw std::invalid_argument("exact_w1: point sets must have equal size (" +
                                std::to_string(x.rows) + " vs " + std::to_string(y.rows) + ")");
  if (x.rows > kExactW1Cap)
    throw std::invalid_argument("exact_w1: size " + std::to_string(x.rows) + " exceeds cap " +
                                std::to_string(kExactW1Cap));
  const CostMatrix cost = build_cost_serial(x, y);
  return assignment_cost(cost) / static_cast<double>(x.rows);
}

Matrix subsample_states(const Matrix& states, std::size_t max_n, Rng rng) {
  if (max_n < 1) throw std::invalid_argument("subsample_states: max_n must be >= 1");
  if (states.rows <= max_n) return states;
  const auto keep = rng.sample_indices(states.rows, max_n);
  Matrix out(max_n, states.cols);
  for (std::size_t r = 0; r < keep.size(); ++r) {
    const auto src = states.row(keep[r]);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

}  // namespace ilsel::ot
