#pragma once

#include <cstdint>

#include "ilsel/matrix.hpp"
#include "ilsel/rng.hpp"

namespace ilsel::ot {

// Pairwise Euclidean distances between two point sets.
struct CostMatrix {
  std::size_t n = 0;  // rows, |X|
  std::size_t m = 0;  // cols, |Y|
  std::vector<double> c;

  double at(std::size_t i, std::size_t j) const { return c[i * m + j]; }
};

CostMatrix build_cost(const Matrix& x, const Matrix& y);
CostMatrix build_cost_serial(const Matrix& x, const Matrix& y);

struct SinkhornResult {
  double transport_cost = 0.0;  // <P, C> under the converged plan, entropy excluded
  int iterations = 0;
  double marginal_error = 0.0;  // L-inf violation of the uniform marginals
  bool converged = false;
};

inline constexpr double kDefaultEpsilon = 5.0;
inline constexpr double kDefaultTol = 1e-6;
inline constexpr int kDefaultMaxIter = 1000;

// Entropy-regularized transport cost between uniform empirical measures
// (weights 1/n and 1/m). Dispatches between the two routes below on the
// ratio max(C)/epsilon.
SinkhornResult sinkhorn_cost(const CostMatrix& cost, double epsilon = kDefaultEpsilon,
                             double tol = kDefaultTol, int max_iter = kDefaultMaxIter);

// Multiplicative scaling iterations on K = exp(-C/eps). Fast; valid while K
// stays comfortably inside double range.
SinkhornResult sinkhorn_cost_scaling(const CostMatrix& cost, double epsilon,
                                     double tol = kDefaultTol, int max_iter = kDefaultMaxIter);

// Log-domain potential updates; immune to kernel underflow at small epsilon.
SinkhornResult sinkhorn_cost_logdomain(const CostMatrix& cost, double epsilon,
                                       double tol = kDefaultTol, int max_iter = kDefaultMaxIter);

inline constexpr std::size_t kExactW1Cap = 256;

// Exact 1-Wasserstein between equal-size uniform point sets: the linear
// assignment optimum divided by n. Independent oracle for the Sinkhorn path.
double exact_w1(const Matrix& x, const Matrix& y);

// Minimum-cost assignment value on a square cost matrix (Jonker-Volgenant
// style shortest augmenting paths, O(n^3)).
double assignment_cost(const CostMatrix& cost);

// Uniform sample without replacement when the set exceeds max_n; identity
// otherwise. Row order of survivors is preserved.
Matrix subsample_states(const Matrix& states, std::size_t max_n, Rng rng);

}  // namespace ilsel::ot
