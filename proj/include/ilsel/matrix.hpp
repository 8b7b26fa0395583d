#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace ilsel {

// Dense row-major matrix of doubles. Rows are the natural unit everywhere in
// this codebase (states, actions, network activations).
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> v;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), v(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return v[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return v[r * cols + c]; }

  std::span<double> row(std::size_t r) { return {v.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {v.data() + r * cols, cols}; }

  bool empty() const { return rows == 0 || cols == 0; }

  bool operator==(const Matrix& o) const = default;

  static Matrix from_rows(const std::vector<std::vector<double>>& rs) {
    Matrix m;
    if (rs.empty()) return m;
    m.rows = rs.size();
    m.cols = rs[0].size();
    m.v.reserve(m.rows * m.cols);
    for (const auto& r : rs) {
      if (r.size() != m.cols) throw std::invalid_argument("Matrix::from_rows: ragged rows");
      m.v.insert(m.v.end(), r.begin(), r.end());
    }
    return m;
  }
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace ilsel
