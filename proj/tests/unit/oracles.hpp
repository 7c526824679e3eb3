// Reference computations used by the tests. Each one takes a different route
// from the library code it checks.
#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <span>

#include <Eigen/SVD>

#include "timsrf/core_model.hpp"

namespace oracle {

using timsrf::Index;
using timsrf::Matrix;

inline Matrix gaussian(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

inline Matrix low_rank(Index rows, Index cols, Index rank, std::mt19937_64& rng) {
  return gaussian(rows, rank, rng) * gaussian(rank, cols, rng);
}

// One-sided Jacobi SVD, so singular values do not come from the library's
// divide-and-conquer path.
inline Eigen::VectorXd jacobi_singular_values(const Matrix& z) {
  return Eigen::JacobiSVD<Matrix>(z).singularValues();
}

inline Index numerical_rank(const Matrix& z, double relative) {
  const auto s = jacobi_singular_values(z);
  if (s.size() == 0 || s(0) == 0) return 0;
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i) r += s(i) > relative * s(0);
  return r;
}

inline double gaussian_srf(const Matrix& z, double delta) {
  const auto s = jacobi_singular_values(z);
  double total = 0;
  for (Index i = 0; i < s.size(); ++i) total += std::exp(-s(i) * s(i) / (2 * delta * delta));
  return total;
}

// Central differences of f over every entry.
inline Matrix finite_difference(const std::function<double(const Matrix&)>& f, Matrix z,
                                double h) {
  Matrix g(z.rows(), z.cols());
  for (Index j = 0; j < z.cols(); ++j)
    for (Index i = 0; i < z.rows(); ++i) {
      const double keep = z(i, j);
      z(i, j) = keep + h;
      const double up = f(z);
      z(i, j) = keep - h;
      const double down = f(z);
      z(i, j) = keep;
      g(i, j) = (up - down) / (2 * h);
    }
  return g;
}

// All positive/negative pairs, ties count one half.
inline double brute_force_auc(std::span<const double> scores, std::span<const int> truth) {
  double wins = 0;
  double pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (truth[i] <= 0) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (truth[j] > 0) continue;
      pairs += 1;
      if (scores[i] > scores[j]) wins += 1;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

// Root of exp(-x^2 / (2 delta^2)) = 1/n on [0, inf) by bisection.
inline double bisect_alpha(double delta, double n) {
  auto g = [&](double x) { return std::exp(-x * x / (2 * delta * delta)) - 1.0 / n; };
  double lo = 0, hi = delta;
  while (g(hi) > 0) hi *= 2;
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline double nuclear_ratio(const Matrix& z) {
  const auto s = jacobi_singular_values(z);
  const double nuc = s.sum();
  return nuc * nuc / z.squaredNorm();
}

} // namespace oracle
