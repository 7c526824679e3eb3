#pragma once

#include "timsrf/core_model.hpp"

namespace timsrf {

enum class QraFamily { gaussian };

/// Smoothing function f_delta(x) = f(x / delta) of a qualified rank
/// approximation family. Only the Gaussian f(x) = exp(-x^2 / 2) exists.
class QraProfile {
public:
  explicit QraProfile(double delta, QraFamily family = QraFamily::gaussian);

  double delta() const noexcept { return delta_; }
  QraFamily family() const noexcept { return family_; }

private:
  double delta_;
  QraFamily family_;
};

double qra_value(const QraProfile& profile, double x);
double qra_derivative(const QraProfile& profile, double x);

/// Thin SVD Z = U diag(sigma) V^T, singular values nonincreasing.
struct SpectralDecomposition {
  Matrix left_vectors;
  Vector singular_values;
  Matrix right_vectors;
};

SpectralDecomposition decompose(const Matrix& z);
Vector singular_values(const Matrix& z);

/// F_delta(Z) = sum_i f_delta(sigma_i(Z)).
double smoothed_rank(const QraProfile& profile, const Matrix& z);
double smoothed_rank(const QraProfile& profile, const StackedMatrix& z);

/// dF_delta/dZ = U diag(theta) V^T with theta_i = f_delta'(sigma_i). This is
/// the ascent direction of F_delta.
Matrix smoothed_rank_gradient(const QraProfile& profile, const Matrix& z);
Matrix smoothed_rank_gradient(const QraProfile& profile, const StackedMatrix& z);

/// min(rows, cols) - F_delta(Z); tends to rank(Z) as delta -> 0.
double approx_rank(const QraProfile& profile, const Matrix& z);
double approx_rank(const QraProfile& profile, const StackedMatrix& z);

struct SmoothedRankEvaluation {
  double value = 0.0;
  Matrix gradient;
};

/// Value and gradient from a single decomposition.
SmoothedRankEvaluation evaluate(const QraProfile& profile, const Matrix& z);

} // namespace timsrf
