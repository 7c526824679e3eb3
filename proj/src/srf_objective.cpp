#include "timsrf/srf_objective.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/SVD>

#include "timsrf/errors.hpp"

namespace timsrf {

QraProfile::QraProfile(double delta, QraFamily family) : delta_(delta), family_(family) {
  if (!(delta > 0) || !std::isfinite(delta))
    throw InvalidArgument("QRA width delta must be positive and finite, got " +
                          std::to_string(delta));
}

double qra_value(const QraProfile& profile, double x) {
  const double u = x / profile.delta();
  return std::exp(-0.5 * u * u);
}

double qra_derivative(const QraProfile& profile, double x) {
  const double d2 = profile.delta() * profile.delta();
  return -(x / d2) * qra_value(profile, x);
}

namespace {

void require_finite(const Matrix& z) {
  if (!z.allFinite()) throw DecompositionError("SVD input contains non-finite entries");
}

} // namespace

SpectralDecomposition decompose(const Matrix& z) {
  require_finite(z);
  Eigen::BDCSVD<Matrix> svd(z, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw DecompositionError("SVD did not converge");
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

Vector singular_values(const Matrix& z) {
  require_finite(z);
  Eigen::BDCSVD<Matrix> svd(z);
  if (svd.info() != Eigen::Success) throw DecompositionError("SVD did not converge");
  return svd.singularValues();
}

double smoothed_rank(const QraProfile& profile, const Matrix& z) {
  const Vector s = singular_values(z);
  double sum = 0.0;
  for (Index i = 0; i < s.size(); ++i) sum += qra_value(profile, s(i));
  return sum;
}

double smoothed_rank(const QraProfile& profile, const StackedMatrix& z) {
  return smoothed_rank(profile, z.entries());
}

SmoothedRankEvaluation evaluate(const QraProfile& profile, const Matrix& z) {
  const auto svd = decompose(z);
  const Vector& s = svd.singular_values;
  Vector theta(s.size());
  double value = 0.0;
  for (Index i = 0; i < s.size(); ++i) {
    value += qra_value(profile, s(i));
    theta(i) = qra_derivative(profile, s(i));
  }
  return {value, svd.left_vectors * theta.asDiagonal() * svd.right_vectors.transpose()};
}

Matrix smoothed_rank_gradient(const QraProfile& profile, const Matrix& z) {
  return evaluate(profile, z).gradient;
}

Matrix smoothed_rank_gradient(const QraProfile& profile, const StackedMatrix& z) {
  return smoothed_rank_gradient(profile, z.entries());
}

double approx_rank(const QraProfile& profile, const Matrix& z) {
  return static_cast<double>(std::min(z.rows(), z.cols())) - smoothed_rank(profile, z);
}

double approx_rank(const QraProfile& profile, const StackedMatrix& z) {
  return approx_rank(profile, z.entries());
}

} // namespace timsrf
