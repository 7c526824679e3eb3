#include "timsrf/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "timsrf/errors.hpp"

namespace timsrf {

AffineObservationOperator::AffineObservationOperator(Index rows, Index cols, IndexSet fixed_coords)
    : rows_(rows), cols_(cols), fixed_(canonical(std::move(fixed_coords))) {
  if (rows <= 0 || cols <= 0) throw InvalidArgument("operator shape must be positive");
  for (const auto& e : fixed_)
    if (e.row < 0 || e.row >= rows || e.col < 0 || e.col >= cols)
      throw InvalidArgument("fixed coordinate outside operator shape");
}

AffineObservationOperator AffineObservationOperator::from_instance(const ProblemInstance& instance) {
  const Index t = instance.label_count();
  const Index d = instance.feature_count();
  IndexSet fixed;
  fixed.reserve(instance.observed_features().size() + static_cast<std::size_t>(instance.rows()));
  for (const auto& e : instance.observed_features()) fixed.push_back({e.row, t + e.col});
  for (Index i = 0; i < instance.rows(); ++i) fixed.push_back({i, t + d});
  return {instance.rows(), t + d + 1, std::move(fixed)};
}

Vector AffineObservationOperator::apply(const Matrix& z) const {
  if (z.rows() != rows_ || z.cols() != cols_) throw InvalidArgument("operator shape mismatch");
  Vector out = Vector::Zero(rows_ * cols_);
  for (const auto& e : fixed_) out(e.col * rows_ + e.row) = z(e.row, e.col);
  return out;
}

double alpha_delta(const QraProfile& profile, Index n) {
  if (n < 1) throw InvalidArgument("alpha_delta needs n >= 1");
  if (n == 1) return 0.0;
  return profile.delta() * std::sqrt(2.0 * std::log(static_cast<double>(n)));
}

RecoveryBound recovery_bound(const QraProfile& profile, Index n, double spherical_constant) {
  if (!(spherical_constant > 0))
    throw BoundUndefined("spherical section constant must be positive");
  const double denom =
      std::sqrt(spherical_constant) - std::sqrt(std::ceil(spherical_constant - 1.0));
  if (!(denom > 0))
    throw BoundUndefined("sqrt(Delta) - sqrt(ceil(Delta - 1)) is not positive for Delta = " +
                         std::to_string(spherical_constant));
  const double a = alpha_delta(profile, n);
  return {profile.delta(), n, spherical_constant, a, static_cast<double>(n) * a / denom};
}

bool rank_condition_holds(Index r0, double spherical_constant) {
  return 2.0 * static_cast<double>(r0) < spherical_constant;
}

double spherical_section_estimate(const AffineObservationOperator& op, int samples,
                                  std::uint64_t seed) {
  if (op.free_count() == 0)
    throw NoNullSpace("operator keeps every coordinate; its null space is {0}");
  if (samples < 1) throw InvalidArgument("need at least one sample");

  const Mask fixed = to_mask(op.fixed_coords(), op.rows(), op.cols());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;

  double best = std::numeric_limits<double>::infinity();
  Matrix z(op.rows(), op.cols());
  for (int s = 0; s < samples; ++s) {
    switch (s % 3) {
      case 0:
        for (Index j = 0; j < z.cols(); ++j)
          for (Index i = 0; i < z.rows(); ++i) z(i, j) = normal(rng);
        break;
      case 1: {
        Vector u(z.rows()), v(z.cols());
        for (Index i = 0; i < u.size(); ++i) u(i) = normal(rng);
        for (Index j = 0; j < v.size(); ++j) v(j) = normal(rng);
        z = u * v.transpose();
        break;
      }
      default: {
        const double keep = uniform(rng);
        for (Index j = 0; j < z.cols(); ++j)
          for (Index i = 0; i < z.rows(); ++i) {
            const double g = normal(rng);
            z(i, j) = uniform(rng) < keep ? g : 0.0;
          }
        break;
      }
    }
    z = fixed.select(0.0, z);
    const double fro2 = z.squaredNorm();
    if (!(fro2 > 0)) continue;
    const double nuclear = singular_values(z).sum();
    best = std::min(best, nuclear * nuclear / fro2);
  }
  if (!std::isfinite(best)) throw NumericalError("every sampled matrix was zero");
  // the ratio is >= 1 exactly; rounding in the SVD can land a hair below
  return std::max(best, 1.0);
}

double second_difference(const QraProfile& profile, double x, double h) {
  return qra_value(profile, x - h) - 2.0 * qra_value(profile, x) + qra_value(profile, x + h);
}

QraCheckReport qra_check(const QraProfile& profile, std::span<const double> grid) {
  QraCheckReport report;
  if (grid.empty()) return report;
  const double delta = profile.delta();

  report.symmetric = std::all_of(grid.begin(), grid.end(), [&](double x) {
    return qra_value(profile, -x) == qra_value(profile, x);
  });
  report.unique_peak = std::all_of(grid.begin(), grid.end(), [&](double x) {
    return (qra_value(profile, x) == 1.0) == (x == 0.0);
  });

  std::vector<double> sorted(grid.begin(), grid.end());
  std::sort(sorted.begin(), sorted.end());
  bool concave = true;
  bool any_checked = false;
  for (std::size_t k = 1; k + 1 < sorted.size(); ++k) {
    if (std::abs(sorted[k]) > delta / 2) continue;
    const double f0 = qra_value(profile, sorted[k - 1]);
    const double f1 = qra_value(profile, sorted[k]);
    const double f2 = qra_value(profile, sorted[k + 1]);
    const double h0 = sorted[k] - sorted[k - 1];
    const double h1 = sorted[k + 1] - sorted[k];
    // divided second difference, valid for uneven spacing
    const double second = (f2 - f1) / h1 - (f1 - f0) / h0;
    concave = concave && second <= 0.0;
    any_checked = true;
  }
  report.concave_near_zero = concave && any_checked;

  const double x_max = std::max(std::abs(sorted.front()), std::abs(sorted.back()));
  report.tail_decay = x_max >= 4.0 * delta && qra_value(profile, x_max) < 0.01 &&
                      qra_value(profile, -x_max) < 0.01;
  return report;
}

} // namespace timsrf
