#pragma once

#include <cstdint>
#include <span>

#include "timsrf/core_model.hpp"
#include "timsrf/srf_objective.hpp"

namespace timsrf {

/// Coordinate-keeping linear map A(Z) = vec(T(Z)), where T zeroes every entry
/// outside `fixed_coords`. Its null space is the set of matrices supported on
/// the free coordinates.
class AffineObservationOperator {
public:
  AffineObservationOperator(Index rows, Index cols, IndexSet fixed_coords);

  /// Operator of the affine constraints of an instance: observed features and
  /// the ones column. Label constraints are not affine and are left out.
  static AffineObservationOperator from_instance(const ProblemInstance& instance);

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  const IndexSet& fixed_coords() const noexcept { return fixed_; }
  Index free_count() const noexcept { return rows_ * cols_ - static_cast<Index>(fixed_.size()); }

  /// Column-major vec(T(Z)).
  Vector apply(const Matrix& z) const;

private:
  Index rows_;
  Index cols_;
  IndexSet fixed_;
};

struct RecoveryBound {
  double delta = 0.0;
  Index n = 0;
  double spherical_constant = 0.0;
  double alpha_delta = 0.0;
  double bound = 0.0;
};

/// |f_delta^{-1}(1/n)|; delta * sqrt(2 ln n) for the Gaussian family.
double alpha_delta(const QraProfile& profile, Index n);

/// n * alpha_delta / (sqrt(Delta) - sqrt(ceil(Delta - 1))).
RecoveryBound recovery_bound(const QraProfile& profile, Index n, double spherical_constant);

/// Rank condition 2 r0 < Delta of the recovery guarantee. Advisory only.
bool rank_condition_holds(Index r0, double spherical_constant);

/// Minimum of ||Z||_*^2 / ||Z||_F^2 over seeded random matrices supported on
/// the operator's free coordinates. This is an upper bound on the spherical
/// section constant, not the constant itself. Samples cycle through dense
/// Gaussian, masked rank-one and random-support Gaussian matrices; the sample
/// stream is a prefix-stable function of the seed.
double spherical_section_estimate(const AffineObservationOperator& op, int samples,
                                  std::uint64_t seed);

struct QraCheckReport {
  bool symmetric = false;
  bool unique_peak = false;        // f(x) = 1 iff x = 0 on the grid
  bool concave_near_zero = false;  // second differences <= 0 on |x| <= delta/2
  bool tail_decay = false;         // f(+-x_max) < 0.01 with x_max >= 4 delta

  bool all() const noexcept {
    return symmetric && unique_peak && concave_near_zero && tail_decay;
  }
};

QraCheckReport qra_check(const QraProfile& profile, std::span<const double> grid);

/// f(x - h) - 2 f(x) + f(x + h).
double second_difference(const QraProfile& profile, double x, double h);

} // namespace timsrf
