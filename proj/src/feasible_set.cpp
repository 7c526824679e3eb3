#include "timsrf/feasible_set.hpp"

#include <cmath>
#include <limits>

#include "timsrf/errors.hpp"

namespace timsrf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_shapes(const Matrix& z, const BoxBounds& bounds) {
  if (z.rows() != bounds.lower.rows() || z.cols() != bounds.lower.cols() ||
      bounds.upper.rows() != bounds.lower.rows() || bounds.upper.cols() != bounds.lower.cols())
    throw InvalidArgument("matrix and bounds shapes differ");
}

} // namespace

BoxBounds build_bounds(const ProblemInstance& instance, double label_margin) {
  if (!(label_margin >= 0) || !std::isfinite(label_margin))
    throw InvalidArgument("label margin must be finite and non-negative");
  const Index n = instance.rows();
  const Index t = instance.label_count();
  const Index d = instance.feature_count();
  BoxBounds b{Matrix::Constant(n, t + d + 1, -kInf), Matrix::Constant(n, t + d + 1, kInf)};

  for (const auto& e : instance.observed_labels()) {
    if (instance.labels()(e.row, e.col) > 0)
      b.lower(e.row, e.col) = label_margin;
    else
      b.upper(e.row, e.col) = -label_margin;
  }
  for (const auto& e : instance.observed_features()) {
    const double x = instance.features()(e.row, e.col);
    b.lower(e.row, t + e.col) = x;
    b.upper(e.row, t + e.col) = x;
  }
  b.lower.col(t + d).setOnes();
  b.upper.col(t + d).setOnes();
  return b;
}

void project_in_place(Matrix& z, const BoxBounds& bounds) {
  check_shapes(z, bounds);
  z = z.cwiseMax(bounds.lower).cwiseMin(bounds.upper);
}

Matrix project(const Matrix& z, const BoxBounds& bounds) {
  Matrix out = z;
  project_in_place(out, bounds);
  return out;
}

StackedMatrix project(const StackedMatrix& z, const BoxBounds& bounds) {
  return {project(z.entries(), bounds), z.label_width(), z.feature_width()};
}

bool is_feasible(const Matrix& z, const BoxBounds& bounds, double tol) {
  check_shapes(z, bounds);
  return ((z.array() >= bounds.lower.array() - tol) &&
          (z.array() <= bounds.upper.array() + tol)).all();
}

bool is_feasible(const StackedMatrix& z, const BoxBounds& bounds, double tol) {
  return is_feasible(z.entries(), bounds, tol);
}

} // namespace timsrf
