#pragma once

#include "timsrf/core_model.hpp"

namespace timsrf {

/// Per-entry box l <= z <= u describing the feasible set of the constrained
/// problem. Infinite bounds are stored as IEEE infinities.
///
/// Label zone: observed +1 -> [m, inf), observed -1 -> (-inf, -m], otherwise
/// free, with m the label margin. At m = 0, zero satisfies either sign. Feature zone: observed entries are pinned
/// to the observed value. Last column: pinned to 1.
struct BoxBounds {
  Matrix lower;
  Matrix upper;
};

BoxBounds build_bounds(const ProblemInstance& instance, double label_margin = 0.0);

/// Entrywise median{lower, z, upper}.
Matrix project(const Matrix& z, const BoxBounds& bounds);
StackedMatrix project(const StackedMatrix& z, const BoxBounds& bounds);
void project_in_place(Matrix& z, const BoxBounds& bounds);

bool is_feasible(const Matrix& z, const BoxBounds& bounds, double tol);
bool is_feasible(const StackedMatrix& z, const BoxBounds& bounds, double tol);

} // namespace timsrf
