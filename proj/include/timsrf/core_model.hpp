#pragma once

#include <compare>
#include <vector>

#include <Eigen/Core>

namespace timsrf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using LabelMatrix = Eigen::MatrixXi;
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;
using Index = Eigen::Index;

/// Zero-based (row, col) position in a matrix.
struct Entry {
  Index row = 0;
  Index col = 0;

  friend auto operator<=>(const Entry&, const Entry&) = default;
};

/// Sorted, duplicate-free list of positions.
using IndexSet = std::vector<Entry>;

IndexSet canonical(IndexSet entries);
Mask to_mask(const IndexSet& entries, Index rows, Index cols);
IndexSet from_mask(const Mask& mask);

/// Partially observed features X (n x d), ternary hard labels Y (n x t) and
/// their observation sets. Construction validates every invariant: observed
/// labels are +-1, unobserved labels are 0, observed features are finite and
/// all positions are in range.
class ProblemInstance {
public:
  ProblemInstance(Matrix features, LabelMatrix labels, IndexSet observed_features,
                  IndexSet observed_labels);

  /// Builds an instance from fully populated matrices, zeroing every label
  /// outside `observed_labels` and every feature outside `observed_features`.
  static ProblemInstance masked(const Matrix& features, const LabelMatrix& labels,
                                IndexSet observed_features, IndexSet observed_labels);

  Index rows() const noexcept { return features_.rows(); }
  Index feature_count() const noexcept { return features_.cols(); }
  Index label_count() const noexcept { return labels_.cols(); }

  const Matrix& features() const noexcept { return features_; }
  const LabelMatrix& labels() const noexcept { return labels_; }
  const IndexSet& observed_features() const noexcept { return observed_features_; }
  const IndexSet& observed_labels() const noexcept { return observed_labels_; }
  const Mask& feature_mask() const noexcept { return feature_mask_; }
  const Mask& label_mask() const noexcept { return label_mask_; }

private:
  Matrix features_;
  LabelMatrix labels_;
  IndexSet observed_features_;
  IndexSet observed_labels_;
  Mask feature_mask_;
  Mask label_mask_;
};

/// The n x (t + d + 1) working matrix [Y, X, 1].
class StackedMatrix {
public:
  StackedMatrix(Matrix entries, Index label_width, Index feature_width);

  const Matrix& entries() const noexcept { return entries_; }
  Index rows() const noexcept { return entries_.rows(); }
  Index cols() const noexcept { return entries_.cols(); }
  Index label_width() const noexcept { return label_width_; }
  Index feature_width() const noexcept { return feature_width_; }
  Index ones_column() const noexcept { return label_width_ + feature_width_; }

private:
  Matrix entries_;
  Index label_width_;
  Index feature_width_;
};

struct SolverConfig {
  double step_size = 3.0;          // PG step, in units of delta^2
  double delta_decay = 0.7;
  double delta_init_factor = 25.0;
  double inner_tol = 1e-4;
  double outer_tol = 1e-3;
  int max_inner_iters = 200;
  int max_outer_iters = 60;
  double alpha_min = 0.1;
  double alpha_max = 3.0;
  int memory_size = 5;
  double sufficient_decrease = 0.1;
  double backtrack_factor = 0.35;
  // observed labels are held at |z| >= label_margin; 0 lets them collapse to zero
  double label_margin = 1.0;

  /// Throws InvalidArgument when a field is out of range.
  void validate() const;
};

struct StageRecord {
  double delta = 0.0;
  double objective = 0.0;
};

enum class StopReason { converged, delta_floor, max_outer_iters };

struct SolverReport {
  StackedMatrix solution;
  std::vector<StageRecord> objective_trace;
  std::vector<int> inner_iterations;
  double wall_time = 0.0;
  bool converged = false;
  StopReason stop_reason = StopReason::max_outer_iters;
};

StackedMatrix stack(const ProblemInstance& instance);

struct Unstacked {
  Matrix soft_labels;
  Matrix features;
};

Unstacked unstack(const StackedMatrix& z);

} // namespace timsrf
