#include "timsrf/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "timsrf/errors.hpp"

namespace timsrf {

namespace {

std::string position(const Entry& e) {
  return "(" + std::to_string(e.row) + ", " + std::to_string(e.col) + ")";
}

void check_in_range(const IndexSet& entries, Index rows, Index cols, const char* what) {
  for (const auto& e : entries) {
    if (e.row < 0 || e.row >= rows || e.col < 0 || e.col >= cols)
      throw InvalidInstance(std::string(what) + " position " + position(e) +
                            " outside " + std::to_string(rows) + "x" + std::to_string(cols));
  }
}

} // namespace

IndexSet canonical(IndexSet entries) {
  std::sort(entries.begin(), entries.end());
  entries.erase(std::unique(entries.begin(), entries.end()), entries.end());
  return entries;
}

Mask to_mask(const IndexSet& entries, Index rows, Index cols) {
  Mask mask = Mask::Constant(rows, cols, false);
  for (const auto& e : entries) mask(e.row, e.col) = true;
  return mask;
}

IndexSet from_mask(const Mask& mask) {
  IndexSet out;
  out.reserve(static_cast<std::size_t>(mask.count()));
  for (Index i = 0; i < mask.rows(); ++i)
    for (Index j = 0; j < mask.cols(); ++j)
      if (mask(i, j)) out.push_back({i, j});
  return out;
}

ProblemInstance::ProblemInstance(Matrix features, LabelMatrix labels,
                                 IndexSet observed_features, IndexSet observed_labels)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      observed_features_(canonical(std::move(observed_features))),
      observed_labels_(canonical(std::move(observed_labels))) {
  const Index n = features_.rows();
  if (n == 0) throw InvalidInstance("instance has no rows");
  if (labels_.rows() != n && labels_.cols() != 0)
    throw InvalidInstance("features have " + std::to_string(n) + " rows but labels have " +
                          std::to_string(labels_.rows()));
  if (labels_.cols() == 0) labels_.resize(n, 0);

  check_in_range(observed_features_, n, features_.cols(), "observed feature");
  check_in_range(observed_labels_, n, labels_.cols(), "observed label");

  feature_mask_ = to_mask(observed_features_, n, features_.cols());
  label_mask_ = to_mask(observed_labels_, n, labels_.cols());

  for (const auto& e : observed_features_)
    if (!std::isfinite(features_(e.row, e.col)))
      throw InvalidInstance("observed feature at " + position(e) + " is not finite");

  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < labels_.cols(); ++j) {
      const int y = labels_(i, j);
      if (label_mask_(i, j) ? (y != 1 && y != -1) : y != 0)
        throw InvalidInstance("label at " + position({i, j}) + " is " + std::to_string(y) +
                              (label_mask_(i, j) ? " but observed labels must be +-1"
                                                 : " but unobserved labels must be 0"));
    }
  }
}

ProblemInstance ProblemInstance::masked(const Matrix& features, const LabelMatrix& labels,
                                        IndexSet observed_features, IndexSet observed_labels) {
  const Index n = features.rows();
  const Index t = labels.cols();
  if (labels.rows() != n && t != 0)
    throw InvalidInstance("features and labels disagree on row count");
  observed_features = canonical(std::move(observed_features));
  observed_labels = canonical(std::move(observed_labels));
  check_in_range(observed_features, n, features.cols(), "observed feature");
  check_in_range(observed_labels, n, t, "observed label");

  Matrix x = Matrix::Zero(n, features.cols());
  for (const auto& e : observed_features) x(e.row, e.col) = features(e.row, e.col);
  LabelMatrix y = LabelMatrix::Zero(n, t);
  for (const auto& e : observed_labels) y(e.row, e.col) = labels(e.row, e.col);
  return {std::move(x), std::move(y), std::move(observed_features), std::move(observed_labels)};
}

StackedMatrix::StackedMatrix(Matrix entries, Index label_width, Index feature_width)
    : entries_(std::move(entries)), label_width_(label_width), feature_width_(feature_width) {
  if (label_width < 0 || feature_width < 0)
    throw InvalidArgument("zone widths must be nonnegative");
  if (entries_.cols() != label_width + feature_width + 1)
    throw InvalidArgument("stacked matrix has " + std::to_string(entries_.cols()) +
                          " columns, expected " +
                          std::to_string(label_width + feature_width + 1));
}

void SolverConfig::validate() const {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw InvalidArgument(msg);
  };
  require(step_size > 0, "step_size must be positive");
  require(delta_decay > 0 && delta_decay < 1, "delta_decay must lie in (0, 1)");
  require(delta_init_factor > 0, "delta_init_factor must be positive");
  require(inner_tol > 0 && outer_tol > 0, "tolerances must be positive");
  require(max_inner_iters > 0 && max_outer_iters > 0, "iteration limits must be positive");
  require(alpha_min > 0, "alpha_min must be positive");
  require(alpha_min <= alpha_max, "alpha_min must not exceed alpha_max");
  require(memory_size >= 1, "memory_size must be at least 1");
  require(sufficient_decrease > 0 && sufficient_decrease < 1,
          "sufficient_decrease must lie in (0, 1)");
  require(backtrack_factor > 0 && backtrack_factor < 1, "backtrack_factor must lie in (0, 1)");
  require(label_margin >= 0 && std::isfinite(label_margin), "label_margin must be finite and >= 0");
}

StackedMatrix stack(const ProblemInstance& instance) {
  const Index n = instance.rows();
  const Index t = instance.label_count();
  const Index d = instance.feature_count();
  if (n == 0) throw InvalidInstance("cannot stack an instance with no rows");

  Matrix z(n, t + d + 1);
  z.leftCols(t) = instance.labels().cast<double>();
  z.middleCols(t, d) = instance.feature_mask().select(instance.features(), 0.0);
  z.col(t + d).setOnes();
  return {std::move(z), t, d};
}

Unstacked unstack(const StackedMatrix& z) {
  return {z.entries().leftCols(z.label_width()),
          z.entries().middleCols(z.label_width(), z.feature_width())};
}

} // namespace timsrf
