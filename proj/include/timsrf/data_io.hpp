#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "timsrf/core_model.hpp"

namespace timsrf {

/// Fully observed multi-label dataset. Labels are strictly +-1.
struct Dataset {
  std::string name;
  Matrix features;
  LabelMatrix labels;
  std::vector<std::string> feature_names;
  std::vector<std::string> label_names;
};

/// CSV with a header row; columns named "label:<name>" are labels, the rest
/// are numeric features. Labels may be {-1, 1} or {0, 1}.
Dataset load_csv(const std::filesystem::path& path);
void save_csv(const Dataset& dataset, const std::filesystem::path& path);

/// Dense ARFF with numeric features and {0,1} nominal labels. Without an
/// explicit `label_count` the MEKA "-C k" relation option is honoured, and
/// failing that every {0,1} nominal attribute is a label.
Dataset load_arff(const std::filesystem::path& path,
                  std::optional<int> label_count = std::nullopt);

struct Standardization {
  Matrix features;
  Vector mean;
  Vector scale;
};

/// Column-wise centring and scaling by the observed-entry mean and sample
/// standard deviation. Zero-variance columns are only centred.
Standardization standardize(const Matrix& features, const IndexSet& observed);
Matrix destandardize(const Matrix& standardized, const Vector& mean, const Vector& scale);

struct MaskSpec {
  double observation_rate = 1.0;
  double block_loss_fraction = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct ObservationMasks {
  IndexSet features;
  IndexSet labels;
};

/// Every data and label position observed independently with probability
/// spec.observation_rate.
ObservationMasks mcar_mask(Index n, Index d, Index t, const MaskSpec& spec);

struct BlockLoss {
  IndexSet observed_labels;
  std::vector<Index> test_rows;  // sorted
};

/// Drops every label observation in ceil(fraction * n) uniformly drawn rows.
BlockLoss block_loss(const IndexSet& observed_labels, Index n, Index t, double fraction,
                     std::uint64_t seed);

struct SyntheticModel {
  Matrix weight;         // t x d
  Vector bias;           // t
  Matrix pre_features;   // n x d, rank r
  Matrix soft_labels;    // n x t
};

struct SyntheticData {
  Dataset dataset;
  SyntheticModel model;
};

/// X0 = A B with standard normal A (n x r) and B (r x d); Y0 = X0 W^T + 1 b^T;
/// labels sign(Y0); features X0 plus Gaussian noise.
SyntheticData synthesize(Index n, Index d, Index t, Index r, double noise_sd,
                         std::uint64_t seed);

/// Mask files: one "X i j" or "Y i j" line per observed position, zero-based.
void write_masks(const ObservationMasks& masks, const std::filesystem::path& path);
ObservationMasks read_masks(const std::filesystem::path& path);

/// Writes a plain numeric matrix as CSV with the given header.
void write_matrix_csv(const Matrix& m, const std::vector<std::string>& header,
                      const std::filesystem::path& path);

} // namespace timsrf
