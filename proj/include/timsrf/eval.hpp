#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "timsrf/core_model.hpp"
#include "timsrf/data_io.hpp"
#include "timsrf/solvers.hpp"

namespace timsrf {

enum class Scenario { random, block };
enum class AucAveraging { micro, macro };

const char* scenario_name(Scenario scenario);
Scenario parse_scenario(const std::string& name);

/// Area under the ROC curve: probability that a random positive scores above
/// a random negative, ties counting one half. Throws UndefinedAuc when
/// `truth` lacks either class.
double auc(std::span<const double> scores, std::span<const int> truth);

/// AUC of the soft-label zone of `solution` over `test_set`. Micro pools all
/// test entries; macro averages per-label AUCs over labels with both classes.
/// Only `truth` entries inside `test_set` are read.
double evaluate_labels(const StackedMatrix& solution, const ProblemInstance& instance,
                       const LabelMatrix& truth, const IndexSet& test_set,
                       AucAveraging averaging = AucAveraging::micro);

/// RMS error of the feature zone against `ground_truth` over `holdout`.
double feature_rmse(const StackedMatrix& solution, const ProblemInstance& instance,
                    const Matrix& ground_truth, const IndexSet& holdout);

struct CvRanges {
  std::vector<double> step_sizes{1.0, 2.0, 3.0, 5.0};  // mu (PG) or alpha_max (SPG)
  std::vector<double> decays{0.5, 0.7, 0.9};
  double validation_fraction = 0.2;
  int folds = 1;
};

struct CvCandidate {
  SolverConfig config;
  double score = 0.0;
};

struct CvResult {
  SolverConfig best;
  std::vector<CvCandidate> candidates;
};

/// Scores one configuration: solve `train` and measure on `validation`.
using CvScorer = std::function<double(const ProblemInstance& train, const IndexSet& validation,
                                      const SolverConfig& config)>;

/// Grid search over step size and decay. Each fold hides a random
/// `validation_fraction` of the observed labels; the configuration with the
/// highest mean validation AUC wins, first in grid order on ties. A singleton
/// grid is returned without solving.
CvResult cross_validate(const ProblemInstance& instance, Method method,
                        const SolverConfig& base, const CvRanges& ranges, std::uint64_t seed,
                        AucAveraging averaging = AucAveraging::micro,
                        const CvScorer& scorer = {});

struct ExperimentSpec {
  std::string dataset_name;
  Method method = Method::spg;
  Scenario scenario = Scenario::random;
  std::vector<double> observation_rates{0.8};
  int trials = 10;
  std::uint64_t base_seed = 0;
  SolverConfig config;
  std::optional<CvRanges> cv;
  bool standardize = true;
  AucAveraging averaging = AucAveraging::micro;
  double block_fraction = 0.1;

  void validate() const;
};

struct TrialResult {
  double observation_rate = 0.0;
  int trial = 0;
  bool ok = false;
  double auc = 0.0;           // fraction in [0, 1]
  double feature_rmse = 0.0;  // NaN when no features were held out
  double wall_time = 0.0;
  std::string error;
};

struct ResultRow {
  std::string method;
  std::string dataset;
  double observation_rate = 0.0;
  double auc_mean = 0.0;      // percent
  double auc_std = 0.0;       // percent
  double time_mean = 0.0;     // seconds
  int trials_ok = 0;
  int trials_failed = 0;

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  std::vector<TrialResult> trials;
};

/// One trial: masks (plus block loss), optional standardisation and CV,
/// solve, evaluate. Seeded by base_seed + trial.
TrialResult run_trial(const ExperimentSpec& spec, const Dataset& dataset,
                      double observation_rate, int trial);

ExperimentResult run_experiment(const ExperimentSpec& spec, const Dataset& dataset);

struct RenderedReport {
  std::string table;
  std::string csv;
};

RenderedReport render_report(std::span<const ResultRow> rows);
std::vector<ResultRow> parse_report_csv(const std::string& csv);

/// "87.4 (1.0)"
std::string format_auc_cell(double mean, double std);

/// Experiment description read from a JSON file.
struct ExperimentFile {
  ExperimentSpec spec;
  std::filesystem::path dataset_path;
  std::string format;              // "csv" or "arff"
  std::optional<int> label_count;  // ARFF only
};

ExperimentFile load_experiment_file(const std::filesystem::path& path);

/// Solver settings from a JSON file, either flat or under a "solver" key.
SolverConfig load_solver_config(const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path, const std::string& format,
                     std::optional<int> label_count);

} // namespace timsrf
