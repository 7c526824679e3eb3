#include "cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "timsrf/data_io.hpp"
#include "timsrf/diagnostics.hpp"
#include "timsrf/errors.hpp"
#include "timsrf/eval.hpp"
#include "timsrf/solvers.hpp"

namespace fs = std::filesystem;

namespace timsrf::cli {

namespace {

constexpr int kInputError = 2;
constexpr int kNumericalError = 3;

struct CompleteOptions {
  std::string data;
  std::string format;
  std::optional<int> label_count;
  std::string mask;
  std::string method = "srf2";
  double omega = 0.8;
  std::string scenario = "random";
  std::uint64_t seed = 0;
  std::string config;
  std::optional<double> label_margin;
  bool no_standardize = false;
  bool macro = false;
  std::string out = ".";
};

struct ExperimentOptions {
  std::string config;
  std::optional<std::string> method;
  std::vector<double> omega;
  std::optional<std::string> scenario;
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
  std::optional<double> label_margin;
  bool no_standardize = false;
  bool macro = false;
  std::string out;
};

struct DiagnoseOptions {
  double delta = 1.0;
  std::optional<long long> n;
  long long rows = 5;
  long long cols = 5;
  double keep = 0.5;
  int samples = 10000;
  std::uint64_t seed = 0;
  long long rank = 0;
  std::string data;
  std::string mask;
  std::string out;
};

struct SynthOptions {
  long long n = 200;
  long long d = 30;
  long long t = 8;
  long long rank = 3;
  double noise = 0.0;
  std::uint64_t seed = 0;
  std::optional<double> omega;
  std::string out = ".";
};

void ensure_dir(const std::string& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory " + dir + ": " + ec.message());
}

std::vector<std::string> prefixed(const std::vector<std::string>& names, const std::string& p) {
  std::vector<std::string> out;
  for (const auto& n : names) out.push_back(p + n);
  return out;
}

int run_complete(const CompleteOptions& o) {
  const Dataset ds = load_dataset(o.data, o.format, o.label_count);
  const Index n = ds.features.rows(), d = ds.features.cols(), t = ds.labels.cols();

  ObservationMasks masks;
  IndexSet test_set;
  if (!o.mask.empty()) {
    masks = read_masks(o.mask);
  } else {
    masks = mcar_mask(n, d, t, MaskSpec{o.omega, 0.0, o.seed});
    if (parse_scenario(o.scenario) == Scenario::block) {
      auto loss = block_loss(masks.labels, n, t, 0.1, o.seed ^ 0x9E3779B97F4A7C15ULL);
      masks.labels = std::move(loss.observed_labels);
    }
  }
  test_set = from_mask(!to_mask(masks.labels, n, t));

  Matrix features = ds.features;
  std::optional<Standardization> transform;
  if (!o.no_standardize) {
    transform = standardize(ds.features, masks.features);
    features = transform->features;
  }
  const auto instance = ProblemInstance::masked(features, ds.labels, masks.features, masks.labels);
  SolverConfig config = o.config.empty() ? SolverConfig{} : load_solver_config(o.config);
  if (o.label_margin) config.label_margin = *o.label_margin;
  config.validate();
  const Method method = parse_method(o.method);
  const auto report = anneal(instance, config, method);

  const auto parts = unstack(report.solution);
  Matrix completed = parts.features;
  if (transform) completed = destandardize(completed, transform->mean, transform->scale);
  Matrix hard = parts.soft_labels.unaryExpr([](double v) { return v >= 0 ? 1.0 : -1.0; });

  ensure_dir(o.out);
  const fs::path out = o.out;
  write_matrix_csv(completed, ds.feature_names, out / "completed_features.csv");
  write_matrix_csv(parts.soft_labels, prefixed(ds.label_names, "label:"), out / "soft_labels.csv");
  write_matrix_csv(hard, prefixed(ds.label_names, "label:"), out / "predictions.csv");
  write_masks(masks, out / "masks.txt");

  std::ostringstream summary;
  summary << "method: " << method_name(method) << '\n'
          << "shape: n=" << n << " d=" << d << " t=" << t << '\n'
          << "observed features: " << masks.features.size() << '\n'
          << "observed labels: " << masks.labels.size() << '\n'
          << "stages: " << report.objective_trace.size() << '\n'
          << "wall time (s): " << report.wall_time << '\n'
          << "converged: " << (report.converged ? "yes" : "no") << '\n';
  if (!test_set.empty()) {
    try {
      const double a = evaluate_labels(report.solution, instance, ds.labels, test_set,
                                       o.macro ? AucAveraging::macro : AucAveraging::micro);
      summary << "hidden-label AUC: " << a << '\n';
    } catch (const UndefinedAuc&) {
      summary << "hidden-label AUC: undefined (single class)\n";
    }
  }
  std::ofstream(out / "summary.txt") << summary.str();
  std::cout << summary.str();
  return 0;
}

int run_experiment_cmd(const ExperimentOptions& o) {
  auto file = load_experiment_file(o.config);
  auto& spec = file.spec;
  if (o.method) spec.method = parse_method(*o.method);
  if (!o.omega.empty()) spec.observation_rates = o.omega;
  if (o.scenario) spec.scenario = parse_scenario(*o.scenario);
  if (o.trials) spec.trials = *o.trials;
  if (o.seed) spec.base_seed = *o.seed;
  if (o.label_margin) spec.config.label_margin = *o.label_margin;
  if (o.no_standardize) spec.standardize = false;
  if (o.macro) spec.averaging = AucAveraging::macro;
  spec.validate();

  const Dataset ds = load_dataset(file.dataset_path, file.format, file.label_count);
  const auto result = run_experiment(spec, ds);
  const auto rendered = render_report(result.rows);
  std::cout << rendered.table;
  if (!o.out.empty()) {
    ensure_dir(o.out);
    std::ofstream(fs::path(o.out) / "report.txt") << rendered.table;
    std::ofstream(fs::path(o.out) / "report.csv") << rendered.csv;
  }
  return 0;
}

int run_diagnose(const DiagnoseOptions& o) {
  const QraProfile profile(o.delta);
  std::optional<AffineObservationOperator> op;
  if (!o.data.empty()) {
    const Dataset ds = load_dataset(o.data, "", std::nullopt);
    const auto masks = o.mask.empty() ? mcar_mask(ds.features.rows(), ds.features.cols(),
                                                  ds.labels.cols(), MaskSpec{0.8, 0.0, o.seed})
                                      : read_masks(o.mask);
    op = AffineObservationOperator::from_instance(
        ProblemInstance::masked(ds.features, ds.labels, masks.features, masks.labels));
  } else {
    if (!(o.keep >= 0 && o.keep <= 1)) throw InvalidArgument("--keep must lie in [0, 1]");
    std::mt19937_64 rng(o.seed);
    IndexSet fixed;
    for (long long i = 0; i < o.rows; ++i)
      for (long long j = 0; j < o.cols; ++j)
        if (static_cast<double>(rng() >> 11) * 0x1.0p-53 < o.keep) fixed.push_back({i, j});
    op.emplace(o.rows, o.cols, std::move(fixed));
  }
  const Index n = o.n ? static_cast<Index>(*o.n) : std::min(op->rows(), op->cols());

  std::ostringstream r;
  r << "QRA family: gaussian, delta = " << o.delta << '\n';
  std::vector<double> grid;
  for (int k = -50; k <= 50; ++k) grid.push_back(k * o.delta / 10.0);
  const auto checks = qra_check(profile, grid);
  auto yn = [](bool b) { return b ? "pass" : "FAIL"; };
  r << "  symmetry            " << yn(checks.symmetric) << '\n'
    << "  peak only at 0      " << yn(checks.unique_peak) << '\n'
    << "  concave near 0      " << yn(checks.concave_near_zero) << '\n'
    << "  tail decay          " << yn(checks.tail_decay) << '\n';
  r << "operator: " << op->rows() << "x" << op->cols() << ", " << op->fixed_coords().size()
    << " fixed coordinates, " << op->free_count() << " free\n";
  const double delta_hat = spherical_section_estimate(*op, o.samples, o.seed);
  r << "spherical section constant, sampled upper bound (" << o.samples
    << " samples): " << delta_hat << '\n';
  r << "alpha_delta (n = " << n << "): " << alpha_delta(profile, n) << '\n';
  try {
    const auto bound = recovery_bound(profile, n, delta_hat);
    r << "recovery bound n*alpha/(sqrt(D)-sqrt(ceil(D-1))): " << bound.bound
      << "  [uses the sampled upper bound on D; indicative only]\n";
  } catch (const BoundUndefined& e) {
    r << "recovery bound: undefined (" << e.what() << ")\n";
  }
  r << "rank condition 2*r0 < D (r0 = " << o.rank << "): "
    << (rank_condition_holds(o.rank, delta_hat) ? "holds" : "fails") << " [advisory]\n";

  std::cout << r.str();
  if (!o.out.empty()) std::ofstream(o.out) << r.str();
  return 0;
}

int run_synth(const SynthOptions& o) {
  const auto data = synthesize(o.n, o.d, o.t, o.rank, o.noise, o.seed);
  ensure_dir(o.out);
  const fs::path out = o.out;
  save_csv(data.dataset, out / "data.csv");
  write_matrix_csv(data.model.pre_features, data.dataset.feature_names, out / "clean_features.csv");
  write_matrix_csv(data.model.soft_labels, prefixed(data.dataset.label_names, "label:"),
                   out / "soft_labels.csv");
  if (o.omega) write_masks(mcar_mask(o.n, o.d, o.t, MaskSpec{*o.omega, 0.0, o.seed}),
                           out / "masks.txt");
  std::cout << "wrote synthetic instance n=" << o.n << " d=" << o.d << " t=" << o.t
            << " rank=" << o.rank << " to " << out.string() << '\n';
  return 0;
}

} // namespace

int run(int argc, char** argv) {
  CLI::App app{"Joint feature imputation and multi-label transduction by smoothed rank "
               "minimisation"};
  app.require_subcommand(1);

  CompleteOptions co;
  auto* complete = app.add_subcommand("complete", "Complete one instance and write predictions");
  complete->add_option("--data", co.data, "Dataset file (.csv with label: columns, or .arff)")
      ->required();
  complete->add_option("--format", co.format, "csv or arff (default: from extension)");
  complete->add_option("--label-count", co.label_count, "ARFF: number of trailing label attributes");
  complete->add_option("--mask", co.mask, "Mask file with 'X i j' / 'Y i j' lines");
  complete->add_option("--method", co.method, "srf1 (PG) or srf2 (SPG)");
  complete->add_option("--omega", co.omega, "Observation rate when no mask file is given");
  complete->add_option("--scenario", co.scenario, "random or block");
  complete->add_option("--seed", co.seed, "Mask seed");
  complete->add_option("--config", co.config, "JSON solver settings");
  complete->add_option("--label-margin", co.label_margin, "Observed labels kept at |z| >= margin");
  complete->add_flag("--no-standardize", co.no_standardize, "Use raw feature values");
  complete->add_flag("--macro", co.macro, "Macro-averaged AUC in the summary");
  complete->add_option("--out", co.out, "Output directory");

  ExperimentOptions eo;
  auto* experiment = app.add_subcommand("experiment", "Run a scenario grid from a JSON experiment file");
  experiment->add_option("--config", eo.config, "Experiment JSON file")->required();
  experiment->add_option("--method", eo.method, "srf1 or srf2");
  experiment->add_option("--omega", eo.omega, "Observation rates (repeatable)");
  experiment->add_option("--scenario", eo.scenario, "random or block");
  experiment->add_option("--trials", eo.trials, "Trials per rate");
  experiment->add_option("--seed", eo.seed, "Base seed");
  experiment->add_option("--label-margin", eo.label_margin, "Observed labels kept at |z| >= margin");
  experiment->add_flag("--no-standardize", eo.no_standardize, "Use raw feature values");
  experiment->add_flag("--macro", eo.macro, "Macro-averaged AUC");
  experiment->add_option("--out", eo.out, "Directory for report.txt and report.csv");

  DiagnoseOptions dopt;
  auto* diagnose = app.add_subcommand("diagnose", "QRA checks and recovery-bound report");
  diagnose->add_option("--delta", dopt.delta, "Smoothing width");
  diagnose->add_option("--n", dopt.n, "n = min(rows, cols) for alpha_delta");
  diagnose->add_option("--rows", dopt.rows, "Operator rows");
  diagnose->add_option("--cols", dopt.cols, "Operator columns");
  diagnose->add_option("--keep", dopt.keep, "Fraction of coordinates kept by the operator");
  diagnose->add_option("--samples", dopt.samples, "Samples for the spherical-section estimate");
  diagnose->add_option("--seed", dopt.seed, "Sampling seed");
  diagnose->add_option("--rank", dopt.rank, "r0 for the rank condition");
  diagnose->add_option("--data", dopt.data, "Build the operator from this dataset instead");
  diagnose->add_option("--mask", dopt.mask, "Mask file for --data");
  diagnose->add_option("--out", dopt.out, "Also write the report to this file");

  SynthOptions so;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic low-rank instance");
  synth->add_option("--n", so.n, "Rows");
  synth->add_option("--d", so.d, "Features");
  synth->add_option("--t", so.t, "Labels");
  synth->add_option("--rank", so.rank, "Rank of the clean features");
  synth->add_option("--noise", so.noise, "Feature noise standard deviation");
  synth->add_option("--seed", so.seed, "Seed");
  synth->add_option("--omega", so.omega, "Also write an MCAR mask with this rate");
  synth->add_option("--out", so.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kInputError;
  }

  try {
    if (*complete) return run_complete(co);
    if (*experiment) return run_experiment_cmd(eo);
    if (*diagnose) return run_diagnose(dopt);
    if (*synth) return run_synth(so);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::numerical ? kNumericalError : kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  }
  return 0;
}

} // namespace timsrf::cli
