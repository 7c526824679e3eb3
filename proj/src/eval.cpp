#include "timsrf/eval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "timsrf/errors.hpp"

namespace timsrf {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_solution_shape(const StackedMatrix& solution, const ProblemInstance& instance) {
  if (solution.rows() != instance.rows() || solution.label_width() != instance.label_count() ||
      solution.feature_width() != instance.feature_count())
    throw InvalidArgument("solution zones do not match the instance");
}

} // namespace

const char* scenario_name(Scenario scenario) {
  return scenario == Scenario::random ? "random" : "block";
}

Scenario parse_scenario(const std::string& name) {
  if (name == "random") return Scenario::random;
  if (name == "block" || name == "random+block") return Scenario::block;
  throw InvalidArgument("unknown scenario '" + name + "' (expected random or block)");
}

double auc(std::span<const double> scores, std::span<const int> truth) {
  if (scores.size() != truth.size()) throw InvalidArgument("scores and truth differ in length");
  std::size_t positives = 0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    if (truth[k] != 1 && truth[k] != -1) throw InvalidArgument("truth values must be +-1");
    if (std::isnan(scores[k])) throw InvalidArgument("scores contain NaN");
    positives += truth[k] == 1;
  }
  const std::size_t negatives = truth.size() - positives;
  if (positives == 0 || negatives == 0)
    throw UndefinedAuc("AUC needs both classes; got " + std::to_string(positives) +
                       " positives and " + std::to_string(negatives) + " negatives");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Mann-Whitney: rank sum of positives with midranks for ties.
  double positive_rank_sum = 0.0;
  for (std::size_t lo = 0; lo < order.size();) {
    std::size_t hi = lo;
    while (hi + 1 < order.size() && scores[order[hi + 1]] == scores[order[lo]]) ++hi;
    const double midrank = 0.5 * static_cast<double>(lo + hi) + 1.0;
    for (std::size_t k = lo; k <= hi; ++k)
      if (truth[order[k]] == 1) positive_rank_sum += midrank;
    lo = hi + 1;
  }
  const double p = static_cast<double>(positives);
  const double u = positive_rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(negatives));
}

double evaluate_labels(const StackedMatrix& solution, const ProblemInstance& instance,
                       const LabelMatrix& truth, const IndexSet& test_set,
                       AucAveraging averaging) {
  check_solution_shape(solution, instance);
  const Index t = instance.label_count();
  std::vector<std::vector<double>> scores(static_cast<std::size_t>(t));
  std::vector<std::vector<int>> labels(static_cast<std::size_t>(t));
  for (const auto& e : test_set) {
    if (e.row < 0 || e.row >= instance.rows() || e.col < 0 || e.col >= t)
      throw InvalidArgument("test position outside the label zone");
    if (instance.label_mask()(e.row, e.col))
      throw InvalidArgument("test position (" + std::to_string(e.row) + ", " +
                            std::to_string(e.col) + ") is an observed label");
    const auto c = static_cast<std::size_t>(e.col);
    scores[c].push_back(solution.entries()(e.row, e.col));
    labels[c].push_back(truth(e.row, e.col));
  }

  if (averaging == AucAveraging::micro) {
    std::vector<double> s;
    std::vector<int> y;
    for (std::size_t c = 0; c < scores.size(); ++c) {
      s.insert(s.end(), scores[c].begin(), scores[c].end());
      y.insert(y.end(), labels[c].begin(), labels[c].end());
    }
    return auc(s, y);
  }

  double sum = 0.0;
  int used = 0;
  for (std::size_t c = 0; c < scores.size(); ++c) {
    const auto pos = std::count(labels[c].begin(), labels[c].end(), 1);
    if (pos == 0 || pos == static_cast<long>(labels[c].size())) continue;
    sum += auc(scores[c], labels[c]);
    ++used;
  }
  if (used == 0) throw UndefinedAuc("no label column has both classes in the test set");
  return sum / used;
}

double feature_rmse(const StackedMatrix& solution, const ProblemInstance& instance,
                    const Matrix& ground_truth, const IndexSet& holdout) {
  check_solution_shape(solution, instance);
  if (holdout.empty()) throw InvalidArgument("feature RMSE over an empty holdout is undefined");
  if (ground_truth.rows() != instance.rows() || ground_truth.cols() != instance.feature_count())
    throw InvalidArgument("ground truth shape does not match the feature zone");
  const Index t = instance.label_count();
  double ss = 0.0;
  for (const auto& e : holdout) {
    if (instance.feature_mask()(e.row, e.col))
      throw InvalidArgument("holdout position is an observed feature");
    const double r = solution.entries()(e.row, t + e.col) - ground_truth(e.row, e.col);
    ss += r * r;
  }
  return std::sqrt(ss / static_cast<double>(holdout.size()));
}

CvResult cross_validate(const ProblemInstance& instance, Method method, const SolverConfig& base,
                        const CvRanges& ranges, std::uint64_t seed, AucAveraging averaging,
                        const CvScorer& scorer) {
  if (ranges.step_sizes.empty() || ranges.decays.empty())
    throw InvalidArgument("cross-validation grid is empty");
  if (!(ranges.validation_fraction > 0 && ranges.validation_fraction < 1))
    throw InvalidArgument("validation fraction must lie in (0, 1)");
  if (ranges.folds < 1) throw InvalidArgument("need at least one fold");

  CvResult result;
  for (double step : ranges.step_sizes) {
    for (double decay : ranges.decays) {
      SolverConfig cfg = base;
      if (method == Method::pg)
        cfg.step_size = step;
      else
        cfg.alpha_max = std::max(step, cfg.alpha_min);
      cfg.delta_decay = decay;
      cfg.validate();
      result.candidates.push_back({cfg, 0.0});
    }
  }
  if (result.candidates.size() == 1) {
    result.best = result.candidates.front().config;
    return result;
  }

  const CvScorer score = scorer ? scorer
                                : CvScorer([&](const ProblemInstance& train, const IndexSet& validation,
                                               const SolverConfig& cfg) {
                                    const auto report = anneal(train, cfg, method);
                                    return evaluate_labels(report.solution, train, instance.labels(),
                                                           validation, averaging);
                                  });

  struct Fold {
    ProblemInstance train;
    IndexSet validation;
  };
  std::vector<Fold> folds;
  const auto& observed = instance.observed_labels();
  const auto held = static_cast<std::size_t>(
      std::ceil(ranges.validation_fraction * static_cast<double>(observed.size())));
  for (int f = 0; f < ranges.folds; ++f) {
    IndexSet shuffled = observed;
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(f));
    for (std::size_t i = shuffled.size(); i > 1; --i)
      std::swap(shuffled[i - 1], shuffled[static_cast<std::size_t>(rng() % i)]);
    IndexSet validation(shuffled.begin(), shuffled.begin() + static_cast<long>(held));
    IndexSet train_labels(shuffled.begin() + static_cast<long>(held), shuffled.end());
    auto train = ProblemInstance::masked(instance.features(), instance.labels(),
                                         instance.observed_features(), std::move(train_labels));
    folds.push_back({std::move(train), canonical(std::move(validation))});
  }

  double best_score = -std::numeric_limits<double>::infinity();
  for (auto& cand : result.candidates) {
    double sum = 0.0;
    int used = 0;
    for (const auto& fold : folds) {
      try {
        sum += score(fold.train, fold.validation, cand.config);
        ++used;
      } catch (const Error& e) {
        std::clog << "warning: cross-validation fold skipped: " << e.what() << '\n';
      }
    }
    cand.score = used ? sum / used : -std::numeric_limits<double>::infinity();
    if (cand.score > best_score) {
      best_score = cand.score;
      result.best = cand.config;
    }
  }
  if (!std::isfinite(best_score)) result.best = result.candidates.front().config;
  return result;
}

void ExperimentSpec::validate() const {
  if (trials < 1) throw InvalidArgument("trials must be at least 1");
  if (observation_rates.empty()) throw InvalidArgument("no observation rates given");
  for (double w : observation_rates)
    if (!(w > 0 && w <= 1)) throw InvalidArgument("observation rates must lie in (0, 1]");
  if (scenario == Scenario::block && !(block_fraction > 0 && block_fraction < 1))
    throw InvalidArgument("block fraction must lie in (0, 1)");
  config.validate();
}

TrialResult run_trial(const ExperimentSpec& spec, const Dataset& dataset, double observation_rate,
                      int trial) {
  TrialResult out;
  out.observation_rate = observation_rate;
  out.trial = trial;
  out.feature_rmse = kNaN;
  try {
    const Index n = dataset.features.rows();
    const Index d = dataset.features.cols();
    const Index t = dataset.labels.cols();
    const std::uint64_t seed = spec.base_seed + static_cast<std::uint64_t>(trial);

    const MaskSpec mask_spec{observation_rate,
                             spec.scenario == Scenario::block ? spec.block_fraction : 0.0, seed};
    auto masks = mcar_mask(n, d, t, mask_spec);

    IndexSet test_set;
    if (spec.scenario == Scenario::block) {
      auto loss = block_loss(masks.labels, n, t, spec.block_fraction,
                             seed ^ 0x9E3779B97F4A7C15ULL);
      masks.labels = std::move(loss.observed_labels);
      for (Index i : loss.test_rows)
        for (Index j = 0; j < t; ++j) test_set.push_back({i, j});
    } else {
      const Mask observed = to_mask(masks.labels, n, t);
      test_set = from_mask(!observed);
    }

    Matrix features = dataset.features;
    if (spec.standardize) features = standardize(dataset.features, masks.features).features;
    const auto instance =
        ProblemInstance::masked(features, dataset.labels, masks.features, masks.labels);

    SolverConfig config = spec.config;
    if (spec.cv) config = cross_validate(instance, spec.method, spec.config, *spec.cv, seed,
                                         spec.averaging).best;

    const auto report = anneal(instance, config, spec.method);
    out.wall_time = report.wall_time;
    out.auc = evaluate_labels(report.solution, instance, dataset.labels, test_set, spec.averaging);
    const IndexSet holdout = from_mask(!instance.feature_mask());
    if (!holdout.empty()) out.feature_rmse = feature_rmse(report.solution, instance, features, holdout);
    out.ok = true;
  } catch (const Error& e) {
    out.ok = false;
    out.error = e.what();
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentSpec& spec, const Dataset& dataset) {
  spec.validate();
  ExperimentResult result;
  for (double rate : spec.observation_rates) {
    std::vector<const TrialResult*> ok;
    const auto first = result.trials.size();
    for (int k = 0; k < spec.trials; ++k) {
      result.trials.push_back(run_trial(spec, dataset, rate, k));
      const auto& tr = result.trials.back();
      if (!tr.ok)
        std::clog << "warning: " << dataset.name << " omega=" << rate << " trial " << k
                  << " failed and is excluded: " << tr.error << '\n';
    }
    for (auto i = first; i < result.trials.size(); ++i)
      if (result.trials[i].ok) ok.push_back(&result.trials[i]);

    ResultRow row;
    row.method = method_name(spec.method);
    row.dataset = spec.dataset_name.empty() ? dataset.name : spec.dataset_name;
    row.observation_rate = rate;
    row.trials_ok = static_cast<int>(ok.size());
    row.trials_failed = spec.trials - row.trials_ok;
    if (ok.empty()) {
      row.auc_mean = row.auc_std = row.time_mean = kNaN;
    } else {
      double sum = 0.0, time = 0.0;
      for (const auto* tr : ok) {
        sum += 100.0 * tr->auc;
        time += tr->wall_time;
      }
      row.auc_mean = sum / static_cast<double>(ok.size());
      row.time_mean = time / static_cast<double>(ok.size());
      double ss = 0.0;
      for (const auto* tr : ok) ss += std::pow(100.0 * tr->auc - row.auc_mean, 2);
      row.auc_std = ok.size() > 1 ? std::sqrt(ss / static_cast<double>(ok.size() - 1)) : 0.0;
    }
    result.rows.push_back(row);
  }
  return result;
}

std::string format_auc_cell(double mean, double std) {
  if (std::isnan(mean)) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f (%.1f)", mean, std);
  return buf;
}

RenderedReport render_report(std::span<const ResultRow> rows) {
  if (rows.empty()) throw InvalidArgument("nothing to report");

  std::vector<std::array<std::string, 6>> cells;
  cells.push_back({"Dataset", "Method", "omega", "AUC(%) (std)", "time(s)", "trials"});
  for (const auto& r : rows) {
    char omega[16], time[32];
    std::snprintf(omega, sizeof omega, "%g%%", 100.0 * r.observation_rate);
    if (std::isnan(r.time_mean))
      std::snprintf(time, sizeof time, "n/a");
    else
      std::snprintf(time, sizeof time, "%.2f", r.time_mean);
    std::string trials = std::to_string(r.trials_ok);
    if (r.trials_failed) trials += " (+" + std::to_string(r.trials_failed) + " failed)";
    cells.push_back({r.dataset, r.method, omega, format_auc_cell(r.auc_mean, r.auc_std), time,
                     trials});
  }
  std::array<std::size_t, 6> width{};
  for (const auto& row : cells)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());

  std::ostringstream table;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    for (std::size_t c = 0; c < cells[r].size(); ++c) {
      table << std::left << std::setw(static_cast<int>(width[c])) << cells[r][c];
      table << (c + 1 < cells[r].size() ? "  " : "");
    }
    table << '\n';
    if (r == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w + 2;
      table << std::string(total - 2, '-') << '\n';
    }
  }

  std::ostringstream csv;
  csv << "method,dataset,omega,auc_mean,auc_std,time_mean,trials_ok,trials_failed\n";
  csv << std::setprecision(17);
  for (const auto& r : rows)
    csv << r.method << ',' << r.dataset << ',' << r.observation_rate << ',' << r.auc_mean << ','
        << r.auc_std << ',' << r.time_mean << ',' << r.trials_ok << ',' << r.trials_failed << '\n';
  return {table.str(), csv.str()};
}

std::vector<ResultRow> parse_report_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("report CSV is empty");
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::istringstream fields(line);
    for (std::string cell; std::getline(fields, cell, ',');) f.push_back(cell);
    if (f.size() != 8) throw ParseError("report CSV row has " + std::to_string(f.size()) + " fields");
    auto num = [](const std::string& s) {
      if (s == "nan" || s == "-nan") return kNaN;
      return std::stod(s);
    };
    ResultRow r;
    r.method = f[0];
    r.dataset = f[1];
    r.observation_rate = num(f[2]);
    r.auc_mean = num(f[3]);
    r.auc_std = num(f[4]);
    r.time_mean = num(f[5]);
    r.trials_ok = std::stoi(f[6]);
    r.trials_failed = std::stoi(f[7]);
    rows.push_back(std::move(r));
  }
  return rows;
}

namespace {

SolverConfig solver_config_from_json(const nlohmann::json& j, SolverConfig cfg) {
  for (const auto& [key, value] : j.items()) {
    if (key == "step_size") cfg.step_size = value.get<double>();
    else if (key == "delta_decay") cfg.delta_decay = value.get<double>();
    else if (key == "delta_init_factor") cfg.delta_init_factor = value.get<double>();
    else if (key == "inner_tol") cfg.inner_tol = value.get<double>();
    else if (key == "outer_tol") cfg.outer_tol = value.get<double>();
    else if (key == "max_inner_iters") cfg.max_inner_iters = value.get<int>();
    else if (key == "max_outer_iters") cfg.max_outer_iters = value.get<int>();
    else if (key == "alpha_min") cfg.alpha_min = value.get<double>();
    else if (key == "alpha_max") cfg.alpha_max = value.get<double>();
    else if (key == "memory_size") cfg.memory_size = value.get<int>();
    else if (key == "sufficient_decrease") cfg.sufficient_decrease = value.get<double>();
    else if (key == "backtrack_factor") cfg.backtrack_factor = value.get<double>();
    else if (key == "label_margin") cfg.label_margin = value.get<double>();
    else throw SchemaError("unknown solver setting '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

} // namespace

ExperimentFile load_experiment_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }

  try {
    ExperimentFile file;
    const auto& ds = j.at("dataset");
    file.dataset_path = ds.at("path").get<std::string>();
    if (file.dataset_path.is_relative()) file.dataset_path = path.parent_path() / file.dataset_path;
    file.format = ds.value("format", "");
    if (ds.contains("label_count")) file.label_count = ds.at("label_count").get<int>();
    auto& spec = file.spec;
    spec.dataset_name = ds.value("name", "");
    spec.method = parse_method(j.value("method", "srf2"));
    spec.scenario = parse_scenario(j.value("scenario", "random"));
    if (j.contains("observation_rates"))
      spec.observation_rates = j.at("observation_rates").get<std::vector<double>>();
    spec.trials = j.value("trials", spec.trials);
    spec.base_seed = j.value("seed", spec.base_seed);
    spec.standardize = j.value("standardize", true);
    spec.block_fraction = j.value("block_fraction", spec.block_fraction);
    const auto averaging = j.value("averaging", std::string("micro"));
    if (averaging != "micro" && averaging != "macro")
      throw SchemaError("averaging must be micro or macro");
    spec.averaging = averaging == "macro" ? AucAveraging::macro : AucAveraging::micro;
    if (j.contains("solver")) spec.config = solver_config_from_json(j.at("solver"), spec.config);
    if (j.contains("cv") && !j.at("cv").is_null()) {
      CvRanges cv;
      const auto& c = j.at("cv");
      if (c.contains("step_sizes")) cv.step_sizes = c.at("step_sizes").get<std::vector<double>>();
      if (c.contains("decays")) cv.decays = c.at("decays").get<std::vector<double>>();
      cv.validation_fraction = c.value("validation_fraction", cv.validation_fraction);
      cv.folds = c.value("folds", cv.folds);
      spec.cv = cv;
    }
    spec.validate();
    return file;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

SolverConfig load_solver_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    const auto j = nlohmann::json::parse(in);
    return solver_config_from_json(j.contains("solver") ? j.at("solver") : j, SolverConfig{});
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

Dataset load_dataset(const std::filesystem::path& path, const std::string& format,
                     std::optional<int> label_count) {
  std::string fmt = format;
  if (fmt.empty()) fmt = path.extension() == ".arff" ? "arff" : "csv";
  if (fmt == "arff") return load_arff(path, label_count);
  if (fmt == "csv") return load_csv(path);
  throw InvalidArgument("unknown dataset format '" + format + "'");
}

} // namespace timsrf
