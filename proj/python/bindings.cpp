#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "timsrf/data_io.hpp"
#include "timsrf/diagnostics.hpp"
#include "timsrf/errors.hpp"
#include "timsrf/eval.hpp"
#include "timsrf/feasible_set.hpp"
#include "timsrf/solvers.hpp"
#include "timsrf/srf_objective.hpp"

namespace py = pybind11;
using namespace timsrf;

namespace {

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

IndexSet entries_of(const BoolMatrix& mask) { return from_mask(mask.array()); }

BoolMatrix mask_of(const IndexSet& entries, Index rows, Index cols) {
  return to_mask(entries, rows, cols).matrix();
}

py::dict report_dict(const SolverReport& r) {
  const auto parts = unstack(r.solution);
  std::vector<double> deltas, objectives;
  for (const auto& s : r.objective_trace) {
    deltas.push_back(s.delta);
    objectives.push_back(s.objective);
  }
  py::dict d;
  d["solution"] = r.solution.entries();
  d["soft_labels"] = parts.soft_labels;
  d["features"] = parts.features;
  d["deltas"] = deltas;
  d["objectives"] = objectives;
  d["inner_iterations"] = r.inner_iterations;
  d["wall_time"] = r.wall_time;
  d["converged"] = r.converged;
  return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Low-rank transductive multi-label completion";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("step_size", &SolverConfig::step_size)
      .def_readwrite("delta_decay", &SolverConfig::delta_decay)
      .def_readwrite("delta_init_factor", &SolverConfig::delta_init_factor)
      .def_readwrite("inner_tol", &SolverConfig::inner_tol)
      .def_readwrite("outer_tol", &SolverConfig::outer_tol)
      .def_readwrite("max_inner_iters", &SolverConfig::max_inner_iters)
      .def_readwrite("max_outer_iters", &SolverConfig::max_outer_iters)
      .def_readwrite("alpha_min", &SolverConfig::alpha_min)
      .def_readwrite("alpha_max", &SolverConfig::alpha_max)
      .def_readwrite("memory_size", &SolverConfig::memory_size)
      .def_readwrite("sufficient_decrease", &SolverConfig::sufficient_decrease)
      .def_readwrite("backtrack_factor", &SolverConfig::backtrack_factor)
      .def_readwrite("label_margin", &SolverConfig::label_margin)
      .def("validate", &SolverConfig::validate);

  m.def("singular_values", &singular_values, py::arg("z"));
  m.def("smoothed_rank",
        [](const Matrix& z, double delta) { return smoothed_rank(QraProfile(delta), z); },
        py::arg("z"), py::arg("delta"));
  m.def("smoothed_rank_gradient",
        [](const Matrix& z, double delta) {
          return smoothed_rank_gradient(QraProfile(delta), z);
        },
        py::arg("z"), py::arg("delta"));
  m.def("approx_rank",
        [](const Matrix& z, double delta) { return approx_rank(QraProfile(delta), z); },
        py::arg("z"), py::arg("delta"));

  m.def("project",
        [](const Matrix& z, const Matrix& lower, const Matrix& upper) {
          return project(z, BoxBounds{lower, upper});
        },
        py::arg("z"), py::arg("lower"), py::arg("upper"));

  m.def("complete",
        [](const Matrix& features, const LabelMatrix& labels, const BoolMatrix& feature_mask,
           const BoolMatrix& label_mask, const std::string& method,
           const SolverConfig& config) {
          const auto instance = ProblemInstance::masked(
              features, labels, entries_of(feature_mask), entries_of(label_mask));
          SolverReport r = [&] {
            py::gil_scoped_release release;
            return anneal(instance, config, parse_method(method));
          }();
          return report_dict(r);
        },
        py::arg("features"), py::arg("labels"), py::arg("feature_mask"), py::arg("label_mask"),
        py::arg("method") = "srf2", py::arg("config") = SolverConfig{},
        "Anneal the stacked matrix; unobserved entries of the inputs are ignored.");

  m.def("auc",
        [](const std::vector<double>& scores, const std::vector<int>& truth) {
          return auc(scores, truth);
        },
        py::arg("scores"), py::arg("truth"));

  m.def("alpha_delta", [](double delta, Index n) { return alpha_delta(QraProfile(delta), n); },
        py::arg("delta"), py::arg("n"));

  m.def("synthesize",
        [](Index n, Index d, Index t, Index r, double noise, std::uint64_t seed) {
          auto s = synthesize(n, d, t, r, noise, seed);
          return py::make_tuple(s.dataset.features, s.dataset.labels);
        },
        py::arg("n"), py::arg("d"), py::arg("t"), py::arg("rank"), py::arg("noise") = 0.0,
        py::arg("seed") = 0);

  m.def("mcar_mask",
        [](Index n, Index d, Index t, double omega, std::uint64_t seed) {
          const auto masks = mcar_mask(n, d, t, MaskSpec{omega, 0.0, seed});
          return py::make_tuple(mask_of(masks.features, n, d), mask_of(masks.labels, n, t));
        },
        py::arg("n"), py::arg("d"), py::arg("t"), py::arg("omega"), py::arg("seed") = 0);

  m.def("standardize",
        [](const Matrix& features, const BoolMatrix& observed) {
          auto s = standardize(features, entries_of(observed));
          return py::make_tuple(s.features, s.mean, s.scale);
        },
        py::arg("features"), py::arg("observed"));

  m.def("load_dataset",
        [](const std::string& path, const std::string& format, std::optional<int> label_count) {
          auto d = load_dataset(path, format, label_count);
          return py::make_tuple(d.features, d.labels);
        },
        py::arg("path"), py::arg("format") = "csv", py::arg("label_count") = py::none());
}
