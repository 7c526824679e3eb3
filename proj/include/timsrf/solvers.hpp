#pragma once

#include <span>
#include <string>
#include <vector>

#include "timsrf/core_model.hpp"
#include "timsrf/feasible_set.hpp"
#include "timsrf/srf_objective.hpp"

namespace timsrf {

/// Inner solver: TIM-SRF1 (projected gradient) or TIM-SRF2 (spectral
/// projected gradient).
enum class Method { pg, spg };

const char* method_name(Method method);
Method parse_method(const std::string& name);

/// One candidate evaluated by the SPG line search.
struct LineSearchTrial {
  int iteration = 0;        // accepted-step counter inside the stage
  int trial = 0;            // 0 for the BB step, then one per backtrack
  double step = 0.0;        // lambda
  double candidate_objective = 0.0;
  double reference = 0.0;   // min over the objective memory
  double prod = 0.0;        // <Z* - Z, G(Z)>
  double gamma = 0.0;
  bool accepted = false;
  bool fallback = false;    // plain PG step taken after lambda underflow
};

/// Hooks for telemetry and instrumentation. All callbacks default to no-ops.
class SolverObserver {
public:
  virtual ~SolverObserver() = default;
  virtual void on_iterate(const Matrix& /*z*/, double /*objective*/) {}
  virtual void on_line_search(const LineSearchTrial& /*trial*/) {}
  virtual void on_stage_end(int /*stage*/, double /*delta*/, const Matrix& /*z*/) {}
};

/// factor * sigma_1(z0). Throws DegenerateInstance for z0 = 0.
double initial_delta(const Matrix& z0, double factor);

struct InnerResult {
  Matrix z;
  int iterations = 0;
  double objective = 0.0;
  bool converged = false;
};

/// Iterates Z <- P(Z + mu * delta^2 * G(Z)) until the relative Frobenius
/// change drops below `tol` or `max_iters` is reached.
InnerResult pg_inner(Matrix z, const BoxBounds& bounds, const QraProfile& profile,
                     double mu, double tol, int max_iters,
                     SolverObserver* observer = nullptr);

/// Line-search state carried between accepted SPG steps.
///
/// `last_step` is S = Z_{i+1} - Z_i. `last_grad_change` is the change of the
/// descent gradient of -F_delta (in delta^2 units), Y = D_i - D_{i+1} with
/// D = delta^2 G, so that <S, Y> > 0 on locally concave regions of F_delta.
class SpgState {
public:
  SpgState(int memory_size, double initial_alpha);

  double alpha() const noexcept { return alpha_; }
  void set_alpha(double alpha) noexcept { alpha_ = alpha; }

  void remember(double objective);
  std::span<const double> memory() const noexcept { return memory_; }

  Matrix last_step;
  Matrix last_grad_change;

private:
  std::size_t capacity_;
  double alpha_;
  std::vector<double> memory_;
};

/// Barzilai-Borwein length <S,S>/<S,Y> clamped to [alpha_min, alpha_max];
/// alpha_max when <S,Y> <= 0.
double bb_step_length(const SpgState& state, double alpha_min, double alpha_max);

/// Nonmonotone acceptance in the ascent sense:
/// candidate >= min(memory) + gamma * prod.
bool nonmonotone_accept(double candidate_objective, std::span<const double> memory,
                        double prod, double gamma);

InnerResult spg_inner(Matrix z, const BoxBounds& bounds, const QraProfile& profile,
                      const SolverConfig& config, SolverObserver* observer = nullptr);

/// Delta-annealing outer loop, warm-starting each stage from the previous one.
SolverReport anneal(const ProblemInstance& instance, const SolverConfig& config,
                    Method method, SolverObserver* observer = nullptr);

/// Same, from an explicit starting point and box. `label_width` and
/// `feature_width` only describe the zones of the returned matrix.
SolverReport anneal(const Matrix& start, const BoxBounds& bounds, Index label_width,
                    Index feature_width, const SolverConfig& config, Method method,
                    SolverObserver* observer = nullptr);

} // namespace timsrf
