#include "timsrf/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "timsrf/errors.hpp"

namespace timsrf {

namespace {

// lambda below this without acceptance triggers the plain PG fallback step
constexpr double kStepUnderflow = 1e-12;

double relative_change(const Matrix& next, const Matrix& prev) {
  return (next - prev).norm() / std::max(1.0, prev.norm());
}

void require_finite_iterate(const Matrix& z, int iteration) {
  if (!z.allFinite())
    throw DivergenceError("iterate " + std::to_string(iteration) + " has non-finite entries");
}

void require_finite_objective(double value, int iteration) {
  if (!std::isfinite(value))
    throw DivergenceError("objective is not finite at iteration " + std::to_string(iteration));
}

SmoothedRankEvaluation evaluate_iterate(const QraProfile& profile, const Matrix& z,
                                        int iteration) {
  require_finite_iterate(z, iteration);
  auto eval = evaluate(profile, z);
  require_finite_objective(eval.value, iteration);
  return eval;
}

} // namespace

const char* method_name(Method method) {
  return method == Method::pg ? "TIM-SRF1" : "TIM-SRF2";
}

Method parse_method(const std::string& name) {
  if (name == "srf1" || name == "pg" || name == "TIM-SRF1") return Method::pg;
  if (name == "srf2" || name == "spg" || name == "TIM-SRF2") return Method::spg;
  throw InvalidArgument("unknown method '" + name + "' (expected srf1 or srf2)");
}

double initial_delta(const Matrix& z0, double factor) {
  if (!(factor > 0)) throw InvalidArgument("delta factor must be positive");
  if (z0.size() == 0) throw DegenerateInstance("empty starting matrix");
  const double sigma1 = singular_values(z0)(0);
  if (!(sigma1 > 0)) throw DegenerateInstance("starting matrix is zero; delta would be 0");
  return factor * sigma1;
}

InnerResult pg_inner(Matrix z, const BoxBounds& bounds, const QraProfile& profile, double mu,
                     double tol, int max_iters, SolverObserver* observer) {
  if (!(mu > 0)) throw InvalidArgument("PG step size must be positive");
  if (max_iters < 1) throw InvalidArgument("max_iters must be positive");
  const double step = mu * profile.delta() * profile.delta();

  InnerResult result;
  auto eval = evaluate_iterate(profile, z, 0);
  if (observer) observer->on_iterate(z, eval.value);

  for (int i = 1; i <= max_iters; ++i) {
    Matrix next = z + step * eval.gradient;
    require_finite_iterate(next, i);
    project_in_place(next, bounds);
    const double change = relative_change(next, z);
    z = std::move(next);
    eval = evaluate_iterate(profile, z, i);
    if (observer) observer->on_iterate(z, eval.value);
    result.iterations = i;
    if (change < tol) {
      result.converged = true;
      break;
    }
  }
  result.objective = eval.value;
  result.z = std::move(z);
  return result;
}

SpgState::SpgState(int memory_size, double initial_alpha)
    : capacity_(static_cast<std::size_t>(std::max(memory_size, 1))), alpha_(initial_alpha) {
  memory_.reserve(capacity_);
}

void SpgState::remember(double objective) {
  if (memory_.size() == capacity_) memory_.erase(memory_.begin());
  memory_.push_back(objective);
}

double bb_step_length(const SpgState& state, double alpha_min, double alpha_max) {
  const double b = (state.last_step.array() * state.last_grad_change.array()).sum();
  if (!(b > 0)) return alpha_max;
  const double a = state.last_step.squaredNorm();
  return std::min(alpha_max, std::max(alpha_min, a / b));
}

bool nonmonotone_accept(double candidate_objective, std::span<const double> memory, double prod,
                        double gamma) {
  if (memory.empty()) throw InvalidArgument("nonmonotone test needs a nonempty memory");
  const double reference = *std::min_element(memory.begin(), memory.end());
  return candidate_objective >= reference + gamma * prod;
}

InnerResult spg_inner(Matrix z, const BoxBounds& bounds, const QraProfile& profile,
                      const SolverConfig& config, SolverObserver* observer) {
  config.validate();
  const double d2 = profile.delta() * profile.delta();
  const double gamma = config.sufficient_decrease;

  SpgState state(config.memory_size, config.alpha_max);
  auto current = evaluate_iterate(profile, z, 0);
  state.remember(current.value);
  if (observer) observer->on_iterate(z, current.value);

  InnerResult result;
  for (int i = 1; i <= config.max_inner_iters; ++i) {
    const auto memory = state.memory();
    const double reference = *std::min_element(memory.begin(), memory.end());
    double lambda = state.alpha();

    Matrix candidate;
    SmoothedRankEvaluation next;
    for (int trial = 0;; ++trial) {
      candidate = z + (lambda * d2) * current.gradient;
      require_finite_iterate(candidate, i);
      project_in_place(candidate, bounds);
      const double prod = ((candidate - z).array() * current.gradient.array()).sum();
      next = evaluate_iterate(profile, candidate, i);
      const bool accepted = nonmonotone_accept(next.value, memory, prod, gamma);
      if (observer)
        observer->on_line_search({i, trial, lambda, next.value, reference, prod, gamma,
                                  accepted, false});
      if (accepted) break;

      lambda *= config.backtrack_factor;
      if (lambda < kStepUnderflow) {
        lambda = config.alpha_min;
        candidate = z + (lambda * d2) * current.gradient;
        project_in_place(candidate, bounds);
        const double fallback_prod =
            ((candidate - z).array() * current.gradient.array()).sum();
        next = evaluate_iterate(profile, candidate, i);
        if (observer)
          observer->on_line_search({i, trial + 1, lambda, next.value, reference, fallback_prod,
                                    gamma, true, true});
        break;
      }
    }

    state.last_step = candidate - z;
    state.last_grad_change = d2 * (current.gradient - next.gradient);
    state.set_alpha(bb_step_length(state, config.alpha_min, config.alpha_max));

    const double change = state.last_step.norm() / std::max(1.0, z.norm());
    z = std::move(candidate);
    current = std::move(next);
    state.remember(current.value);
    if (observer) observer->on_iterate(z, current.value);
    result.iterations = i;
    if (change < config.inner_tol) {
      result.converged = true;
      break;
    }
  }
  result.objective = current.value;
  result.z = std::move(z);
  return result;
}

SolverReport anneal(const Matrix& start, const BoxBounds& bounds, Index label_width,
                    Index feature_width, const SolverConfig& config, Method method,
                    SolverObserver* observer) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();

  Matrix z = project(start, bounds);
  const double sigma1 = initial_delta(z, 1.0);
  const double delta0 = config.delta_init_factor * sigma1;
  const double delta_floor = 1e-6 * sigma1;

  std::vector<StageRecord> trace;
  std::vector<int> iterations;
  StopReason stop = StopReason::max_outer_iters;
  double delta = delta0;

  for (int stage = 0; stage < config.max_outer_iters; ++stage) {
    const QraProfile profile(delta);
    InnerResult inner =
        method == Method::pg
            ? pg_inner(z, bounds, profile, config.step_size, config.inner_tol,
                       config.max_inner_iters, observer)
            : spg_inner(z, bounds, profile, config, observer);

    const double change = relative_change(inner.z, z);
    trace.push_back({delta, inner.objective});
    iterations.push_back(inner.iterations);
    if (observer) observer->on_stage_end(stage, delta, inner.z);
    z = std::move(inner.z);

    // At delta >> sigma_1 the surrogate only penalises ||Z||_F, so early
    // stages stall at the zero imputation; the test is armed below sigma_1.
    const bool armed = delta <= sigma1 || change == 0.0;
    if (armed && change < config.outer_tol) {
      stop = StopReason::converged;
      break;
    }
    delta *= config.delta_decay;
    if (delta < delta_floor) {
      stop = StopReason::delta_floor;
      break;
    }
  }

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {StackedMatrix(std::move(z), label_width, feature_width),
          std::move(trace),
          std::move(iterations),
          elapsed,
          stop != StopReason::max_outer_iters,
          stop};
}

SolverReport anneal(const ProblemInstance& instance, const SolverConfig& config, Method method,
                    SolverObserver* observer) {
  config.validate();
  const auto bounds = build_bounds(instance, config.label_margin);
  return anneal(stack(instance).entries(), bounds, instance.label_count(),
                instance.feature_count(), config, method, observer);
}

} // namespace timsrf
