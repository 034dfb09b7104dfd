#include "smd/smd.hpp"

#include <chrono>

#include "smd/errors.hpp"

namespace smd {

std::pair<DualVector, PrimalPoint> smd_step(const Regularizer& h, const FeasibleRegion& region,
                                            const StepSchedule& schedule, long n, const DualVector& y,
                                            const DualVector& grad_sample) {
  if (n < 0) throw RangeError("smd_step: n must be >= 0");
  DualVector next(y.coords() - schedule.alpha(n + 1) * grad_sample.coords());
  PrimalPoint x = mirror_map(h, region, next);
  return {std::move(next), std::move(x)};
}

RunTrace run(const StochasticProblem& problem, const Regularizer& h, const StepSchedule& schedule,
             const RunOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  const FeasibleRegion& region = problem.region;
  h.require_support(region);
  const ScheduleReport check = validate_schedule(schedule, 0);
  if (!check.passes) throw UnsupportedError("run: invalid step schedule: " + check.reason);
  if (options.n_iters < 0) throw RangeError("run: n_iters must be >= 0");
  if (options.record_every < 1) throw RangeError("run: record_every must be >= 1");

  const int d = region.dim();
  const NormKind norm = h.paired_norm();
  Vector y = options.y0.value_or(Vector::Zero(d));
  if (y.size() != d) throw DomainError("run: y0 dimension mismatch");

  RunTrace trace;
  trace.problem = problem.name;
  trace.regularizer = h.name();
  trace.schedule = schedule;
  trace.seed = options.seed;
  trace.n_iters = options.n_iters;
  trace.record_every = options.record_every;
  const std::size_t expected =
      options.n_iters == 0 ? 1 : static_cast<std::size_t>((options.n_iters + options.record_every - 1) / options.record_every);
  trace.indices.reserve(expected);
  trace.iterates.reserve(expected);
  trace.duals.reserve(expected);
  trace.dist.reserve(expected);
  trace.fenchel.reserve(expected);

  auto record = [&](long n, const Vector& x, const Vector& yy) {
    trace.indices.push_back(n);
    trace.iterates.push_back(x);
    trace.duals.push_back(yy);
    trace.dist.push_back(distance_to_set(problem.minimizers, x, norm));
    trace.fenchel.push_back(setwise_fenchel(h, region, problem.minimizers, DualVector(yy)));
  };

  CounterRng rng(options.seed);
  Vector x = mirror_map(h, region, DualVector(y)).coords();
  Vector running_sum = x;
  for (long n = 0;; ++n) {
    if (options.observer) options.observer(n, x, y);
    const bool last = n == options.n_iters;
    if ((n % options.record_every == 0 && n < options.n_iters) || (options.n_iters == 0 && n == 0)) {
      record(n, x, y);
    }
    if (last) break;

    const Vector grad = sample_gradient(problem, x, rng);
    y.noalias() -= schedule.alpha(n + 1) * grad;
    if (!y.allFinite()) throw NumericError("run: dual state is no longer finite at n=" + std::to_string(n + 1));
    x = mirror_map(h, region, DualVector(y)).coords();
    running_sum += x;
  }

  trace.final_iterate = x;
  trace.final_dual = y;
  trace.final_dist = distance_to_set(problem.minimizers, x, norm);
  trace.final_fenchel = setwise_fenchel(h, region, problem.minimizers, DualVector(y));
  trace.ergodic_average = running_sum / static_cast<double>(options.n_iters + 1);
  trace.ergodic_dist = distance_to_set(problem.minimizers, trace.ergodic_average, norm);
  trace.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return trace;
}

RunTrace sgd_run(const StochasticProblem& problem, const StepSchedule& schedule, const RunOptions& options) {
  return run(problem, Regularizer::euclidean(), schedule, options);
}

}  // namespace smd
