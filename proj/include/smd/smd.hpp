#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "smd/problems.hpp"
#include "smd/regularizer.hpp"
#include "smd/schedule.hpp"

namespace smd {

/// Receives (n, X_n, Y_n) for every n = 0..n_iters.
using StepObserver = std::function<void(long n, const Vector& x, const Vector& y)>;

struct RunOptions {
  long n_iters = 0;
  std::uint64_t seed = 0;
  long record_every = 1;
  /// Initial dual state; the zero vector when empty.
  std::optional<Vector> y0;
  StepObserver observer;
};

/// Thinned record of one run. Entry k holds n = indices[k]; samples are
/// taken at n = 0, r, 2r, ... below n_iters (X_0 alone when n_iters = 0).
/// The final state is always kept separately.
struct RunTrace {
  std::string problem;
  std::string regularizer;
  StepSchedule schedule;
  std::uint64_t seed = 0;
  long n_iters = 0;
  long record_every = 1;

  std::vector<long> indices;
  std::vector<Vector> iterates;
  std::vector<Vector> duals;
  std::vector<double> dist;
  std::vector<double> fenchel;

  Vector final_iterate;
  Vector final_dual;
  double final_dist = 0.0;
  double final_fenchel = 0.0;
  /// Uniform running average of X_0..X_N.
  Vector ergodic_average;
  double ergodic_dist = 0.0;

  double wall_seconds = 0.0;

  std::size_t size() const { return indices.size(); }
};

/// Y_next = Y - alpha_{n+1} * grad_sample, X_next = Q(Y_next).
std::pair<DualVector, PrimalPoint> smd_step(const Regularizer& h, const FeasibleRegion& region,
                                            const StepSchedule& schedule, long n, const DualVector& y,
                                            const DualVector& grad_sample);

/// Stochastic mirror descent. Deterministic for a fixed seed. Throws
/// UnsupportedError for an invalid schedule or pairing and NumericError when
/// the dual state stops being finite.
RunTrace run(const StochasticProblem& problem, const Regularizer& h, const StepSchedule& schedule,
             const RunOptions& options);

/// run() with the Euclidean regularizer (projected stochastic gradient).
RunTrace sgd_run(const StochasticProblem& problem, const StepSchedule& schedule, const RunOptions& options);

}  // namespace smd
