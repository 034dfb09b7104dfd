#pragma once

#include <iosfwd>
#include <vector>

#include "smd/problems.hpp"
#include "smd/regularizer.hpp"
#include "smd/smd.hpp"

namespace smd {

inline constexpr double kDefaultFlowStep = 1e-2;

/// Sampled solution of the mean dynamics  y' = -grad g(Q(y)),  x = Q(y).
struct FlowTrajectory {
  Regularizer regularizer = Regularizer::euclidean();
  FeasibleRegion region = FeasibleRegion::unit_box(1);
  double dt = kDefaultFlowStep;
  std::vector<double> times;
  std::vector<Vector> dual_states;
  std::vector<Vector> primal_states;

  std::size_t size() const { return times.size(); }
};

/// Classical RK4 on the dual variable, sampled every dt (the last step is
/// shortened to land on T). Throws NumericError on a non-finite state.
FlowTrajectory integrate_flow(const StochasticProblem& problem, const Regularizer& h, const Vector& y0, double T,
                              double dt = kDefaultFlowStep);

/// Endpoint of the flow only.
Vector flow_endpoint(const StochasticProblem& problem, const Regularizer& h, const Vector& y0, double T,
                     double dt = kDefaultFlowStep);

struct FenchelProfile {
  std::vector<double> values;       // F(X*, y(t_i))
  std::vector<double> derivatives;  // forward differences, one shorter
  double max_increase = 0.0;        // max_i values[i+1] - values[i]
  /// Non-increasing up to `tolerance_per_step`.
  bool monotone = true;
  double tolerance_per_step = 0.0;
};

/// Fenchel coupling to the minimizer set along a flow; monotonicity is judged
/// with per-step tolerance 1e-6 * dt.
FenchelProfile fenchel_along_flow(const FlowTrajectory& traj, const std::vector<Vector>& generators);

/// Piecewise-affine interpolation of the dual iterates on the time scale
/// tau_n = alpha_1 + ... + alpha_n.
class InterpolatedProcess {
 public:
  InterpolatedProcess(std::vector<double> breakpoints, std::vector<Vector> anchors);

  /// Runs SMD and records every dual state.
  static InterpolatedProcess record(const StochasticProblem& problem, const Regularizer& h,
                                    const StepSchedule& schedule, long n_iters, std::uint64_t seed,
                                    std::optional<Vector> y0 = std::nullopt);

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<Vector>& anchors() const { return anchors_; }
  double horizon() const { return breakpoints_.back(); }
  /// Index k with t in [tau_k, tau_{k+1}] (binary search).
  std::size_t segment(double t) const;

 private:
  std::vector<double> breakpoints_;
  std::vector<Vector> anchors_;
};

/// Y(t); throws RangeError outside [0, tau_N].
Vector interpolate(const InterpolatedProcess& process, double t);

/// For each t: max over h in {0, dt, ..., T} of ||Y(t+h) - Phi_h(Y(t))||_*.
std::vector<double> apt_deviation(const InterpolatedProcess& process, const StochasticProblem& problem,
                                  const Regularizer& h, const std::vector<double>& t_list, double T,
                                  double dt = kDefaultFlowStep);

/// Header "t,y_1..y_d,x_1..x_d,F".
void write_flow_csv(std::ostream& os, const FlowTrajectory& traj, const FenchelProfile& profile);

}  // namespace smd
