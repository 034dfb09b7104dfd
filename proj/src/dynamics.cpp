#include "smd/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "smd/errors.hpp"

namespace smd {

namespace {

class MeanField {
 public:
  MeanField(const StochasticProblem& problem, const Regularizer& h) : problem_(problem), h_(h) {
    h_.require_support(problem_.region);
  }

  Vector operator()(const Vector& y) const {
    return -problem_.mean_gradient(mirror_map(h_, problem_.region, DualVector(y)).coords());
  }

  Vector rk4(const Vector& y, double step) const {
    const Vector k1 = (*this)(y);
    const Vector k2 = (*this)(y + 0.5 * step * k1);
    const Vector k3 = (*this)(y + 0.5 * step * k2);
    const Vector k4 = (*this)(y + step * k3);
    Vector next = y + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!next.allFinite()) throw NumericError("flow integration blew up");
    return next;
  }

 private:
  const StochasticProblem& problem_;
  Regularizer h_;
};

long step_count(double T, double dt) {
  // Tolerate T being an integer multiple of dt up to rounding.
  return static_cast<long>(std::ceil(T / dt - 1e-9));
}

void check_horizon(double T, double dt) {
  if (!(T >= 0.0) || !std::isfinite(T)) throw RangeError("flow: T must be >= 0");
  if (!(dt > 0.0)) throw RangeError("flow: dt must be > 0");
}

}  // namespace

FlowTrajectory integrate_flow(const StochasticProblem& problem, const Regularizer& h, const Vector& y0, double T,
                              double dt) {
  check_horizon(T, dt);
  const MeanField field(problem, h);
  FlowTrajectory traj;
  traj.regularizer = h;
  traj.region = problem.region;
  traj.dt = dt;
  const long steps = step_count(T, dt);
  traj.times.reserve(steps + 1);
  traj.dual_states.reserve(steps + 1);
  traj.primal_states.reserve(steps + 1);

  Vector y = y0;
  double t = 0.0;
  auto push = [&] {
    traj.times.push_back(t);
    traj.dual_states.push_back(y);
    traj.primal_states.push_back(mirror_map(h, problem.region, DualVector(y)).coords());
  };
  push();
  for (long k = 0; k < steps; ++k) {
    const double step = std::min(dt, T - static_cast<double>(k) * dt);
    y = field.rk4(y, step);
    t = (k + 1 == steps) ? T : static_cast<double>(k + 1) * dt;
    push();
  }
  return traj;
}

Vector flow_endpoint(const StochasticProblem& problem, const Regularizer& h, const Vector& y0, double T, double dt) {
  check_horizon(T, dt);
  const MeanField field(problem, h);
  Vector y = y0;
  const long steps = step_count(T, dt);
  for (long k = 0; k < steps; ++k) y = field.rk4(y, std::min(dt, T - static_cast<double>(k) * dt));
  return y;
}

FenchelProfile fenchel_along_flow(const FlowTrajectory& traj, const std::vector<Vector>& generators) {
  FenchelProfile profile;
  profile.tolerance_per_step = 1e-6 * traj.dt;
  profile.values.reserve(traj.size());
  for (const auto& y : traj.dual_states) {
    profile.values.push_back(setwise_fenchel(traj.regularizer, traj.region, generators, DualVector(y)));
  }
  profile.max_increase = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < profile.values.size(); ++i) {
    const double diff = profile.values[i] - profile.values[i - 1];
    profile.derivatives.push_back(diff / (traj.times[i] - traj.times[i - 1]));
    profile.max_increase = std::max(profile.max_increase, diff);
    if (diff > profile.tolerance_per_step) profile.monotone = false;
  }
  if (profile.values.size() < 2) profile.max_increase = 0.0;
  return profile;
}

InterpolatedProcess::InterpolatedProcess(std::vector<double> breakpoints, std::vector<Vector> anchors)
    : breakpoints_(std::move(breakpoints)), anchors_(std::move(anchors)) {
  if (breakpoints_.empty() || breakpoints_.size() != anchors_.size()) {
    throw DomainError("interpolated process: need one anchor per breakpoint");
  }
  if (breakpoints_.front() != 0.0) throw DomainError("interpolated process: tau_0 must be 0");
  for (std::size_t k = 1; k < breakpoints_.size(); ++k) {
    if (!(breakpoints_[k] > breakpoints_[k - 1])) {
      throw DomainError("interpolated process: breakpoints must increase strictly");
    }
  }
}

InterpolatedProcess InterpolatedProcess::record(const StochasticProblem& problem, const Regularizer& h,
                                                const StepSchedule& schedule, long n_iters, std::uint64_t seed,
                                                std::optional<Vector> y0) {
  std::vector<double> taus;
  std::vector<Vector> anchors;
  taus.reserve(n_iters + 1);
  anchors.reserve(n_iters + 1);
  double tau = 0.0;
  RunOptions opts;
  opts.n_iters = n_iters;
  opts.seed = seed;
  opts.record_every = std::max<long>(1, n_iters);
  opts.y0 = std::move(y0);
  opts.observer = [&](long n, const Vector&, const Vector& y) {
    if (n > 0) tau += schedule.alpha(n);
    taus.push_back(tau);
    anchors.push_back(y);
  };
  run(problem, h, schedule, opts);
  return InterpolatedProcess(std::move(taus), std::move(anchors));
}

std::size_t InterpolatedProcess::segment(double t) const {
  if (!(t >= 0.0 && t <= breakpoints_.back())) throw RangeError("interpolate: t outside [0, tau_N]");
  if (breakpoints_.size() == 1) return 0;
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
  std::size_t k = static_cast<std::size_t>(it - breakpoints_.begin());
  k = k == 0 ? 0 : k - 1;
  return std::min(k, breakpoints_.size() - 2);
}

Vector interpolate(const InterpolatedProcess& process, double t) {
  const std::size_t k = process.segment(t);
  const auto& tau = process.breakpoints();
  const auto& y = process.anchors();
  if (tau.size() == 1) return y[0];
  if (t == tau[k]) return y[k];
  if (t == tau[k + 1]) return y[k + 1];
  const double w = (t - tau[k]) / (tau[k + 1] - tau[k]);
  return y[k] + w * (y[k + 1] - y[k]);
}

std::vector<double> apt_deviation(const InterpolatedProcess& process, const StochasticProblem& problem,
                                  const Regularizer& h, const std::vector<double>& t_list, double T, double dt) {
  check_horizon(T, dt);
  const MeanField field(problem, h);
  const long steps = step_count(T, dt);
  std::vector<double> out;
  out.reserve(t_list.size());
  for (double t : t_list) {
    if (!(t >= 0.0) || t + T > process.horizon()) throw RangeError("apt_deviation: t + T exceeds tau_N");
    Vector flow = interpolate(process, t);
    double worst = 0.0;
    for (long k = 1; k <= steps; ++k) {
      const double step = std::min(dt, T - static_cast<double>(k - 1) * dt);
      flow = field.rk4(flow, step);
      const double s = (k == steps) ? T : static_cast<double>(k) * dt;
      worst = std::max(worst, dual_norm(interpolate(process, t + s) - flow, h.paired_norm()));
    }
    out.push_back(worst);
  }
  return out;
}

void write_flow_csv(std::ostream& os, const FlowTrajectory& traj, const FenchelProfile& profile) {
  const int d = traj.region.dim();
  os << "t";
  for (int i = 1; i <= d; ++i) os << ",y_" << i;
  for (int i = 1; i <= d; ++i) os << ",x_" << i;
  os << ",F\n";
  const auto precision = os.precision(17);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    os << traj.times[k];
    for (int i = 0; i < d; ++i) os << ',' << traj.dual_states[k][i];
    for (int i = 0; i < d; ++i) os << ',' << traj.primal_states[k][i];
    os << ',' << (k < profile.values.size() ? profile.values[k] : 0.0) << '\n';
  }
  os.precision(precision);
}

}  // namespace smd
