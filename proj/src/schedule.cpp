#include "smd/schedule.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_zeta.h>

#include <algorithm>
#include <cmath>

#include "smd/errors.hpp"

namespace smd {

double StepSchedule::alpha(long n) const {
  return base_alpha / std::pow(static_cast<double>(n + offset), beta);
}

ScheduleReport validate_schedule(const StepSchedule& schedule, long horizon) {
  ScheduleReport report;
  report.horizon = horizon;
  if (!(schedule.base_alpha > 0.0) || !std::isfinite(schedule.base_alpha)) {
    report.reason = "base_alpha must be positive and finite";
  } else if (schedule.offset < 0) {
    report.reason = "offset must be >= 0";
  } else if (!(schedule.beta > 0.5)) {
    report.reason = "beta <= 1/2: sum of alpha_n^2 diverges";
  } else if (!(schedule.beta <= 1.0)) {
    report.reason = "beta > 1: sum of alpha_n converges";
  } else {
    report.passes = true;
    report.reason = "ok";
  }
  if (std::isfinite(schedule.base_alpha) && schedule.offset >= 0 && std::isfinite(schedule.beta)) {
    for (long n = 1; n <= horizon; ++n) {
      const double a = schedule.alpha(n);
      report.partial_sum += a;
      report.partial_sum_squares += a * a;
    }
  }
  return report;
}

double sum_of_squares(const StepSchedule& schedule) {
  if (!(schedule.beta > 0.5)) throw DomainError("sum_of_squares: series diverges for beta <= 1/2");
  gsl_sf_result result;
  gsl_error_handler_t* previous = gsl_set_error_handler_off();
  const int status =
      gsl_sf_hzeta_e(2.0 * schedule.beta, 1.0 + static_cast<double>(schedule.offset), &result);
  gsl_set_error_handler(previous);
  if (status != GSL_SUCCESS) throw NumericError("Hurwitz zeta evaluation failed");
  return schedule.base_alpha * schedule.base_alpha * result.val;
}

double confidence_bound(double delta, double eps_bar, double R, double v_star, double K, double B) {
  const double martingale = delta * eps_bar * eps_bar / (2.0 * R * R * v_star * v_star);
  const double submartingale = K * delta * eps_bar / (B * B);
  return std::min(martingale, submartingale);
}

StepSchedule confidence_schedule(const StepSchedule& base, double delta, double eps_bar, double R,
                                 double v_star, double K, double B) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("confidence_schedule: delta must be in (0,1)");
  if (!(eps_bar > 0.0 && R > 0.0 && v_star > 0.0 && K > 0.0 && B > 0.0)) {
    throw DomainError("confidence_schedule: constants must be positive");
  }
  const double bound = confidence_bound(delta, eps_bar, R, v_star, K, B);
  const double current = sum_of_squares(base);
  StepSchedule out = base;
  if (current > bound) out.base_alpha = base.base_alpha * std::sqrt(bound / current);
  return out;
}

}  // namespace smd
