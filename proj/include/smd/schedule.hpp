#pragma once

#include <string>

namespace smd {

/// alpha_n = base_alpha / (n + offset)^beta for n >= 1.
struct StepSchedule {
  double base_alpha = 1.0;
  double beta = 1.0;
  long offset = 0;

  double alpha(long n) const;
};

struct ScheduleReport {
  bool passes = false;
  std::string reason;
  long horizon = 0;
  double partial_sum = 0.0;          // sum_{n<=horizon} alpha_n
  double partial_sum_squares = 0.0;  // sum_{n<=horizon} alpha_n^2
};

/// Checks the square-summable / non-summable step condition
/// (beta in (1/2, 1], base_alpha > 0, offset >= 0) and reports partial sums.
ScheduleReport validate_schedule(const StepSchedule& schedule, long horizon = 1000000);

/// sum_{n>=1} alpha_n^2 in closed form (Hurwitz zeta).
double sum_of_squares(const StepSchedule& schedule);

/// Scales base_alpha down (never up) until
///   sum alpha_n^2 <= min{ delta eps^2 / (2 R^2 V^2), K delta eps / B^2 }.
StepSchedule confidence_schedule(const StepSchedule& base, double delta, double eps_bar, double R,
                                 double v_star, double K, double B);

/// The right-hand side bound used by confidence_schedule.
double confidence_bound(double delta, double eps_bar, double R, double v_star, double K, double B);

}  // namespace smd
