#include "smd/coherence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "smd/errors.hpp"

namespace smd {

namespace {

constexpr std::size_t kMaxReportedViolations = 64;
constexpr long kLocalRejectionFactor = 1000;

struct PairTest {
  const StochasticProblem& problem;
  const std::vector<Vector>& x_stars;
  std::vector<Vector> points;
  std::vector<Vector> gradients;
};

CoherenceReport evaluate(const PairTest& t, bool exhausted) {
  CoherenceReport report;
  double scale = 0.0;
  for (const auto& g : t.gradients) scale = std::max(scale, g.norm());
  report.tolerance = 1e-8 * (1.0 + scale);
  report.min_inner_product = std::numeric_limits<double>::infinity();
  report.samples_tested = static_cast<long>(t.points.size());

  for (std::size_t k = 0; k < t.points.size(); ++k) {
    const Vector& x = t.points[k];
    const double dist = distance_to_set(t.x_stars, x);
    for (const auto& x_star : t.x_stars) {
      const double ip = t.gradients[k].dot(x - x_star);
      ++report.pairs_tested;
      if (ip < report.min_inner_product) {
        report.min_inner_product = ip;
        if (ip < -report.tolerance) report.witness = CoherenceWitness{x, x_star, ip};
      }
      if (std::abs(ip) <= report.tolerance && dist > 10.0 * kGeneratorResolution &&
          report.equality_violations.size() < kMaxReportedViolations) {
        report.equality_violations.push_back(x);
      }
    }
  }
  if (report.pairs_tested == 0) report.min_inner_product = 0.0;

  if (report.min_inner_product < -report.tolerance || !report.equality_violations.empty()) {
    report.verdict = Verdict::Fail;
  } else if (exhausted) {
    report.verdict = Verdict::Inconclusive;
    report.note = "sampler exhausted its budget before reaching the requested sample count";
  } else {
    report.verdict = Verdict::Pass;
  }
  return report;
}

// Uniform point of B(center, radius) within the affine hull of the region.
Vector sample_local(const FeasibleRegion& region, const Vector& center, double radius, CounterRng& rng) {
  const int d = region.dim();
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector dir(d);
  int intrinsic = d;
  do {
    for (int i = 0; i < d; ++i) dir[i] = gauss(rng);
    if (region.is_simplex()) {
      dir.array() -= dir.mean();
      intrinsic = d - 1;
    }
  } while (dir.norm() == 0.0);
  const double r = radius * std::pow(unif(rng), 1.0 / std::max(1, intrinsic));
  return center + (r / dir.norm()) * dir;
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

CoherenceReport certify_vc(const StochasticProblem& problem, long n_samples, CounterRng& rng) {
  PairTest test{problem, problem.minimizers, {}, {}};
  bool exhausted = false;
  for (long k = 0; k < n_samples; ++k) {
    auto x = problem.region.sample_uniform(rng);
    if (!x) {
      exhausted = true;
      break;
    }
    test.gradients.push_back(problem.mean_gradient(*x));
    test.points.push_back(std::move(*x));
  }
  return evaluate(test, exhausted);
}

CoherenceReport certify_lvc(const StochasticProblem& problem, const PrimalPoint& candidate, double radius,
                            long n_samples, CounterRng& rng) {
  if (!(radius > 0.0)) throw DomainError("certify_lvc: radius must be positive");
  const FeasibleRegion& region = problem.region;
  if (!region.contains(candidate.coords())) throw DomainError("certify_lvc: candidate is not feasible");
  const std::vector<Vector> centre{candidate.coords()};
  PairTest test{problem, centre, {}, {}};
  const long budget = kLocalRejectionFactor * std::max<long>(n_samples, 1);
  long attempts = 0;
  while (static_cast<long>(test.points.size()) < n_samples && attempts < budget) {
    ++attempts;
    Vector x = sample_local(region, candidate.coords(), radius, rng);
    if (!region.contains(x, 0.0)) continue;
    test.gradients.push_back(problem.mean_gradient(x));
    test.points.push_back(std::move(x));
  }
  return evaluate(test, static_cast<long>(test.points.size()) < n_samples);
}

std::optional<double> lvc_basin_radius(const StochasticProblem& problem, const PrimalPoint& candidate,
                                       std::vector<double> radii, long n_samples, CounterRng& rng) {
  std::sort(radii.begin(), radii.end(), std::greater<>());
  for (double r : radii) {
    if (certify_lvc(problem, candidate, r, n_samples, rng).verdict == Verdict::Pass) return r;
  }
  return std::nullopt;
}

SharpnessReport check_sharpness(const StochasticProblem& problem, const PrimalPoint& candidate, long n_dirs,
                                CounterRng& rng) {
  const TangentCone cone = tangent_cone(problem.region, candidate.coords());
  const Vector grad = problem.mean_gradient(candidate.coords());
  const int d = problem.region.dim();

  SharpnessReport report;
  report.gamma_hat = std::numeric_limits<double>::infinity();
  auto consider = [&](const Vector& z) {
    ++report.directions_tested;
    const double v = grad.dot(z);
    if (v < report.gamma_hat) {
      report.gamma_hat = v;
      report.worst_direction = z;
    }
  };
  for (const auto& g : cone.generators) consider(g);
  for (const auto& l : cone.lineality) {
    consider(l);
    consider(-l);
  }
  if (!cone.generators.empty() || !cone.lineality.empty()) {
    std::exponential_distribution<double> expo(1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (long k = 0; k < n_dirs; ++k) {
      Vector z = Vector::Zero(d);
      for (const auto& g : cone.generators) z += expo(rng) * g;
      for (const auto& l : cone.lineality) z += gauss(rng) * l;
      const double n = z.norm();
      if (n > 0.0) consider(z / n);
    }
  }
  report.is_sharp = report.gamma_hat > kSharpnessTolerance;
  return report;
}

HittingTimeDetector::HittingTimeDetector(std::vector<Vector> generators, double eps, NormKind norm)
    : generators_(std::move(generators)), eps_(eps), norm_(norm) {
  if (!(eps > 0.0)) throw DomainError("hitting times: eps must be positive");
}

void HittingTimeDetector::observe(long n, const Vector& x) {
  if (distance_to_set(generators_, x, norm_) < eps_) hits_.push_back(n);
}

FenchelZoneDetector::FenchelZoneDetector(Regularizer h, FeasibleRegion region, std::vector<Vector> generators,
                                         double delta)
    : h_(h), region_(std::move(region)), generators_(std::move(generators)), delta_(delta) {
  if (!(delta > 0.0)) throw DomainError("Fenchel zone: delta must be positive");
  h_.require_support(region_);
}

void FenchelZoneDetector::observe(long n, const Vector& y) {
  if (setwise_fenchel(h_, region_, generators_, DualVector(y)) < delta_) hits_.push_back(n);
}

FiniteHitDetector::FiniteHitDetector(Vector vertex, long tail_window)
    : vertex_(std::move(vertex)), tail_window_(tail_window) {
  if (tail_window < 1) throw DomainError("finite-hit detector: tail_window must be >= 1");
}

void FiniteHitDetector::observe(long n, const Vector& x) {
  if (x == vertex_) {
    if (run_length_ == 0) run_start_ = n;
    ++run_length_;
  } else {
    run_length_ = 0;
    run_start_ = -1;
  }
}

std::optional<long> FiniteHitDetector::n0() const {
  if (run_length_ >= tail_window_) return run_start_;
  return std::nullopt;
}

namespace {

// Recorded samples followed by the final state when it was not recorded.
template <typename Fn>
void replay(const RunTrace& trace, Fn&& fn) {
  for (std::size_t k = 0; k < trace.size(); ++k) fn(trace.indices[k], trace.iterates[k], trace.duals[k]);
  const bool final_recorded = !trace.indices.empty() && trace.indices.back() == trace.n_iters;
  if (!final_recorded && trace.final_iterate.size() > 0) fn(trace.n_iters, trace.final_iterate, trace.final_dual);
}

}  // namespace

std::vector<long> hitting_times(const RunTrace& trace, const std::vector<Vector>& generators, double eps,
                                NormKind norm) {
  HittingTimeDetector det(generators, eps, norm);
  replay(trace, det);
  return det.hits();
}

std::vector<long> fenchel_zone_hits(const RunTrace& trace, const Regularizer& h, const FeasibleRegion& region,
                                    const std::vector<Vector>& generators, double delta) {
  FenchelZoneDetector det(h, region, generators, delta);
  replay(trace, det);
  return det.hits();
}

std::optional<long> detect_finite_hit(const RunTrace& trace, const Vector& vertex, long tail_window) {
  FiniteHitDetector det(vertex, tail_window);
  replay(trace, det);
  return det.n0();
}

}  // namespace smd
