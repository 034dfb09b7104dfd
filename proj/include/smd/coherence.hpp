#pragma once

#include <optional>
#include <string>
#include <vector>

#include "smd/cones.hpp"
#include "smd/problems.hpp"
#include "smd/regularizer.hpp"
#include "smd/smd.hpp"

namespace smd {

inline constexpr double kSharpnessTolerance = 1e-6;
/// Resolution of minimizer generators; points farther than 10x this from X*
/// with a vanishing inner product violate the "equality iff" clause.
inline constexpr double kGeneratorResolution = 1e-6;

enum class Verdict { Pass, Fail, Inconclusive };
std::string to_string(Verdict v);

struct CoherenceWitness {
  Vector x;
  Vector x_star;
  double value = 0.0;
};

/// Outcome of a sampled coherence test. "pass" means no violation was found
/// among the tested pairs, not a proof.
struct CoherenceReport {
  Verdict verdict = Verdict::Inconclusive;
  long samples_tested = 0;
  long pairs_tested = 0;
  double min_inner_product = 0.0;
  double tolerance = 0.0;
  std::optional<CoherenceWitness> witness;
  std::vector<Vector> equality_violations;
  std::string note;
};

/// Samples x uniformly from the region and checks <grad g(x), x - x*> >= 0
/// against every stored minimizer.
CoherenceReport certify_vc(const StochasticProblem& problem, long n_samples, CounterRng& rng);

/// Same test restricted to B(candidate, radius) within the region, against
/// the candidate only.
CoherenceReport certify_lvc(const StochasticProblem& problem, const PrimalPoint& candidate, double radius,
                            long n_samples, CounterRng& rng);

/// Largest radius in `radii` for which certify_lvc passes.
std::optional<double> lvc_basin_radius(const StochasticProblem& problem, const PrimalPoint& candidate,
                                       std::vector<double> radii, long n_samples, CounterRng& rng);

struct SharpnessReport {
  bool is_sharp = false;
  double gamma_hat = 0.0;
  Vector worst_direction;
  long directions_tested = 0;
};

/// gamma_hat = min <grad g(x*), z> over unit tangent directions z (cone
/// generators plus n_dirs random cone samples).
SharpnessReport check_sharpness(const StochasticProblem& problem, const PrimalPoint& candidate, long n_dirs,
                                CounterRng& rng);

/// Streaming detector of n with dist(X*, X_n) < eps.
class HittingTimeDetector {
 public:
  HittingTimeDetector(std::vector<Vector> generators, double eps, NormKind norm = NormKind::L2);
  void observe(long n, const Vector& x);
  void operator()(long n, const Vector& x, const Vector&) { observe(n, x); }
  const std::vector<long>& hits() const { return hits_; }

 private:
  std::vector<Vector> generators_;
  double eps_;
  NormKind norm_;
  std::vector<long> hits_;
};

/// Streaming detector of n with F(X*, Y_n) < delta.
class FenchelZoneDetector {
 public:
  FenchelZoneDetector(Regularizer h, FeasibleRegion region, std::vector<Vector> generators, double delta);
  void observe(long n, const Vector& y);
  void operator()(long n, const Vector&, const Vector& y) { observe(n, y); }
  const std::vector<long>& hits() const { return hits_; }

 private:
  Regularizer h_;
  FeasibleRegion region_;
  std::vector<Vector> generators_;
  double delta_;
  std::vector<long> hits_;
};

/// Streaming detector of the index from which X_n equals `vertex` exactly
/// (floating-point equality) through the last observation.
class FiniteHitDetector {
 public:
  FiniteHitDetector(Vector vertex, long tail_window);
  void observe(long n, const Vector& x);
  void operator()(long n, const Vector& x, const Vector&) { observe(n, x); }
  /// Present iff the final run of exact hits spans at least tail_window
  /// observations.
  std::optional<long> n0() const;

 private:
  Vector vertex_;
  long tail_window_;
  long run_start_ = -1;
  long run_length_ = 0;
};

std::vector<long> hitting_times(const RunTrace& trace, const std::vector<Vector>& generators, double eps,
                                NormKind norm = NormKind::L2);
std::vector<long> fenchel_zone_hits(const RunTrace& trace, const Regularizer& h, const FeasibleRegion& region,
                                    const std::vector<Vector>& generators, double delta);
std::optional<long> detect_finite_hit(const RunTrace& trace, const Vector& vertex, long tail_window);

}  // namespace smd
