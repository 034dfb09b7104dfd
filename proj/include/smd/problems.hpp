#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "smd/region.hpp"
#include "smd/rng.hpp"

namespace smd {

/// Additive zero-mean gradient noise: grad G(x; xi) = grad g(x) + zeta.
class NoiseModel {
 public:
  enum class Kind { None, Gaussian, Uniform };

  static NoiseModel none() { return NoiseModel(Kind::None, 0.0); }
  /// Independent N(0, sigma^2) per coordinate.
  static NoiseModel gaussian(double sigma);
  /// Independent U(-halfwidth, halfwidth) per coordinate.
  static NoiseModel uniform(double halfwidth);

  Kind kind() const { return kind_; }
  double scale() const { return scale_; }
  std::string describe() const;

  Vector sample(int dim, CounterRng& rng) const;

 private:
  NoiseModel(Kind kind, double scale) : kind_(kind), scale_(scale) {}
  Kind kind_;
  double scale_;
};

using ScalarField = std::function<double(const Vector&)>;
using VectorField = std::function<Vector(const Vector&)>;

/// Objective, exact mean gradient, noisy oracle and the known minimizer set
/// (stored as a finite list of generator points).
struct StochasticProblem {
  std::string name;
  FeasibleRegion region;
  ScalarField objective;
  VectorField mean_gradient;
  std::vector<Vector> minimizers;
  NoiseModel noise = NoiseModel::none();
  /// Expected verdict of the global coherence certificate.
  bool coherent = true;

  StochasticProblem with_noise(NoiseModel model) const;
};

/// mean_gradient(x) + zeta, zeta drawn from the problem's noise model.
DualVector sample_gradient(const StochasticProblem& problem, const PrimalPoint& x, CounterRng& rng);
Vector sample_gradient(const StochasticProblem& problem, const Vector& x, CounterRng& rng);

/// g(x) = 2 sum sqrt(1 + x_i) on [0,1]^d; coherent but not quasi-convex.
StochasticProblem make_sqrt_example(int dim);

/// g(r, theta) = (3 + sin 5theta + cos 3theta) r^2 (5/3 - r) on the unit disc.
StochasticProblem make_polar_example();

/// (1 - x1)^2 + 100 (x2 - x1^2)^2 on [-2,2]^2; only locally coherent.
StochasticProblem make_rosenbrock();

/// <c, x> over a polyhedral region. Throws GenericityError if the minimum is
/// attained at more than one vertex.
StochasticProblem make_generic_lp(const Vector& c, const FeasibleRegion& region);

/// cos(x) on [0, 4pi]; minimizers {pi, 3pi}; not coherent.
StochasticProblem make_cosine_example();

/// ||x - center||^2 / 2 on a box; center must lie in the box.
StochasticProblem make_quadratic(const FeasibleRegion& box, const Vector& center);

/// Unit box in R^d with interior center ((i+1)/(d+1))_i.
StochasticProblem make_quadratic(int dim);

struct ProblemSpec {
  std::string name;
  std::optional<int> dim;
  std::optional<Vector> cost;
};

/// Registry names accepted by make_problem.
std::vector<std::string> problem_names();

/// Builds a registered problem. Names: sqrt-d<k>, polar, rosenbrock,
/// lp-simplex, lp-box, cosine, quadratic, quadratic-<k>.
StochasticProblem make_problem(const ProblemSpec& spec);
StochasticProblem make_problem(const std::string& name);

}  // namespace smd
