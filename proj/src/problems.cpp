#include "smd/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "smd/errors.hpp"

namespace smd {

NoiseModel NoiseModel::gaussian(double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw DomainError("gaussian noise: sigma must be >= 0");
  return NoiseModel(Kind::Gaussian, sigma);
}

NoiseModel NoiseModel::uniform(double halfwidth) {
  if (!(halfwidth >= 0.0) || !std::isfinite(halfwidth)) {
    throw DomainError("uniform noise: halfwidth must be >= 0");
  }
  return NoiseModel(Kind::Uniform, halfwidth);
}

std::string NoiseModel::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::None: return "none";
    case Kind::Gaussian: os << "gaussian(sigma=" << scale_ << ")"; break;
    case Kind::Uniform: os << "uniform(halfwidth=" << scale_ << ")"; break;
  }
  return os.str();
}

Vector NoiseModel::sample(int dim, CounterRng& rng) const {
  Vector zeta(dim);
  switch (kind_) {
    case Kind::None:
      zeta.setZero();
      break;
    case Kind::Gaussian: {
      std::normal_distribution<double> dist(0.0, scale_);
      for (int i = 0; i < dim; ++i) zeta[i] = dist(rng);
      break;
    }
    case Kind::Uniform: {
      std::uniform_real_distribution<double> dist(-scale_, scale_);
      for (int i = 0; i < dim; ++i) zeta[i] = dist(rng);
      break;
    }
  }
  return zeta;
}

StochasticProblem StochasticProblem::with_noise(NoiseModel model) const {
  StochasticProblem copy = *this;
  copy.noise = model;
  return copy;
}

Vector sample_gradient(const StochasticProblem& problem, const Vector& x, CounterRng& rng) {
  Vector g = problem.mean_gradient(x);
  if (problem.noise.kind() != NoiseModel::Kind::None) g += problem.noise.sample(problem.region.dim(), rng);
  return g;
}

DualVector sample_gradient(const StochasticProblem& problem, const PrimalPoint& x, CounterRng& rng) {
  return DualVector(sample_gradient(problem, x.coords(), rng));
}

StochasticProblem make_sqrt_example(int dim) {
  if (dim < 1) throw DomainError("sqrt example: dimension must be >= 1");
  StochasticProblem p{
      .name = "sqrt-d" + std::to_string(dim),
      .region = FeasibleRegion::unit_box(dim),
      .objective = [](const Vector& x) { return 2.0 * (1.0 + x.array()).sqrt().sum(); },
      .mean_gradient = [](const Vector& x) -> Vector { return (1.0 + x.array()).rsqrt().matrix(); },
      .minimizers = {Vector::Zero(dim)},
  };
  return p;
}

StochasticProblem make_polar_example() {
  auto angular = [](double theta) { return 3.0 + std::sin(5.0 * theta) + std::cos(3.0 * theta); };
  StochasticProblem p{
      .name = "polar",
      .region = FeasibleRegion::ball(Vector::Zero(2), 1.0),
      .objective =
          [angular](const Vector& x) {
            const double r = std::hypot(x[0], x[1]);
            if (r == 0.0) return 0.0;
            return angular(std::atan2(x[1], x[0])) * r * r * (5.0 / 3.0 - r);
          },
      .mean_gradient =
          [angular](const Vector& x) -> Vector {
            const double r = std::hypot(x[0], x[1]);
            // g = O(r^2) at the origin
            if (r == 0.0) return Vector::Zero(2);
            const double theta = std::atan2(x[1], x[0]);
            const double c = angular(theta);
            const double dc = 5.0 * std::cos(5.0 * theta) - 3.0 * std::sin(3.0 * theta);
            const double radial = c * (10.0 / 3.0 * r - 3.0 * r * r);
            const double tangential = dc * (5.0 / 3.0 * r - r * r);  // (1/r) dg/dtheta
            const double ct = x[0] / r;
            const double st = x[1] / r;
            Vector g(2);
            g << radial * ct - tangential * st, radial * st + tangential * ct;
            return g;
          },
      .minimizers = {Vector::Zero(2)},
  };
  return p;
}

StochasticProblem make_rosenbrock() {
  Vector x_star(2);
  x_star << 1.0, 1.0;
  StochasticProblem p{
      .name = "rosenbrock",
      .region = FeasibleRegion::box(Vector::Constant(2, -2.0), Vector::Constant(2, 2.0)),
      .objective =
          [](const Vector& x) {
            const double a = 1.0 - x[0];
            const double b = x[1] - x[0] * x[0];
            return a * a + 100.0 * b * b;
          },
      .mean_gradient =
          [](const Vector& x) -> Vector {
            const double b = x[1] - x[0] * x[0];
            Vector g(2);
            g << -2.0 * (1.0 - x[0]) - 400.0 * x[0] * b, 200.0 * b;
            return g;
          },
      .minimizers = {x_star},
      .coherent = false,
  };
  return p;
}

StochasticProblem make_generic_lp(const Vector& c, const FeasibleRegion& region) {
  if (!region.is_polyhedral()) throw UnsupportedError("generic LP requires a polyhedral region");
  if (c.size() != region.dim()) throw DomainError("generic LP: cost dimension mismatch");
  const std::vector<Vector> verts = region.vertices();
  std::vector<double> values;
  values.reserve(verts.size());
  for (const auto& v : verts) values.push_back(c.dot(v));
  const auto best = std::min_element(values.begin(), values.end());
  const double best_value = *best;
  const Vector vertex = verts[static_cast<std::size_t>(best - values.begin())];
  const double tie_tol = 1e-12 * (1.0 + std::abs(best_value)) * (1.0 + c.norm());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i != static_cast<std::size_t>(best - values.begin()) && values[i] - best_value <= tie_tol) {
      throw GenericityError("generic LP: objective minimized at more than one vertex");
    }
  }
  StochasticProblem p{
      .name = "lp-" + region.kind_name(),
      .region = region,
      .objective = [c](const Vector& x) { return c.dot(x); },
      .mean_gradient = [c](const Vector&) -> Vector { return c; },
      .minimizers = {vertex},
  };
  return p;
}

StochasticProblem make_cosine_example() {
  using std::numbers::pi;
  StochasticProblem p{
      .name = "cosine",
      .region = FeasibleRegion::box(Vector::Zero(1), Vector::Constant(1, 4.0 * pi)),
      .objective = [](const Vector& x) { return std::cos(x[0]); },
      .mean_gradient = [](const Vector& x) -> Vector { return Vector::Constant(1, -std::sin(x[0])); },
      .minimizers = {Vector::Constant(1, pi), Vector::Constant(1, 3.0 * pi)},
      .coherent = false,
  };
  return p;
}

StochasticProblem make_quadratic(const FeasibleRegion& box, const Vector& center) {
  if (!box.is_box()) throw UnsupportedError("quadratic problem is defined on boxes");
  if (!box.contains(center)) throw DomainError("quadratic: center outside the box");
  StochasticProblem p{
      .name = "quadratic-" + std::to_string(box.dim()),
      .region = box,
      .objective = [center](const Vector& x) { return 0.5 * (x - center).squaredNorm(); },
      .mean_gradient = [center](const Vector& x) -> Vector { return x - center; },
      .minimizers = {center},
  };
  return p;
}

StochasticProblem make_quadratic(int dim) {
  if (dim < 1) throw DomainError("quadratic: dimension must be >= 1");
  Vector center(dim);
  for (int i = 0; i < dim; ++i) center[i] = static_cast<double>(i + 1) / (dim + 1);
  return make_quadratic(FeasibleRegion::unit_box(dim), center);
}

std::vector<std::string> problem_names() {
  return {"sqrt-d2", "polar", "rosenbrock", "lp-simplex", "lp-box", "cosine", "quadratic-d"};
}

namespace {

std::optional<int> parse_suffix(const std::string& name, const std::string& prefix) {
  if (name.size() <= prefix.size() || name.compare(0, prefix.size(), prefix) != 0) return std::nullopt;
  const std::string tail = name.substr(prefix.size());
  if (!std::all_of(tail.begin(), tail.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
    return std::nullopt;
  }
  return std::stoi(tail);
}

}  // namespace

StochasticProblem make_problem(const ProblemSpec& spec) {
  const std::string& name = spec.name;
  if (auto d = parse_suffix(name, "sqrt-d")) return make_sqrt_example(spec.dim.value_or(*d));
  if (name == "sqrt") return make_sqrt_example(spec.dim.value_or(2));
  if (name == "polar") return make_polar_example();
  if (name == "rosenbrock") return make_rosenbrock();
  if (name == "cosine") return make_cosine_example();
  if (auto d = parse_suffix(name, "quadratic-")) return make_quadratic(spec.dim.value_or(*d));
  if (name == "quadratic" || name == "quadratic-d") return make_quadratic(spec.dim.value_or(2));
  if (name == "lp-simplex") {
    Vector c = spec.cost.value_or(Vector{{1.0, 2.0}});
    return make_generic_lp(c, FeasibleRegion::simplex(static_cast<int>(c.size())));
  }
  if (name == "lp-box") {
    Vector c = spec.cost.value_or(Vector{{-1.0, 3.0, 0.5}});
    return make_generic_lp(c, FeasibleRegion::unit_box(static_cast<int>(c.size())));
  }
  throw UnsupportedError("unknown problem '" + name + "'");
}

StochasticProblem make_problem(const std::string& name) { return make_problem(ProblemSpec{name, {}, {}}); }

}  // namespace smd
