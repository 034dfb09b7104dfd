#include "smd/region.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "smd/errors.hpp"

namespace smd {

namespace {

constexpr double kDykstraTolerance = 1e-10;
constexpr int kDykstraMaxIterations = 100000;
constexpr int kRejectionBudget = 10000;

double box_diameter(const BoxShape& box) { return (box.upper - box.lower).norm(); }

Vector clamp_to_box(const BoxShape& box, const Vector& y) {
  return y.cwiseMax(box.lower).cwiseMin(box.upper);
}

bool box_contains(const BoxShape& box, const Vector& x, double tol) {
  return ((x - box.lower).array() >= -tol).all() && ((box.upper - x).array() >= -tol).all();
}

void check_box(const BoxShape& box) {
  if (box.lower.size() == 0 || box.lower.size() != box.upper.size()) {
    throw DomainError("box bounds must be nonempty and of equal length");
  }
  if (!box.lower.allFinite() || !box.upper.allFinite()) {
    throw DomainError("box bounds must be finite");
  }
  if (!(box.lower.array() < box.upper.array()).all()) {
    throw DomainError("box requires lower < upper componentwise");
  }
}

// Dykstra's alternating projections over the halfspaces and the bounding box.
Vector project_polytope(const PolytopeShape& poly, const Vector& y) {
  const Eigen::Index m = poly.A.rows();
  const Eigen::Index d = y.size();
  Vector row_sq(m);
  for (Eigen::Index i = 0; i < m; ++i) row_sq[i] = poly.A.row(i).squaredNorm();

  Matrix increments = Matrix::Zero(d, m + 1);
  Vector x = y;
  Vector z(d);
  for (int iter = 0; iter < kDykstraMaxIterations; ++iter) {
    const Vector previous = x;
    const Matrix previous_increments = increments;
    for (Eigen::Index i = 0; i < m; ++i) {
      z = x + increments.col(i);
      const double excess = poly.A.row(i).dot(z) - poly.b[i];
      if (excess > 0.0) {
        x = z - (excess / row_sq[i]) * poly.A.row(i).transpose();
      } else {
        x = z;
      }
      increments.col(i) = z - x;
    }
    z = x + increments.col(m);
    x = clamp_to_box(poly.bounding_box, z);
    increments.col(m) = z - x;

    // x alone can stall for a sweep while the corrections still move.
    if ((x - previous).lpNorm<Eigen::Infinity>() < kDykstraTolerance &&
        (increments - previous_increments).lpNorm<Eigen::Infinity>() < kDykstraTolerance) {
      return x;
    }
  }
  throw NumericError("Dykstra projection did not converge");
}

}  // namespace

struct FeasibleRegion::Impl {
  Shape shape;
  int dim = 0;
  Vector witness;
  double diameter = 0.0;
};

double primal_norm(const Vector& v, NormKind norm) {
  return norm == NormKind::L2 ? v.norm() : v.lpNorm<1>();
}

Vector project_simplex(const Vector& y) {
  const Eigen::Index d = y.size();
  std::vector<double> u(y.data(), y.data() + d);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  Eigen::Index rho = 0;
  for (Eigen::Index j = 0; j < d; ++j) {
    cumulative += u[j];
    const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (u[j] - candidate > 0.0) {
      rho = j + 1;
      theta = candidate;
    }
  }
  Vector x = Vector::Zero(d);
  if (rho == 1) {
    Eigen::Index top = 0;
    y.maxCoeff(&top);
    x[top] = 1.0;
    return x;
  }
  for (Eigen::Index i = 0; i < d; ++i) x[i] = std::max(y[i] - theta, 0.0);
  return x;
}

FeasibleRegion FeasibleRegion::box(Vector lower, Vector upper) {
  BoxShape box{std::move(lower), std::move(upper)};
  check_box(box);
  auto impl = std::make_shared<Impl>();
  impl->dim = static_cast<int>(box.lower.size());
  impl->witness = 0.5 * (box.lower + box.upper);
  impl->diameter = box_diameter(box);
  impl->shape = std::move(box);
  return FeasibleRegion(std::move(impl));
}

FeasibleRegion FeasibleRegion::unit_box(int dim) {
  return box(Vector::Zero(dim), Vector::Ones(dim));
}

FeasibleRegion FeasibleRegion::simplex(int dim) {
  if (dim < 1) throw DomainError("simplex dimension must be >= 1");
  auto impl = std::make_shared<Impl>();
  impl->dim = dim;
  impl->witness = Vector::Constant(dim, 1.0 / dim);
  impl->diameter = dim > 1 ? std::sqrt(2.0) : 0.0;
  impl->shape = SimplexShape{dim};
  return FeasibleRegion(std::move(impl));
}

FeasibleRegion FeasibleRegion::ball(Vector center, double radius) {
  if (center.size() == 0 || !center.allFinite()) throw DomainError("ball center must be finite");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw DomainError("ball radius must be > 0");
  auto impl = std::make_shared<Impl>();
  impl->dim = static_cast<int>(center.size());
  impl->witness = center;
  impl->diameter = 2.0 * radius;
  impl->shape = BallShape{std::move(center), radius};
  return FeasibleRegion(std::move(impl));
}

FeasibleRegion FeasibleRegion::polytope(Matrix A, Vector b, Vector lower, Vector upper,
                                        std::optional<Vector> witness) {
  BoxShape bbox{std::move(lower), std::move(upper)};
  check_box(bbox);
  if (A.cols() != bbox.lower.size() || A.rows() != b.size()) {
    throw DomainError("polytope: A, b and bounding box dimensions disagree");
  }
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    if (A.row(i).squaredNorm() == 0.0) throw DomainError("polytope: zero constraint row");
  }
  PolytopeShape poly{std::move(A), std::move(b), std::move(bbox)};
  auto impl = std::make_shared<Impl>();
  impl->dim = static_cast<int>(poly.A.cols());
  impl->diameter = box_diameter(poly.bounding_box);
  const double tol = kFeasibilityTolerance * std::max(1.0, impl->diameter);

  Vector w;
  if (witness) {
    w = *witness;
  } else {
    try {
      w = project_polytope(poly, 0.5 * (poly.bounding_box.lower + poly.bounding_box.upper));
    } catch (const NumericError&) {
      // Alternating projections do not settle on an empty intersection.
      throw DomainError("polytope: no feasible witness (empty region?)");
    }
  }
  const bool feasible = box_contains(poly.bounding_box, w, tol) &&
                        ((poly.A * w - poly.b).array() <= tol).all();
  if (!feasible) throw DomainError("polytope: no feasible witness (empty region?)");
  impl->witness = std::move(w);
  impl->shape = std::move(poly);
  return FeasibleRegion(std::move(impl));
}

int FeasibleRegion::dim() const { return impl_->dim; }
const FeasibleRegion::Shape& FeasibleRegion::shape() const { return impl_->shape; }
const Vector& FeasibleRegion::witness() const { return impl_->witness; }
double FeasibleRegion::diameter() const { return impl_->diameter; }
double FeasibleRegion::tolerance() const {
  return kFeasibilityTolerance * std::max(1.0, impl_->diameter);
}

std::string FeasibleRegion::kind_name() const {
  return std::visit(
      [](const auto& s) -> std::string {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, BoxShape>) return "box";
        else if constexpr (std::is_same_v<S, SimplexShape>) return "simplex";
        else if constexpr (std::is_same_v<S, BallShape>) return "ball";
        else return "polytope";
      },
      shape());
}

std::string FeasibleRegion::describe() const {
  std::ostringstream os;
  os << kind_name() << "(d=" << dim();
  if (const auto* ball = std::get_if<BallShape>(&shape())) os << ", r=" << ball->radius;
  if (const auto* poly = std::get_if<PolytopeShape>(&shape())) os << ", m=" << poly->A.rows();
  os << ")";
  return os.str();
}

bool FeasibleRegion::contains(const Vector& x) const { return contains(x, tolerance()); }

bool FeasibleRegion::contains(const Vector& x, double tol) const {
  if (x.size() != dim() || !x.allFinite()) return false;
  return std::visit(
      [&](const auto& s) -> bool {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, BoxShape>) {
          return box_contains(s, x, tol);
        } else if constexpr (std::is_same_v<S, SimplexShape>) {
          return (x.array() >= -tol).all() && std::abs(x.sum() - 1.0) <= tol;
        } else if constexpr (std::is_same_v<S, BallShape>) {
          return (x - s.center).norm() <= s.radius + tol;
        } else {
          return box_contains(s.bounding_box, x, tol) && ((s.A * x - s.b).array() <= tol).all();
        }
      },
      shape());
}

Vector FeasibleRegion::project(const Vector& y) const {
  if (y.size() != dim()) throw DomainError("projection: dimension mismatch");
  return std::visit(
      [&](const auto& s) -> Vector {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, BoxShape>) {
          return clamp_to_box(s, y);
        } else if constexpr (std::is_same_v<S, SimplexShape>) {
          return project_simplex(y);
        } else if constexpr (std::is_same_v<S, BallShape>) {
          const Vector offset = y - s.center;
          const double r = offset.norm();
          if (r <= s.radius) return y;
          return s.center + (s.radius / r) * offset;
        } else {
          if (box_contains(s.bounding_box, y, 0.0) && ((s.A * y - s.b).array() <= 0.0).all()) {
            return y;
          }
          return project_polytope(s, y);
        }
      },
      shape());
}

double FeasibleRegion::radius_bound(NormKind norm) const {
  auto box_bound = [norm](const BoxShape& box) {
    const Vector extreme = box.lower.cwiseAbs().cwiseMax(box.upper.cwiseAbs());
    return primal_norm(extreme, norm);
  };
  return std::visit(
      [&](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, BoxShape>) {
          return box_bound(s);
        } else if constexpr (std::is_same_v<S, SimplexShape>) {
          return 1.0;
        } else if constexpr (std::is_same_v<S, BallShape>) {
          if (norm == NormKind::L2) return s.center.norm() + s.radius;
          return s.center.template lpNorm<1>() + s.radius * std::sqrt(static_cast<double>(s.center.size()));
        } else {
          return box_bound(s.bounding_box);
        }
      },
      shape());
}

std::optional<Vector> FeasibleRegion::sample_uniform(CounterRng& rng) const {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int d = dim();
  auto sample_box = [&](const BoxShape& box) {
    Vector x(d);
    for (int i = 0; i < d; ++i) x[i] = box.lower[i] + (box.upper[i] - box.lower[i]) * unif(rng);
    return x;
  };
  return std::visit(
      [&](const auto& s) -> std::optional<Vector> {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, BoxShape>) {
          return sample_box(s);
        } else if constexpr (std::is_same_v<S, SimplexShape>) {
          // Dirichlet(1, ..., 1)
          std::exponential_distribution<double> expo(1.0);
          Vector x(d);
          for (int i = 0; i < d; ++i) x[i] = expo(rng);
          return Vector(x / x.sum());
        } else if constexpr (std::is_same_v<S, BallShape>) {
          std::normal_distribution<double> gauss(0.0, 1.0);
          Vector dir(d);
          do {
            for (int i = 0; i < d; ++i) dir[i] = gauss(rng);
          } while (dir.norm() == 0.0);
          const double r = s.radius * std::pow(unif(rng), 1.0 / d);
          return Vector(s.center + (r / dir.norm()) * dir);
        } else {
          for (int attempt = 0; attempt < kRejectionBudget; ++attempt) {
            Vector x = sample_box(s.bounding_box);
            if (((s.A * x - s.b).array() <= 0.0).all()) return x;
          }
          return std::nullopt;
        }
      },
      shape());
}

LinearDescription FeasibleRegion::linear_description() const {
  const int d = dim();
  auto box_rows = [d](const BoxShape& box, LinearDescription& out, Eigen::Index offset) {
    for (int i = 0; i < d; ++i) {
      out.G.row(offset + 2 * i).setZero();
      out.G(offset + 2 * i, i) = -1.0;
      out.h[offset + 2 * i] = -box.lower[i];
      out.G.row(offset + 2 * i + 1).setZero();
      out.G(offset + 2 * i + 1, i) = 1.0;
      out.h[offset + 2 * i + 1] = box.upper[i];
    }
  };
  LinearDescription out;
  out.E = Matrix(0, d);
  out.f = Vector(0);
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, BoxShape>) {
          out.G = Matrix(2 * d, d);
          out.h = Vector(2 * d);
          box_rows(s, out, 0);
        } else if constexpr (std::is_same_v<S, SimplexShape>) {
          out.G = -Matrix::Identity(d, d);
          out.h = Vector::Zero(d);
          out.E = Matrix::Ones(1, d);
          out.f = Vector::Ones(1);
        } else if constexpr (std::is_same_v<S, BallShape>) {
          throw UnsupportedError("ball has no linear description");
        } else {
          const Eigen::Index m = s.A.rows();
          out.G = Matrix(m + 2 * d, d);
          out.h = Vector(m + 2 * d);
          out.G.topRows(m) = s.A;
          out.h.head(m) = s.b;
          box_rows(s.bounding_box, out, m);
        }
      },
      shape());
  return out;
}

std::vector<Vector> FeasibleRegion::vertices() const {
  const int d = dim();
  std::vector<Vector> out;
  if (const auto* box = std::get_if<BoxShape>(&shape())) {
    if (d > 20) throw UnsupportedError("box vertex enumeration limited to d <= 20");
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << d); ++mask) {
      Vector v(d);
      for (int i = 0; i < d; ++i) v[i] = (mask >> i) & 1U ? box->upper[i] : box->lower[i];
      out.push_back(std::move(v));
    }
    return out;
  }
  if (is_simplex()) {
    for (int i = 0; i < d; ++i) out.push_back(Vector::Unit(d, i));
    return out;
  }
  // Polytope: every d-subset of constraints with a unique feasible solution.
  const LinearDescription desc = linear_description();
  const auto m = static_cast<int>(desc.G.rows());
  std::vector<int> pick(d);
  std::iota(pick.begin(), pick.end(), 0);
  const double tol = tolerance();
  while (true) {
    Matrix M(d, d);
    Vector rhs(d);
    for (int k = 0; k < d; ++k) {
      M.row(k) = desc.G.row(pick[k]);
      rhs[k] = desc.h[pick[k]];
    }
    Eigen::FullPivLU<Matrix> lu(M);
    if (lu.rank() == d) {
      Vector v = lu.solve(rhs);
      const bool seen = std::any_of(out.begin(), out.end(),
                                    [&](const Vector& w) { return (w - v).norm() <= 1e3 * tol; });
      if (!seen && contains(v, 1e3 * tol)) out.push_back(std::move(v));
    }
    int k = d - 1;
    while (k >= 0 && pick[k] == m - d + k) --k;
    if (k < 0) break;
    ++pick[k];
    for (int j = k + 1; j < d; ++j) pick[j] = pick[j - 1] + 1;
  }
  return out;
}

PrimalPoint::PrimalPoint(FeasibleRegion region, Vector coords)
    : region_(std::move(region)), coords_(std::move(coords)) {
  if (!region_.contains(coords_)) {
    throw DomainError("point is not in the feasible region " + region_.describe());
  }
}

PrimalPoint PrimalPoint::unchecked(FeasibleRegion region, Vector coords) {
  return PrimalPoint(std::move(region), std::move(coords), NoCheck{});
}

double distance_to_set(const std::vector<Vector>& generators, const Vector& x, NormKind norm) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& g : generators) best = std::min(best, primal_norm(x - g, norm));
  return best;
}

}  // namespace smd
