#pragma once

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "smd/rng.hpp"

namespace smd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Membership tolerance, relative to max(1, diameter) of the region.
inline constexpr double kFeasibilityTolerance = 1e-9;

enum class NormKind { L2, L1 };

double primal_norm(const Vector& v, NormKind norm);

struct BoxShape {
  Vector lower;
  Vector upper;
};

struct SimplexShape {
  int dim = 0;
};

struct BallShape {
  Vector center;
  double radius = 0.0;
};

/// {x : A x <= b} intersected with an explicit bounding box.
struct PolytopeShape {
  Matrix A;
  Vector b;
  BoxShape bounding_box;
};

/// Polyhedral description G x <= h, E x = f.
struct LinearDescription {
  Matrix G;
  Vector h;
  Matrix E;
  Vector f;
};

/// Compact convex feasible set. Immutable; copies share state.
class FeasibleRegion {
 public:
  using Shape = std::variant<BoxShape, SimplexShape, BallShape, PolytopeShape>;

  static FeasibleRegion box(Vector lower, Vector upper);
  static FeasibleRegion unit_box(int dim);
  static FeasibleRegion simplex(int dim);
  static FeasibleRegion ball(Vector center, double radius);
  /// Throws DomainError when no feasible point can be found.
  static FeasibleRegion polytope(Matrix A, Vector b, Vector lower, Vector upper,
                                 std::optional<Vector> witness = std::nullopt);

  int dim() const;
  const Shape& shape() const;
  std::string kind_name() const;
  std::string describe() const;

  bool is_box() const { return std::holds_alternative<BoxShape>(shape()); }
  bool is_simplex() const { return std::holds_alternative<SimplexShape>(shape()); }
  bool is_ball() const { return std::holds_alternative<BallShape>(shape()); }
  bool is_polytope() const { return std::holds_alternative<PolytopeShape>(shape()); }
  bool is_polyhedral() const { return !is_ball(); }

  const Vector& witness() const;
  double diameter() const;
  double tolerance() const;

  bool contains(const Vector& x) const;
  bool contains(const Vector& x, double tol) const;

  /// Closest point in the Euclidean norm.
  Vector project(const Vector& y) const;

  /// sup of ||x|| over the region; bounding-box value for polytopes.
  double radius_bound(NormKind norm = NormKind::L2) const;

  /// Uniform sample. Empty when polytope rejection sampling runs out of budget.
  std::optional<Vector> sample_uniform(CounterRng& rng) const;

  /// Throws UnsupportedError for balls.
  LinearDescription linear_description() const;

  /// Vertex list of a polyhedral region (enumeration; small dimensions only).
  std::vector<Vector> vertices() const;

  bool same_as(const FeasibleRegion& other) const { return impl_ == other.impl_; }

 private:
  struct Impl;
  explicit FeasibleRegion(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

inline double radius_bound(const FeasibleRegion& region, NormKind norm = NormKind::L2) {
  return region.radius_bound(norm);
}

/// Sort-and-threshold projection onto the unit simplex. A single surviving
/// coordinate yields an exact unit vector.
Vector project_simplex(const Vector& y);

/// Element of the dual space; unconstrained.
class DualVector {
 public:
  DualVector() = default;
  explicit DualVector(Vector coords) : coords_(std::move(coords)) {}
  static DualVector zero(int dim) { return DualVector(Vector::Zero(dim)); }

  const Vector& coords() const { return coords_; }
  Eigen::Index dim() const { return coords_.size(); }
  double operator[](Eigen::Index i) const { return coords_[i]; }

 private:
  Vector coords_;
};

/// Point of a feasible region, checked against it on construction.
class PrimalPoint {
 public:
  /// Throws DomainError when `coords` is outside `region`.
  PrimalPoint(FeasibleRegion region, Vector coords);

  /// Skips the membership check; for outputs of projections and mirror maps.
  static PrimalPoint unchecked(FeasibleRegion region, Vector coords);

  const Vector& coords() const { return coords_; }
  const FeasibleRegion& region() const { return region_; }
  Eigen::Index dim() const { return coords_.size(); }
  double operator[](Eigen::Index i) const { return coords_[i]; }

 private:
  struct NoCheck {};
  PrimalPoint(FeasibleRegion region, Vector coords, NoCheck)
      : region_(std::move(region)), coords_(std::move(coords)) {}

  FeasibleRegion region_;
  Vector coords_;
};

/// min over the generators of ||x - g||.
double distance_to_set(const std::vector<Vector>& generators, const Vector& x,
                       NormKind norm = NormKind::L2);

}  // namespace smd
