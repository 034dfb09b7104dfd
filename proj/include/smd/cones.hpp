#pragma once

#include <vector>

#include "smd/region.hpp"

namespace smd {

inline constexpr double kConeTolerance = 1e-12;

/// TC(p) = cone(generators) + span(lineality). Generators and lineality
/// directions have unit Euclidean norm.
struct TangentCone {
  std::vector<Vector> generators;
  std::vector<Vector> lineality;

  bool is_whole_space(int dim) const { return generators.empty() && static_cast<int>(lineality.size()) == dim; }
};

/// Tangent cone of a polyhedral region (or a ball interior) at p. Throws
/// UnsupportedError on the boundary of a ball and DomainError for infeasible p.
TangentCone tangent_cone(const FeasibleRegion& region, const Vector& p);

/// Extreme rays and lineality of {z : M z <= 0, E z = 0}.
TangentCone polyhedral_cone(const Matrix& M, const Matrix& E);

struct ConeQuery {
  /// Throws DomainError for a zero direction.
  ConeQuery(PrimalPoint vertex, Vector direction);

  PrimalPoint vertex;
  Vector direction;
};

/// direction lies in the closed tangent cone at vertex.
bool tangent_cone_contains(const ConeQuery& q);

/// <direction, z> <= 0 for every z in TC(vertex).
bool polar_cone_contains(const ConeQuery& q);

}  // namespace smd
