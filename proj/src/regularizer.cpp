#include "smd/regularizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "smd/errors.hpp"

namespace smd {

namespace {

double entropy_term(double v) { return v > 0.0 ? v * std::log(v) : 0.0; }

double log_sum_exp(const Vector& y) {
  const double top = y.maxCoeff();
  return top + std::log((y.array() - top).exp().sum());
}

Vector softmax(const Vector& y) {
  const double top = y.maxCoeff();
  Vector x = (y.array() - top).exp();
  x /= x.sum();
  // Put the rounding residue on the largest entry so the output sums to 1.
  Eigen::Index arg = 0;
  x.maxCoeff(&arg);
  x[arg] = 0.0;
  x[arg] = 1.0 - x.sum();
  return x;
}

// Conjugate from a known maximizer.
double conjugate_at(const Regularizer& h, const Vector& y, const Vector& x) {
  if (h.kind() == RegularizerKind::Euclidean) return y.dot(x) - 0.5 * x.squaredNorm();
  return log_sum_exp(y);
}

double value_at(const Regularizer& h, const Vector& x) {
  if (h.kind() == RegularizerKind::Euclidean) return 0.5 * x.squaredNorm();
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += entropy_term(x[i]);
  return s;
}

}  // namespace

Regularizer Regularizer::from_name(const std::string& name) {
  if (name == "euclidean") return euclidean();
  if (name == "entropic") return entropic();
  throw UnsupportedError("unknown regularizer '" + name + "'");
}

std::string Regularizer::name() const {
  return kind_ == RegularizerKind::Euclidean ? "euclidean" : "entropic";
}

bool Regularizer::supports(const FeasibleRegion& region) const {
  return kind_ == RegularizerKind::Euclidean || region.is_simplex();
}

void Regularizer::require_support(const FeasibleRegion& region) const {
  if (!supports(region)) {
    throw UnsupportedError(name() + " regularizer is not supported on " + region.describe());
  }
}

double dual_norm(const Vector& v, NormKind paired_norm) {
  return paired_norm == NormKind::L2 ? v.norm() : v.lpNorm<Eigen::Infinity>();
}

double regularizer_value(const Regularizer& h, const PrimalPoint& x) {
  h.require_support(x.region());
  if (!x.region().contains(x.coords())) throw DomainError("regularizer_value: infeasible point");
  return value_at(h, x.coords());
}

PrimalPoint mirror_map(const Regularizer& h, const FeasibleRegion& region, const DualVector& y) {
  h.require_support(region);
  if (y.dim() != region.dim()) throw DomainError("mirror_map: dimension mismatch");
  if (!y.coords().allFinite()) throw NumericError("mirror_map: non-finite dual vector");
  if (h.kind() == RegularizerKind::Euclidean) {
    return PrimalPoint::unchecked(region, region.project(y.coords()));
  }
  return PrimalPoint::unchecked(region, softmax(y.coords()));
}

double conjugate_value(const Regularizer& h, const FeasibleRegion& region, const DualVector& y) {
  const PrimalPoint q = mirror_map(h, region, y);
  return conjugate_at(h, y.coords(), q.coords());
}

double fenchel_coupling(const Regularizer& h, const PrimalPoint& p, const DualVector& y) {
  const FeasibleRegion& region = p.region();
  h.require_support(region);
  if (!region.contains(p.coords())) throw DomainError("fenchel_coupling: infeasible base point");
  const PrimalPoint q = mirror_map(h, region, y);
  const double f = value_at(h, p.coords()) + conjugate_at(h, y.coords(), q.coords()) -
                   y.coords().dot(p.coords());
  return std::max(0.0, f);
}

double setwise_fenchel(const Regularizer& h, const FeasibleRegion& region,
                       const std::vector<Vector>& generators, const DualVector& y) {
  h.require_support(region);
  const PrimalPoint q = mirror_map(h, region, y);
  const double conj = conjugate_at(h, y.coords(), q.coords());
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : generators) {
    best = std::min(best, value_at(h, p) + conj - y.coords().dot(p));
  }
  return std::max(0.0, best);
}

}  // namespace smd
