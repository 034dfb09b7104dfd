#pragma once

#include <string>
#include <vector>

#include "smd/region.hpp"

namespace smd {

enum class RegularizerKind { Euclidean, Entropic };

/// Strongly convex penalty h on the feasible region. Euclidean is
/// h(x) = ||x||^2 / 2 (L2, K = 1); Entropic is the negative Gibbs entropy
/// sum x_i log x_i on the simplex (L1, K = 1).
class Regularizer {
 public:
  static Regularizer euclidean() { return Regularizer(RegularizerKind::Euclidean, NormKind::L2, 1.0); }
  static Regularizer entropic() { return Regularizer(RegularizerKind::Entropic, NormKind::L1, 1.0); }
  /// "euclidean" or "entropic"; throws UnsupportedError otherwise.
  static Regularizer from_name(const std::string& name);

  RegularizerKind kind() const { return kind_; }
  NormKind paired_norm() const { return norm_; }
  double strong_convexity() const { return modulus_; }
  std::string name() const;

  bool supports(const FeasibleRegion& region) const;
  /// Throws UnsupportedError if the pairing is not supported.
  void require_support(const FeasibleRegion& region) const;

 private:
  Regularizer(RegularizerKind kind, NormKind norm, double modulus)
      : kind_(kind), norm_(norm), modulus_(modulus) {}

  RegularizerKind kind_;
  NormKind norm_;
  double modulus_;
};

/// Dual of the paired norm: L2 -> L2, L1 -> max-norm.
double dual_norm(const Vector& v, NormKind paired_norm);
inline double dual_norm(const DualVector& v, NormKind paired_norm) {
  return dual_norm(v.coords(), paired_norm);
}

double regularizer_value(const Regularizer& h, const PrimalPoint& x);

/// argmax over the region of <y, x> - h(x).
PrimalPoint mirror_map(const Regularizer& h, const FeasibleRegion& region, const DualVector& y);

/// h*(y) = max over the region of <y, x> - h(x).
double conjugate_value(const Regularizer& h, const FeasibleRegion& region, const DualVector& y);

/// F(p, y) = h(p) + h*(y) - <y, p>; non-negative, zero iff p = Q(y).
double fenchel_coupling(const Regularizer& h, const PrimalPoint& p, const DualVector& y);

/// inf over a finite generator set of F(p, y).
double setwise_fenchel(const Regularizer& h, const FeasibleRegion& region,
                       const std::vector<Vector>& generators, const DualVector& y);

}  // namespace smd
