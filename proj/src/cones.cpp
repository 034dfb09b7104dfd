#include "smd/cones.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "smd/errors.hpp"

namespace smd {

namespace {

constexpr double kRankTolerance = 1e-10;

// Orthonormal basis of the null space of N (columns).
Matrix null_space(const Matrix& N, Eigen::Index dim) {
  if (N.rows() == 0) return Matrix::Identity(dim, dim);
  Eigen::JacobiSVD<Matrix> svd(N, Eigen::ComputeFullV);
  const Vector& sv = svd.singularValues();
  const double scale = std::max(1.0, sv.size() > 0 ? sv[0] : 0.0);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] > kRankTolerance * scale) ++rank;
  }
  return svd.matrixV().rightCols(dim - rank);
}

Matrix stack(const Matrix& top, const Matrix& bottom) {
  Matrix out(top.rows() + bottom.rows(), std::max(top.cols(), bottom.cols()));
  if (top.rows() > 0) out.topRows(top.rows()) = top;
  if (bottom.rows() > 0) out.bottomRows(bottom.rows()) = bottom;
  return out;
}

void push_unique(std::vector<Vector>& dirs, const Vector& v) {
  for (const auto& w : dirs) {
    if ((w - v).norm() < 1e-9) return;
  }
  dirs.push_back(v);
}

bool in_cone(const Matrix& M, const Matrix& E, const Vector& z) {
  const double tol = 1e-9 * std::max(1.0, z.norm());
  if (M.rows() > 0 && (M * z).maxCoeff() > tol) return false;
  if (E.rows() > 0 && (E * z).cwiseAbs().maxCoeff() > tol) return false;
  return true;
}

TangentCone box_cone(const BoxShape& box, const Vector& p, double tol) {
  TangentCone cone;
  const Eigen::Index d = p.size();
  for (Eigen::Index i = 0; i < d; ++i) {
    if (p[i] - box.lower[i] <= tol) {
      cone.generators.push_back(Vector::Unit(d, i));
    } else if (box.upper[i] - p[i] <= tol) {
      cone.generators.push_back(-Vector::Unit(d, i));
    } else {
      cone.lineality.push_back(Vector::Unit(d, i));
    }
  }
  return cone;
}

TangentCone simplex_cone(const Vector& p, double tol) {
  TangentCone cone;
  const Eigen::Index d = p.size();
  std::vector<Eigen::Index> zero;
  std::vector<Eigen::Index> free;
  for (Eigen::Index i = 0; i < d; ++i) (p[i] <= tol ? zero : free).push_back(i);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (auto i : zero) {
    for (auto j : free) {
      Vector z = Vector::Zero(d);
      z[i] = inv_sqrt2;
      z[j] = -inv_sqrt2;
      cone.generators.push_back(std::move(z));
    }
  }
  if (free.size() > 1) {
    Matrix span = Matrix::Zero(d, static_cast<Eigen::Index>(free.size()) - 1);
    for (std::size_t k = 1; k < free.size(); ++k) {
      span(free[0], static_cast<Eigen::Index>(k) - 1) = 1.0;
      span(free[k], static_cast<Eigen::Index>(k) - 1) = -1.0;
    }
    Eigen::HouseholderQR<Matrix> qr(span);
    const Matrix q = qr.householderQ() * Matrix::Identity(d, span.cols());
    for (Eigen::Index k = 0; k < q.cols(); ++k) cone.lineality.push_back(q.col(k));
  }
  return cone;
}

}  // namespace

TangentCone polyhedral_cone(const Matrix& M_in, const Matrix& E) {
  const Eigen::Index d = std::max(M_in.cols(), E.cols());
  Matrix M = M_in;
  for (Eigen::Index i = 0; i < M.rows(); ++i) M.row(i).normalize();

  TangentCone cone;
  const Matrix lineality = null_space(stack(M, E), d);
  for (Eigen::Index k = 0; k < lineality.cols(); ++k) cone.lineality.push_back(lineality.col(k));

  // Pointed part lives in null(E) intersected with the orthogonal complement
  // of the lineality space; extreme rays have d-1 independent tight rows.
  const Matrix fixed = stack(E, lineality.transpose());
  const Matrix pointed_space = null_space(fixed, d);
  const Eigen::Index r = pointed_space.cols();
  if (r == 0) return cone;
  if (r == 1) {
    const Vector w = pointed_space.col(0);
    if (in_cone(M, E, w)) push_unique(cone.generators, w);
    if (in_cone(M, E, -w)) push_unique(cone.generators, -w);
    return cone;
  }

  const auto m = static_cast<int>(M.rows());
  const int k = static_cast<int>(r) - 1;
  if (m < k) return cone;
  std::vector<int> pick(k);
  std::iota(pick.begin(), pick.end(), 0);
  while (true) {
    Matrix rows(k, d);
    for (int j = 0; j < k; ++j) rows.row(j) = M.row(pick[j]);
    const Matrix ray_space = null_space(stack(rows, fixed), d);
    if (ray_space.cols() == 1) {
      const Vector w = ray_space.col(0);
      if (in_cone(M, E, w)) push_unique(cone.generators, w);
      if (in_cone(M, E, -w)) push_unique(cone.generators, -w);
    }
    int j = k - 1;
    while (j >= 0 && pick[j] == m - k + j) --j;
    if (j < 0) break;
    ++pick[j];
    for (int l = j + 1; l < k; ++l) pick[l] = pick[l - 1] + 1;
  }
  return cone;
}

TangentCone tangent_cone(const FeasibleRegion& region, const Vector& p) {
  if (!region.contains(p)) throw DomainError("tangent_cone: point is not feasible");
  const double tol = region.tolerance();
  if (const auto* box = std::get_if<BoxShape>(&region.shape())) return box_cone(*box, p, tol);
  if (region.is_simplex()) return simplex_cone(p, tol);
  if (const auto* ball = std::get_if<BallShape>(&region.shape())) {
    if ((p - ball->center).norm() < ball->radius - tol) {
      TangentCone cone;
      for (int i = 0; i < region.dim(); ++i) cone.lineality.push_back(Vector::Unit(region.dim(), i));
      return cone;
    }
    throw UnsupportedError("tangent cone at a smooth boundary point of a ball");
  }
  const LinearDescription desc = region.linear_description();
  std::vector<Eigen::Index> active;
  for (Eigen::Index i = 0; i < desc.G.rows(); ++i) {
    if (desc.h[i] - desc.G.row(i).dot(p) <= tol * std::max(1.0, desc.G.row(i).norm())) active.push_back(i);
  }
  Matrix M(static_cast<Eigen::Index>(active.size()), region.dim());
  for (std::size_t k = 0; k < active.size(); ++k) M.row(static_cast<Eigen::Index>(k)) = desc.G.row(active[k]);
  return polyhedral_cone(M, desc.E);
}

ConeQuery::ConeQuery(PrimalPoint vertex_in, Vector direction_in)
    : vertex(std::move(vertex_in)), direction(std::move(direction_in)) {
  if (direction.size() != vertex.dim()) throw DomainError("cone query: dimension mismatch");
  if (!(direction.norm() > 0.0)) throw DomainError("cone query: direction must be nonzero");
}

bool tangent_cone_contains(const ConeQuery& q) {
  const FeasibleRegion& region = q.vertex.region();
  const Vector& p = q.vertex.coords();
  const Vector z = q.direction.normalized();
  if (region.is_polyhedral()) {
    const double tol = region.tolerance();
    const LinearDescription desc = region.linear_description();
    for (Eigen::Index i = 0; i < desc.G.rows(); ++i) {
      const double slack = desc.h[i] - desc.G.row(i).dot(p);
      const double row_norm = desc.G.row(i).norm();
      if (slack <= tol * std::max(1.0, row_norm) && desc.G.row(i).dot(z) > kConeTolerance * row_norm) {
        return false;
      }
    }
    for (Eigen::Index i = 0; i < desc.E.rows(); ++i) {
      if (std::abs(desc.E.row(i).dot(z)) > kConeTolerance * desc.E.row(i).norm()) return false;
    }
    return true;
  }
  // Ball: the whole space inside, the closed half-space {<z, p - c> <= 0} on the rim.
  const auto& ball = std::get<BallShape>(region.shape());
  const Vector outward = p - ball.center;
  if (outward.norm() < ball.radius - region.tolerance()) return true;
  return z.dot(outward) / outward.norm() <= kConeTolerance;
}

bool polar_cone_contains(const ConeQuery& q) {
  const TangentCone cone = tangent_cone(q.vertex.region(), q.vertex.coords());
  const double tol = kConeTolerance * std::max(1.0, q.direction.norm());
  for (const auto& g : cone.generators) {
    if (q.direction.dot(g) > tol) return false;
  }
  for (const auto& l : cone.lineality) {
    if (std::abs(q.direction.dot(l)) > tol) return false;
  }
  return true;
}

}  // namespace smd
