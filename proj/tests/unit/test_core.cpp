#include "catch_amalgamated.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "smd/errors.hpp"
#include "smd/regularizer.hpp"

using namespace smd;
using Catch::Matchers::WithinAbs;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

Vector gaussian(int d, CounterRng& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Vector v(d);
  for (int i = 0; i < d; ++i) v[i] = n(rng);
  return v;
}

struct Pairing {
  const char* label;
  Regularizer h;
  FeasibleRegion region;
};

std::vector<Pairing> pairings() {
  Matrix A(2, 2);
  A << 1, 1, -1, 2;
  return {
      {"euclidean/box", Regularizer::euclidean(), FeasibleRegion::box(vec({-1, 0}), vec({1, 2}))},
      {"euclidean/simplex", Regularizer::euclidean(), FeasibleRegion::simplex(3)},
      {"euclidean/ball", Regularizer::euclidean(), FeasibleRegion::ball(vec({0.5, -0.5}), 1.5)},
      {"euclidean/polytope", Regularizer::euclidean(),
       FeasibleRegion::polytope(A, vec({1.0, 1.5}), vec({-1, -1}), vec({1, 1}))},
      {"entropic/simplex", Regularizer::entropic(), FeasibleRegion::simplex(3)},
  };
}

}  // namespace

TEST_CASE("regularizer values") {
  const auto box = FeasibleRegion::box(vec({0, 0}), vec({5, 5}));
  CHECK_THAT(regularizer_value(Regularizer::euclidean(), PrimalPoint(box, vec({3, 4}))), WithinAbs(12.5, 1e-15));
  const auto simplex = FeasibleRegion::simplex(2);
  CHECK(regularizer_value(Regularizer::entropic(), PrimalPoint(simplex, vec({1, 0}))) == 0.0);
  CHECK_THAT(regularizer_value(Regularizer::entropic(), PrimalPoint(simplex, vec({0.5, 0.5}))),
             WithinAbs(-std::log(2.0), 1e-15));
  CHECK_THROWS_AS(regularizer_value(Regularizer::entropic(), PrimalPoint(box, vec({1, 1}))), UnsupportedError);
}

TEST_CASE("primal points are checked against their region") {
  const auto box = FeasibleRegion::unit_box(2);
  CHECK_THROWS_AS(PrimalPoint(box, vec({1.5, 0})), DomainError);
  CHECK_NOTHROW(PrimalPoint(box, vec({1.0 + 1e-12, 0})));
  CHECK_THROWS_AS(PrimalPoint(FeasibleRegion::simplex(2), vec({0.6, 0.6})), DomainError);
}

TEST_CASE("region construction invariants") {
  CHECK_THROWS_AS(FeasibleRegion::box(vec({0, 1}), vec({1, 1})), DomainError);
  CHECK_THROWS_AS(FeasibleRegion::ball(vec({0, 0}), 0.0), DomainError);
  Matrix A(2, 1);
  A << 1, -1;
  CHECK_THROWS_AS(FeasibleRegion::polytope(A, vec({-1, -1}), vec({-5}), vec({5})), DomainError);
  const auto poly = FeasibleRegion::polytope(A, vec({0.5, 0.5}), vec({-5}), vec({5}));
  CHECK((A * poly.witness() - vec({0.5, 0.5})).maxCoeff() <= 1e-9);
}

TEST_CASE("mirror map examples") {
  const auto x = mirror_map(Regularizer::entropic(), FeasibleRegion::simplex(3), DualVector::zero(3));
  for (int i = 0; i < 3; ++i) CHECK_THAT(x[i], WithinAbs(1.0 / 3.0, 1e-15));
  CHECK(mirror_map(Regularizer::euclidean(), FeasibleRegion::unit_box(2), DualVector(vec({2, -1}))).coords() ==
        vec({1, 0}));
  const Vector s = mirror_map(Regularizer::euclidean(), FeasibleRegion::simplex(2), DualVector(vec({2, 0}))).coords();
  CHECK(s == vec({1, 0}));
  CHECK(oracle::simplex_projection(vec({2, 0})).isApprox(vec({1, 0})));
  CHECK_THROWS_AS(mirror_map(Regularizer::entropic(), FeasibleRegion::unit_box(2), DualVector::zero(2)),
                  UnsupportedError);
}

TEST_CASE("entropic mirror map survives huge scores") {
  const auto x = mirror_map(Regularizer::entropic(), FeasibleRegion::simplex(3), DualVector(vec({1e6, 0, -1e6})));
  CHECK(x.coords().allFinite());
  CHECK(x.coords().sum() == 1.0);
  CHECK(x[0] == 1.0);
}

TEST_CASE("conjugate examples against grid maximization") {
  const auto simplex = FeasibleRegion::simplex(2);
  const double ent = conjugate_value(Regularizer::entropic(), simplex, DualVector::zero(2));
  CHECK_THAT(ent, WithinAbs(std::log(2.0), 1e-12));
  CHECK_THAT(ent, WithinAbs(oracle::grid_conjugate_simplex2(vec({0, 0}), true), 1e-8));

  CHECK(conjugate_value(Regularizer::euclidean(), FeasibleRegion::box(vec({-1}), vec({1})), DualVector(vec({0}))) ==
        0.0);
  const double e = conjugate_value(Regularizer::euclidean(), FeasibleRegion::unit_box(2), DualVector(vec({2, -1})));
  const Vector q = oracle::box_projection(vec({0, 0}), vec({1, 1}), vec({2, -1}));
  CHECK_THAT(e, WithinAbs(vec({2, -1}).dot(q) - 0.5 * q.squaredNorm(), 1e-12));
  CHECK_THAT(e, WithinAbs(1.5, 1e-12));

  CounterRng rng(5);
  for (int k = 0; k < 20; ++k) {
    const Vector y = gaussian(2, rng, 2.0);
    CHECK_THAT(conjugate_value(Regularizer::entropic(), simplex, DualVector(y)),
               WithinAbs(oracle::grid_conjugate_simplex2(y, true), 1e-6));
    CHECK_THAT(conjugate_value(Regularizer::euclidean(), simplex, DualVector(y)),
               WithinAbs(oracle::grid_conjugate_simplex2(y, false), 1e-6));
  }
}

TEST_CASE("Fenchel coupling examples") {
  const auto simplex = FeasibleRegion::simplex(2);
  CHECK_THAT(fenchel_coupling(Regularizer::entropic(), PrimalPoint(simplex, vec({1, 0})), DualVector::zero(2)),
             WithinAbs(std::log(2.0), 1e-12));

  // p = Q(y) is the equality case.
  CounterRng rng(7);
  for (const auto& pr : pairings()) {
    for (int k = 0; k < 50; ++k) {
      const DualVector y(gaussian(pr.region.dim(), rng, 2.0));
      CHECK_THAT(fenchel_coupling(pr.h, mirror_map(pr.h, pr.region, y), y), WithinAbs(0.0, 1e-10));
    }
  }

  // Box [0,1]^2 with y = (-1,-1): Q(y) = (0,0) = p, so the coupling vanishes.
  const auto box = FeasibleRegion::unit_box(2);
  const Vector y = vec({-1, -1});
  const Vector p = vec({0, 0});
  const double brute = 0.5 * p.squaredNorm() + oracle::grid_conjugate_box2(y, 0.0, 1.0) - y.dot(p);
  const double f = fenchel_coupling(Regularizer::euclidean(), PrimalPoint(box, p), DualVector(y));
  CHECK_THAT(brute, WithinAbs(0.0, 1e-12));
  CHECK_THAT(f, WithinAbs(brute, 1e-12));
}

TEST_CASE("dual norms") {
  CHECK(dual_norm(vec({3, 4}), NormKind::L2) == 5.0);
  CHECK(dual_norm(vec({3, -4}), NormKind::L1) == 4.0);
  CHECK(dual_norm(Vector::Zero(3), NormKind::L1) == 0.0);
  CHECK(dual_norm(Vector::Zero(3), NormKind::L2) == 0.0);
}

TEST_CASE("radius bounds") {
  CHECK(radius_bound(FeasibleRegion::simplex(5)) == 1.0);
  CHECK(radius_bound(FeasibleRegion::ball(vec({0, 0, 0}), 2.5)) == 2.5);
  CHECK_THAT(radius_bound(FeasibleRegion::box(vec({-2, -2}), vec({2, 2}))), WithinAbs(2.0 * std::sqrt(2.0), 1e-15));
}

TEST_CASE("Fenchel coupling lower and upper bounds") {
  CounterRng rng(11);
  for (const auto& pr : pairings()) {
    INFO(pr.label);
    const double K = pr.h.strong_convexity();
    const NormKind norm = pr.h.paired_norm();
    for (int k = 0; k < 2000; ++k) {
      const PrimalPoint p(pr.region, pr.region.sample_uniform(rng).value());
      const DualVector y(gaussian(pr.region.dim(), rng, 3.0));
      const DualVector y2(gaussian(pr.region.dim(), rng, 3.0));
      const double f = fenchel_coupling(pr.h, p, y);
      const Vector q = mirror_map(pr.h, pr.region, y).coords();
      CHECK(f - 0.5 * K * std::pow(primal_norm(q - p.coords(), norm), 2) >= -1e-9);
      const Vector dy = y2.coords() - y.coords();
      const double upper = f + dy.dot(q - p.coords()) + std::pow(dual_norm(dy, norm), 2) / (2.0 * K);
      CHECK(fenchel_coupling(pr.h, p, y2) <= upper + 1e-9);
    }
  }
}

TEST_CASE("reciprocity: the coupling vanishes along sequences with Q(y_n) -> p") {
  SECTION("euclidean interior approach") {
    const auto box = FeasibleRegion::unit_box(2);
    const Vector p = vec({0.3, 0.6});
    const Vector anchor = vec({0.9, 0.1});
    double prev = std::numeric_limits<double>::infinity();
    for (int n = 1; n <= 4096; n *= 2) {
      const DualVector y(p + (anchor - p) / n);
      const double f = fenchel_coupling(Regularizer::euclidean(), PrimalPoint(box, p), y);
      CHECK(f < prev);
      prev = f;
    }
    CHECK(prev < 1e-6);
  }
  SECTION("entropic approach to a vertex") {
    const auto simplex = FeasibleRegion::simplex(3);
    const PrimalPoint p(simplex, vec({1, 0, 0}));
    double prev = std::numeric_limits<double>::infinity();
    for (int n = 1; n <= 32; ++n) {
      const double f = fenchel_coupling(Regularizer::entropic(), p, DualVector(vec({double(n), 0, 0})));
      CHECK(f < prev);
      prev = f;
    }
    CHECK(prev < 1e-6);
  }
  SECTION("entropic interior approach") {
    const auto simplex = FeasibleRegion::simplex(3);
    const Vector p = vec({0.2, 0.3, 0.5});
    const Vector shift = vec({0.7, -0.4, 0.1});
    double prev = std::numeric_limits<double>::infinity();
    for (int n = 1; n <= 4096; n *= 2) {
      const DualVector y(Vector(p.array().log()) + shift / n);
      const double f = fenchel_coupling(Regularizer::entropic(), PrimalPoint(simplex, p), y);
      CHECK(f < prev);
      prev = f;
    }
    CHECK(prev < 1e-6);
  }
}

TEST_CASE("mirror map optimality against feasible samples") {
  CounterRng rng(13);
  for (const auto& pr : pairings()) {
    INFO(pr.label);
    for (int k = 0; k < 100; ++k) {
      const DualVector y(gaussian(pr.region.dim(), rng, 2.0));
      const PrimalPoint q = mirror_map(pr.h, pr.region, y);
      const double at_q = y.coords().dot(q.coords()) - regularizer_value(pr.h, q);
      for (int j = 0; j < 50; ++j) {
        const PrimalPoint x(pr.region, pr.region.sample_uniform(rng).value());
        CHECK(at_q - (y.coords().dot(x.coords()) - regularizer_value(pr.h, x)) >= -1e-9);
      }
    }
  }
}

TEST_CASE("projections agree with KKT oracles") {
  CounterRng rng(17);
  SECTION("simplex") {
    for (int k = 0; k < 300; ++k) {
      const Vector y = gaussian(4, rng, 1.5);
      CHECK((project_simplex(y) - oracle::simplex_projection(y)).lpNorm<Eigen::Infinity>() < 1e-12);
    }
  }
  SECTION("box") {
    const auto box = FeasibleRegion::box(vec({-1, 0, 2}), vec({1, 0.5, 3}));
    for (int k = 0; k < 300; ++k) {
      const Vector y = gaussian(3, rng, 3.0);
      CHECK((box.project(y) - oracle::box_projection(vec({-1, 0, 2}), vec({1, 0.5, 3}), y)).lpNorm<Eigen::Infinity>() <
            1e-12);
    }
  }
  SECTION("ball") {
    const Vector c = vec({1, -2});
    const auto ball = FeasibleRegion::ball(c, 0.75);
    for (int k = 0; k < 300; ++k) {
      const Vector y = gaussian(2, rng, 3.0);
      CHECK((ball.project(y) - oracle::ball_projection(c, 0.75, y)).lpNorm<Eigen::Infinity>() < 1e-10);
    }
  }
  SECTION("polytope") {
    Matrix A(3, 2);
    A << 1, 1, -1, 2, 2, -1;
    const Vector b = vec({1.0, 1.5, 1.2});
    const auto poly = FeasibleRegion::polytope(A, b, vec({-1, -1}), vec({1, 1}));
    Matrix G(7, 2);
    G << A, Matrix::Identity(2, 2), -Matrix::Identity(2, 2);
    Vector h(7);
    h << b, 1, 1, 1, 1;
    for (int k = 0; k < 200; ++k) {
      const Vector y = gaussian(2, rng, 2.0);
      const Vector ref = oracle::kkt_projection(G, h, Matrix(0, 2), Vector(0), y);
      CHECK((poly.project(y) - ref).lpNorm<Eigen::Infinity>() < 1e-7);
    }
  }
  SECTION("entropic") {
    const auto simplex = FeasibleRegion::simplex(4);
    for (int k = 0; k < 300; ++k) {
      const Vector y = gaussian(4, rng, 3.0);
      const Vector x = mirror_map(Regularizer::entropic(), simplex, DualVector(y)).coords();
      CHECK((x - oracle::entropic_argmax(y)).lpNorm<Eigen::Infinity>() < 1e-12);
    }
  }
}

TEST_CASE("simplex projection returns exact vertices") {
  const Vector x = project_simplex(vec({3.0, 0.1, -2.0}));
  CHECK(x == vec({1, 0, 0}));
}

TEST_CASE("setwise coupling is the minimum over generators") {
  const auto box = FeasibleRegion::unit_box(2);
  const std::vector<Vector> gens{vec({0, 0}), vec({1, 1})};
  const DualVector y(vec({0.9, 0.8}));
  const double a = fenchel_coupling(Regularizer::euclidean(), PrimalPoint(box, gens[0]), y);
  const double b = fenchel_coupling(Regularizer::euclidean(), PrimalPoint(box, gens[1]), y);
  CHECK(setwise_fenchel(Regularizer::euclidean(), box, gens, y) == std::min(a, b));
}

TEST_CASE("samplers stay inside their regions") {
  CounterRng rng(19);
  for (const auto& pr : pairings()) {
    for (int k = 0; k < 500; ++k) CHECK(pr.region.contains(pr.region.sample_uniform(rng).value()));
  }
}

TEST_CASE("box vertices and polytope vertices") {
  CHECK(FeasibleRegion::unit_box(3).vertices().size() == 8);
  Matrix A(3, 2);
  A << 1, 1, -1, 2, 2, -1;
  const Vector b = vec({1.0, 1.5, 1.2});
  const auto poly = FeasibleRegion::polytope(A, b, vec({-1, -1}), vec({1, 1}));
  Matrix G(7, 2);
  G << A, Matrix::Identity(2, 2), -Matrix::Identity(2, 2);
  Vector h(7);
  h << b, 1, 1, 1, 1;
  const auto ref = oracle::brute_vertices(G, h);
  const auto got = poly.vertices();
  REQUIRE(got.size() == ref.size());
  for (const auto& v : ref) {
    CHECK(std::any_of(got.begin(), got.end(), [&](const Vector& w) { return (v - w).norm() < 1e-9; }));
  }
}

TEST_CASE("counter rng streams are reproducible and split deterministically") {
  CounterRng a(42), b(42);
  for (int i = 0; i < 10; ++i) CHECK(a() == b());
  const CounterRng c = a.split(3);
  const CounterRng d = b.split(3);
  CHECK(c.key() == d.key());
  CHECK(a.split(3).key() != a.split(4).key());
  CounterRng e(42);
  e();
  CHECK(e.counter() == 1);
}
