#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hesslab/convex.hpp"
#include "hesslab/fd.hpp"
#include "hesslab/matgeo.hpp"

using namespace hesslab;

namespace {

Vec v2(double a, double b) {
  Vec x(2);
  x << a, b;
  return x;
}

void check_against_fd(const ConvexFunction& f, const Vec& x, double rel = 1e-6) {
  Jet3 a = f.jet3(x);
  Jet3 d = finite_difference_jet3(f, x);
  double gs = std::max(1.0, a.grad.cwiseAbs().maxCoeff());
  double hs = std::max(1.0, a.hess.cwiseAbs().maxCoeff());
  double ts = std::max(1.0, a.third.max_abs());
  CHECK((a.grad - d.grad).cwiseAbs().maxCoeff() < rel * gs);
  CHECK((a.hess - d.hess).cwiseAbs().maxCoeff() < rel * hs);
  CHECK((a.third - d.third).max_abs() < rel * ts);
}

}  // namespace

TEST_CASE("quadratic jets are exact") {
  QuadraticFn f(3, 1.5);
  Vec x(3);
  x << 0.3, -1.2, 2.0;
  Jet3 j = f.jet3(x);
  CHECK(j.value == doctest::Approx(1.5 * x.squaredNorm()).epsilon(1e-15));
  CHECK((j.grad - 3.0 * x).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((j.hess - 3.0 * Mat::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(j.third.max_abs() == 0.0);
}

TEST_CASE("separable exponential jets match the closed form and the difference oracle") {
  auto f = SeparableSumFn({std::make_shared<ExpPiece>(1.0, 1.0), std::make_shared<ExpPiece>(0.5, 2.0)},
                          BoxDomain::cube(2, 2.0));
  Vec x = v2(0.4, -0.3);
  Jet3 j = f.jet3(x);
  CHECK(j.value == doctest::Approx(std::exp(0.4) + 0.5 * std::exp(-0.6)).epsilon(1e-14));
  CHECK(j.hess(0, 0) == doctest::Approx(std::exp(0.4)).epsilon(1e-14));
  CHECK(j.hess(1, 1) == doctest::Approx(2.0 * std::exp(-0.6)).epsilon(1e-14));
  CHECK(j.hess(0, 1) == 0.0);
  CHECK(j.third(0, 0, 0) == doctest::Approx(std::exp(0.4)).epsilon(1e-14));
  CHECK(j.third(1, 1, 1) == doctest::Approx(4.0 * std::exp(-0.6)).epsilon(1e-14));
  check_against_fd(f, x);
}

TEST_CASE("sum piece t^4/12 + t^2") {
  SumPiece p({std::make_shared<PowerPiece>(4, 1.0 / 12.0), std::make_shared<QuadraticPiece>(1.0)});
  double t = 0.7;
  Jet1 j = p.jet(t);
  CHECK(j.v == doctest::Approx(std::pow(t, 4) / 12.0 + t * t).epsilon(1e-15));
  CHECK(j.d1 == doctest::Approx(std::pow(t, 3) / 3.0 + 2.0 * t).epsilon(1e-15));
  CHECK(j.d2 == doctest::Approx(t * t + 2.0).epsilon(1e-15));
  CHECK(j.d3 == doctest::Approx(2.0 * t).epsilon(1e-15));
  CHECK(p.min_d2_on_grid() >= 2.0);
}

TEST_CASE("log barrier piece: closed-form jet and domain edge") {
  LogBarrierPiece p(0.0, -1.0);  // alpha = -t, defined for t < 0
  double t = -0.5, alpha = 0.5;
  Jet1 j = p.jet(t);
  CHECK(j.v == doctest::Approx(0.5 * alpha * (std::log(alpha) - 1.0)).epsilon(1e-15));
  CHECK(j.d1 == doctest::Approx(-0.5 * std::log(alpha)).epsilon(1e-15));
  CHECK(j.d2 == doctest::Approx(0.5 / alpha).epsilon(1e-15));
  CHECK(j.d3 == doctest::Approx(0.5 / (alpha * alpha)).epsilon(1e-15));
  CHECK(p.hi() == doctest::Approx(0.0));
  CHECK_THROWS_AS(p.jet(0.5), Error);
}

TEST_CASE("finite differences on a cubic-free function recover zero third order") {
  QuadraticFn f(2, 2.0);
  Jet3 d = finite_difference_jet3(f, v2(0.2, 0.1));
  CHECK(d.third.max_abs() < 1e-9);
  CHECK((d.hess - 4.0 * Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("rotation composition transforms jets tensorially") {
  auto inner = std::make_shared<SeparableSumFn>(
      std::vector<PiecePtr>{std::make_shared<ExpPiece>(1.0, 1.0),
                            std::make_shared<SumPiece>(std::vector<PiecePtr>{
                                std::make_shared<PowerPiece>(4, 1.0 / 12.0),
                                std::make_shared<QuadraticPiece>(1.0)})},
      BoxDomain::cube(2, 3.0));
  Mat R = rotation2(0.6);
  RotatedComposeFn f(R, inner);
  Vec x = v2(0.5, -0.2);
  Jet3 j = f.jet3(x);
  Jet3 in = inner->jet3(R.transpose() * x);
  CHECK((j.grad - R * in.grad).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((j.hess - R * in.hess * R.transpose()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((j.third - in.third.conjugated(R)).max_abs() < 1e-14);
  check_against_fd(f, x);
}

TEST_CASE("composition law H(f o B)(x) = B^T Hf(Bx) B") {
  auto base = std::make_shared<ExpAffineFn>(
      std::vector<double>{1.0, 1.0},
      std::vector<Vec>{v2(1.0, 0.0), v2(1.0, 1.0)}, BoxDomain::cube(2, 2.0));
  Mat B = rotation2(-1.1);
  FnPtr g = compose_rotation(base, B);
  Vec x = v2(0.3, 0.4);
  CHECK((g->hessian(x) - B.transpose() * base->hessian(B * x) * B).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(g->value(x) == doctest::Approx(base->value(B * x)).epsilon(1e-14));
}

TEST_CASE("domain and convexity guards") {
  QuadraticFn f(2, 1.0, BoxDomain::cube(2, 1.0));
  CHECK_THROWS_WITH_AS(static_cast<void>(f.jet3(v2(2.0, 0.0))), doctest::Contains("OutOfDomain"),
                       Error);

  // one exponential term alone has a rank-one Hessian
  ExpAffineFn flat({1.0}, {v2(1.0, 2.0)}, BoxDomain::cube(2, 1.0));
  try {
    flat.jet3(v2(0.1, 0.1));
    FAIL("expected NotConvexHere");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotConvexHere);
  }

  // stencil pokes outside near the boundary even though the point is inside
  Vec near_edge = v2(0.9995, 0.0);
  CHECK(f.domain().contains(near_edge));
  try {
    finite_difference_jet3(f, near_edge);
    FAIL("expected StencilOutOfDomain");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::StencilOutOfDomain);
  }
}

TEST_CASE("sampling is deterministic, in-domain, and fills the request") {
  auto dom = std::make_shared<RotatedDomain>(rotation2(0.5), BoxDomain::cube(2, 1.5));
  auto a = dom->sample(100);
  auto b = dom->sample(100);
  REQUIRE(a.size() == 100);
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i] == b[i]);
    CHECK(dom->contains(a[i]));
  }
}

TEST_CASE("flat bump vanishes to the left and matches differences to the right") {
  CHECK(flat_bump(-1.0).v == 0.0);
  CHECK(flat_bump(0.0).d2 == 0.0);
  CHECK(flat_bump(0.02).v < 1e-20);  // invisible at third-order stencil reach
  double t = 0.4, h = 1e-5;
  Jet1 j = flat_bump(t);
  double d1 = (flat_bump(t + h).v - flat_bump(t - h).v) / (2 * h);
  double d2 = (flat_bump(t + h).d1 - flat_bump(t - h).d1) / (2 * h);
  double d3 = (flat_bump(t + h).d2 - flat_bump(t - h).d2) / (2 * h);
  CHECK(j.d1 == doctest::Approx(d1).epsilon(1e-8));
  CHECK(j.d2 == doctest::Approx(d2).epsilon(1e-8));
  CHECK(j.d3 == doctest::Approx(d3).epsilon(1e-8));
}

TEST_CASE("barrier-glued piece: quadratic below p, consistent quadrature above") {
  BarrierGluedPiece p(1.0, 1.0, 2.0, 0.5);
  CHECK(p.jet(0.7).v == doctest::Approx(0.49).epsilon(1e-15));
  CHECK(p.jet(0.7).d2 == doctest::Approx(2.0).epsilon(1e-15));

  for (double t : {1.2, 1.5, 1.8, 1.95}) {
    Jet1 j = p.jet(t);
    double h = 1e-5;
    double d1 = (p.jet(t + h).v - p.jet(t - h).v) / (2 * h);
    double d2 = (p.jet(t + h).d1 - p.jet(t - h).d1) / (2 * h);
    double d3 = (p.jet(t + h).d2 - p.jet(t - h).d2) / (2 * h);
    CHECK(j.d1 == doctest::Approx(d1).epsilon(1e-7));
    CHECK(j.d2 == doctest::Approx(d2).epsilon(1e-7));
    CHECK(j.d3 == doctest::Approx(d3).epsilon(1e-6));
    CHECK(j.d2 > 0.0);
  }
  CHECK_THROWS_AS(p.jet(2.0), Error);
  // derivative grows without bound toward the wall
  CHECK(p.jet(1.999999).d2 > 1e5);
}

TEST_CASE("conjugate of a quadratic piece is the dual quadratic") {
  auto q = std::make_shared<QuadraticPiece>(1.5);  // 1.5 t^2, conjugate s^2/6
  ConjugatePiece c(q, -4.0, 4.0);
  for (double s : {-3.0, -0.7, 0.0, 1.9}) {
    Jet1 j = c.jet(s);
    CHECK(j.v == doctest::Approx(s * s / 6.0).epsilon(1e-12));
    CHECK(j.d1 == doctest::Approx(s / 3.0).epsilon(1e-12));
    CHECK(j.d2 == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(std::abs(j.d3) < 1e-12);
  }
}

TEST_CASE("conjugate of the log barrier is half a decaying exponential") {
  // (1/2) alpha (log alpha - 1) with alpha = -t has conjugate (1/2) e^{-2s}
  auto barrier = std::make_shared<LogBarrierPiece>(0.0, -1.0);
  ConjugatePiece c(barrier, -40.0, -1e-8);
  for (double s : {0.0, 0.4, 1.1, 2.0}) {
    Jet1 j = c.jet(s);
    CHECK(j.v == doctest::Approx(0.5 * std::exp(-2.0 * s)).epsilon(1e-10));
    CHECK(j.d1 == doctest::Approx(-std::exp(-2.0 * s)).epsilon(1e-10));
    CHECK(j.d2 == doctest::Approx(2.0 * std::exp(-2.0 * s)).epsilon(1e-10));
  }

  // independent oracle: supremum of s t - phi(t) over a fine grid
  for (double s : {0.2, 0.9, 1.7}) {
    double best = -1e300;
    for (int i = 0; i < 200000; ++i) {
      double t = -5.0 + 4.99999 * i / 199999.0;
      best = std::max(best, s * t - barrier->value(t));
    }
    CHECK(c.value(s) == doctest::Approx(best).epsilon(1e-6));
  }
}

TEST_CASE("custom sums add jets of their terms") {
  auto e = std::make_shared<ExpAffineFn>(std::vector<double>{1.0},
                                         std::vector<Vec>{v2(1.0, 2.0)}, BoxDomain::cube(2, 0.6));
  auto q = std::make_shared<QuadraticFn>(2, 1.0);
  CustomSumFn f({e, q}, BoxDomain::cube(2, 0.6));
  Vec x = v2(0.2, -0.1);
  Jet3 j = f.jet3(x);
  double ex = std::exp(0.2 - 0.2);
  CHECK(j.value == doctest::Approx(ex + x.squaredNorm()).epsilon(1e-14));
  CHECK(j.hess(0, 0) == doctest::Approx(ex + 2.0).epsilon(1e-14));
  CHECK(j.hess(0, 1) == doctest::Approx(2.0 * ex).epsilon(1e-14));
  check_against_fd(f, x);
}
