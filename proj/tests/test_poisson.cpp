#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hesslab/handles.hpp"
#include "hesslab/poisson.hpp"

using namespace hesslab;

namespace {

const double kPi = 4.0 * std::atan(1.0);

Vec v1(double a) {
  Vec x(1);
  x << a;
  return x;
}

Vec v2(double a, double b) {
  Vec x(2);
  x << a, b;
  return x;
}

FnPtr quad2() { return std::make_shared<QuadraticFn>(2, 1.0, BoxDomain::cube(2, 2.0)); }

FnPtr sep_exp2() {
  return std::make_shared<SeparableSumFn>(
      std::vector<PiecePtr>{std::make_shared<ExpPiece>(1.0, 1.0), std::make_shared<ExpPiece>(1.0, 1.0)},
      BoxDomain::cube(2, 2.0));
}

FnPtr skew_exp() {
  return std::make_shared<ExpAffineFn>(std::vector<double>{1.0, 1.0},
                                       std::vector<Vec>{v2(1.0, 0.0), v2(1.0, 1.0)},
                                       BoxDomain::cube(2, 0.6));
}

FnPtr exp_quad_mix() {
  std::vector<FnPtr> terms{
      std::make_shared<ExpAffineFn>(std::vector<double>{1.0}, std::vector<Vec>{v2(1.0, 2.0)},
                                    BoxDomain::cube(2, 1.0)),
      std::make_shared<QuadraticFn>(2, 1.0)};
  return std::make_shared<CustomSumFn>(std::move(terms), BoxDomain::cube(2, 1.0));
}

FnPtr exp3() {
  Vec a1(3), a2(3), a3(3);
  a1 << 1.0, 0.0, 0.0;
  a2 << 0.0, 1.0, 1.0;
  a3 << 1.0, 1.0, 0.0;
  return std::make_shared<ExpAffineFn>(std::vector<double>{1.0, 1.0, 1.0},
                                       std::vector<Vec>{a1, a2, a3}, BoxDomain::cube(3, 0.6));
}

HandleFamilyPtr rotated_handle_family() {
  Mat N(5, 2);
  double c30 = std::cos(kPi / 6.0), s30 = std::sin(kPi / 6.0);
  N << -1.0, 0.0, -c30, -s30, 1.0, 0.0, 0.0, 1.0, 0.0, -1.0;
  Handle h;
  h.frame = rotation2(kPi / 6.0);
  h.p = 1.0;
  h.b = 1.5;
  h.face_lo = v1(-0.2);
  h.face_hi = v1(0.2);
  h.profile = std::make_shared<FlatGluedPiece>(1.0, 1.0, 1.0);
  return build_handle_family(N, Vec::Ones(5), 1.0, {h});
}

}  // namespace

TEST_CASE("canonical trivector and quadvector storage is antisymmetric") {
  Trivector t(5);
  CHECK(t.component_count() == 10);
  double fill = 1.0;
  for (int i = 0; i < 5; ++i)
    for (int j = i + 1; j < 5; ++j)
      for (int k = j + 1; k < 5; ++k) t.at_sorted(i, j, k) = fill++;
  // distinct slots: the sum over components must see every value once
  double total = 0.0;
  for (double v : t.raw()) total += v;
  CHECK(total == doctest::Approx(55.0));
  CHECK(t.value(0, 2, 4) == t.at_sorted(0, 2, 4));
  CHECK(t.value(2, 0, 4) == -t.at_sorted(0, 2, 4));
  CHECK(t.value(4, 2, 0) == -t.at_sorted(0, 2, 4));
  CHECK(t.value(4, 0, 2) == t.at_sorted(0, 2, 4));
  CHECK(t.value(1, 1, 3) == 0.0);
  CHECK(Trivector(2).component_count() == 0);
  CHECK(Trivector(2).max_abs() == 0.0);

  Quadvector q(5);
  CHECK(q.component_count() == 5);
  q.at_sorted(0, 1, 2, 3) = 2.0;
  CHECK(q.value(3, 1, 0, 2) == 2.0);   // even permutation
  CHECK(q.value(1, 0, 2, 3) == -2.0);  // odd permutation
  CHECK(q.value(0, 1, 2, 2) == 0.0);
}

TEST_CASE("constant structures bracket to zero exactly") {
  BivectorField pi = standard_bivector(2);
  CHECK(schouten_bracket(pi, pi, v2(0.3, -0.1)).max_abs() == 0.0);

  // an isotropic quadratic produces the standard structure up to scale
  BivectorField p = kahler_bivector(quad2());
  Mat w = p.value(v2(0.4, 0.2));
  CHECK((w.topRightCorner(2, 2) - 0.5 * Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((w + w.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(schouten_bracket(pi, p, v2(0.4, 0.2)).max_abs() == 0.0);

  CHECK_THROWS_AS(
      schouten_bracket(standard_bivector(1), p, v1(0.0)),
      Error);
}

TEST_CASE("separable exponentials invert the Hessian blockwise and commute") {
  FnPtr f = sep_exp2();
  BivectorField pi = standard_bivector(2);
  BivectorField p = kahler_bivector(f);
  for (const Vec& x : f->domain().sample(10)) {
    Mat w = p.value(x);
    CHECK(std::abs(w(0, 2) - std::exp(-x[0])) < 1e-14 * std::exp(-x[0]));
    CHECK(std::abs(w(1, 3) - std::exp(-x[1])) < 1e-14 * std::exp(-x[1]));
    CHECK(w(0, 3) == 0.0);
    CHECK(w(1, 2) == 0.0);
    CHECK(schouten_bracket(pi, p, x).max_abs() == 0.0);
  }
}

TEST_CASE("one exponential over an isotropic quadratic still commutes") {
  // the dyad direction is an eigenvector of the whole Hessian, so the
  // connection matrices stay symmetric and the curl never turns on
  FnPtr f = exp_quad_mix();
  BivectorField pi = standard_bivector(2);
  BivectorField p = kahler_bivector(f);
  for (const Vec& x : f->domain().sample(10)) {
    CHECK(propi_residual(f->jet3(x)).max_abs() < 1e-12);
    CHECK(schouten_bracket(pi, p, x).max_abs() < 1e-12);
  }
}

TEST_CASE("a skew exponential pair matches the curl residual componentwise") {
  FnPtr f = skew_exp();
  BivectorField pi = standard_bivector(2);
  BivectorField p = kahler_bivector(f);
  const int n = 2;

  Trivector b0 = schouten_bracket(pi, p, v2(0.0, 0.0));
  CHECK(b0.max_abs() > 1e-3);

  for (const Vec& x : f->domain().sample(20)) {
    Trivector b = schouten_bracket(pi, p, x);
    Tensor3 r = propi_residual(f->jet3(x));
    double scale = std::max(1.0, r.max_abs());
    for (int i = 0; i < 2 * n; ++i)
      for (int j = i + 1; j < 2 * n; ++j)
        for (int k = j + 1; k < 2 * n; ++k) {
          bool theta_theta_x = i < n && j >= n && k >= n;
          if (theta_theta_x)
            CHECK(std::abs(b.at_sorted(i, j, k) - r(i, j - n, k - n)) < 1e-14 * scale);
          else
            CHECK(b.at_sorted(i, j, k) == 0.0);
        }
  }
}

TEST_CASE("finite-difference coefficients reproduce the analytic bracket") {
  FnPtr f = skew_exp();
  BivectorField pi = standard_bivector(2);
  BivectorField p = kahler_bivector(f);
  for (const Vec& x : f->domain().sample(8)) {
    Trivector a = schouten_bracket(pi, p, x);
    Trivector fd = schouten_bracket_fd(pi, p, x);
    double scale = std::max(1.0, a.max_abs());
    for (size_t c = 0; c < a.raw().size(); ++c)
      CHECK(std::abs(a.raw()[c] - fd.raw()[c]) < 1e-7 * scale);
  }
}

TEST_CASE("raw recomputation agrees with the sign-filled storage") {
  FnPtr f = skew_exp();
  BivectorField pi = standard_bivector(2);
  BivectorField p = kahler_bivector(f);
  Vec x = v2(0.25, -0.3);
  Trivector t = schouten_bracket(pi, p, x);
  double scale = std::max(1.0, t.max_abs());
  int perms[6][3] = {{0, 1, 2}, {1, 0, 2}, {2, 1, 0}, {0, 2, 1}, {1, 2, 0}, {2, 0, 1}};
  int triples[3][3] = {{0, 2, 3}, {1, 2, 3}, {0, 1, 2}};
  for (auto& tr : triples)
    for (auto& pm : perms) {
      int i = tr[pm[0]], j = tr[pm[1]], k = tr[pm[2]];
      CHECK(std::abs(schouten_component_raw(pi, p, x, i, j, k) - t.value(i, j, k)) < 1e-14 * scale);
    }
  CHECK(std::abs(schouten_component_raw(pi, p, x, 1, 1, 3)) < 1e-15);
}

TEST_CASE("rescaling the standard structure rescales the bracket linearly") {
  FnPtr f = skew_exp();
  BivectorField p = kahler_bivector(f);
  BivectorField pi1 = standard_bivector(2);
  BivectorField pis = standard_bivector(2, 2.5);
  for (const Vec& x : f->domain().sample(6)) {
    Trivector b1 = schouten_bracket(pi1, p, x);
    Trivector bs = schouten_bracket(pis, p, x);
    double scale = std::max(1.0, b1.max_abs());
    for (size_t c = 0; c < b1.raw().size(); ++c)
      CHECK(std::abs(bs.raw()[c] - 2.5 * b1.raw()[c]) < 1e-14 * scale);
  }
  // the vanishing set is untouched by the rescale
  FnPtr g = sep_exp2();
  BivectorField pg = kahler_bivector(g);
  CHECK(schouten_bracket(pis, pg, v2(0.3, 0.7)).max_abs() == 0.0);
}

TEST_CASE("the double bracket with the standard structure vanishes") {
  BivectorField pi2 = standard_bivector(2);
  FnPtr f = skew_exp();
  BivectorField p = kahler_bivector(f);
  for (const Vec& x : f->domain().sample(5)) CHECK(jacobi_defect(pi2, p, x) < 1e-8);

  BivectorField pi3 = standard_bivector(3);
  FnPtr g = exp3();
  BivectorField pg = kahler_bivector(g);
  for (const Vec& x : g->domain().sample(2)) CHECK(jacobi_defect(pi3, pg, x) < 1e-8);

  CHECK_THROWS_AS(constant_bivector_trivector_bracket(
                      p, [&](const Vec& y) { return schouten_bracket(pi2, p, y); }, v2(0.0, 0.0)),
                  Error);
}

TEST_CASE("three-dimensional brackets still match the curl componentwise") {
  FnPtr f = exp3();
  BivectorField pi = standard_bivector(3);
  BivectorField p = kahler_bivector(f);
  const int n = 3;
  for (const Vec& x : f->domain().sample(6)) {
    Trivector b = schouten_bracket(pi, p, x);
    Tensor3 r = propi_residual(f->jet3(x));
    CHECK(b.max_abs() > 1e-4);
    double scale = std::max(1.0, r.max_abs());
    for (int i = 0; i < 2 * n; ++i)
      for (int j = i + 1; j < 2 * n; ++j)
        for (int k = j + 1; k < 2 * n; ++k) {
          bool theta_theta_x = i < n && j >= n && k >= n;
          if (theta_theta_x)
            CHECK(std::abs(b.at_sorted(i, j, k) - r(i, j - n, k - n)) < 1e-14 * scale);
          else
            CHECK(b.at_sorted(i, j, k) == 0.0);
        }
  }
}

TEST_CASE("commuting verdicts agree across bracket, potential and conjugate") {
  // commuting families: separable and glued-handle, including samples from
  // both regions of the glued domain
  for (FnPtr f : {sep_exp2(), FnPtr(rotated_handle_family())}) {
    std::vector<Vec> pts;
    for (const Vec& x : f->domain().sample(40)) {
      pts.push_back(x);
      if (pts.size() == 16) break;
    }
    PoissonEquivReport rep = commuting_equiv_check(f, pts);
    REQUIRE(rep.rows.size() == pts.size());
    for (const PoissonRow& r : rep.rows) {
      CHECK(r.class_bracket == Classification::Zero);
      CHECK(r.class_primal == Classification::Zero);
      CHECK(r.class_dual == Classification::Zero);
    }
    CHECK(rep.match_gap < 1e-10);
  }

  // a non-commuting family: all three routes must flag the same points
  FnPtr f = skew_exp();
  std::vector<Vec> pts{v2(0.0, 0.0), v2(0.3, 0.2), v2(-0.4, 0.1), v2(0.2, -0.5), v2(0.5, 0.5)};
  PoissonEquivReport rep = commuting_equiv_check(f, pts);
  for (const PoissonRow& r : rep.rows) {
    CHECK(r.class_bracket == Classification::Nonzero);
    CHECK(r.class_primal == Classification::Nonzero);
    CHECK(r.class_dual == Classification::Nonzero);
    CHECK(r.bracket_max == doctest::Approx(r.primal_residual).epsilon(1e-13));
  }
  CHECK(rep.fitted_constant == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rep.match_gap < 1e-12 * (1.0 + rep.rows.front().primal_residual));
}

TEST_CASE("in one variable every pair commutes structurally") {
  FnPtr f = std::make_shared<SeparableSumFn>(
      std::vector<PiecePtr>{std::make_shared<ExpPiece>(1.0, 1.0)}, BoxDomain::cube(1, 2.0));
  BivectorField pi = standard_bivector(1);
  BivectorField p = kahler_bivector(f);
  Trivector b = schouten_bracket(pi, p, v1(0.4));
  CHECK(b.component_count() == 0);
  CHECK(b.max_abs() == 0.0);

  PoissonEquivReport rep = commuting_equiv_check(f, f->domain().sample(5));
  for (const PoissonRow& r : rep.rows) {
    CHECK(r.bracket_max == 0.0);
    CHECK(r.primal_residual == 0.0);
    CHECK(r.dual_residual == 0.0);
    CHECK(r.class_bracket == Classification::Zero);
  }
}
