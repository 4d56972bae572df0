#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hesslab/propi.hpp"

using namespace hesslab;

namespace {

Vec v2(double a, double b) {
  Vec x(2);
  x << a, b;
  return x;
}

FnPtr separable_exp_power() {
  return std::make_shared<SeparableSumFn>(
      std::vector<PiecePtr>{std::make_shared<ExpPiece>(1.0, 1.0),
                            std::make_shared<SumPiece>(std::vector<PiecePtr>{
                                std::make_shared<PowerPiece>(4, 1.0 / 12.0),
                                std::make_shared<QuadraticPiece>(1.0)})},
      BoxDomain::cube(2, 2.0));
}

// two exponential terms along non-orthogonal directions: the Hessian
// derivatives do not commute, so the invariant fails with a healthy margin
FnPtr skew_exp() {
  return std::make_shared<ExpAffineFn>(std::vector<double>{1.0, 1.0},
                                       std::vector<Vec>{v2(1.0, 0.0), v2(1.0, 1.0)},
                                       BoxDomain::cube(2, 0.6));
}

}  // namespace

TEST_CASE("separable functions satisfy the invariant on all routes") {
  FnPtr f = separable_exp_power();
  for (const Vec& x : f->domain().sample(50)) {
    Jet3 j = f->jet3(x);
    double scale = max_abs(hess_inverse(j));
    CHECK(propi_residual(j).max_abs() < 1e-13);
    CHECK(symmetry_defect(j) < 1e-13 * scale);
    CHECK(commutator_defect(j) < 1e-13 * scale);
    CHECK(cartan_subalgebra_check(j).residual < 1e-12);
  }
}

TEST_CASE("rotated separable functions still satisfy the invariant") {
  auto f = std::make_shared<RotatedComposeFn>(rotation2(0.7), separable_exp_power());
  for (const Vec& x : f->domain().sample(50)) {
    Jet3 j = f->jet3(x);
    CHECK(propi_residual(j).max_abs() < 1e-12);
    CHECK(symmetry_defect(j) < 1e-12 * max_abs(hess_inverse(j)));
  }
}

TEST_CASE("skew exponential pair fails the invariant with margin") {
  FnPtr f = skew_exp();
  double min_R = 1e300, min_defect = 1e300;
  for (const Vec& x : f->domain().sample(200)) {
    Jet3 j = f->jet3(x);
    min_R = std::min(min_R, propi_residual(j).max_abs());
    min_defect = std::min(min_defect, symmetry_defect(j) / max_abs(hess_inverse(j)));
  }
  CHECK(min_R > 1e-3);
  CHECK(min_defect > 1e-3);
}

TEST_CASE("analytic residual matches the finite-difference residual") {
  FnPtr f = skew_exp();
  for (const Vec& x : f->domain().sample(10, 0.55)) {
    Tensor3 a = propi_residual(*f, x);
    Tensor3 d = fd_propi_residual(*f, x);
    CHECK((a - d).max_abs() < 1e-8 * std::max(1.0, a.max_abs()));
  }

  FnPtr g = separable_exp_power();
  for (const Vec& x : g->domain().sample(10, 1.9)) {
    CHECK(fd_propi_residual(*g, x).max_abs() < 1e-9);
  }
}

TEST_CASE("residual transforms tensorially under rotation") {
  FnPtr f = skew_exp();
  Mat B = rotation2(0.9);
  FnPtr g = compose_rotation(f, B);
  for (const Vec& y : g->domain().sample(20, 0.55)) {
    Tensor3 Rg = propi_residual(*g, y);
    Tensor3 Rf = propi_residual(*f, B * y);
    CHECK((Rg - Rf.conjugated(B.transpose())).max_abs() < 1e-13);
  }
}

TEST_CASE("connection matrices: symmetric exactly for separable, skew part matches commutator") {
  FnPtr f = skew_exp();
  Vec x = v2(0.0, 0.0);
  Jet3 j = f->jet3(x);
  auto gam = christoffel(j);
  REQUIRE(gam.size() == 2);
  Mat hinv = hess_inverse(j);
  for (int k = 0; k < 2; ++k) {
    Mat skew = gam[k] - gam[k].transpose();
    Mat comm = hinv * j.third.slice(k) - j.third.slice(k) * hinv;
    CHECK((skew - comm).cwiseAbs().maxCoeff() < 1e-13);
  }
  // frozen hand computation at the origin: H = [[2,1],[1,1]], H_,2 = [[1,1],[1,1]],
  // Gamma_2 = [[0,0],[1,1]]
  CHECK(gam[1](0, 0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(gam[1](1, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(gam[1](1, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(gam[1](0, 1)) < 1e-12);
}

TEST_CASE("shared eigenframe exists exactly for the invariant functions") {
  auto rot = std::make_shared<RotatedComposeFn>(rotation2(0.5), separable_exp_power());
  for (const Vec& x : rot->domain().sample(20)) {
    CHECK(cartan_subalgebra_check(rot->jet3(x)).residual < 1e-12);
  }
  FnPtr f = skew_exp();
  double worst = 0.0;
  for (const Vec& x : f->domain().sample(20)) {
    worst = std::max(worst, cartan_subalgebra_check(f->jet3(x)).residual);
  }
  CHECK(worst > 1e-3);
}

TEST_CASE("equivalence sweep classifies coherently") {
  FnPtr sep = separable_exp_power();
  auto rows = symmetry_equiv_check(*sep, sep->domain().sample(200));
  REQUIRE(rows.size() == 200);
  for (const auto& r : rows) {
    CHECK(classes_agree(r));
    CHECK(r.class_R == Classification::Zero);
  }

  FnPtr f = skew_exp();
  auto rows2 = symmetry_equiv_check(*f, f->domain().sample(200));
  for (const auto& r : rows2) {
    CHECK(classes_agree(r));
    CHECK(r.class_R == Classification::Nonzero);
  }
}

TEST_CASE("quadratic: fully degenerate eigenvalues still give a clean frame") {
  QuadraticFn f(3, 1.0);
  Vec x(3);
  x << 0.1, 0.2, -0.3;
  CHECK(cartan_subalgebra_check(f.jet3(x)).residual == 0.0);
  CHECK(propi_residual(f.jet3(x)).max_abs() == 0.0);
}
