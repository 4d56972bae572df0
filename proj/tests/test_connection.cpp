#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hesslab/connection.hpp"

using namespace hesslab;

namespace {

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

FnPtr exp_line() {
  return std::make_shared<SeparableSumFn>(std::vector<PiecePtr>{std::make_shared<ExpPiece>(1.0, 1.0)},
                                          BoxDomain::cube(1, 3.0));
}

FnPtr separable_exp_quad() {
  return std::make_shared<SeparableSumFn>(
      std::vector<PiecePtr>{std::make_shared<ExpPiece>(1.0, 1.0), std::make_shared<QuadraticPiece>(1.0)},
      BoxDomain::cube(2, 2.0));
}

FnPtr rotated30() {
  const double pi = 4.0 * std::atan(1.0);
  return std::make_shared<RotatedComposeFn>(rotation2(pi / 6.0), separable_exp_quad());
}

FnPtr skew_exp() {
  return std::make_shared<ExpAffineFn>(std::vector<double>{1.0, 1.0},
                                       std::vector<Vec>{v2(1.0, 0.0), v2(1.0, 1.0)},
                                       BoxDomain::cube(2, 0.6));
}

double lift_error_exp_line(double step) {
  FnPtr f = exp_line();
  SegmentCurve seg(v1(0.0), v1(1.0));
  Mat A0 = Mat::Identity(1, 1);
  LiftOptions opts;
  opts.step = step;
  opts.check_halving = false;
  LiftResult r = horizontal_lift(*f, seg, A0, opts);
  return std::abs(r.final_frame(0, 0) - std::exp(-0.5));
}

}  // namespace

TEST_CASE("exponential line lift matches the closed form") {
  FnPtr f = exp_line();
  SegmentCurve seg(v1(0.0), v1(1.0));
  LiftResult r = horizontal_lift(*f, seg, Mat::Identity(1, 1));

  CHECK(std::abs(r.final_frame(0, 0) - std::exp(-0.5)) < 1e-8);
  // A(t)^2 e^t stays at 1: the frame keeps normalizing the metric
  for (const LiftSample& s : r.samples) {
    CHECK(std::abs(s.A(0, 0) * s.A(0, 0) * std::exp(s.t) - 1.0) < 1e-8);
    CHECK(s.orth_drift < 1e-8);
  }
  CHECK(r.halving_gap < 1e-10);
}

TEST_CASE("halving the step cuts the error by the fourth-order factor") {
  double e1 = lift_error_exp_line(0.1);
  double e2 = lift_error_exp_line(0.05);
  double ratio = e1 / e2;
  CHECK(ratio > 14.0);
  CHECK(ratio < 18.0);
}

TEST_CASE("frame guards") {
  FnPtr f = exp_line();
  SegmentCurve seg(v1(0.0), v1(1.0));

  CHECK_THROWS_WITH_AS(horizontal_lift(*f, seg, 2.0 * Mat::Identity(1, 1)),
                       doctest::Contains("NotOrthonormalFrame"), Error);

  SegmentCurve leaves(v1(0.0), v1(4.0));
  CHECK_THROWS_WITH_AS(horizontal_lift(*f, leaves, Mat::Identity(1, 1)),
                       doctest::Contains("CurveLeavesDomain"), Error);

  LiftOptions coarse;
  coarse.step = 0.5;  // fourth-order error at this step exceeds the halving budget
  CHECK_THROWS_WITH_AS(horizontal_lift(*f, seg, Mat::Identity(1, 1), coarse),
                       doctest::Contains("IntegratorToleranceExceeded"), Error);
}

TEST_CASE("lift preserves orthonormality even off the invariant class") {
  FnPtr f = skew_exp();
  SegmentCurve seg(v2(-0.3, -0.2), v2(0.3, 0.25));
  Mat A0 = orthonormal_frame(f->jet3(seg.point(0.0)).hess);
  LiftResult r = horizontal_lift(*f, seg, A0);
  CHECK(r.max_orth_drift < 1e-7);
  // ...but the orthogonal-column condition drifts away
  CHECK(r.samples.back().c_drift > 1e-4);
}

TEST_CASE("on invariant functions the lift stays in the orthogonal-column set") {
  FnPtr f = rotated30();
  SegmentCurve seg(v2(-1.0, -0.5), v2(0.8, 1.1));
  Mat A0 = orthonormal_frame(f->jet3(seg.point(0.0)).hess);
  CHECK(in_C(A0));
  LiftResult r = horizontal_lift(*f, seg, A0);
  CHECK(r.max_orth_drift < 1e-7);

  // the orthogonal factor of A(t) is frozen; only the column norms move
  CartanFactor start = cartan_factor(r.samples.front().A);
  for (const LiftSample& s : r.samples) {
    CHECK(s.c_drift < 1e-7);
    CartanFactor here = cartan_factor(s.A);
    CHECK(max_abs(Mat(here.B - start.B)) < 1e-6);
  }
  CHECK(max_abs(Mat(cartan_factor(r.final_frame).B - start.B)) < 1e-6);
}

TEST_CASE("polyline and arc lifts stay consistent") {
  FnPtr f = rotated30();
  PolylineCurve poly({v2(-1.0, -0.5), v2(0.2, 0.4), v2(0.8, 1.1)});
  Mat A0 = orthonormal_frame(f->jet3(poly.point(0.0)).hess);
  LiftResult r = horizontal_lift(*f, poly, A0);
  CHECK(r.max_orth_drift < 1e-7);
  CHECK(r.samples.back().c_drift < 1e-7);

  // a quadratic has a flat connection: the frame never moves
  FnPtr q = std::make_shared<QuadraticFn>(2, 1.0);
  CircleArcCurve arc(v2(0.0, 0.0), 1.5, 0.0, 2.0);
  Mat B0 = orthonormal_frame(q->jet3(arc.point(0.0)).hess);
  LiftResult rq = horizontal_lift(*q, arc, B0);
  CHECK(max_abs(Mat(rq.final_frame - B0)) == 0.0);
  CHECK(rq.max_orth_drift < 1e-12);
}

TEST_CASE("tangency residual separates the two classes") {
  FnPtr good = rotated30();
  Vec x = v2(0.3, -0.4);
  Mat A = orthonormal_frame(good->jet3(x).hess);
  CResidual r = property_c_residual(*good, x, A);
  CHECK(r.offdiag < 1e-12);
  CHECK(r.route_gap < 1e-12);

  FnPtr bad = skew_exp();
  Vec y = v2(0.1, -0.1);
  Mat B = orthonormal_frame(bad->jet3(y).hess);
  CResidual rb = property_c_residual(*bad, y, B);
  CHECK(rb.offdiag > 1e-3);
  CHECK(rb.route_gap < 1e-12);

  Mat shear(2, 2);
  shear << 1.0, 0.5, 0.0, 1.0;
  CHECK_THROWS_WITH_AS(property_c_residual(*good, x, Mat(A * shear)), doctest::Contains("NotInC"),
                       Error);
}

TEST_CASE("fiber scan finds a tangent orthogonal-column frame exactly when one exists") {
  FnPtr good = rotated30();
  for (const Vec& x : good->domain().sample(10)) {
    CCheckResult c = property_c_check(*good, x);
    CHECK(c.found);
    CHECK(c.min_residual < 1e-7);
    CHECK(orthonormality_drift(c.frame, good->jet3(x).hess) < 1e-9);
  }

  FnPtr bad = skew_exp();
  for (const Vec& x : bad->domain().sample(10)) {
    CCheckResult c = property_c_check(*bad, x);
    CHECK_FALSE(c.found);
    CHECK(c.min_residual > 1e-3);
  }
}

TEST_CASE("fiber scan in three dimensions") {
  auto inner = std::make_shared<SeparableSumFn>(
      std::vector<PiecePtr>{std::make_shared<ExpPiece>(1.0, 1.0), std::make_shared<ExpPiece>(1.0, 2.0),
                            std::make_shared<QuadraticPiece>(1.0)},
      BoxDomain::cube(3, 1.5));
  auto f = std::make_shared<RotatedComposeFn>(rotation_from_angles(3, {0.3, -0.4, 0.8}), inner);
  Vec x = f->domain().sample(3)[2];
  CCheckResult c = property_c_check(*f, x);
  CHECK(c.found);
  CHECK(c.min_residual < 1e-7);
}

TEST_CASE("characteristic frame recovery on rotated compositions") {
  const double pi = 4.0 * std::atan(1.0);
  for (double theta : {pi / 6.0, pi / 4.0, 1.0}) {
    auto f = std::make_shared<RotatedComposeFn>(rotation2(theta), separable_exp_quad());
    RecoveryResult r = characteristic_recovery(*f, f->domain().sample(100));
    CHECK(r.found);
    double target = std::fmod(theta, pi / 2.0);
    CHECK(std::abs(r.angle - target) < 1e-6);
    CHECK(r.max_offdiag < 1e-8);
  }
}

TEST_CASE("characteristic frame recovery reports NONE off the class") {
  FnPtr f = skew_exp();
  RecoveryResult r = characteristic_recovery(*f, f->domain().sample(100));
  CHECK_FALSE(r.found);
  CHECK(r.max_offdiag > 1e-2);
}

TEST_CASE("characteristic frame recovery in three dimensions") {
  auto inner = std::make_shared<SeparableSumFn>(
      std::vector<PiecePtr>{std::make_shared<ExpPiece>(1.0, 1.0), std::make_shared<ExpPiece>(1.0, 2.0),
                            std::make_shared<QuadraticPiece>(1.0)},
      BoxDomain::cube(3, 1.5));
  Mat R = rotation_from_angles(3, {0.3, -0.4, 0.8});
  auto f = std::make_shared<RotatedComposeFn>(R, inner);
  RecoveryResult r = characteristic_recovery(*f, f->domain().sample(60));
  CHECK(r.found);
  CHECK(r.max_offdiag < 1e-6);
  // recovered columns agree with the true frame up to order and sign
  Mat M = R.transpose() * r.frame;
  for (int c = 0; c < 3; ++c) {
    Vec col = M.col(c).cwiseAbs();
    double top = col.maxCoeff();
    CHECK(top > 1.0 - 1e-5);
  }
}
