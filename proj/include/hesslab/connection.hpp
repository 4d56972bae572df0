#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "hesslab/convex.hpp"
#include "hesslab/matgeo.hpp"
#include "hesslab/propi.hpp"

namespace hesslab {

// Frames A with A^T H A = I form a bundle over the domain; a curve downstairs
// lifts horizontally through A' = -(1/2) (sum_k v_k Gamma_k) A. The factor
// 1/2 is forced by the metric: in one variable with H = e^x the lift along
// x(t) = t is A(t) = A(0) e^{-t/2}, which is what keeps A^2 e^x constant.

class Curve {
 public:
  virtual ~Curve() = default;
  virtual int dim() const = 0;
  virtual Vec point(double t) const = 0;
  virtual Vec velocity(double t) const = 0;
  // smooth parameter ranges covering [0, 1]
  virtual std::vector<std::pair<double, double>> pieces() const { return {{0.0, 1.0}}; }
  // velocity as seen from inside one smooth piece; at a shared endpoint the
  // two pieces may disagree and the integrator needs the one it is in
  virtual Vec piece_velocity(size_t piece, double t) const {
    (void)piece;
    return velocity(t);
  }
};

using CurvePtr = std::shared_ptr<const Curve>;

class SegmentCurve final : public Curve {
 public:
  SegmentCurve(Vec from, Vec to) : a_(std::move(from)), b_(std::move(to)) {}
  int dim() const override { return static_cast<int>(a_.size()); }
  Vec point(double t) const override { return a_ + t * (b_ - a_); }
  Vec velocity(double) const override { return b_ - a_; }

 private:
  Vec a_, b_;
};

class PolylineCurve final : public Curve {
 public:
  explicit PolylineCurve(std::vector<Vec> knots) : knots_(std::move(knots)) {
    if (knots_.size() < 2) throw Error(ErrorCode::BadSpec, "polyline needs at least two knots");
  }
  int dim() const override { return static_cast<int>(knots_[0].size()); }
  Vec point(double t) const override {
    auto [seg, s] = locate(t);
    return knots_[seg] + s * (knots_[seg + 1] - knots_[seg]);
  }
  Vec velocity(double t) const override {
    auto [seg, s] = locate(t);
    (void)s;
    return (knots_[seg + 1] - knots_[seg]) * static_cast<double>(knots_.size() - 1);
  }
  std::vector<std::pair<double, double>> pieces() const override {
    std::vector<std::pair<double, double>> ps;
    size_t m = knots_.size() - 1;
    for (size_t i = 0; i < m; ++i)
      ps.emplace_back(static_cast<double>(i) / m, static_cast<double>(i + 1) / m);
    return ps;
  }
  Vec piece_velocity(size_t piece, double) const override {
    return (knots_[piece + 1] - knots_[piece]) * static_cast<double>(knots_.size() - 1);
  }

 private:
  std::pair<size_t, double> locate(double t) const {
    size_t m = knots_.size() - 1;
    double u = std::clamp(t, 0.0, 1.0) * m;
    size_t seg = std::min(static_cast<size_t>(u), m - 1);
    return {seg, u - seg};
  }
  std::vector<Vec> knots_;
};

// planar arc in the (0,1) coordinate plane; higher coordinates constant
class CircleArcCurve final : public Curve {
 public:
  CircleArcCurve(Vec center, double radius, double from_angle, double to_angle)
      : c_(std::move(center)), r_(radius), a0_(from_angle), a1_(to_angle) {
    if (c_.size() < 2) throw Error(ErrorCode::BadSpec, "arc needs dimension at least 2");
  }
  int dim() const override { return static_cast<int>(c_.size()); }
  Vec point(double t) const override {
    double a = a0_ + t * (a1_ - a0_);
    Vec p = c_;
    p[0] += r_ * std::cos(a);
    p[1] += r_ * std::sin(a);
    return p;
  }
  Vec velocity(double t) const override {
    double a = a0_ + t * (a1_ - a0_);
    Vec v = Vec::Zero(c_.size());
    v[0] = -r_ * std::sin(a) * (a1_ - a0_);
    v[1] = r_ * std::cos(a) * (a1_ - a0_);
    return v;
  }

 private:
  Vec c_;
  double r_, a0_, a1_;
};

// A = E D^{-1/2}: the deterministic orthonormal frame with orthogonal
// columns; right-multiplying by R in SO(n) walks the fiber.
inline Mat orthonormal_frame(const Mat& H) {
  EigenFrame f = deterministic_eigenframe(H);
  if (f.evals.minCoeff() <= 0.0)
    throw Error(ErrorCode::NotConvexHere, "frame requested for a non-definite matrix");
  return f.B * f.evals.cwiseSqrt().cwiseInverse().asDiagonal();
}

inline double orthonormality_drift(const Mat& A, const Mat& H) {
  return max_abs(Mat(A.transpose() * H * A - Mat::Identity(A.rows(), A.cols())));
}

struct LiftOptions {
  double step = 1e-3;
  double orthonormal_tol = 1e-9;  // on the initial frame
  bool check_halving = true;
  double halving_tol = 1e-8;  // allowed final-frame gap between h and h/2
  int record_stride = 1;      // keep every record_stride-th step in samples
};

struct LiftSample {
  double t;
  Mat A;
  double orth_drift;  // |A^T H A - I|
  double c_drift;     // scaled off-diagonal part of A^T A
};

struct LiftResult {
  std::vector<LiftSample> samples;
  Mat final_frame;
  double max_orth_drift = 0.0;
  double halving_gap = 0.0;
};

namespace detail {

inline Mat lift_rhs(const ConvexFunction& f, const Curve& curve, size_t piece, double t,
                    const Mat& A) {
  Vec x = curve.point(t);
  Jet3 j;
  try {
    j = f.jet3(x);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::OutOfDomain)
      throw Error(ErrorCode::CurveLeavesDomain, "curve left the domain during integration");
    throw;
  }
  Vec v = curve.piece_velocity(piece, t);
  Mat S = Mat::Zero(f.dim(), f.dim());
  auto gam = christoffel(j);
  for (int k = 0; k < f.dim(); ++k) S += v[k] * gam[k];
  return -0.5 * S * A;
}

inline Mat integrate_lift(const ConvexFunction& f, const Curve& curve, Mat A, double step,
                          const std::function<void(double, const Mat&)>& on_step) {
  auto pieces = curve.pieces();
  for (size_t pi = 0; pi < pieces.size(); ++pi) {
    auto [t0, t1] = pieces[pi];
    int m = std::max(1, static_cast<int>(std::ceil((t1 - t0) / step)));
    double h = (t1 - t0) / m;
    double t = t0;
    for (int i = 0; i < m; ++i) {
      Mat k1 = lift_rhs(f, curve, pi, t, A);
      Mat k2 = lift_rhs(f, curve, pi, t + 0.5 * h, A + 0.5 * h * k1);
      Mat k3 = lift_rhs(f, curve, pi, t + 0.5 * h, A + 0.5 * h * k2);
      Mat k4 = lift_rhs(f, curve, pi, t + h, A + h * k3);
      A += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      t = t0 + (i + 1) * (t1 - t0) / m;
      if (on_step) on_step(t, A);
    }
  }
  return A;
}

}  // namespace detail

inline LiftResult horizontal_lift(const ConvexFunction& f, const Curve& curve, const Mat& A0,
                                  LiftOptions opts = {}) {
  if (curve.dim() != f.dim()) throw Error(ErrorCode::BadSpec, "curve and function dimensions differ");
  Mat H0 = f.jet3(curve.point(0.0)).hess;
  if (orthonormality_drift(A0, H0) > opts.orthonormal_tol)
    throw Error(ErrorCode::NotOrthonormalFrame, "initial frame is not orthonormal for the metric");

  LiftResult out;
  auto record = [&](double t, const Mat& A) {
    Mat H = f.jet3(curve.point(t)).hess;
    double od = orthonormality_drift(A, H);
    out.max_orth_drift = std::max(out.max_orth_drift, od);
    out.samples.push_back({t, A, od, column_orthogonality_defect(A)});
  };
  record(0.0, A0);

  int count = 0;
  Mat fin = detail::integrate_lift(f, curve, A0, opts.step, [&](double t, const Mat& A) {
    if (++count % opts.record_stride == 0) record(t, A);
  });
  out.final_frame = fin;
  if (out.samples.back().t != 1.0) record(1.0, fin);

  if (opts.check_halving) {
    Mat fin2 = detail::integrate_lift(f, curve, A0, opts.step / 2.0, nullptr);
    out.halving_gap = max_abs(Mat(fin - fin2));
    if (out.halving_gap > opts.halving_tol)
      throw Error(ErrorCode::IntegratorToleranceExceeded,
                  "halving the step moved the final frame by more than the tolerance");
  }
  return out;
}

// Tangency obstruction of the orthogonal-column condition along a frame A in
// the fiber: M_k = A^T Gamma_k^T A + A^T Gamma_k A must be diagonal. The
// reduced form q N_k + N_k q with N_k = A^T H_,k A and q = A^T A is the same
// quantity reached by different arithmetic; both are computed and their gap
// is part of the result.
struct CResidual {
  double offdiag = 0.0;    // scaled off-diagonal mass, max over k
  double route_gap = 0.0;  // direct vs reduced evaluation
};

inline CResidual property_c_residual(const Jet3& j, const Mat& A, double in_c_tol = 1e-9) {
  if (column_orthogonality_defect(A) > in_c_tol)
    throw Error(ErrorCode::NotInC, "frame does not have orthogonal columns");
  const int n = j.dim();
  auto gam = christoffel(j);
  Mat q = A.transpose() * A;
  CResidual r;
  double scale = 0.0;
  std::vector<Mat> direct(n);
  for (int k = 0; k < n; ++k) {
    direct[k] = A.transpose() * gam[k].transpose() * A + A.transpose() * gam[k] * A;
    Mat Nk = A.transpose() * j.third.slice(k) * A;
    Mat reduced = q * Nk + Nk * q;
    r.route_gap = std::max(r.route_gap, max_abs(Mat(direct[k] - reduced)));
    scale = std::max(scale, max_abs(direct[k]));
  }
  if (scale == 0.0) return r;
  for (int k = 0; k < n; ++k)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        if (a != b) r.offdiag = std::max(r.offdiag, std::abs(direct[k](a, b)) / scale);
  r.route_gap /= scale;
  return r;
}

inline CResidual property_c_residual(const ConvexFunction& f, const Vec& x, const Mat& A) {
  return property_c_residual(f.jet3(x), A);
}

struct CCheckOptions {
  int angular_samples = 2000;  // n = 2 coarse fiber scan
  int refine_steps = 30;
  int grid3 = 16;  // n = 3 coarse grid per Euler angle
  double found_tol = 1e-7;
};

struct CCheckResult {
  bool found = false;
  double min_residual = 0.0;
  Mat frame;           // best frame in the fiber
  double angle = 0.0;  // n = 2: fiber angle of the best frame
};

// Scan the orthonormal-frame fiber at x for a member with orthogonal columns
// whose tangency obstruction vanishes; combined score is the max of the
// column-orthogonality defect and the (guard-free) tangency off-diagonal.
inline CCheckResult property_c_check(const ConvexFunction& f, const Vec& x,
                                     CCheckOptions opts = {}) {
  Jet3 j = f.jet3(x);
  const int n = j.dim();
  Mat base = orthonormal_frame(j.hess);
  auto gam = christoffel(j);

  auto score = [&](const Mat& A) {
    double s = column_orthogonality_defect(A);
    double scale = 0.0, off = 0.0;
    for (int k = 0; k < n; ++k) {
      Mat M = A.transpose() * gam[k].transpose() * A + A.transpose() * gam[k] * A;
      scale = std::max(scale, max_abs(M));
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          if (a != b) off = std::max(off, std::abs(M(a, b)));
    }
    if (scale > 0.0) s = std::max(s, off / scale);
    return s;
  };

  CCheckResult best;
  best.min_residual = std::numeric_limits<double>::infinity();
  auto consider = [&](const Mat& R, double ang) {
    Mat A = base * R;
    double s = score(A);
    if (s < best.min_residual) {
      best.min_residual = s;
      best.frame = A;
      best.angle = ang;
    }
  };

  if (n == 2) {
    const double period = 2.0 * std::asin(1.0) / 2.0;  // pi/2: fiber scores repeat
    for (int i = 0; i < opts.angular_samples; ++i) {
      double th = period * i / opts.angular_samples;
      consider(rotation2(th), th);
    }
    double lo = best.angle - period / opts.angular_samples;
    double hi = best.angle + period / opts.angular_samples;
    for (int i = 0; i < opts.refine_steps; ++i) {  // ternary refinement
      double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
      Mat A1 = base * rotation2(m1), A2 = base * rotation2(m2);
      if (score(A1) < score(A2))
        hi = m2;
      else
        lo = m1;
    }
    consider(rotation2(0.5 * (lo + hi)), 0.5 * (lo + hi));
  } else if (n == 3) {
    const double period = 2.0 * std::asin(1.0);  // pi
    std::vector<double> ang = {0.0, 0.0, 0.0};
    for (int i = 0; i < opts.grid3; ++i)
      for (int k = 0; k < opts.grid3; ++k)
        for (int l = 0; l < opts.grid3; ++l)
          consider(rotation_from_angles(
                       3, {period * i / opts.grid3, period * k / opts.grid3, period * l / opts.grid3}),
                   0.0);
    // coordinate descent around the best grid point
    Mat R0 = base.fullPivLu().solve(best.frame);  // recover best rotation
    for (int round = 0; round < 4; ++round) {
      for (int axis = 0; axis < 3; ++axis) {
        double lo = -period / opts.grid3, hi = period / opts.grid3;
        for (int it = 0; it < 40; ++it) {
          double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
          std::vector<double> a1 = {0, 0, 0}, a2 = {0, 0, 0};
          a1[axis] = m1;
          a2[axis] = m2;
          if (score(base * R0 * rotation_from_angles(3, a1)) <
              score(base * R0 * rotation_from_angles(3, a2)))
            hi = m2;
          else
            lo = m1;
        }
        std::vector<double> a = {0, 0, 0};
        a[axis] = 0.5 * (lo + hi);
        R0 = R0 * rotation_from_angles(3, a);
      }
    }
    consider(R0, 0.0);
  } else {
    consider(Mat::Identity(n, n), 0.0);  // eigenframe-only for higher n
  }

  best.found = best.min_residual < opts.found_tol;
  return best;
}

struct RecoveryOptions {
  int angular_samples = 2000;
  int descent_rounds = 5;
  double found_tol = 1e-6;
};

struct RecoveryResult {
  bool found = false;
  double max_offdiag = 0.0;  // of B^T H B over all samples, scaled, at the best frame
  Mat frame;
  double angle = 0.0;  // n = 2
};

// Search SO(n) for one frame that diagonalizes the Hessian at every sample
// point simultaneously; reports NONE (found = false) when no frame gets the
// worst-case off-diagonal mass below tolerance.
inline RecoveryResult characteristic_recovery(const ConvexFunction& f,
                                              const std::vector<Vec>& points,
                                              RecoveryOptions opts = {}) {
  if (points.empty()) throw Error(ErrorCode::BadSpec, "recovery needs sample points");
  const int n = f.dim();
  std::vector<Mat> hs;
  hs.reserve(points.size());
  for (const Vec& x : points) hs.push_back(f.jet3(x).hess);

  auto score = [&](const Mat& B) {
    double worst = 0.0;
    for (const Mat& H : hs) {
      Mat D = B.transpose() * H * B;
      double scale = max_abs(D);
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          if (a != b) worst = std::max(worst, std::abs(D(a, b)) / scale);
    }
    return worst;
  };

  RecoveryResult best;
  best.max_offdiag = std::numeric_limits<double>::infinity();
  auto consider = [&](const Mat& B, double ang) {
    double s = score(B);
    if (s < best.max_offdiag) {
      best.max_offdiag = s;
      best.frame = B;
      best.angle = ang;
    }
  };

  if (n == 2) {
    const double period = std::asin(1.0);  // pi/2
    for (int i = 0; i < opts.angular_samples; ++i) {
      double th = period * i / opts.angular_samples;
      consider(rotation2(th), th);
    }
    double lo = best.angle - period / opts.angular_samples;
    double hi = best.angle + period / opts.angular_samples;
    for (int i = 0; i < 60; ++i) {
      double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
      if (score(rotation2(m1)) < score(rotation2(m2)))
        hi = m2;
      else
        lo = m1;
    }
    double th = 0.5 * (lo + hi);
    const double half_pi = std::asin(1.0);
    while (th < 0.0) th += half_pi;
    while (th >= half_pi) th -= half_pi;
    consider(rotation2(th), th);
  } else {
    // start from per-sample eigenframes, then coordinate descent on the
    // Givens angles (n = 3); for larger n the eigenframe candidates stand
    for (const Mat& H : hs) consider(deterministic_eigenframe(H).B, 0.0);
    if (n == 3) {
      Mat B = best.frame;
      const double period = 2.0 * std::asin(1.0);
      for (int round = 0; round < opts.descent_rounds; ++round) {
        for (int axis = 0; axis < 3; ++axis) {
          double lo = -period / 8.0, hi = period / 8.0;
          for (int it = 0; it < 50; ++it) {
            double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
            std::vector<double> a1 = {0, 0, 0}, a2 = {0, 0, 0};
            a1[axis] = m1;
            a2[axis] = m2;
            if (score(B * rotation_from_angles(3, a1)) < score(B * rotation_from_angles(3, a2)))
              hi = m2;
            else
              lo = m1;
          }
          std::vector<double> a = {0, 0, 0};
          a[axis] = 0.5 * (lo + hi);
          B = B * rotation_from_angles(3, a);
        }
      }
      consider(B, 0.0);
    }
  }

  best.found = best.max_offdiag < opts.found_tol;
  return best;
}

}  // namespace hesslab
