#pragma once

#include <utility>
#include <vector>

#include "hesslab/convex.hpp"
#include "hesslab/jet.hpp"
#include "hesslab/sampling.hpp"

namespace hesslab {

// Two-variable jet algebra. For a convex 2D jet the invariant reduces to two
// quadric expressions; an equivalent pair of cubics is tied to them by an
// invertible 2x2 matrix over the convexity region, so either pair vanishes
// exactly when the other does.

inline std::pair<double, double> quadrics(const Jet2& j) {
  double q1 = (j.f22 - j.f11) * j.f112 + j.f12 * (j.f111 - j.f122);
  double q2 = (j.f22 - j.f11) * j.f122 + j.f12 * (j.f112 - j.f222);
  return {q1, q2};
}

// The cubic pair, written out exactly in its published long form; kept
// verbatim as the second, independently coded route.
inline std::pair<double, double> cubics(const Jet2& j) {
  const double chi = j.f11, tau = j.f12, zeta = j.f22;
  const double ups = j.f111, nu = j.f112, om = j.f122, xi = j.f222;
  const double det = chi * zeta - tau * tau;
  double c1 = xi * det - zeta * (nu * zeta + chi * xi - 2.0 * tau * om) + nu * det -
              tau * (ups * zeta + chi * om - 2.0 * tau * nu);
  double c2 = -om * det + tau * (nu * zeta + chi * xi - 2.0 * tau * om) - ups * det +
              chi * (ups * zeta + chi * om - 2.0 * tau * nu);
  return {c1, c2};
}

// Cubics reconstructed from the quadrics through the mediating matrix
// [[-zeta, tau], [tau, -chi]], whose determinant is the Hessian determinant.
inline std::pair<double, double> cubics_from_quadrics(const Jet2& j) {
  auto [q1, q2] = quadrics(j);
  return {-j.f22 * q1 + j.f12 * q2, j.f12 * q1 - j.f11 * q2};
}

// The 2x2 linear system from the equivalence proof: with
//   u = nu*zeta + chi*xi - 2 tau om,   v = ups*zeta + chi*om - 2 tau nu,
// the cubics vanish exactly when (u, v) solves
//   [[zeta, tau], [tau, chi]] (u, v)^T = det * (xi + nu, ups + om)^T.
// Returns the residual of (u, v) against the solved system.
inline std::pair<double, double> cubic_system_residual(const Jet2& j) {
  const double det = j.f11 * j.f22 - j.f12 * j.f12;
  double u = j.f112 * j.f22 + j.f11 * j.f222 - 2.0 * j.f12 * j.f122;
  double v = j.f111 * j.f22 + j.f11 * j.f122 - 2.0 * j.f12 * j.f112;
  Eigen::Matrix2d M;
  M << j.f22, j.f12, j.f12, j.f11;
  Eigen::Vector2d rhs(det * (j.f222 + j.f112), det * (j.f111 + j.f122));
  Eigen::Vector2d solved = M.fullPivLu().solve(rhs);
  return {u - solved[0], v - solved[1]};
}

// Direction [f22 - f11 : f12] in RP^1 whose constancy along the domain is yet
// another reading of the invariant.
inline Eigen::Vector2d slope_vector(const Jet2& j) {
  return {j.f22 - j.f11, j.f12};
}

// Angle of the distinguished eigenframe, in [0, pi/2). At isotropic points
// (f11 = f22, f12 = 0) every direction is characteristic and there is no
// well-defined angle.
inline double characteristic_angle(const Jet2& j, double base_tol = 1e-10) {
  double a = j.f11 - j.f22, b = 2.0 * j.f12;
  if (std::hypot(a, b) < base_tol * (j.f11 + j.f22))
    throw Error(ErrorCode::BasePointHit, "isotropic Hessian: characteristic angle undefined");
  double beta = 0.5 * std::atan2(b, a);
  const double half_pi = std::asin(1.0);
  while (beta < 0.0) beta += half_pi;
  while (beta >= half_pi) beta -= half_pi;
  return beta;
}

struct SlopeCheck {
  double spread = 0.0;               // max pairwise |sin(angle difference)| in RP^1
  std::vector<Eigen::Vector2d> slopes;
};

inline SlopeCheck slope_constancy_check(const ConvexFunction& f, const std::vector<Vec>& points,
                                        double base_tol = 1e-10) {
  if (f.dim() != 2) throw Error(ErrorCode::BadSpec, "slope check is specific to two variables");
  SlopeCheck out;
  for (const Vec& x : points) {
    Jet2 j = Jet2::from_jet3(f.jet3(x));
    Eigen::Vector2d w = slope_vector(j);
    if (w.norm() < base_tol * (j.f11 + j.f22))
      throw Error(ErrorCode::BasePointHit, "isotropic Hessian: slope direction undefined");
    out.slopes.push_back(w.normalized());
  }
  for (size_t i = 0; i < out.slopes.size(); ++i)
    for (size_t k = i + 1; k < out.slopes.size(); ++k) {
      const auto &a = out.slopes[i], &b = out.slopes[k];
      out.spread = std::max(out.spread, std::abs(a.x() * b.y() - a.y() * b.x()));
    }
  return out;
}

// Deterministic stream of convex 2D jets: second-order part rejected into the
// convexity region (with a determinant margin, keeping the mediating matrix
// well conditioned), third-order part free.
inline std::vector<Jet2> sample_convex_jets(int count, double second_box = 2.0,
                                            double third_box = 2.0, double det_margin = 0.05) {
  std::vector<Jet2> jets;
  jets.reserve(count);
  for (long idx = 1; static_cast<int>(jets.size()) < count; ++idx) {
    if (idx > 1000000) throw Error(ErrorCode::BadSpec, "jet sampling failed to fill the request");
    Vec u = halton_point(idx, 7);
    Jet2 j;
    j.f11 = (2.0 * u[0] - 1.0) * second_box;
    j.f12 = (2.0 * u[1] - 1.0) * second_box;
    j.f22 = (2.0 * u[2] - 1.0) * second_box;
    if (!j.convex() || j.f11 * j.f22 - j.f12 * j.f12 < det_margin) continue;
    j.f111 = (2.0 * u[3] - 1.0) * third_box;
    j.f112 = (2.0 * u[4] - 1.0) * third_box;
    j.f122 = (2.0 * u[5] - 1.0) * third_box;
    j.f222 = (2.0 * u[6] - 1.0) * third_box;
    jets.push_back(j);
  }
  return jets;
}

namespace detail {

// Third-order coefficient matrix of a linear jet functional, extracted by
// evaluating on the third-order basis.
template <class F>
Eigen::Matrix<double, 2, 4> third_order_coeffs(const Jet2& base, F&& pair_fn) {
  Jet2 z = base;
  z.f111 = z.f112 = z.f122 = z.f222 = 0.0;
  auto [p0, q0] = pair_fn(z);
  Eigen::Matrix<double, 2, 4> M;
  for (int c = 0; c < 4; ++c) {
    Jet2 e = z;
    (c == 0 ? e.f111 : c == 1 ? e.f112 : c == 2 ? e.f122 : e.f222) = 1.0;
    auto [p, q] = pair_fn(e);
    M(0, c) = p - p0;
    M(1, c) = q - q0;
  }
  return M;
}

}  // namespace detail

// Convex jets whose quadric pair vanishes identically: third-order part drawn
// from the null space of the quadrics' coefficient matrix.
template <class F>
std::vector<Jet2> sample_kernel_jets(int count, F&& pair_fn, double second_box = 2.0,
                                     double det_margin = 0.05) {
  std::vector<Jet2> jets;
  jets.reserve(count);
  for (long idx = 1; static_cast<int>(jets.size()) < count; ++idx) {
    if (idx > 1000000) throw Error(ErrorCode::BadSpec, "jet sampling failed to fill the request");
    Vec u = halton_point(idx, 5);
    Jet2 j;
    j.f11 = (2.0 * u[0] - 1.0) * second_box;
    j.f12 = (2.0 * u[1] - 1.0) * second_box;
    j.f22 = (2.0 * u[2] - 1.0) * second_box;
    if (!j.convex() || j.f11 * j.f22 - j.f12 * j.f12 < det_margin) continue;
    Eigen::Matrix<double, 2, 4> M = detail::third_order_coeffs(j, pair_fn);
    Eigen::FullPivLU<Eigen::Matrix<double, 2, 4>> lu(M);
    lu.setThreshold(1e-10);
    Eigen::MatrixXd K = lu.kernel();
    if (K.cols() < 2) continue;  // degenerate coefficient matrix; skip
    Eigen::VectorXd y =
        K.col(0).normalized() * (2.0 * u[3] - 1.0) + K.col(1).normalized() * (2.0 * u[4] - 1.0);
    j.f111 = y[0];
    j.f112 = y[1];
    j.f122 = y[2];
    j.f222 = y[3];
    jets.push_back(j);
  }
  return jets;
}

}  // namespace hesslab
