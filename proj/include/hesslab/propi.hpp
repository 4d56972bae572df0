#pragma once

#include <vector>

#include "hesslab/convex.hpp"
#include "hesslab/fd.hpp"
#include "hesslab/matgeo.hpp"

namespace hesslab {

// The central invariant: the inverse Hessian field of phi is itself a Hessian
// exactly when the curl-type residual
//   R[i][j][k] = d_k (H^-1)_ij - d_j (H^-1)_ik
// vanishes. Derivatives of the inverse are taken analytically,
//   d_k (H^-1) = -H^-1 H_,k H^-1,
// never by differencing the inverse. Equivalent formulations (symmetry of the
// connection matrices, commutation with the inverse, a shared eigenframe) are
// computed along separate arithmetic paths and must classify identically.

enum class Classification { Zero, Nonzero, Indeterminate };

inline const char* classification_name(Classification c) {
  switch (c) {
    case Classification::Zero: return "ZERO";
    case Classification::Nonzero: return "NONZERO";
    case Classification::Indeterminate: return "INDETERMINATE";
  }
  return "?";
}

struct Tolerances {
  double zero = 1e-9;     // below: numerically zero
  double nonzero = 1e-3;  // above: structurally nonzero
};

inline Classification classify(double value, double scale, Tolerances tol = {}) {
  double s = std::max(scale, 1e-300);
  if (value < tol.zero * s) return Classification::Zero;
  if (value > tol.nonzero * s) return Classification::Nonzero;
  return Classification::Indeterminate;
}

inline double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

// Gamma_k = H^-1 H_,k (one LLT of H shared across k).
inline std::vector<Mat> christoffel(const Jet3& j) {
  const int n = j.dim();
  Eigen::LLT<Mat> llt(j.hess);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorCode::NotConvexHere, "Hessian not positive definite");
  std::vector<Mat> gam;
  gam.reserve(n);
  for (int k = 0; k < n; ++k) gam.push_back(llt.solve(j.third.slice(k)));
  return gam;
}

inline std::vector<Mat> christoffel(const ConvexFunction& f, const Vec& x) {
  return christoffel(f.jet3(x));
}

inline Mat hess_inverse(const Jet3& j) {
  Eigen::LLT<Mat> llt(j.hess);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorCode::NotConvexHere, "Hessian not positive definite");
  return llt.solve(Mat::Identity(j.dim(), j.dim()));
}

inline Tensor3 propi_residual(const Jet3& j) {
  const int n = j.dim();
  Mat hinv = hess_inverse(j);
  std::vector<Mat> dinv(n);  // d_k(H^-1) = -H^-1 H_,k H^-1
  for (int k = 0; k < n; ++k) dinv[k] = -hinv * j.third.slice(k) * hinv;
  Tensor3 R(n);
  for (int i = 0; i < n; ++i)
    for (int jj = 0; jj < n; ++jj)
      for (int k = 0; k < n; ++k) R(i, jj, k) = dinv[k](i, jj) - dinv[jj](i, k);
  return R;
}

inline Tensor3 propi_residual(const ConvexFunction& f, const Vec& x) {
  return propi_residual(f.jet3(x));
}

// Same residual with the derivative of the inverse-Hessian field taken by
// central finite differences; the independent oracle route.
inline Tensor3 fd_propi_residual(const ConvexFunction& f, const Vec& x, double h = 1e-3) {
  const int n = f.dim();
  auto field = [&](const Vec& p) { return hess_inverse(f.jet3(p)); };
  std::vector<Mat> dinv(n);
  for (int k = 0; k < n; ++k) dinv[k] = fd_matrix_derivative(field, x, k, h);
  Tensor3 R(n);
  for (int i = 0; i < n; ++i)
    for (int jj = 0; jj < n; ++jj)
      for (int k = 0; k < n; ++k) R(i, jj, k) = dinv[k](i, jj) - dinv[jj](i, k);
  return R;
}

// max_k of the antisymmetric part Gamma_k - Gamma_k^T.
inline double symmetry_defect(const Jet3& j) {
  double m = 0.0;
  for (const Mat& g : christoffel(j)) m = std::max(m, max_abs(Mat(g - g.transpose())));
  return m;
}

// max_k of the commutator H^-1 H_,k - H_,k H^-1, multiplied out along its own
// arithmetic path rather than transposing Gamma_k.
inline double commutator_defect(const Jet3& j) {
  Mat hinv = hess_inverse(j);
  double m = 0.0;
  for (int k = 0; k < j.dim(); ++k) {
    Mat t = j.third.slice(k);
    m = std::max(m, max_abs(Mat(hinv * t - t * hinv)));
  }
  return m;
}

struct CartanCheck {
  double residual = 0.0;  // max scaled off-diagonal entry in the joint frame
  Mat frame;              // candidate common eigenframe
};

// Do H and all H_,k fit in one commuting (simultaneously diagonalizable)
// family? Build a candidate frame from H, refine it inside repeated
// eigenspaces using the H_,k, then measure every off-diagonal leftover.
inline CartanCheck cartan_subalgebra_check(const Jet3& j, double rel_gap = 1e-6) {
  const int n = j.dim();
  EigenFrame f = deterministic_eigenframe(j.hess);
  Mat B = f.B;
  // refine within eigenvalue clusters so repeated eigenvalues don't spoil an
  // honestly shared frame
  std::vector<int> sig = multiplicity_signature(f.evals, rel_gap);
  for (int k = 0; k < n; ++k) {
    int start = 0;
    bool changed = false;
    Mat Bk = B;
    for (int block : sig) {
      if (block > 1) {
        Mat sub = B.middleCols(start, block);
        Mat restricted = sub.transpose() * j.third.slice(k) * sub;
        EigenFrame rf = deterministic_eigenframe(restricted);
        Bk.middleCols(start, block) = sub * rf.B;
        changed = true;
      }
      start += block;
    }
    if (changed) {
      B = Bk;
      sig.assign(n, 1);  // only one refinement pass is available
      break;
    }
  }
  CartanCheck out;
  out.frame = B;
  auto offdiag = [&](const Mat& m, double scale) {
    Mat d = B.transpose() * m * B;
    double o = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        if (a != b) o = std::max(o, std::abs(d(a, b)));
    return scale > 0 ? o / scale : o;
  };
  out.residual = offdiag(j.hess, max_abs(j.hess));
  double tscale = std::max(j.third.max_abs(), 1e-300);
  for (int k = 0; k < n; ++k)
    out.residual = std::max(out.residual, offdiag(j.third.slice(k), tscale));
  return out;
}

struct EquivRow {
  Vec x;
  double max_R = 0.0;
  double max_defect = 0.0;
  double max_commutator = 0.0;
  double hinv_scale = 0.0;
  Classification class_R = Classification::Indeterminate;
  Classification class_defect = Classification::Indeterminate;
  Classification class_commutator = Classification::Indeterminate;
};

inline bool classes_agree(const EquivRow& r) {
  return r.class_R == r.class_defect && r.class_R == r.class_commutator;
}

// Evaluate all routes at each point. The residual is classified on an
// absolute scale; defect and commutator relative to |H^-1|. A hard ZERO vs
// NONZERO disagreement between routes is an internal-consistency failure and
// throws; INDETERMINATE rows are reported for the caller to judge.
inline std::vector<EquivRow> symmetry_equiv_check(const ConvexFunction& f,
                                                  const std::vector<Vec>& points,
                                                  Tolerances tol = {}) {
  std::vector<EquivRow> rows;
  rows.reserve(points.size());
  for (const Vec& x : points) {
    Jet3 j = f.jet3(x);
    EquivRow r;
    r.x = x;
    r.max_R = propi_residual(j).max_abs();
    r.max_defect = symmetry_defect(j);
    r.max_commutator = commutator_defect(j);
    r.hinv_scale = max_abs(hess_inverse(j));
    r.class_R = classify(r.max_R, 1.0, tol);
    r.class_defect = classify(r.max_defect, r.hinv_scale, tol);
    r.class_commutator = classify(r.max_commutator, r.hinv_scale, tol);
    auto hard = [](Classification a, Classification b) {
      return (a == Classification::Zero && b == Classification::Nonzero) ||
             (a == Classification::Nonzero && b == Classification::Zero);
    };
    if (hard(r.class_R, r.class_defect) || hard(r.class_R, r.class_commutator) ||
        hard(r.class_defect, r.class_commutator))
      throw Error(ErrorCode::EquivalenceViolation,
                  "equivalent formulations disagree at a sample point");
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace hesslab
