#pragma once

#include <Eigen/Dense>
#include <numeric>
#include <string>
#include <vector>

#include "hesslab/error.hpp"
#include "hesslab/tensor3.hpp"

namespace hesslab {

// Geometry of the bundle pi : GL(n) -> P(n), pi(A) = (A^-1)^T A^-1, with the
// companion squared-column map q(A) = A^T A = pi(inverse of A). Matrices with
// pairwise orthogonal columns factor as C = B Lambda (B orthogonal, Lambda
// positive diagonal); eigenvalue-multiplicity signatures stratify P(n).

inline double cond_estimate(const Mat& A) {
  Eigen::JacobiSVD<Mat> svd(A);
  double smin = svd.singularValues().minCoeff();
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return svd.singularValues().maxCoeff() / smin;
}

inline Mat pi_map(const Mat& A, double cond_limit = 1e12) {
  if (A.rows() != A.cols()) throw Error(ErrorCode::BadSpec, "pi_map needs a square matrix");
  if (cond_estimate(A) > cond_limit)
    throw Error(ErrorCode::Singular, "matrix condition number exceeds the inversion limit");
  Mat inv = A.inverse();
  return inv.transpose() * inv;
}

inline Mat q_map(const Mat& A) {
  if (A.rows() != A.cols()) throw Error(ErrorCode::BadSpec, "q_map needs a square matrix");
  return A.transpose() * A;
}

// Largest off-diagonal entry relative to the largest entry of A^T A; matrices
// with orthogonal columns sit at (numerical) zero.
inline double column_orthogonality_defect(const Mat& A) {
  Mat g = q_map(A);
  double scale = g.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  double off = 0.0;
  for (int i = 0; i < g.rows(); ++i)
    for (int j = 0; j < g.cols(); ++j)
      if (i != j) off = std::max(off, std::abs(g(i, j)));
  return off / scale;
}

inline bool in_C(const Mat& A, double tol = 1e-9) {
  return column_orthogonality_defect(A) < tol;
}

struct CartanFactor {
  Mat B;       // orthogonal factor (det +1 whenever the input has det > 0)
  Vec lambda;  // positive column norms
};

inline CartanFactor cartan_factor(const Mat& C, double tol = 1e-12) {
  if (column_orthogonality_defect(C) > tol)
    throw Error(ErrorCode::NotOrthogonalColumns, "columns are not orthogonal within tolerance");
  const int n = static_cast<int>(C.cols());
  CartanFactor f;
  f.lambda = Vec(n);
  for (int j = 0; j < n; ++j) {
    f.lambda[j] = C.col(j).norm();
    if (f.lambda[j] == 0.0)
      throw Error(ErrorCode::NotOrthogonalColumns, "zero column has no positive scale factor");
  }
  f.B = C * f.lambda.cwiseInverse().asDiagonal();
  return f;
}

// Multiplicity signature of an ascending list of positive values: a new block
// opens where the relative gap exceeds rel_gap.
inline std::vector<int> multiplicity_signature(const Vec& ascending, double rel_gap = 1e-6) {
  std::vector<int> sig;
  for (int i = 0; i < ascending.size(); ++i) {
    if (i > 0 && ascending[i] - ascending[i - 1] <=
                     rel_gap * std::max(std::abs(ascending[i]), std::abs(ascending[i - 1])))
      sig.back() += 1;
    else
      sig.push_back(1);
  }
  return sig;
}

struct EigenFrame {
  Mat B;     // columns: eigenvectors, ascending eigenvalues, det +1
  Vec evals; // ascending
};

// Deterministic eigenframe of a symmetric matrix: ascending eigenvalues, each
// column's largest-magnitude entry (lowest index on ties) made positive, and
// det +1 restored by flipping the last column if needed.
inline EigenFrame deterministic_eigenframe(const Mat& V) {
  Eigen::SelfAdjointEigenSolver<Mat> es(V);
  if (es.info() != Eigen::Success)
    throw Error(ErrorCode::Singular, "eigendecomposition did not converge");
  EigenFrame f{es.eigenvectors(), es.eigenvalues()};
  const int n = static_cast<int>(V.rows());
  for (int j = 0; j < n; ++j) {
    int arg = 0;
    for (int i = 1; i < n; ++i)
      if (std::abs(f.B(i, j)) > std::abs(f.B(arg, j))) arg = i;
    if (f.B(arg, j) < 0.0) f.B.col(j) *= -1.0;
  }
  if (f.B.determinant() < 0.0) f.B.col(n - 1) *= -1.0;
  return f;
}

inline std::vector<int> stratum_signature(const Mat& V, double rel_gap = 1e-6) {
  return multiplicity_signature(deterministic_eigenframe(V).evals, rel_gap);
}

inline std::string signature_string(const std::vector<int>& sig) {
  std::string s = "(";
  for (size_t i = 0; i < sig.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(sig[i]);
  }
  return s + ")";
}

// For C = B Lambda the eigenvalues of pi(C) = B Lambda^-2 B^T are the inverse
// squares of the column norms, so the ascending multiplicity pattern of pi(C)
// must be the reversal of the ascending column-norm pattern.
inline std::vector<int> stratum_compat_check(const Mat& C, double rel_gap = 1e-6) {
  CartanFactor f = cartan_factor(C);
  Vec norms = f.lambda;
  std::sort(norms.data(), norms.data() + norms.size());
  std::vector<int> col_sig = multiplicity_signature(norms, rel_gap);
  std::vector<int> pi_sig = stratum_signature(pi_map(C), rel_gap);
  std::vector<int> reversed(col_sig.rbegin(), col_sig.rend());
  if (pi_sig != reversed)
    throw Error(ErrorCode::SignatureMismatch,
                "pi-image signature " + signature_string(pi_sig) +
                    " is not the reversed column signature " + signature_string(col_sig));
  return pi_sig;
}

// Product of Givens rotations over all coordinate planes (i < j), consuming
// one angle per plane; n*(n-1)/2 angles parameterize a rotation near any
// point of SO(n).
inline Mat rotation_from_angles(int n, const std::vector<double>& angles) {
  if (static_cast<int>(angles.size()) != n * (n - 1) / 2)
    throw Error(ErrorCode::BadSpec, "need n(n-1)/2 angles");
  Mat R = Mat::Identity(n, n);
  int a = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double c = std::cos(angles[a]), s = std::sin(angles[a]);
      ++a;
      Mat G = Mat::Identity(n, n);
      G(i, i) = c;
      G(j, j) = c;
      G(i, j) = -s;
      G(j, i) = s;
      R = R * G;
    }
  return R;
}

inline Mat rotation2(double theta) { return rotation_from_angles(2, {theta}); }

}  // namespace hesslab
