#pragma once

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "hesslab/convex.hpp"
#include "hesslab/error.hpp"
#include "hesslab/legendre.hpp"
#include "hesslab/propi.hpp"

namespace hesslab {

// Bivector fields on the chart R^n_x x R^n_theta, their Schouten brackets,
// and the equivalence between Poisson commutation with the standard fiberwise
// structure and the curl residual of the potential. Everything is written in
// real coordinates: in the complex frame z = x + i*theta the field whose
// matrix is (2/i) [[0, g], [-g, 0]] pulls back to exactly
// sum_{jk} g_jk dx_j ^ dtheta_k (the frame constants collapse to one), so the
// real-coordinate matrix is [[0, g], [-g, 0]] with no leftover factor.

// fully antisymmetric rank-3 coefficient array over N indices; one stored
// value per sorted triple, every other index order is a sign-filled read
class Trivector {
 public:
  explicit Trivector(int N) : N_(N), c_(static_cast<size_t>(count3(N)), 0.0) {}

  static int count2(int m) { return m < 2 ? 0 : m * (m - 1) / 2; }
  static int count3(int m) { return m < 3 ? 0 : m * (m - 1) * (m - 2) / 6; }

  int index_dim() const { return N_; }
  int component_count() const { return static_cast<int>(c_.size()); }

  double& at_sorted(int i, int j, int k) { return c_[rank(i, j, k)]; }
  double at_sorted(int i, int j, int k) const { return c_[rank(i, j, k)]; }

  double value(int i, int j, int k) const {
    if (i == j || j == k || i == k) return 0.0;
    double s = 1.0;
    if (i > j) { std::swap(i, j); s = -s; }
    if (j > k) { std::swap(j, k); s = -s; }
    if (i > j) { std::swap(i, j); s = -s; }
    return s * c_[rank(i, j, k)];
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : c_) m = std::max(m, std::abs(v));
    return m;
  }

  const std::vector<double>& raw() const { return c_; }
  std::vector<double>& raw() { return c_; }

 private:
  size_t rank(int i, int j, int k) const {
    // lexicographic rank of the sorted triple i < j < k
    return static_cast<size_t>(count3(N_) - count3(N_ - i) + count2(N_ - i - 1) -
                               count2(N_ - j) + (k - j - 1));
  }

  int N_;
  std::vector<double> c_;
};

// same storage scheme one degree up, for the Jacobi check
class Quadvector {
 public:
  explicit Quadvector(int N) : N_(N), c_(static_cast<size_t>(count4(N)), 0.0) {}

  static int count4(int m) {
    return m < 4 ? 0 : m * (m - 1) * (m - 2) * (m - 3) / 24;
  }

  int index_dim() const { return N_; }
  int component_count() const { return static_cast<int>(c_.size()); }

  double& at_sorted(int i, int j, int k, int l) { return c_[rank(i, j, k, l)]; }

  double value(int i, int j, int k, int l) const {
    int idx[4] = {i, j, k, l};
    double s = 1.0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b + 1 < 4 - a; ++b)
        if (idx[b] > idx[b + 1]) { std::swap(idx[b], idx[b + 1]); s = -s; }
    if (idx[0] == idx[1] || idx[1] == idx[2] || idx[2] == idx[3]) return 0.0;
    return s * c_[rank(idx[0], idx[1], idx[2], idx[3])];
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : c_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  size_t rank(int i, int j, int k, int l) const {
    return static_cast<size_t>(count4(N_) - count4(N_ - i) + Trivector::count3(N_ - i - 1) -
                               Trivector::count3(N_ - j) + Trivector::count2(N_ - j - 1) -
                               Trivector::count2(N_ - k) + (l - k - 1));
  }

  int N_;
  std::vector<double> c_;
};

// theta-independent bivector field on the 2n-dimensional chart. Coordinates
// are ordered (x_1..x_n, theta_1..theta_n); the coefficient matrix is a
// function of x alone, so theta-derivatives vanish structurally and the chart
// behaves like R^n x R^n even if the fibers are secretly periodic.
class BivectorField {
 public:
  using ValueFn = std::function<Mat(const Vec&)>;
  using SlopeFn = std::function<std::vector<Mat>(const Vec&)>;

  BivectorField(int n, ValueFn value, SlopeFn slope, bool constant)
      : n_(n), value_(std::move(value)), slope_(std::move(slope)), constant_(constant) {}

  int n() const { return n_; }
  int index_dim() const { return 2 * n_; }
  bool constant() const { return constant_; }

  Mat value(const Vec& x) const { return value_(x); }

  // slope[l] = d/dx_l of the coefficient matrix; exactly n entries
  std::vector<Mat> slope(const Vec& x) const { return slope_(x); }

 private:
  int n_;
  ValueFn value_;
  SlopeFn slope_;
  bool constant_;
};

// scale * sum_k dx_k ^ dtheta_k, the standard fiberwise structure
inline BivectorField standard_bivector(int n, double scale = 1.0) {
  Mat w = Mat::Zero(2 * n, 2 * n);
  w.topRightCorner(n, n) = scale * Mat::Identity(n, n);
  w.bottomLeftCorner(n, n) = -scale * Mat::Identity(n, n);
  return BivectorField(
      n, [w](const Vec&) { return w; },
      [n](const Vec&) { return std::vector<Mat>(static_cast<size_t>(n), Mat::Zero(2 * n, 2 * n)); },
      true);
}

// sum_{jk} g_jk dx_j ^ dtheta_k with g the inverse Hessian of f; slopes come
// from the analytic d_l(H^-1) = -H^-1 H_,l H^-1, never from differencing
inline BivectorField kahler_bivector(FnPtr f) {
  const int n = f->dim();
  auto value = [f, n](const Vec& x) {
    Mat g = hess_inverse(f->jet3(x));
    Mat w = Mat::Zero(2 * n, 2 * n);
    w.topRightCorner(n, n) = g;
    w.bottomLeftCorner(n, n) = -g;
    return w;
  };
  auto slope = [f, n](const Vec& x) {
    Jet3 j = f->jet3(x);
    Mat g = hess_inverse(j);
    std::vector<Mat> d(static_cast<size_t>(n), Mat::Zero(2 * n, 2 * n));
    for (int l = 0; l < n; ++l) {
      Mat dg = -g * j.third.slice(l) * g;
      d[l].topRightCorner(n, n) = dg;
      d[l].bottomLeftCorner(n, n) = -dg;
    }
    return d;
  };
  return BivectorField(n, std::move(value), std::move(slope), false);
}

namespace detail {

// the six-term coordinate sum at one (not necessarily sorted) index triple
inline double schouten_term(const Mat& wm, const Mat& vm, const std::vector<Mat>& dw,
                            const std::vector<Mat>& dv, int n, int i, int j, int k) {
  double s = 0.0;
  for (int l = 0; l < n; ++l) {
    s += wm(l, i) * dv[l](j, k) + wm(l, j) * dv[l](k, i) + wm(l, k) * dv[l](i, j);
    s += vm(l, i) * dw[l](j, k) + vm(l, j) * dw[l](k, i) + vm(l, k) * dw[l](i, j);
  }
  return s;
}

}  // namespace detail

// coordinate Schouten bracket of two bivector fields at a point:
//   [W,V]^{ijk} = sum_l  W^{li} d_l V^{jk} + W^{lj} d_l V^{ki} + W^{lk} d_l V^{ij}
//               + the same three terms with W and V exchanged.
// Each sorted triple is computed once; permuted reads are sign fills.
inline Trivector schouten_bracket(const BivectorField& W, const BivectorField& V, const Vec& x) {
  if (W.n() != V.n()) throw Error(ErrorCode::BadSpec, "bivector field dimensions differ");
  const int n = W.n();
  const int N = 2 * n;
  Mat wm = W.value(x), vm = V.value(x);
  std::vector<Mat> dw = W.slope(x), dv = V.slope(x);
  Trivector t(N);
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j)
      for (int k = j + 1; k < N; ++k)
        t.at_sorted(i, j, k) = detail::schouten_term(wm, vm, dw, dv, n, i, j, k);
  return t;
}

// the same sum re-run at an arbitrary index order; used to confirm that the
// canonical storage really is the antisymmetrization of the raw formula
inline double schouten_component_raw(const BivectorField& W, const BivectorField& V, const Vec& x,
                                     int i, int j, int k) {
  if (W.n() != V.n()) throw Error(ErrorCode::BadSpec, "bivector field dimensions differ");
  return detail::schouten_term(W.value(x), V.value(x), W.slope(x), V.slope(x), W.n(), i, j, k);
}

// independent route: the coefficient slopes are replaced by central
// differences of the value field in the x-coordinates
inline Trivector schouten_bracket_fd(const BivectorField& W, const BivectorField& V, const Vec& x,
                                     double h = 1e-5) {
  if (W.n() != V.n()) throw Error(ErrorCode::BadSpec, "bivector field dimensions differ");
  const int n = W.n();
  const int N = 2 * n;
  auto fd_slopes = [&](const BivectorField& F) {
    std::vector<Mat> d;
    d.reserve(static_cast<size_t>(n));
    for (int l = 0; l < n; ++l) {
      Vec xp = x, xm = x;
      xp[l] += h;
      xm[l] -= h;
      d.push_back(Mat((F.value(xp) - F.value(xm)) / (2.0 * h)));
    }
    return d;
  };
  Mat wm = W.value(x), vm = V.value(x);
  std::vector<Mat> dw = fd_slopes(W), dv = fd_slopes(V);
  Trivector t(N);
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j)
      for (int k = j + 1; k < N; ++k)
        t.at_sorted(i, j, k) = detail::schouten_term(wm, vm, dw, dv, n, i, j, k);
  return t;
}

// [W, T] for a constant bivector W and a trivector field T (the
// derivative-of-W group is absent); T is differentiated by central
// differences in the x-coordinates
inline Quadvector constant_bivector_trivector_bracket(
    const BivectorField& W, const std::function<Trivector(const Vec&)>& T, const Vec& x,
    double h = 1e-5) {
  if (!W.constant())
    throw Error(ErrorCode::BadSpec, "this bracket form needs a constant bivector");
  const int n = W.n();
  const int N = 2 * n;
  Mat wm = W.value(x);
  std::vector<Trivector> dT;
  dT.reserve(static_cast<size_t>(n));
  for (int l = 0; l < n; ++l) {
    Vec xp = x, xm = x;
    xp[l] += h;
    xm[l] -= h;
    Trivector tp = T(xp), tm = T(xm), d(N);
    for (size_t c = 0; c < d.raw().size(); ++c)
      d.raw()[c] = (tp.raw()[c] - tm.raw()[c]) / (2.0 * h);
    dT.push_back(std::move(d));
  }
  Quadvector q(N);
  for (int a = 0; a < N; ++a)
    for (int b = a + 1; b < N; ++b)
      for (int c = b + 1; c < N; ++c)
        for (int d = c + 1; d < N; ++d) {
          double s = 0.0;
          for (int l = 0; l < n; ++l)
            s += wm(l, a) * dT[l].value(b, c, d) - wm(l, b) * dT[l].value(a, c, d) +
                 wm(l, c) * dT[l].value(a, b, d) - wm(l, d) * dT[l].value(a, b, c);
          q.at_sorted(a, b, c, d) = s;
        }
  return q;
}

// graded Jacobi sanity for the pair (standard, inverse-Hessian field):
// the double bracket [W, [W, P]] must vanish
inline double jacobi_defect(const BivectorField& W, const BivectorField& P, const Vec& x,
                            double h = 1e-5) {
  auto T = [&](const Vec& y) { return schouten_bracket(W, P, y); };
  return constant_bivector_trivector_bracket(W, T, x, h).max_abs();
}

// One sample point of the commuting <=> curl-residual equivalence: the
// bracket with the standard structure, the curl residual of the potential,
// and the curl residual of its conjugate at the image point (computed by
// pushforward, so no inversion is needed).
struct PoissonRow {
  Vec x;
  double bracket_max = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  Classification class_bracket = Classification::Indeterminate;
  Classification class_primal = Classification::Indeterminate;
  Classification class_dual = Classification::Indeterminate;
};

struct PoissonEquivReport {
  std::vector<PoissonRow> rows;
  // least-squares constant relating matched bracket components to curl
  // components, and the worst matched-entry gap after applying it; the
  // constant is fitted rather than assumed and should come out at one
  double fitted_constant = 0.0;
  double match_gap = 0.0;
};

inline PoissonEquivReport commuting_equiv_check(FnPtr f, const std::vector<Vec>& samples,
                                                Tolerances tol = {}) {
  const int n = f->dim();
  BivectorField pi = standard_bivector(n);
  BivectorField p = kahler_bivector(f);
  PoissonEquivReport rep;
  rep.rows.reserve(samples.size());
  double num = 0.0, den = 0.0;
  std::vector<std::pair<double, double>> matched;  // (bracket entry, curl entry)

  for (const Vec& x : samples) {
    Jet3 j = f->jet3(x);
    Trivector b = schouten_bracket(pi, p, x);
    Tensor3 r = propi_residual(j);
    Tensor3 rdual = conjugate_residual_from_jet(j);

    PoissonRow row;
    row.x = x;
    row.bracket_max = b.max_abs();
    row.primal_residual = r.max_abs();
    row.dual_residual = rdual.max_abs();
    row.class_bracket = classify(row.bracket_max, 1.0, tol);
    row.class_primal = classify(row.primal_residual, 1.0, tol);
    row.class_dual = classify(row.dual_residual, 1.0, tol);

    auto hard = [](Classification a, Classification b2) {
      return (a == Classification::Zero && b2 == Classification::Nonzero) ||
             (a == Classification::Nonzero && b2 == Classification::Zero);
    };
    if (hard(row.class_bracket, row.class_primal) || hard(row.class_bracket, row.class_dual) ||
        hard(row.class_primal, row.class_dual))
      throw Error(ErrorCode::EquivalenceViolation,
                  "commutation and curl verdicts disagree at a sample point");

    // the only nonzero bracket components sit on (theta_a, theta_b, x_c)
    // triples and correspond to curl entries R(c, a, b)
    for (int a = 0; a < n; ++a)
      for (int b2 = a + 1; b2 < n; ++b2)
        for (int c = 0; c < n; ++c) {
          double bv = b.value(n + a, n + b2, c);
          double rv = r(c, a, b2);
          matched.emplace_back(bv, rv);
          num += bv * rv;
          den += rv * rv;
        }
    rep.rows.push_back(std::move(row));
  }

  rep.fitted_constant = den > 0.0 ? num / den : 0.0;
  for (const auto& [bv, rv] : matched)
    rep.match_gap = std::max(rep.match_gap, std::abs(bv - rep.fitted_constant * rv));
  return rep;
}

}  // namespace hesslab
