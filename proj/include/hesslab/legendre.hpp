#pragma once

#include <optional>
#include <sstream>

#include "hesslab/convex.hpp"
#include "hesslab/propi.hpp"

namespace hesslab {

struct NewtonOptions {
  double tol = 1e-10;  // on the gradient residual, relative to max(1, |y|)
  int max_iter = 100;
};

struct LegendreSolve {
  Vec x;
  int iterations = 0;
  double residual = 0.0;
};

namespace detail {

inline Vec domain_start(const Domain& dom) {
  auto [lo, hi] = dom.bounding_box();
  Vec mid = 0.5 * (lo + hi);
  if (dom.contains(mid)) return mid;
  return dom.sample(1).at(0);
}

}  // namespace detail

// Solve grad(f)(x) = y by damped Newton steps; the Hessian is the Jacobian
// of the gradient, so the tail converges quadratically once inside the
// basin. Backtracking keeps every iterate in the open domain.
inline LegendreSolve legendre_point(const ConvexFunction& f, const Vec& y,
                                    NewtonOptions opts = {},
                                    std::optional<Vec> start = std::nullopt) {
  if (y.size() != f.dim()) throw Error(ErrorCode::BadSpec, "target dimension mismatch");
  Vec x = start ? *start : detail::domain_start(f.domain());
  double goal = opts.tol * std::max(1.0, y.cwiseAbs().maxCoeff());

  Jet3 j = f.jet3(x);
  double err = (j.grad - y).cwiseAbs().maxCoeff();
  for (int it = 0; it < opts.max_iter; ++it) {
    if (err <= goal) return {x, it, err};
    Vec dx = j.hess.llt().solve(y - j.grad);
    double alpha = 1.0;
    while (true) {
      Vec cand = x + alpha * dx;
      if (f.domain().contains(cand)) {
        Jet3 cj = f.jet3(cand);
        double cerr = (cj.grad - y).cwiseAbs().maxCoeff();
        if (cerr <= (1.0 - 0.25 * alpha) * err || cerr <= goal) {
          x = cand;
          j = cj;
          err = cerr;
          break;
        }
      }
      alpha *= 0.5;
      if (alpha < 1e-14) {
        std::ostringstream os;
        os << "gradient inversion stalled; last iterate x = " << x.transpose() << " (residual "
           << err << ")";
        throw Error(ErrorCode::NoConvergence, os.str());
      }
    }
  }
  if (err <= goal) return {x, opts.max_iter, err};
  std::ostringstream os;
  os << "gradient inversion did not converge; last iterate x = " << x.transpose() << " (residual "
     << err << ")";
  throw Error(ErrorCode::NoConvergence, os.str());
}

struct ConjugateJet {
  Jet3 jet;      // jet of the conjugate at y
  Vec preimage;  // the solved x with grad(f)(x) = y
};

// Jet of the conjugate at y, pushed forward from the primal jet at the
// preimage: value from the pairing, gradient is the preimage itself, the
// Hessian is the primal inverse, and the third derivatives follow from
// d(H^{-1}) = -H^{-1} H_,l H^{-1} chained through dx/dy = H^{-1}.
inline ConjugateJet conjugate_jet3(const ConvexFunction& f, const Vec& y, NewtonOptions opts = {},
                                   std::optional<Vec> start = std::nullopt) {
  LegendreSolve s = legendre_point(f, y, opts, std::move(start));
  Jet3 j = f.jet3(s.x);
  const int n = j.dim();
  Mat hi = hess_inverse(j);

  ConjugateJet out;
  out.preimage = s.x;
  out.jet.value = s.x.dot(y) - j.value;
  out.jet.grad = s.x;
  out.jet.hess = hi;
  out.jet.third = Tensor3(n);
  for (int l = 0; l < n; ++l) {
    Mat dl = -hi * j.third.slice(l) * hi;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) out.jet.third(a, b, c) += dl(a, b) * hi(l, c);
  }
  out.jet.third = out.jet.third.symmetrized();
  return out;
}

// Residual tensor of the conjugate at the image point, computed from the
// primal jet alone (no solving). The conjugate's inverse Hessian is the
// primal Hessian composed with the slope inversion, so its curl in slope
// coordinates contracts the primal third derivatives with H^{-1}:
//   R*[i][a][b] = sum_l T[i][a][l] H^{-1}[l][b] - T[i][b][l] H^{-1}[l][a].
inline Tensor3 conjugate_residual_from_jet(const Jet3& j) {
  const int n = j.dim();
  Mat hi = hess_inverse(j);
  Tensor3 r(n);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double s = 0.0;
        for (int l = 0; l < n; ++l) s += j.third(i, a, l) * hi(l, b) - j.third(i, b, l) * hi(l, a);
        r(i, a, b) = s;
      }
  return r;
}

// Image of the primal domain under the gradient map. Membership is decided
// by attempting the inversion; the bounding box is estimated from gradient
// images of primal samples and padded, which is enough for sampling.
class ImageDomain final : public Domain {
 public:
  ImageDomain(FnPtr primal, NewtonOptions opts = {}) : f_(std::move(primal)), opts_(opts) {
    std::vector<Vec> pts = f_->domain().sample(200);
    Vec lo = Vec::Constant(f_->dim(), std::numeric_limits<double>::infinity());
    Vec hi = -lo;
    for (const Vec& x : pts) {
      Vec g = f_->gradient(x);
      lo = lo.cwiseMin(g);
      hi = hi.cwiseMax(g);
    }
    Vec pad = 0.05 * (hi - lo) + Vec::Constant(f_->dim(), 1e-6);
    lo_ = lo - pad;
    hi_ = hi + pad;
  }

  int dim() const override { return f_->dim(); }
  bool contains(const Vec& y) const override {
    if (y.size() != dim()) return false;
    try {
      NewtonOptions o = opts_;
      o.max_iter = 60;
      legendre_point(*f_, y, o);
      return true;
    } catch (const Error&) {
      return false;
    }
  }
  std::pair<Vec, Vec> bounding_box() const override { return {lo_, hi_}; }

 private:
  FnPtr f_;
  NewtonOptions opts_;
  Vec lo_, hi_;
};

// The conjugate as a function object in its own right; every jet evaluation
// solves the gradient inversion afresh, so it composes with the generic
// finite-difference and sampling machinery.
class ConjugateFn final : public ConvexFunction {
 public:
  explicit ConjugateFn(FnPtr primal, NewtonOptions opts = {})
      : ConvexFunction(std::make_shared<ImageDomain>(primal, opts)),
        f_(std::move(primal)),
        opts_(opts) {}
  std::string kind() const override { return "conjugate"; }
  const ConvexFunction& primal() const { return *f_; }

 protected:
  Jet3 jet3_impl(const Vec& y) const override { return conjugate_jet3(*f_, y, opts_).jet; }

 private:
  FnPtr f_;
  NewtonOptions opts_;
};

struct InvolutionReport {
  double value_gap = 0.0;  // |f**(x) - f(x)|
  double grad_gap = 0.0;   // |grad f**(x) - grad f(x)|, the recovered slope
  double point_gap = 0.0;  // |x(w) - x| at the solved double-conjugate slope
};

// Double conjugation back at a primal point, done honestly: the outer
// inversion solves grad(f*)(w) = x by Newton in slope space, where the
// Jacobian of w -> grad(f*)(w) = x(w) is H(x(w))^{-1}, so the Newton update
// is dw = H(x_hat) (x - x_hat). The start slope must lie in the gradient
// image; slopes of other domain points always qualify.
inline InvolutionReport involution_check(const ConvexFunction& f, const Vec& x,
                                         std::optional<Vec> start_slope = std::nullopt,
                                         NewtonOptions opts = {}) {
  Jet3 jx = f.jet3(x);
  Vec w = start_slope ? *start_slope : Vec(f.jet3(detail::domain_start(f.domain())).grad);
  NewtonOptions inner = opts;  // solve sharper than the outer target
  inner.tol = opts.tol * 1e-3;
  Vec xhat = legendre_point(f, w, inner).x;
  double gap = (xhat - x).cwiseAbs().maxCoeff();
  for (int it = 0; it < opts.max_iter && gap > opts.tol; ++it) {
    Vec dw = f.jet3(xhat).hess * (x - xhat);
    double alpha = 1.0;
    bool stalled = false;
    while (true) {
      try {
        Vec cand = legendre_point(f, Vec(w + alpha * dw), inner, xhat).x;
        double cgap = (cand - x).cwiseAbs().maxCoeff();
        if (cgap <= (1.0 - 0.25 * alpha) * gap || cgap <= opts.tol) {
          w += alpha * dw;
          xhat = cand;
          gap = cgap;
          break;
        }
      } catch (const Error&) {
        // slope stepped outside the gradient image; shorten
      }
      alpha *= 0.5;
      if (alpha < 1e-14) {
        stalled = true;  // at the inner solver's resolution
        break;
      }
    }
    if (stalled) break;
  }
  if (gap > 100 * opts.tol)
    throw Error(ErrorCode::NoConvergence, "double-conjugate slope search did not converge");

  InvolutionReport rep;
  rep.point_gap = gap;
  double fstar = xhat.dot(w) - f.jet3(xhat).value;  // f*(w)
  double fss = x.dot(w) - fstar;                    // f**(x)
  rep.value_gap = std::abs(fss - jx.value);
  rep.grad_gap = (w - jx.grad).cwiseAbs().maxCoeff();
  return rep;
}

}  // namespace hesslab
