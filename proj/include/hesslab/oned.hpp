#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "hesslab/error.hpp"
#include "hesslab/jet.hpp"

namespace hesslab {

class OneDPiece;
using PiecePtr = std::shared_ptr<const OneDPiece>;

// One-dimensional building block: value and first three derivatives on an
// open interval. Separable functions sum these per coordinate; handle
// profiles are single pieces glued to a quadratic at the interval's left end.
class OneDPiece {
 public:
  virtual ~OneDPiece() = default;

  virtual Jet1 jet(double t) const = 0;
  virtual double lo() const { return -std::numeric_limits<double>::infinity(); }
  virtual double hi() const { return std::numeric_limits<double>::infinity(); }

  bool in_domain(double t) const { return t > lo() && t < hi(); }

  double value(double t) const { return jet(t).v; }
  double d1(double t) const { return jet(t).d1; }
  double d2(double t) const { return jet(t).d2; }
  double d3(double t) const { return jet(t).d3; }

  // Smallest second derivative over an evenly spaced grid of the interval
  // clipped to [-radius, radius]; the numerical convexity certificate.
  double min_d2_on_grid(int points = 10000, double radius = 5.0) const {
    double a = std::max(lo(), -radius), b = std::min(hi(), radius);
    if (!(a < b)) throw Error(ErrorCode::BadSpec, "empty interval for convexity grid");
    const double pad = (b - a) * 1e-7;
    a += pad;
    b -= pad;
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i < points; ++i) {
      double t = a + (b - a) * i / (points - 1);
      m = std::min(m, jet(t).d2);
    }
    return m;
  }
};

// k t^2
class QuadraticPiece final : public OneDPiece {
 public:
  explicit QuadraticPiece(double k) : k_(k) {}
  Jet1 jet(double t) const override { return {k_ * t * t, 2.0 * k_ * t, 2.0 * k_, 0.0}; }
  double coeff() const { return k_; }

 private:
  double k_;
};

// w exp(a t)
class ExpPiece final : public OneDPiece {
 public:
  ExpPiece(double weight, double rate) : w_(weight), a_(rate) {}
  Jet1 jet(double t) const override {
    double e = w_ * std::exp(a_ * t);
    return {e, a_ * e, a_ * a_ * e, a_ * a_ * a_ * e};
  }
  double weight() const { return w_; }
  double rate() const { return a_; }

 private:
  double w_, a_;
};

// c t^d, even degree d >= 2
class PowerPiece final : public OneDPiece {
 public:
  PowerPiece(int degree, double coeff) : d_(degree), c_(coeff) {
    if (d_ < 2 || d_ % 2 != 0) throw Error(ErrorCode::BadSpec, "power degree must be even, >= 2");
  }
  Jet1 jet(double t) const override {
    double p3 = d_ == 2 ? 0.0 : c_ * std::pow(t, d_ - 3) * d_ * (d_ - 1) * (d_ - 2);
    return {c_ * std::pow(t, d_), c_ * d_ * std::pow(t, d_ - 1),
            c_ * d_ * (d_ - 1) * std::pow(t, d_ - 2), p3};
  }
  int degree() const { return d_; }
  double coeff() const { return c_; }

 private:
  int d_;
  double c_;
};

// (1/2) a (log a - 1), a = c0 + c1 t > 0.  Strictly convex for c1 != 0; the
// derivative image is a half-line, so conjugates live on semi-infinite
// intervals.
class LogBarrierPiece final : public OneDPiece {
 public:
  LogBarrierPiece(double c0, double c1) : c0_(c0), c1_(c1) {
    if (c1_ == 0.0) throw Error(ErrorCode::BadSpec, "log barrier needs a nonzero slope");
  }
  Jet1 jet(double t) const override {
    double a = c0_ + c1_ * t;
    if (a <= 0.0) throw Error(ErrorCode::OutOfDomain, "log barrier argument not positive");
    double la = std::log(a);
    return {0.5 * a * (la - 1.0), 0.5 * c1_ * la, 0.5 * c1_ * c1_ / a,
            -0.5 * c1_ * c1_ * c1_ / (a * a)};
  }
  double lo() const override {
    return c1_ > 0 ? -c0_ / c1_ : -std::numeric_limits<double>::infinity();
  }
  double hi() const override {
    return c1_ < 0 ? -c0_ / c1_ : std::numeric_limits<double>::infinity();
  }
  double offset() const { return c0_; }
  double slope() const { return c1_; }

 private:
  double c0_, c1_;
};

// e^{-1/t} t^4 for t > 0, identically 0 for t <= 0; C^infinity across 0 with
// all derivatives vanishing there.
inline Jet1 flat_bump(double t) {
  if (t <= 0.0) return {0.0, 0.0, 0.0, 0.0};
  double e = std::exp(-1.0 / t);
  return {e * t * t * t * t, e * t * t * (4.0 * t + 1.0), e * (12.0 * t * t + 6.0 * t + 1.0),
          e * (24.0 * t * t * t + 18.0 * t * t + 6.0 * t + 1.0) / (t * t)};
}

// k t^2 + mu * bump(t - p): a quadratic that starts deviating only past p,
// with infinite-order tangency at the gluing parameter.
class FlatGluedPiece final : public OneDPiece {
 public:
  FlatGluedPiece(double k, double p, double mu) : k_(k), p_(p), mu_(mu) {}
  Jet1 jet(double t) const override {
    Jet1 b = flat_bump(t - p_);
    return {k_ * t * t + mu_ * b.v, 2.0 * k_ * t + mu_ * b.d1, 2.0 * k_ + mu_ * b.d2,
            mu_ * b.d3};
  }
  double quad_coeff() const { return k_; }
  double glue_param() const { return p_; }
  double bump_amp() const { return mu_; }

 private:
  double k_, p_, mu_;
};

// Smoothstep with flat ends: 0 for s <= 0, 1 for s >= 1, infinitely tangent
// to the constants at both ends.
struct FlatStep {
  double v, d1, d2;
};

inline FlatStep flat_step(double s) {
  if (s <= 0.0) return {0.0, 0.0, 0.0};
  if (s >= 1.0) return {1.0, 0.0, 0.0};
  auto g = [](double u) { return std::exp(-1.0 / u); };
  auto g1 = [&](double u) { return g(u) / (u * u); };
  auto g2 = [&](double u) { return g(u) * (1.0 - 2.0 * u) / (u * u * u * u); };
  double A = g(s), B = g(1.0 - s);
  double A1 = g1(s), B1 = -g1(1.0 - s);
  double A2 = g2(s), B2 = g2(1.0 - s);
  double S = A + B, S1 = A1 + B1, S2 = A2 + B2;
  double v = A / S;
  double d1 = (A1 * S - A * S1) / (S * S);
  double d2 = (A2 * S - A * S2) / (S * S) - 2.0 * S1 * (A1 * S - A * S1) / (S * S * S);
  return {v, d1, d2};
}

// Quadratic k t^2 for t <= p that steepens into a log-barrier wall at t = b:
// the second derivative is prescribed as a flat-step blend of 2k with
// c/(b-t), and value/slope are recovered by quadrature, so the piece is
// strictly convex by construction, infinitely tangent to k t^2 at p, and its
// derivative image is the half-line (2kp, +inf).
class BarrierGluedPiece final : public OneDPiece {
 public:
  BarrierGluedPiece(double k, double p, double b, double c) : k_(k), p_(p), b_(b), c_(c) {
    if (!(b_ > p_)) throw Error(ErrorCode::BadSpec, "barrier wall must lie past the gluing parameter");
    if (!(k_ > 0.0 && c_ > 0.0)) throw Error(ErrorCode::BadSpec, "barrier piece needs k > 0, c > 0");
    mid_ = 0.5 * (p_ + b_);
  }

  Jet1 jet(double t) const override {
    if (t >= b_) throw Error(ErrorCode::OutOfDomain, "at or past the barrier wall");
    if (t <= p_) {
      return {k_ * t * t, 2.0 * k_ * t, 2.0 * k_, 0.0};
    }
    Jet1 r;
    r.d2 = phi2(t);
    r.d3 = phi3(t);
    double i0 = 0.0, i1 = 0.0;  // integrals of phi2 and of (t-s) phi2 over [p, t]
    for (auto [a, bb] : panels(t)) {
      gauss16(a, bb, [&](double s, double w) {
        double f = phi2(s);
        i0 += w * f;
        i1 += w * (t - s) * f;
      });
    }
    r.d1 = 2.0 * k_ * p_ + i0;
    r.v = k_ * p_ * p_ + 2.0 * k_ * p_ * (t - p_) + i1;
    return r;
  }

  double hi() const override { return b_; }
  double quad_coeff() const { return k_; }
  double glue_param() const { return p_; }
  double wall() const { return b_; }
  double blend_coeff() const { return c_; }

 private:
  double phi2(double t) const {
    if (t <= p_) return 2.0 * k_;
    double n = flat_step((t - p_) / (mid_ - p_)).v;
    return (1.0 - n) * 2.0 * k_ + n * c_ / (b_ - t);
  }
  double phi3(double t) const {
    if (t <= p_) return 0.0;
    FlatStep n = flat_step((t - p_) / (mid_ - p_));
    return n.d1 / (mid_ - p_) * (c_ / (b_ - t) - 2.0 * k_) + n.v * c_ / ((b_ - t) * (b_ - t));
  }

  // Panels geometrically refined toward t, where the integrand steepens as
  // the wall gets close.
  std::vector<std::pair<double, double>> panels(double t) const {
    const int K = 16;
    std::vector<std::pair<double, double>> ps;
    double d = b_ - t, w = b_ - p_;
    double prev = p_;
    for (int j = 1; j <= K; ++j) {
      double s = b_ - std::pow(w, 1.0 - double(j) / K) * std::pow(d, double(j) / K);
      ps.emplace_back(prev, s);
      prev = s;
    }
    return ps;
  }

  template <class F>
  static void gauss16(double a, double b, F&& f) {
    static const double xs[8] = {0.0950125098376374401853, 0.2816035507792589132304,
                                 0.4580167776572273863424, 0.6178762444026437484467,
                                 0.7554044083550030338951, 0.8656312023878317438805,
                                 0.9445750230732325760780, 0.9894009349916499325962};
    static const double ws[8] = {0.1894506104550684962854, 0.1826034150449235888667,
                                 0.1691565193950025381893, 0.1495959888165767320815,
                                 0.1246289712555338720525, 0.0951585116824927848099,
                                 0.0622535239386478928628, 0.0271524594117540948518};
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    for (int i = 0; i < 8; ++i) {
      f(c - h * xs[i], h * ws[i]);
      f(c + h * xs[i], h * ws[i]);
    }
  }

  double k_, p_, b_, c_, mid_;
};

// Sum of pieces on the intersection of their intervals (e.g. t^4/12 + t^2).
class SumPiece final : public OneDPiece {
 public:
  explicit SumPiece(std::vector<PiecePtr> parts) : parts_(std::move(parts)) {
    if (parts_.empty()) throw Error(ErrorCode::BadSpec, "empty piece sum");
  }
  const std::vector<PiecePtr>& parts() const { return parts_; }
  Jet1 jet(double t) const override {
    Jet1 r;
    for (const auto& p : parts_) {
      Jet1 j = p->jet(t);
      r.v += j.v;
      r.d1 += j.d1;
      r.d2 += j.d2;
      r.d3 += j.d3;
    }
    return r;
  }
  double lo() const override {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& p : parts_) m = std::max(m, p->lo());
    return m;
  }
  double hi() const override {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& p : parts_) m = std::min(m, p->hi());
    return m;
  }

 private:
  std::vector<PiecePtr> parts_;
};

// Legendre conjugate of a strictly convex piece restricted to [tlo, thi]:
// evaluated by inverting the derivative with a safeguarded Newton iteration.
// Jets follow from the inverse-function rule:
//   psi(s) = s t(s) - phi(t(s)),  psi' = t,  psi'' = 1/phi''(t),
//   psi''' = -phi'''(t) / phi''(t)^3.
class ConjugatePiece final : public OneDPiece {
 public:
  ConjugatePiece(PiecePtr inner, double tlo, double thi)
      : inner_(std::move(inner)), tlo_(tlo), thi_(thi) {
    if (!(tlo_ < thi_)) throw Error(ErrorCode::BadSpec, "conjugate bracket must be nonempty");
    slo_ = inner_->d1(tlo_);
    shi_ = inner_->d1(thi_);
    if (!(slo_ < shi_))
      throw Error(ErrorCode::BadSpec, "derivative not increasing across the conjugate bracket");
  }

  double lo() const override { return slo_; }
  double hi() const override { return shi_; }

  double invert(double s) const {
    if (!(s >= slo_ && s <= shi_))
      throw Error(ErrorCode::OutOfDomain, "slope outside the conjugate piece's interval");
    double a = tlo_, b = thi_;
    double t = a + (b - a) * (s - slo_) / (shi_ - slo_);
    for (int it = 0; it < 200; ++it) {
      Jet1 j = inner_->jet(t);
      double f = j.d1 - s;
      if (std::abs(f) < 1e-13 * std::max(1.0, std::abs(s))) return t;
      if (f > 0)
        b = t;
      else
        a = t;
      double step = j.d2 > 0 ? f / j.d2 : 0.0;
      double tn = t - step;
      if (!(tn > a && tn < b)) tn = 0.5 * (a + b);
      if (std::abs(tn - t) < 1e-16 * std::max(1.0, std::abs(t))) return tn;
      t = tn;
    }
    throw Error(ErrorCode::NoConvergence, "slope inversion stalled");
  }

  Jet1 jet(double s) const override {
    double t = invert(s);
    Jet1 j = inner_->jet(t);
    return {s * t - j.v, t, 1.0 / j.d2, -j.d3 / (j.d2 * j.d2 * j.d2)};
  }

 private:
  PiecePtr inner_;
  double tlo_, thi_, slo_, shi_;
};

}  // namespace hesslab
