#pragma once

#include "hesslab/tensor3.hpp"

namespace hesslab {

// Value and first three derivatives of a scalar function of one variable.
struct Jet1 {
  double v = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double d3 = 0.0;
};

// Value, gradient, Hessian and third-derivative tensor at a point.
struct Jet3 {
  double value = 0.0;
  Vec grad;
  Mat hess;
  Tensor3 third;

  int dim() const { return static_cast<int>(grad.size()); }

  static Jet3 zero(int n) {
    Jet3 j;
    j.value = 0.0;
    j.grad = Vec::Zero(n);
    j.hess = Mat::Zero(n, n);
    j.third = Tensor3(n);
    return j;
  }
};

// Second- and third-order jet of a function of two variables.
struct Jet2 {
  double f11 = 0.0, f12 = 0.0, f22 = 0.0;
  double f111 = 0.0, f112 = 0.0, f122 = 0.0, f222 = 0.0;

  static Jet2 from_jet3(const Jet3& j) {
    Jet2 r;
    r.f11 = j.hess(0, 0);
    r.f12 = j.hess(0, 1);
    r.f22 = j.hess(1, 1);
    r.f111 = j.third(0, 0, 0);
    r.f112 = j.third(0, 0, 1);
    r.f122 = j.third(0, 1, 1);
    r.f222 = j.third(1, 1, 1);
    return r;
  }

  // Positive definite 2x2 Hessian: determinant and trace both positive.
  bool convex() const { return f11 * f22 - f12 * f12 > 0.0 && f11 + f22 > 0.0; }
};

}  // namespace hesslab
