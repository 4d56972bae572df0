#pragma once

#include <functional>

#include "hesslab/convex.hpp"

namespace hesslab {

struct FdOptions {
  double h2 = 1e-3;        // step for gradient and Hessian stencils
  double h3 = 5e-3;        // step for third-derivative stencils
  bool richardson = true;  // one extrapolation level: (4 D(h/2) - D(h)) / 3
};

namespace detail {

// Evaluate f's value with an explicit stencil-containment check so a stencil
// that pokes outside the domain fails loudly instead of as OutOfDomain.
inline double stencil_value(const ConvexFunction& f, const Vec& x) {
  if (!f.domain().contains(x))
    throw Error(ErrorCode::StencilOutOfDomain, "difference stencil leaves the domain");
  return f.value(x);
}

template <class F>
auto richardson2(F&& diff, double h, bool enabled) {
  auto d = diff(h);
  if (!enabled) return d;
  auto d2 = diff(h / 2.0);
  return decltype(d)((4.0 * d2 - d) / 3.0);
}

}  // namespace detail

// Pure finite-difference third-order jet from values only: the independent
// oracle against which analytic jets are tested. Central stencils of second
// order, optionally Richardson-extrapolated once.
inline Jet3 finite_difference_jet3(const ConvexFunction& f, const Vec& x, FdOptions opt = {}) {
  const int n = f.dim();
  auto val = [&](const Vec& p) { return detail::stencil_value(f, p); };
  auto shifted = [&](std::initializer_list<std::pair<int, double>> moves) {
    Vec p = x;
    for (auto [i, s] : moves) p[i] += s;
    return val(p);
  };

  Jet3 j = Jet3::zero(n);
  j.value = val(x);

  for (int i = 0; i < n; ++i) {
    j.grad[i] = detail::richardson2(
        [&](double h) { return (shifted({{i, h}}) - shifted({{i, -h}})) / (2.0 * h); }, opt.h2,
        opt.richardson);
  }

  for (int i = 0; i < n; ++i) {
    j.hess(i, i) = detail::richardson2(
        [&](double h) {
          return (shifted({{i, h}}) - 2.0 * j.value + shifted({{i, -h}})) / (h * h);
        },
        opt.h2, opt.richardson);
    for (int k = i + 1; k < n; ++k) {
      double v = detail::richardson2(
          [&](double h) {
            return (shifted({{i, h}, {k, h}}) - shifted({{i, h}, {k, -h}}) -
                    shifted({{i, -h}, {k, h}}) + shifted({{i, -h}, {k, -h}})) /
                   (4.0 * h * h);
          },
          opt.h2, opt.richardson);
      j.hess(i, k) = j.hess(k, i) = v;
    }
  }

  for (int i = 0; i < n; ++i)
    for (int p = i; p < n; ++p)
      for (int q = p; q < n; ++q) {
        double v;
        if (i == p && p == q) {
          v = detail::richardson2(
              [&](double h) {
                return (shifted({{i, 2 * h}}) - 2.0 * shifted({{i, h}}) + 2.0 * shifted({{i, -h}}) -
                        shifted({{i, -2 * h}})) /
                       (2.0 * h * h * h);
              },
              opt.h3, opt.richardson);
        } else if (i == p || p == q || i == q) {
          int a = i == p ? i : (p == q ? p : i);  // repeated index
          int b = i == p ? q : (p == q ? i : p);  // single index
          v = detail::richardson2(
              [&](double h) {
                return (shifted({{a, h}, {b, h}}) - 2.0 * shifted({{b, h}}) +
                        shifted({{a, -h}, {b, h}}) - shifted({{a, h}, {b, -h}}) +
                        2.0 * shifted({{b, -h}}) - shifted({{a, -h}, {b, -h}})) /
                       (2.0 * h * h * h);
              },
              opt.h3, opt.richardson);
        } else {
          v = detail::richardson2(
              [&](double h) {
                double s = 0.0;
                for (int s1 : {-1, 1})
                  for (int s2 : {-1, 1})
                    for (int s3 : {-1, 1})
                      s += s1 * s2 * s3 * shifted({{i, s1 * h}, {p, s2 * h}, {q, s3 * h}});
                return s / (8.0 * h * h * h);
              },
              opt.h3, opt.richardson);
        }
        // fill all slot permutations so the tensor is exactly symmetric
        j.third(i, p, q) = j.third(i, q, p) = j.third(p, i, q) = v;
        j.third(p, q, i) = j.third(q, i, p) = j.third(q, p, i) = v;
      }

  return j;
}

// Central difference (with optional Richardson extrapolation) of a
// matrix-valued field along coordinate k.
inline Mat fd_matrix_derivative(const std::function<Mat(const Vec&)>& field, const Vec& x, int k,
                                double h = 1e-3, bool richardson = true) {
  auto diff = [&](double hh) {
    Vec xp = x, xm = x;
    xp[k] += hh;
    xm[k] -= hh;
    return Mat((field(xp) - field(xm)) / (2.0 * hh));
  };
  return detail::richardson2(diff, h, richardson);
}

}  // namespace hesslab
