#pragma once

#include <Eigen/Dense>

#include "hesslab/error.hpp"

namespace hesslab {

// Deterministic low-discrepancy sequences; no RNG anywhere so every run of
// every tool reproduces byte-identical output.

inline double halton(long index, int base) {
  double f = 1.0, r = 0.0;
  long i = index;
  while (i > 0) {
    f /= base;
    r += f * (i % base);
    i /= base;
  }
  return r;
}

inline int nth_prime(int k) {
  static const int primes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29,
                               31, 37, 41, 43, 47, 53, 59, 61, 67, 71};
  if (k < 0 || k >= static_cast<int>(sizeof(primes) / sizeof(primes[0])))
    throw Error(ErrorCode::BadSpec, "halton dimension too large");
  return primes[k];
}

// Point of the n-dimensional Halton sequence in the unit cube, index >= 1.
inline Eigen::VectorXd halton_point(long index, int n) {
  Eigen::VectorXd p(n);
  for (int k = 0; k < n; ++k) p[k] = halton(index, nth_prime(k));
  return p;
}

inline Eigen::VectorXd scale_to_box(const Eigen::VectorXd& u, const Eigen::VectorXd& lo,
                                    const Eigen::VectorXd& hi) {
  return lo.array() + u.array() * (hi - lo).array();
}

}  // namespace hesslab
