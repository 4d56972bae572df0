#pragma once

#include <Eigen/Dense>
#include <cassert>
#include <vector>

namespace hesslab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Dense symmetric 3-tensor (third derivatives), flat row-major storage.
class Tensor3 {
 public:
  Tensor3() : n_(0) {}
  explicit Tensor3(int n) : n_(n), data_(static_cast<size_t>(n) * n * n, 0.0) {}

  int dim() const { return n_; }

  double& operator()(int i, int j, int k) { return data_[idx(i, j, k)]; }
  double operator()(int i, int j, int k) const { return data_[idx(i, j, k)]; }

  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  Tensor3& operator+=(const Tensor3& o) {
    assert(n_ == o.n_);
    for (size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }

  Tensor3 operator-(const Tensor3& o) const {
    assert(n_ == o.n_);
    Tensor3 r(n_);
    for (size_t i = 0; i < data_.size(); ++i) r.data_[i] = data_[i] - o.data_[i];
    return r;
  }

  Tensor3& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }

  // Slice T(., ., k) as a matrix.
  Mat slice(int k) const {
    Mat m(n_, n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) m(i, j) = (*this)(i, j, k);
    return m;
  }

  void set_slice(int k, const Mat& m) {
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) (*this)(i, j, k) = m(i, j);
  }

  // T'(a,b,c) = sum_{i,j,k} B(a,i) B(b,j) B(c,k) T(i,j,k), one slot at a time.
  Tensor3 conjugated(const Mat& B) const {
    const int n = n_;
    Tensor3 t1(n), t2(n), t3(n);
    for (int a = 0; a < n; ++a)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          double s = 0.0;
          for (int i = 0; i < n; ++i) s += B(a, i) * (*this)(i, j, k);
          t1(a, j, k) = s;
        }
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int k = 0; k < n; ++k) {
          double s = 0.0;
          for (int j = 0; j < n; ++j) s += B(b, j) * t1(a, j, k);
          t2(a, b, k) = s;
        }
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) {
          double s = 0.0;
          for (int k = 0; k < n; ++k) s += B(c, k) * t2(a, b, k);
          t3(a, b, c) = s;
        }
    return t3;
  }

  // Average over the 6 slot permutations; exact symmetry by construction.
  Tensor3 symmetrized() const {
    Tensor3 r(n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        for (int k = 0; k < n_; ++k)
          r(i, j, k) = ((*this)(i, j, k) + (*this)(i, k, j) + (*this)(j, i, k) +
                        (*this)(j, k, i) + (*this)(k, i, j) + (*this)(k, j, i)) /
                       6.0;
    return r;
  }

 private:
  size_t idx(int i, int j, int k) const {
    assert(i >= 0 && i < n_ && j >= 0 && j < n_ && k >= 0 && k < n_);
    return (static_cast<size_t>(i) * n_ + j) * n_ + k;
  }

  int n_;
  std::vector<double> data_;
};

}  // namespace hesslab
