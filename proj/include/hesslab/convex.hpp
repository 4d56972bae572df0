#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "hesslab/domain.hpp"
#include "hesslab/jet.hpp"
#include "hesslab/oned.hpp"

namespace hesslab {

class ConvexFunction;
using FnPtr = std::shared_ptr<const ConvexFunction>;

// A smooth strictly convex function on an open domain, evaluated through
// third-order jets. eval via jet3() is checked: the point must lie in the
// domain and the Hessian must be positive definite there.
class ConvexFunction {
 public:
  virtual ~ConvexFunction() = default;

  int dim() const { return domain_->dim(); }
  const Domain& domain() const { return *domain_; }
  DomainPtr domain_ptr() const { return domain_; }
  virtual std::string kind() const = 0;

  Jet3 jet3(const Vec& x) const {
    if (x.size() != dim()) throw Error(ErrorCode::BadSpec, "point dimension mismatch");
    if (!domain_->contains(x)) throw Error(ErrorCode::OutOfDomain, "point outside the domain");
    Jet3 j = jet3_impl(x);
    Eigen::SelfAdjointEigenSolver<Mat> es(j.hess, Eigen::EigenvaluesOnly);
    if (es.eigenvalues()(0) <= 0.0)
      throw Error(ErrorCode::NotConvexHere, "Hessian not positive definite at the point");
    return j;
  }

  double value(const Vec& x) const { return jet3(x).value; }
  Vec gradient(const Vec& x) const { return jet3(x).grad; }
  Mat hessian(const Vec& x) const { return jet3(x).hess; }

 protected:
  explicit ConvexFunction(DomainPtr dom) : domain_(std::move(dom)) {}
  virtual Jet3 jet3_impl(const Vec& x) const = 0;

  // Unchecked evaluation for composite kinds: the outer domain is
  // authoritative and single terms need not be convex on their own.
  static Jet3 eval_term(const ConvexFunction& f, const Vec& x) { return f.jet3_impl(x); }

 private:
  DomainPtr domain_;
};

// k |x|^2 on a box.
class QuadraticFn final : public ConvexFunction {
 public:
  QuadraticFn(int n, double k, DomainPtr dom = nullptr)
      : ConvexFunction(dom ? std::move(dom) : BoxDomain::cube(n, 5.0)), k_(k) {}

  std::string kind() const override { return "quadratic"; }
  double coeff() const { return k_; }

 protected:
  Jet3 jet3_impl(const Vec& x) const override {
    Jet3 j = Jet3::zero(dim());
    j.value = k_ * x.squaredNorm();
    j.grad = 2.0 * k_ * x;
    j.hess = 2.0 * k_ * Mat::Identity(dim(), dim());
    return j;
  }

 private:
  double k_;
};

// sum_i p_i(x_i); Hessian diagonal, third tensor supported on the diagonal.
class SeparableSumFn final : public ConvexFunction {
 public:
  explicit SeparableSumFn(std::vector<PiecePtr> pieces, DomainPtr dom = nullptr)
      : ConvexFunction(dom ? std::move(dom) : box_from(pieces)), pieces_(std::move(pieces)) {
    if (static_cast<int>(pieces_.size()) != dim())
      throw Error(ErrorCode::BadSpec, "one piece per coordinate");
  }

  std::string kind() const override { return "separable"; }
  const std::vector<PiecePtr>& pieces() const { return pieces_; }

 protected:
  Jet3 jet3_impl(const Vec& x) const override {
    Jet3 j = Jet3::zero(dim());
    for (int i = 0; i < dim(); ++i) {
      Jet1 p = pieces_[i]->jet(x[i]);
      j.value += p.v;
      j.grad[i] = p.d1;
      j.hess(i, i) = p.d2;
      j.third(i, i, i) = p.d3;
    }
    return j;
  }

 private:
  static DomainPtr box_from(const std::vector<PiecePtr>& pieces) {
    int n = static_cast<int>(pieces.size());
    Vec lo(n), hi(n);
    for (int i = 0; i < n; ++i) {
      lo[i] = std::max(pieces[i]->lo(), -5.0);
      hi[i] = std::min(pieces[i]->hi(), 5.0);
    }
    return std::make_shared<BoxDomain>(lo, hi);
  }

  std::vector<PiecePtr> pieces_;
};

// phi(x) = inner(B^T x) for a rotation B whose columns are the distinguished
// directions; jets transform tensorially slot by slot.
class RotatedComposeFn final : public ConvexFunction {
 public:
  RotatedComposeFn(Mat frame, FnPtr inner)
      : ConvexFunction(std::make_shared<RotatedDomain>(frame, inner->domain_ptr())),
        frame_(std::move(frame)),
        inner_(std::move(inner)) {
    Mat gram = frame_.transpose() * frame_;
    if ((gram - Mat::Identity(frame_.rows(), frame_.cols())).cwiseAbs().maxCoeff() > 1e-12 ||
        frame_.determinant() < 0.0)
      throw Error(ErrorCode::BadSpec, "frame must be a rotation matrix");
  }

  std::string kind() const override { return "rotated"; }
  const Mat& frame() const { return frame_; }
  const FnPtr& inner() const { return inner_; }

 protected:
  Jet3 jet3_impl(const Vec& x) const override {
    Jet3 in = eval_term(*inner_, frame_.transpose() * x);
    Jet3 j;
    j.value = in.value;
    j.grad = frame_ * in.grad;
    j.hess = frame_ * in.hess * frame_.transpose();
    j.third = in.third.conjugated(frame_);
    return j;
  }

 private:
  Mat frame_;
  FnPtr inner_;
};

// sum_i w_i exp(<a_i, x>); strictly convex wherever the directions span.
class ExpAffineFn final : public ConvexFunction {
 public:
  ExpAffineFn(std::vector<double> weights, std::vector<Vec> directions, DomainPtr dom)
      : ConvexFunction(std::move(dom)), w_(std::move(weights)), a_(std::move(directions)) {
    if (w_.size() != a_.size() || w_.empty())
      throw Error(ErrorCode::BadSpec, "one weight per direction, at least one term");
  }

  std::string kind() const override { return "expaffine"; }
  const std::vector<double>& weights() const { return w_; }
  const std::vector<Vec>& directions() const { return a_; }

 protected:
  Jet3 jet3_impl(const Vec& x) const override {
    Jet3 j = Jet3::zero(dim());
    for (size_t m = 0; m < w_.size(); ++m) {
      const Vec& a = a_[m];
      double e = w_[m] * std::exp(a.dot(x));
      j.value += e;
      j.grad += e * a;
      j.hess += e * a * a.transpose();
      for (int i = 0; i < dim(); ++i)
        for (int p = 0; p < dim(); ++p)
          for (int q = 0; q < dim(); ++q) j.third(i, p, q) += e * a[i] * a[p] * a[q];
    }
    return j;
  }

 private:
  std::vector<double> w_;
  std::vector<Vec> a_;
};

// Pointwise sum of other functions on an explicitly supplied domain.
class CustomSumFn final : public ConvexFunction {
 public:
  CustomSumFn(std::vector<FnPtr> terms, DomainPtr dom)
      : ConvexFunction(std::move(dom)), terms_(std::move(terms)) {
    if (terms_.empty()) throw Error(ErrorCode::BadSpec, "custom sum needs at least one term");
    for (const auto& t : terms_)
      if (t->dim() != dim()) throw Error(ErrorCode::BadSpec, "custom sum dimension mismatch");
  }

  std::string kind() const override { return "custom"; }
  const std::vector<FnPtr>& terms() const { return terms_; }

 protected:
  Jet3 jet3_impl(const Vec& x) const override {
    Jet3 j = Jet3::zero(dim());
    for (const auto& t : terms_) {
      Jet3 u = eval_term(*t, x);
      j.value += u.value;
      j.grad += u.grad;
      j.hess += u.hess;
      j.third += u.third;
    }
    return j;
  }

 private:
  std::vector<FnPtr> terms_;
};

// g(x) = f(B x) as a function object; the composition law
// Hg(x) = B^T Hf(Bx) B is realized by composing with the frame B^T.
inline FnPtr compose_rotation(FnPtr f, const Mat& B) {
  return std::make_shared<RotatedComposeFn>(B.transpose(), std::move(f));
}

}  // namespace hesslab
