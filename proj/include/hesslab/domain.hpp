#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "hesslab/error.hpp"
#include "hesslab/sampling.hpp"
#include "hesslab/tensor3.hpp"

namespace hesslab {

class Domain;
using DomainPtr = std::shared_ptr<const Domain>;

class Domain {
 public:
  virtual ~Domain() = default;

  virtual int dim() const = 0;
  virtual bool contains(const Vec& x) const = 0;

  // Axis-aligned box enclosing the domain (may be conservative).
  virtual std::pair<Vec, Vec> bounding_box() const = 0;

  // Deterministic quasi-uniform interior points: Halton sequence over the
  // bounding box intersected with [-radius, radius]^n, rejection-filtered.
  std::vector<Vec> sample(int count, double radius = 5.0) const {
    auto [lo, hi] = bounding_box();
    const int n = dim();
    for (int k = 0; k < n; ++k) {
      lo[k] = std::max(lo[k], -radius);
      hi[k] = std::min(hi[k], radius);
      if (!(lo[k] < hi[k]))
        throw Error(ErrorCode::BadSpec, "domain truncation left an empty box");
    }
    std::vector<Vec> pts;
    pts.reserve(count);
    const long max_tries = 1000000;
    for (long idx = 1; idx <= max_tries && static_cast<int>(pts.size()) < count; ++idx) {
      Vec x = scale_to_box(halton_point(idx, n), lo, hi);
      if (contains(x)) pts.push_back(std::move(x));
    }
    if (static_cast<int>(pts.size()) < count)
      throw Error(ErrorCode::BadSpec, "rejection sampling failed to fill the request");
    return pts;
  }
};

class BoxDomain final : public Domain {
 public:
  BoxDomain(Vec lo, Vec hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
    if (lo_.size() != hi_.size() || (lo_.array() >= hi_.array()).any())
      throw Error(ErrorCode::BadSpec, "box bounds must satisfy lo < hi");
  }

  static DomainPtr cube(int n, double half_width) {
    return std::make_shared<BoxDomain>(Vec::Constant(n, -half_width),
                                       Vec::Constant(n, half_width));
  }

  int dim() const override { return static_cast<int>(lo_.size()); }
  bool contains(const Vec& x) const override {
    return (x.array() > lo_.array()).all() && (x.array() < hi_.array()).all();
  }
  std::pair<Vec, Vec> bounding_box() const override { return {lo_, hi_}; }
  const Vec& lo() const { return lo_; }
  const Vec& hi() const { return hi_; }

 private:
  Vec lo_, hi_;
};

// Open polytope { x : a_i . x + b_i > 0 for all i }.
class PolytopeDomain final : public Domain {
 public:
  PolytopeDomain(Mat normals, Vec offsets, Vec bbox_lo, Vec bbox_hi)
      : normals_(std::move(normals)),
        offsets_(std::move(offsets)),
        lo_(std::move(bbox_lo)),
        hi_(std::move(bbox_hi)) {
    if (normals_.rows() != offsets_.size())
      throw Error(ErrorCode::BadSpec, "one offset per supporting hyperplane");
  }

  PolytopeDomain(Mat normals, Vec offsets)
      : PolytopeDomain(std::move(normals), Vec(offsets),
                       Vec::Constant(normals.cols(), -5.0), Vec::Constant(normals.cols(), 5.0)) {}

  int dim() const override { return static_cast<int>(normals_.cols()); }
  bool contains(const Vec& x) const override {
    return ((normals_ * x + offsets_).array() > 0.0).all();
  }
  std::pair<Vec, Vec> bounding_box() const override { return {lo_, hi_}; }

  const Mat& normals() const { return normals_; }
  const Vec& offsets() const { return offsets_; }

 private:
  Mat normals_;
  Vec offsets_;
  Vec lo_, hi_;
};

// Image of a domain under a rotation: { B y : y in inner }.
class RotatedDomain final : public Domain {
 public:
  RotatedDomain(Mat frame, DomainPtr inner) : frame_(std::move(frame)), inner_(std::move(inner)) {
    if (frame_.rows() != frame_.cols() || frame_.rows() != inner_->dim())
      throw Error(ErrorCode::BadSpec, "frame must be square and match the inner dimension");
  }

  int dim() const override { return inner_->dim(); }
  bool contains(const Vec& x) const override { return inner_->contains(frame_.transpose() * x); }

  std::pair<Vec, Vec> bounding_box() const override {
    auto [lo, hi] = inner_->bounding_box();
    const int n = dim();
    Vec out_lo = Vec::Constant(n, std::numeric_limits<double>::infinity());
    Vec out_hi = -out_lo;
    for (long mask = 0; mask < (1L << n); ++mask) {
      Vec corner(n);
      for (int k = 0; k < n; ++k) corner[k] = (mask >> k) & 1 ? hi[k] : lo[k];
      Vec image = frame_ * corner;
      out_lo = out_lo.cwiseMin(image);
      out_hi = out_hi.cwiseMax(image);
    }
    return {out_lo, out_hi};
  }

  const Mat& frame() const { return frame_; }
  const DomainPtr& inner() const { return inner_; }

 private:
  Mat frame_;
  DomainPtr inner_;
};

}  // namespace hesslab
