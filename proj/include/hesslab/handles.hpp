#pragma once

#include <map>
#include <string>

#include "hesslab/connection.hpp"
#include "hesslab/convex.hpp"
#include "hesslab/matgeo.hpp"

namespace hesslab {

// A handle is a rotated box glued onto a supporting face of the core
// polytope: in its own coordinates the function is profile(y_1) + k |y'|^2,
// and the profile is tangent to k t^2 at the gluing offset p.
struct Handle {
  Mat frame;     // rotation; column 0 is the primary direction
  double p;      // gluing offset: the face sits at y_1 = p
  double b;      // outer end of the handle along the primary direction
  Vec face_lo;   // transverse box in coordinates 1..n-1
  Vec face_hi;
  PiecePtr profile;
};

enum class RegionKind { Core, HandleRegion, Outside };

struct Region {
  RegionKind kind = RegionKind::Outside;
  int handle = -1;
};

inline std::string region_name(const Region& r) {
  switch (r.kind) {
    case RegionKind::Core:
      return "core";
    case RegionKind::HandleRegion:
      return "handle" + std::to_string(r.handle);
    default:
      return "outside";
  }
}

// Core polytope with handle boxes attached across its faces. The glued set
// is open: face points have core on one side and the handle on the other.
class GluedDomain final : public Domain {
 public:
  struct HandleBox {
    Mat frame;
    double p, b;
    Vec face_lo, face_hi;
  };

  GluedDomain(Mat normals, Vec offsets, std::vector<HandleBox> boxes)
      : normals_(std::move(normals)), offsets_(std::move(offsets)), boxes_(std::move(boxes)) {
    const int n = static_cast<int>(normals_.cols());
    lo_ = Vec::Constant(n, -5.0);
    hi_ = Vec::Constant(n, 5.0);
    for (int r = 0; r < normals_.rows(); ++r) {
      int nz = 0, j = 0;
      for (int c = 0; c < n; ++c)
        if (normals_(r, c) != 0.0) {
          ++nz;
          j = c;
        }
      if (nz != 1) continue;
      double a = normals_(r, j), off = offsets_[r];
      if (a > 0.0)
        lo_[j] = std::max(lo_[j], -off / a);
      else
        hi_[j] = std::min(hi_[j], off / -a);
    }
    for (const HandleBox& hb : boxes_) {
      int m = n - 1;
      for (int corner = 0; corner < (2 << m); ++corner) {
        Vec y(n);
        y[0] = (corner & 1) ? hb.b : hb.p;
        for (int c = 0; c < m; ++c)
          y[c + 1] = (corner & (2 << c)) ? hb.face_hi[c] : hb.face_lo[c];
        Vec x = hb.frame * y;
        lo_ = lo_.cwiseMin(x);
        hi_ = hi_.cwiseMax(x);
      }
    }
  }

  int dim() const override { return static_cast<int>(normals_.cols()); }

  Region region(const Vec& x) const {
    for (size_t l = 0; l < boxes_.size(); ++l) {
      const HandleBox& hb = boxes_[l];
      Vec y = hb.frame.transpose() * x;
      if (y[0] < hb.p || y[0] >= hb.b) continue;
      bool inside = true;
      for (int c = 0; c + 1 < dim(); ++c)
        if (y[c + 1] <= hb.face_lo[c] || y[c + 1] >= hb.face_hi[c]) inside = false;
      if (!inside) continue;
      // the gluing hyperplane itself goes to the core formula (both formulas
      // agree there to all orders; one of them has to own the tie)
      if (y[0] == hb.p) return {RegionKind::Core, -1};
      return {RegionKind::HandleRegion, static_cast<int>(l)};
    }
    if (((normals_ * x + offsets_).array() > 0.0).all()) return {RegionKind::Core, -1};
    return {RegionKind::Outside, -1};
  }

  bool contains(const Vec& x) const override {
    if (x.size() != dim()) return false;
    return region(x).kind != RegionKind::Outside;
  }

  std::pair<Vec, Vec> bounding_box() const override { return {lo_, hi_}; }

  const Mat& normals() const { return normals_; }
  const Vec& offsets() const { return offsets_; }

 private:
  Mat normals_;
  Vec offsets_;
  std::vector<HandleBox> boxes_;
  Vec lo_, hi_;
};

namespace detail {

inline void check_rotation_frame(const Mat& B, const char* what) {
  if (B.rows() != B.cols()) throw Error(ErrorCode::BadSpec, std::string(what) + ": frame not square");
  if (max_abs(Mat(B.transpose() * B - Mat::Identity(B.rows(), B.cols()))) > 1e-9)
    throw Error(ErrorCode::BadSpec, std::string(what) + ": frame columns not orthonormal");
  if (B.determinant() < 0.0)
    throw Error(ErrorCode::BadSpec, std::string(what) + ": frame must preserve orientation");
}

// Separating-axis disjointness for two rotated boxes, on their closures.
// Face normals decide the planar case completely; in three dimensions the
// edge cross products are added. Beyond that the axis set is incomplete and
// the test errs toward reporting an overlap.
inline bool boxes_disjoint(const GluedDomain::HandleBox& A, const GluedDomain::HandleBox& B) {
  const int n = static_cast<int>(A.frame.rows());
  std::vector<Vec> axes;
  for (int c = 0; c < n; ++c) {
    axes.push_back(A.frame.col(c));
    axes.push_back(B.frame.col(c));
  }
  if (n == 3)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        Eigen::Vector3d a = A.frame.col(i), b = B.frame.col(j);
        Eigen::Vector3d cr = a.cross(b);
        if (cr.norm() > 1e-12) axes.push_back(cr / cr.norm());
      }

  auto corners = [n](const GluedDomain::HandleBox& hb) {
    std::vector<Vec> cs;
    int m = n - 1;
    for (int corner = 0; corner < (2 << m); ++corner) {
      Vec y(n);
      y[0] = (corner & 1) ? hb.b : hb.p;
      for (int c = 0; c < m; ++c) y[c + 1] = (corner & (2 << c)) ? hb.face_hi[c] : hb.face_lo[c];
      cs.push_back(hb.frame * y);
    }
    return cs;
  };
  std::vector<Vec> ca = corners(A), cb = corners(B);

  for (const Vec& ax : axes) {
    double alo = std::numeric_limits<double>::infinity(), ahi = -alo;
    double blo = alo, bhi = -alo;
    for (const Vec& c : ca) {
      alo = std::min(alo, ax.dot(c));
      ahi = std::max(ahi, ax.dot(c));
    }
    for (const Vec& c : cb) {
      blo = std::min(blo, ax.dot(c));
      bhi = std::max(bhi, ax.dot(c));
    }
    if (ahi < blo || bhi < alo) return true;
  }
  return false;
}

}  // namespace detail

// k |x|^2 on the core, one-dimensional profiles on the handles. The
// constructor validates the whole geometry: frames, gluing tangency,
// convexity of each profile, the supporting face, face containment in the
// core boundary, and pairwise disjointness of the handles.
class HandleFamilyFn final : public ConvexFunction {
 public:
  HandleFamilyFn(Mat core_normals, Vec core_offsets, double k, std::vector<Handle> handles)
      : ConvexFunction(make_domain(core_normals, core_offsets, handles)),
        k_(k),
        handles_(std::move(handles)) {
    if (!(k_ > 0.0)) throw Error(ErrorCode::BadSpec, "core coefficient must be positive");
    const int n = dim();
    const Mat& N = glued().normals();
    const Vec& off = glued().offsets();

    for (size_t l = 0; l < handles_.size(); ++l) {
      const Handle& h = handles_[l];
      std::string tag = "handle " + std::to_string(l);
      detail::check_rotation_frame(h.frame, tag.c_str());
      if (!(h.b > h.p)) throw Error(ErrorCode::BadSpec, tag + ": empty interval");
      if (h.face_lo.size() != n - 1 || h.face_hi.size() != n - 1 ||
          !((h.face_hi - h.face_lo).array() > 0.0).all())
        throw Error(ErrorCode::BadSpec, tag + ": transverse box is empty");

      // tangency of the profile to k t^2 at p, through second order
      Jet1 j = h.profile->jet(h.p);
      double s = std::max(1.0, std::abs(k_) * std::max(1.0, h.p * h.p));
      if (std::abs(j.v - k_ * h.p * h.p) > 1e-9 * s || std::abs(j.d1 - 2.0 * k_ * h.p) > 1e-9 * s ||
          std::abs(j.d2 - 2.0 * k_) > 1e-9 * s)
        throw Error(ErrorCode::BadSpec, tag + ": profile is not tangent to the core at the face");

      // convexity certificate for the profile across the handle
      double thi = std::min(h.b, h.profile->hi());
      double span = thi - h.p;
      for (int i = 0; i <= 10000; ++i) {
        double t = h.p + span * (i / 10000.0);
        if (t >= h.profile->hi()) t = h.p + span * (1.0 - 1e-9);
        if (h.profile->d2(t) <= 0.0)
          throw Error(ErrorCode::ConvexityCertificateFailed,
                      tag + ": profile loses convexity inside the handle");
      }

      // the core must have the face among its constraints
      bool supported = false;
      for (int r = 0; r < N.rows(); ++r)
        if ((N.row(r).transpose() + h.frame.col(0)).cwiseAbs().maxCoeff() < 1e-9 &&
            std::abs(off[r] - h.p) < 1e-9)
          supported = true;
      if (!supported)
        throw Error(ErrorCode::BadSpec, tag + ": core has no supporting face for this handle");

      // the face closure must lie on the core boundary
      int m = n - 1;
      for (int corner = 0; corner < (1 << m); ++corner) {
        Vec y(n);
        y[0] = h.p;
        for (int c = 0; c < m; ++c) y[c + 1] = (corner & (1 << c)) ? h.face_hi[c] : h.face_lo[c];
        Vec x = h.frame * y;
        for (int r = 0; r < N.rows(); ++r) {
          if ((N.row(r).transpose() + h.frame.col(0)).cwiseAbs().maxCoeff() < 1e-9) continue;
          if (N.row(r).dot(x) + off[r] < -1e-9)
            throw Error(ErrorCode::BadSpec, tag + ": face leaves the core boundary");
        }
      }
    }

    for (size_t i = 0; i < handles_.size(); ++i)
      for (size_t j = i + 1; j < handles_.size(); ++j)
        if (!detail::boxes_disjoint(box_of(handles_[i]), box_of(handles_[j])))
          throw Error(ErrorCode::RegionOverlap, "handles " + std::to_string(i) + " and " +
                                                    std::to_string(j) + " intersect");
  }

  std::string kind() const override { return "handles"; }
  double core_coeff() const { return k_; }
  const std::vector<Handle>& handles() const { return handles_; }
  const GluedDomain& glued() const { return static_cast<const GluedDomain&>(domain()); }
  Region region(const Vec& x) const { return glued().region(x); }

  // world point of handle l at relative depth along in (0,1) and transverse
  // position t in the open face box
  Vec handle_point(int l, double along, const Vec& transverse) const {
    const Handle& h = handles_.at(l);
    Vec y(dim());
    y[0] = h.p + along * (h.b - h.p);
    for (int c = 0; c + 1 < dim(); ++c) y[c + 1] = transverse[c];
    return h.frame * y;
  }

 protected:
  Jet3 jet3_impl(const Vec& x) const override {
    Region r = region(x);
    const int n = dim();
    if (r.kind == RegionKind::Outside)
      throw Error(ErrorCode::OutOfDomain, "point outside the glued domain");
    Jet3 j = Jet3::zero(n);
    if (r.kind == RegionKind::Core) {
      j.value = k_ * x.squaredNorm();
      j.grad = 2.0 * k_ * x;
      j.hess = 2.0 * k_ * Mat::Identity(n, n);
      return j;
    }
    const Handle& h = handles_[r.handle];
    Vec y = h.frame.transpose() * x;
    Jet1 p = h.profile->jet(y[0]);
    double rest = y.squaredNorm() - y[0] * y[0];
    j.value = p.v + k_ * rest;
    Vec gy(n);
    gy[0] = p.d1;
    for (int c = 1; c < n; ++c) gy[c] = 2.0 * k_ * y[c];
    j.grad = h.frame * gy;
    Vec dy = Vec::Constant(n, 2.0 * k_);
    dy[0] = p.d2;
    j.hess = h.frame * dy.asDiagonal() * h.frame.transpose();
    for (int a = 0; a < n; ++a)
      for (int bb = 0; bb < n; ++bb)
        for (int c = 0; c < n; ++c)
          j.third(a, bb, c) = p.d3 * h.frame(a, 0) * h.frame(bb, 0) * h.frame(c, 0);
    return j;
  }

 private:
  static GluedDomain::HandleBox box_of(const Handle& h) {
    return {h.frame, h.p, h.b, h.face_lo, h.face_hi};
  }
  static DomainPtr make_domain(const Mat& normals, const Vec& offsets,
                               const std::vector<Handle>& handles) {
    if (normals.rows() != offsets.size() || normals.cols() < 1)
      throw Error(ErrorCode::BadSpec, "core polytope rows and offsets disagree");
    std::vector<GluedDomain::HandleBox> boxes;
    boxes.reserve(handles.size());
    for (const Handle& h : handles) boxes.push_back(box_of(h));
    return std::make_shared<GluedDomain>(normals, offsets, std::move(boxes));
  }

  double k_;
  std::vector<Handle> handles_;
};

using HandleFamilyPtr = std::shared_ptr<const HandleFamilyFn>;

inline HandleFamilyPtr build_handle_family(Mat core_normals, Vec core_offsets, double k,
                                           std::vector<Handle> handles) {
  return std::make_shared<HandleFamilyFn>(std::move(core_normals), std::move(core_offsets), k,
                                          std::move(handles));
}

// Deterministic samples inside handle l, stratified along the primary
// direction and kept off the walls by the margin.
inline std::vector<Vec> sample_handle(const HandleFamilyFn& f, int l, int count,
                                      double margin = 0.05) {
  const Handle& h = f.handles().at(l);
  const int n = f.dim();
  std::vector<Vec> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    Vec u = halton_point(i + 1, n);
    double along = margin + (1.0 - 2.0 * margin) * u[0];
    Vec tr(n - 1);
    for (int c = 0; c + 1 < n; ++c) {
      double w = h.face_hi[c] - h.face_lo[c];
      tr[c] = h.face_lo[c] + w * (margin + (1.0 - 2.0 * margin) * u[c + 1]);
    }
    out.push_back(f.handle_point(l, along, tr));
  }
  return out;
}

struct GluingReport {
  // worst gap between the one-sided derivative estimates across the face,
  // indexed by derivative order 0..max_order
  std::vector<double> order_gap;
  // misuse notes for caller-supplied probe points, e.g. NotOnInterface
  std::vector<std::string> flags;
};

namespace detail {

// weights of the one-sided m-th derivative estimate on nodes 0..m+1 (second
// order accurate, so exact on the quadratic core side)
inline std::vector<double> one_sided_weights(int m) {
  const int nn = m + 2;
  Mat A(nn, nn);
  Vec rhs = Vec::Zero(nn);
  for (int q = 0; q < nn; ++q)
    for (int i = 0; i < nn; ++i) A(q, i) = std::pow(static_cast<double>(i), q);
  double mfact = 1.0;
  for (int q = 2; q <= m; ++q) mfact *= q;
  rhs[m] = mfact;
  Vec w = A.fullPivLu().solve(rhs);
  return std::vector<double>(w.data(), w.data() + nn);
}

}  // namespace detail

namespace detail {

// accumulate the gluing gaps at one face point y (handle coordinates,
// y[0] == p exactly) into the report
inline void gluing_accumulate(const HandleFamilyFn& f, const Handle& hd, const Vec& y, double h,
                              int max_order, GluingReport& rep) {
  const int n = f.dim();
  Vec d = hd.frame.col(0);
  Vec x0 = hd.frame * y;

  // order 0 is the structural continuity gap between the two formulas,
  // written out directly on each side of the dispatch
  double handle_val = hd.profile->value(hd.p) + f.core_coeff() * y.tail(n - 1).squaredNorm();
  rep.order_gap[0] =
      std::max(rep.order_gap[0], std::abs(handle_val - f.core_coeff() * x0.squaredNorm()));

  for (int m = 1; m <= max_order; ++m) {
    std::vector<double> w = one_sided_weights(m);
    double fwd = w[0] * handle_val, bwd = w[0] * f.value(x0);
    double flip = (m % 2 == 0) ? 1.0 : -1.0;
    for (size_t i = 1; i < w.size(); ++i) {
      fwd += w[i] * f.value(x0 + static_cast<double>(i) * h * d);
      bwd += w[i] * f.value(x0 - static_cast<double>(i) * h * d);
    }
    double hm = std::pow(h, m);
    rep.order_gap[m] = std::max(rep.order_gap[m], std::abs(fwd - flip * bwd) / hm);
  }
}

inline const Handle& checked_handle(const HandleFamilyFn& f, int handle, int max_order) {
  if (handle < 0 || handle >= static_cast<int>(f.handles().size()))
    throw Error(ErrorCode::BadSpec, "no such handle");
  if (max_order < 0 || max_order > 5)
    throw Error(ErrorCode::BadSpec, "gluing orders are measurable up to 5 only");
  return f.handles()[handle];
}

}  // namespace detail

// One-sided difference quotients of matching order on the core and handle
// sides of a face, compared at sample points of the face. The estimates are
// second-order accurate, hence exact on the quadratic core; what remains is
// the profile's departure from the quadratic within stencil reach, so the
// probe step must sit well inside the scale on which the profile turns on.
// Orders above 5 sink below the roundoff floor of the quotients.
inline GluingReport gluing_smoothness_check(const HandleFamilyFn& f, int handle, int face_samples = 20,
                                            double h = 1e-2, int max_order = 3) {
  const Handle& hd = detail::checked_handle(f, handle, max_order);
  const int n = f.dim();

  GluingReport rep;
  rep.order_gap.assign(max_order + 1, 0.0);

  for (int s = 0; s < face_samples; ++s) {
    Vec u = halton_point(s + 1, n - 1);
    Vec y(n);
    y[0] = hd.p;
    for (int c = 0; c + 1 < n; ++c) {
      double w = hd.face_hi[c] - hd.face_lo[c];
      y[c + 1] = hd.face_lo[c] + w * (0.1 + 0.8 * u[c]);
    }
    detail::gluing_accumulate(f, hd, y, h, max_order, rep);
  }
  return rep;
}

// The same measurement at caller-supplied world points. A probe that does not
// sit on the gluing hyperplane (or leaves the open face box) is flagged
// NotOnInterface and skipped rather than silently measured somewhere else.
inline GluingReport gluing_smoothness_check(const HandleFamilyFn& f, int handle,
                                            const std::vector<Vec>& probes, double h = 1e-2,
                                            int max_order = 3) {
  const Handle& hd = detail::checked_handle(f, handle, max_order);
  const int n = f.dim();

  GluingReport rep;
  rep.order_gap.assign(max_order + 1, 0.0);

  for (size_t s = 0; s < probes.size(); ++s) {
    Vec y = hd.frame.transpose() * probes[s];
    bool on_face = std::abs(y[0] - hd.p) <= 1e-9 * std::max(1.0, std::abs(hd.p));
    for (int c = 0; c + 1 < n; ++c)
      if (y[c + 1] <= hd.face_lo[c] || y[c + 1] >= hd.face_hi[c]) on_face = false;
    if (!on_face) {
      rep.flags.push_back("probe " + std::to_string(s) + ": NotOnInterface");
      continue;
    }
    y[0] = hd.p;  // snap roundoff drift onto the hyperplane
    detail::gluing_accumulate(f, hd, y, h, max_order, rep);
  }
  return rep;
}

struct StratumTrace {
  std::map<std::string, int> counts;  // signature string -> sample count
};

// Eigenvalue-multiplicity signature of the Hessian at each point, checked
// against what the region admits: the core is fully degenerate, a handle
// may split off the profile eigenvalue in either direction.
inline StratumTrace stratum_trace(const HandleFamilyFn& f, const std::vector<Vec>& points,
                                  double rel_gap = 1e-6) {
  const int n = f.dim();
  StratumTrace tr;
  for (const Vec& x : points) {
    Region r = f.region(x);
    Mat H = f.jet3(x).hess;
    Eigen::SelfAdjointEigenSolver<Mat> es(H, Eigen::EigenvaluesOnly);
    auto sig = multiplicity_signature(es.eigenvalues(), rel_gap);
    std::string name = signature_string(sig);
    bool ok = false;
    if (static_cast<int>(sig.size()) == 1 && sig[0] == n) ok = true;  // fully degenerate
    if (r.kind == RegionKind::HandleRegion && sig.size() == 2 &&
        (sig == std::vector<int>{1, n - 1} || sig == std::vector<int>{n - 1, 1}))
      ok = true;
    if (!ok)
      throw Error(ErrorCode::UnexpectedStratum,
                  "signature " + name + " in region " + region_name(r));
    ++tr.counts[name];
  }
  return tr;
}

struct NoCommonReport {
  enum class Status { Separated, CommonFound, NotApplicable } status;
  double margin = 0.0;  // minimized worst off-diagonal mass over the frame search
};

// Two handles in general position admit no single frame diagonalizing the
// Hessian on both; the margin is the minimized worst off-diagonal mass. For
// parallel or perpendicular primaries the frames are compatible by
// construction and the question does not separate anything.
inline NoCommonReport no_common_characteristics_check(const HandleFamilyFn& f, int i, int j,
                                                      int per_handle = 40) {
  const auto& hs = f.handles();
  if (i < 0 || j < 0 || i >= static_cast<int>(hs.size()) || j >= static_cast<int>(hs.size()) || i == j)
    throw Error(ErrorCode::BadSpec, "need two distinct handles");
  double align = std::abs(hs[i].frame.col(0).dot(hs[j].frame.col(0)));
  if (align > 1.0 - 1e-9 || align < 1e-9) return {NoCommonReport::Status::NotApplicable, 0.0};

  std::vector<Vec> pts = sample_handle(f, i, per_handle);
  std::vector<Vec> more = sample_handle(f, j, per_handle);
  pts.insert(pts.end(), more.begin(), more.end());
  RecoveryResult r = characteristic_recovery(f, pts);
  if (r.found) return {NoCommonReport::Status::CommonFound, r.max_offdiag};
  return {NoCommonReport::Status::Separated, r.max_offdiag};
}

// Structural conjugate of the whole family: the core maps to a core with
// the same face normals, each handle stays on its face with the gluing data
// rescaled by the slope map, and each profile is replaced by its conjugate.
// A barrier profile has slopes running to infinity; its conjugate handle is
// truncated at slope_cap, which bounds the domain while leaving every
// sampling radius of interest untouched.
inline HandleFamilyPtr conjugate_handle_family(const HandleFamilyFn& f, double slope_cap = 0.0) {
  double k = f.core_coeff();
  double ks = 1.0 / (4.0 * k);
  Mat N = f.glued().normals();
  Vec off = 2.0 * k * f.glued().offsets();

  std::vector<Handle> hs;
  for (const Handle& h : f.handles()) {
    Handle c;
    c.frame = h.frame;
    c.p = 2.0 * k * h.p;
    double tlo = h.p - std::max(1.0, h.b - h.p);
    double thi;
    if (h.profile->in_domain(h.b)) {
      thi = h.b;
    } else {
      double cap = slope_cap > 0.0 ? slope_cap : 20.0 * (std::abs(2.0 * k * h.b) + 1.0);
      double lo = h.p, hi = h.b;
      for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (!h.profile->in_domain(mid) || h.profile->d1(mid) > cap)
          hi = mid;
        else
          lo = mid;
      }
      thi = lo;
    }
    c.profile = std::make_shared<ConjugatePiece>(h.profile, tlo, thi);
    c.b = c.profile->hi();
    c.face_lo = 2.0 * k * h.face_lo;
    c.face_hi = 2.0 * k * h.face_hi;
    hs.push_back(std::move(c));
  }
  return build_handle_family(std::move(N), std::move(off), ks, std::move(hs));
}

}  // namespace hesslab
