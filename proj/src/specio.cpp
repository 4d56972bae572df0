#include "hesslab/specio.hpp"

#include <fstream>

namespace hesslab {

namespace {

using nlohmann::json;

Vec vec_from(const json& a) {
  Vec v(a.size());
  for (size_t i = 0; i < a.size(); ++i) v[static_cast<int>(i)] = a[i].get<double>();
  return v;
}

json vec_to(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Mat mat_from(const json& a) {
  if (a.empty()) throw Error(ErrorCode::BadSpec, "empty matrix in spec");
  Mat m(a.size(), a[0].size());
  for (size_t r = 0; r < a.size(); ++r) {
    if (a[r].size() != a[0].size()) throw Error(ErrorCode::BadSpec, "ragged matrix in spec");
    for (size_t c = 0; c < a[r].size(); ++c)
      m(static_cast<int>(r), static_cast<int>(c)) = a[r][c].get<double>();
  }
  return m;
}

json mat_to(const Mat& m) {
  json a = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    a.push_back(std::move(row));
  }
  return a;
}

const json& params_of(const json& spec) {
  if (!spec.is_object() || !spec.contains("kind") || !spec.contains("params"))
    throw Error(ErrorCode::BadSpec, "spec needs \"kind\" and \"params\"");
  return spec.at("params");
}

std::string kind_of(const json& spec) { return spec.at("kind").get<std::string>(); }

double num(const json& p, const char* key) {
  if (!p.contains(key)) throw Error(ErrorCode::BadSpec, std::string("spec misses \"") + key + "\"");
  return p.at(key).get<double>();
}

// missing keys and type mismatches surface as BadSpec, not json exceptions
template <typename F>
auto guarded(const char* what, F&& body) {
  try {
    return body();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadSpec, std::string("bad ") + what + " spec: " + e.what());
  }
}

PiecePtr load_piece_impl(const json& spec) {
  const std::string kind = kind_of(spec);
  const json& p = params_of(spec);
  if (kind == "quadratic") return std::make_shared<QuadraticPiece>(num(p, "coeff"));
  if (kind == "exp") return std::make_shared<ExpPiece>(num(p, "weight"), num(p, "rate"));
  if (kind == "power")
    return std::make_shared<PowerPiece>(p.at("degree").get<int>(), num(p, "coeff"));
  if (kind == "logbarrier")
    return std::make_shared<LogBarrierPiece>(num(p, "offset"), num(p, "slope"));
  if (kind == "flatglued")
    return std::make_shared<FlatGluedPiece>(num(p, "coeff"), num(p, "glue"), num(p, "bump_amp"));
  if (kind == "barrierglued")
    return std::make_shared<BarrierGluedPiece>(num(p, "coeff"), num(p, "glue"), num(p, "wall"),
                                               num(p, "blend_coeff"));
  if (kind == "sum") {
    std::vector<PiecePtr> parts;
    for (const json& q : p.at("parts")) parts.push_back(load_piece_impl(q));
    return std::make_shared<SumPiece>(std::move(parts));
  }
  throw Error(ErrorCode::BadSpec, "unknown piece kind: " + kind);
}

DomainPtr load_domain_impl(const json& spec) {
  const std::string kind = kind_of(spec);
  const json& p = params_of(spec);
  if (kind == "box") return std::make_shared<BoxDomain>(vec_from(p.at("lo")), vec_from(p.at("hi")));
  if (kind == "polytope") {
    Mat normals = mat_from(p.at("normals"));
    Vec offsets = vec_from(p.at("offsets"));
    if (p.contains("bbox_lo"))
      return std::make_shared<PolytopeDomain>(std::move(normals), std::move(offsets),
                                              vec_from(p.at("bbox_lo")), vec_from(p.at("bbox_hi")));
    return std::make_shared<PolytopeDomain>(std::move(normals), std::move(offsets));
  }
  if (kind == "rotated")
    return std::make_shared<RotatedDomain>(mat_from(p.at("frame")), load_domain_impl(p.at("inner")));
  throw Error(ErrorCode::BadSpec, "unknown domain kind: " + kind);
}

FnPtr load_function_impl(const json& spec) {
  const std::string kind = kind_of(spec);
  const json& p = params_of(spec);
  const int dim = spec.contains("dim") ? spec.at("dim").get<int>() : 0;
  auto domain_or = [&](DomainPtr fallback) -> DomainPtr {
    return p.contains("domain") ? load_domain_impl(p.at("domain")) : fallback;
  };

  if (kind == "quadratic")
    return std::make_shared<QuadraticFn>(dim, num(p, "coeff"), domain_or(nullptr));
  if (kind == "separable") {
    std::vector<PiecePtr> pieces;
    for (const json& q : p.at("pieces")) pieces.push_back(load_piece_impl(q));
    return std::make_shared<SeparableSumFn>(std::move(pieces), domain_or(nullptr));
  }
  if (kind == "rotated")
    return std::make_shared<RotatedComposeFn>(mat_from(p.at("frame")),
                                              load_function_impl(p.at("inner")));
  if (kind == "expaffine") {
    std::vector<double> weights = p.at("weights").get<std::vector<double>>();
    std::vector<Vec> directions;
    for (const json& d : p.at("directions")) directions.push_back(vec_from(d));
    DomainPtr dom = domain_or(dim > 0 ? BoxDomain::cube(dim, 5.0) : nullptr);
    if (!dom) throw Error(ErrorCode::BadSpec, "expaffine needs a domain or a dim");
    return std::make_shared<ExpAffineFn>(std::move(weights), std::move(directions), std::move(dom));
  }
  if (kind == "custom") {
    std::vector<FnPtr> terms;
    for (const json& t : p.at("terms")) terms.push_back(load_function_impl(t));
    DomainPtr dom = p.contains("domain") ? load_domain_impl(p.at("domain"))
                                         : (terms.empty() ? nullptr : terms.front()->domain_ptr());
    return std::make_shared<CustomSumFn>(std::move(terms), std::move(dom));
  }
  if (kind == "handles") {
    const json& core = p.at("core");
    Mat normals = mat_from(core.at("normals"));
    Vec offsets = vec_from(core.at("offsets"));
    double k = num(core, "coeff");
    std::vector<Handle> hs;
    for (const json& h : p.at("handles")) {
      Handle hd;
      hd.frame = mat_from(h.at("frame"));
      hd.p = num(h, "glue");
      hd.b = num(h, "reach");
      hd.face_lo = vec_from(h.at("face_lo"));
      hd.face_hi = vec_from(h.at("face_hi"));
      hd.profile = load_piece_impl(h.at("profile"));
      hs.push_back(std::move(hd));
    }
    return build_handle_family(normals, offsets, k, hs);
  }
  throw Error(ErrorCode::BadSpec, "unknown function kind: " + kind);
}

}  // namespace

PiecePtr load_piece(const json& spec) {
  return guarded("piece", [&] { return load_piece_impl(spec); });
}

DomainPtr load_domain(const json& spec) {
  return guarded("domain", [&] { return load_domain_impl(spec); });
}

FnPtr load_function(const json& spec) {
  return guarded("function", [&] { return load_function_impl(spec); });
}

json save_piece(const OneDPiece& piece) {
  json p;
  std::string kind;
  if (auto* q = dynamic_cast<const QuadraticPiece*>(&piece)) {
    kind = "quadratic";
    p["coeff"] = q->coeff();
  } else if (auto* e = dynamic_cast<const ExpPiece*>(&piece)) {
    kind = "exp";
    p["weight"] = e->weight();
    p["rate"] = e->rate();
  } else if (auto* w = dynamic_cast<const PowerPiece*>(&piece)) {
    kind = "power";
    p["degree"] = w->degree();
    p["coeff"] = w->coeff();
  } else if (auto* l = dynamic_cast<const LogBarrierPiece*>(&piece)) {
    kind = "logbarrier";
    p["offset"] = l->offset();
    p["slope"] = l->slope();
  } else if (auto* f = dynamic_cast<const FlatGluedPiece*>(&piece)) {
    kind = "flatglued";
    p["coeff"] = f->quad_coeff();
    p["glue"] = f->glue_param();
    p["bump_amp"] = f->bump_amp();
  } else if (auto* b = dynamic_cast<const BarrierGluedPiece*>(&piece)) {
    kind = "barrierglued";
    p["coeff"] = b->quad_coeff();
    p["glue"] = b->glue_param();
    p["wall"] = b->wall();
    p["blend_coeff"] = b->blend_coeff();
  } else if (auto* s = dynamic_cast<const SumPiece*>(&piece)) {
    kind = "sum";
    json parts = json::array();
    for (const auto& part : s->parts()) parts.push_back(save_piece(*part));
    p["parts"] = std::move(parts);
  } else {
    throw Error(ErrorCode::BadSpec, "piece kind does not serialize");
  }
  return json{{"kind", kind}, {"params", p}};
}

json save_domain(const Domain& dom) {
  json p;
  std::string kind;
  if (auto* b = dynamic_cast<const BoxDomain*>(&dom)) {
    kind = "box";
    p["lo"] = vec_to(b->lo());
    p["hi"] = vec_to(b->hi());
  } else if (auto* t = dynamic_cast<const PolytopeDomain*>(&dom)) {
    kind = "polytope";
    p["normals"] = mat_to(t->normals());
    p["offsets"] = vec_to(t->offsets());
    auto [lo, hi] = t->bounding_box();
    p["bbox_lo"] = vec_to(lo);
    p["bbox_hi"] = vec_to(hi);
  } else if (auto* r = dynamic_cast<const RotatedDomain*>(&dom)) {
    kind = "rotated";
    p["frame"] = mat_to(r->frame());
    p["inner"] = save_domain(*r->inner());
  } else {
    throw Error(ErrorCode::BadSpec, "domain kind does not serialize");
  }
  return json{{"kind", kind}, {"params", p}};
}

json save_function(const ConvexFunction& f) {
  json p;
  std::string kind;
  if (auto* q = dynamic_cast<const QuadraticFn*>(&f)) {
    kind = "quadratic";
    p["coeff"] = q->coeff();
    p["domain"] = save_domain(f.domain());
  } else if (auto* s = dynamic_cast<const SeparableSumFn*>(&f)) {
    kind = "separable";
    json pieces = json::array();
    for (const auto& piece : s->pieces()) pieces.push_back(save_piece(*piece));
    p["pieces"] = std::move(pieces);
    p["domain"] = save_domain(f.domain());
  } else if (auto* r = dynamic_cast<const RotatedComposeFn*>(&f)) {
    kind = "rotated";
    p["frame"] = mat_to(r->frame());
    p["inner"] = save_function(*r->inner());
  } else if (auto* e = dynamic_cast<const ExpAffineFn*>(&f)) {
    kind = "expaffine";
    p["weights"] = e->weights();
    json dirs = json::array();
    for (const Vec& d : e->directions()) dirs.push_back(vec_to(d));
    p["directions"] = std::move(dirs);
    p["domain"] = save_domain(f.domain());
  } else if (auto* c = dynamic_cast<const CustomSumFn*>(&f)) {
    kind = "custom";
    json terms = json::array();
    for (const auto& t : c->terms()) terms.push_back(save_function(*t));
    p["terms"] = std::move(terms);
    p["domain"] = save_domain(f.domain());
  } else if (auto* h = dynamic_cast<const HandleFamilyFn*>(&f)) {
    kind = "handles";
    p["core"] = json{{"normals", mat_to(h->glued().normals())},
                     {"offsets", vec_to(h->glued().offsets())},
                     {"coeff", h->core_coeff()}};
    json hs = json::array();
    for (const Handle& hd : h->handles()) {
      hs.push_back(json{{"frame", mat_to(hd.frame)},
                        {"glue", hd.p},
                        {"reach", hd.b},
                        {"face_lo", vec_to(hd.face_lo)},
                        {"face_hi", vec_to(hd.face_hi)},
                        {"profile", save_piece(*hd.profile)}});
    }
    p["handles"] = std::move(hs);
  } else {
    throw Error(ErrorCode::BadSpec, "function kind does not serialize: " + f.kind());
  }
  return json{{"kind", kind}, {"dim", f.dim()}, {"params", p}};
}

FnPtr load_function_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::BadSpec, "cannot open spec file: " + path);
  json spec;
  try {
    in >> spec;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadSpec, "malformed JSON in " + path + ": " + e.what());
  }
  return load_function(spec);
}

}  // namespace hesslab
