#include "hesslab/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hesslab/connection.hpp"
#include "hesslab/handles.hpp"
#include "hesslab/jets2d.hpp"
#include "hesslab/legendre.hpp"
#include "hesslab/poisson.hpp"
#include "hesslab/propi.hpp"
#include "hesslab/report.hpp"
#include "hesslab/specio.hpp"

namespace hesslab::cli {

namespace {

constexpr int kPass = 0, kFail = 1, kUsage = 2;

struct RunConfig {
  std::string spec_path;
  std::string domain_path;  // optional override for the sampling region
  int samples = 200;
  Tolerances tol;
  double h = 1e-2;      // gluing probe step
  int orders = 3;       // gluing orders
  double step = 1e-3;   // lift integrator step
  std::string point;    // explicit evaluation point "x1,x2,..."
  std::string probe;    // gluing probe point
  int handle = -1;      // restrict handle checks to one handle
  std::string out_path;
  std::string format = "csv";
};

void add_common(CLI::App* cmd, RunConfig& cfg, bool needs_spec = true) {
  auto* spec = cmd->add_option("--spec", cfg.spec_path, "function spec (JSON)");
  if (needs_spec) spec->required();
  cmd->add_option("--domain", cfg.domain_path, "domain spec overriding the sampling region");
  cmd->add_option("--samples", cfg.samples, "sample count")->check(CLI::PositiveNumber);
  cmd->add_option("--zero-tol", cfg.tol.zero, "below: numerically zero")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--nonzero-tol", cfg.tol.nonzero, "above: structurally nonzero")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out", cfg.out_path, "write the report here instead of stdout");
  cmd->add_option("--format", cfg.format, "report format")
      ->check(CLI::IsMember({"csv", "json"}));
}

Vec parse_point(const std::string& text) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
  Vec x(static_cast<int>(vals.size()));
  for (size_t i = 0; i < vals.size(); ++i) x[static_cast<int>(i)] = vals[i];
  return x;
}

std::vector<Vec> sample_points(const ConvexFunction& f, const RunConfig& cfg) {
  if (!cfg.point.empty()) return {parse_point(cfg.point)};
  if (!cfg.domain_path.empty()) {
    std::ifstream in(cfg.domain_path);
    if (!in) throw Error(ErrorCode::BadSpec, "cannot open domain file: " + cfg.domain_path);
    nlohmann::json j;
    in >> j;
    DomainPtr dom = load_domain(j);
    std::vector<Vec> pts;
    for (const Vec& x : dom->sample(4 * cfg.samples))
      if (f.domain().contains(x)) {
        pts.push_back(x);
        if (static_cast<int>(pts.size()) == cfg.samples) break;
      }
    if (static_cast<int>(pts.size()) < cfg.samples)
      throw Error(ErrorCode::BadSpec, "domain override misses the function domain");
    return pts;
  }
  return f.domain().sample(cfg.samples);
}

int emit(const RunConfig& cfg, const std::vector<ReportTable>& tables, int exit_code) {
  std::string text = cfg.format == "json" ? tables_to_json(tables) : tables_to_csv(tables);
  if (cfg.out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(cfg.out_path, std::ios::binary);
    if (!out) {
      std::cerr << "cannot write " << cfg.out_path << "\n";
      return kUsage;
    }
    out << text;
  }
  return exit_code;
}

const char* verdict(bool pass) { return pass ? "PASS" : "FAIL"; }

// ---- subcommands ---------------------------------------------------------

int run_check_propi(const RunConfig& cfg) {
  FnPtr f = load_function_file(cfg.spec_path);
  std::vector<Vec> pts = sample_points(*f, cfg);
  std::vector<EquivRow> rows = symmetry_equiv_check(*f, pts, cfg.tol);

  ReportTable t;
  t.title = "propi equivalence routes";
  t.columns = {"row", "residual", "symmetry_defect", "commutator_defect", "class", "verdict"};
  bool all_pass = true;
  for (size_t i = 0; i < rows.size(); ++i) {
    const EquivRow& r = rows[i];
    bool pass = r.class_R == Classification::Zero && classes_agree(r);
    all_pass = all_pass && pass;
    t.add_row({format_index(static_cast<int>(i)), format_number(r.max_R),
               format_number(r.max_defect), format_number(r.max_commutator),
               classification_name(r.class_R), verdict(pass)});
  }
  return emit(cfg, {t}, all_pass ? kPass : kFail);
}

int run_christoffel(const RunConfig& cfg) {
  FnPtr f = load_function_file(cfg.spec_path);
  std::vector<Vec> pts = sample_points(*f, cfg);

  ReportTable t;
  t.title = "connection matrices: symmetry defect per sample";
  t.columns = {"row", "symmetry_defect", "class", "verdict"};
  bool all_pass = true;
  for (size_t i = 0; i < pts.size(); ++i) {
    Jet3 j = f->jet3(pts[i]);
    double defect = symmetry_defect(j);
    Classification c = classify(defect, max_abs(hess_inverse(j)), cfg.tol);
    bool pass = c == Classification::Zero;
    all_pass = all_pass && pass;
    t.add_row({format_index(static_cast<int>(i)), format_number(defect), classification_name(c),
               verdict(pass)});
  }

  std::vector<ReportTable> tables{t};
  if (!cfg.point.empty()) {
    ReportTable g;
    g.title = "connection matrix entries at the probe point";
    g.columns = {"k", "i", "j", "value"};
    std::vector<Mat> gam = christoffel(*f, parse_point(cfg.point));
    for (size_t k = 0; k < gam.size(); ++k)
      for (int i = 0; i < gam[k].rows(); ++i)
        for (int j = 0; j < gam[k].cols(); ++j)
          g.add_row({format_index(static_cast<int>(k)), format_index(i), format_index(j),
                     format_number(gam[k](i, j))});
    tables.push_back(std::move(g));
  }
  return emit(cfg, tables, all_pass ? kPass : kFail);
}

int run_jets2d(const RunConfig& cfg) {
  FnPtr f = load_function_file(cfg.spec_path);
  if (f->dim() != 2) throw Error(ErrorCode::BadSpec, "jets2d needs a two-dimensional function");
  std::vector<Vec> pts = sample_points(*f, cfg);

  ReportTable t;
  t.title = "quadric and cubic vanishing per sample";
  t.columns = {"row", "quadric_max", "cubic_max", "class_quadric", "class_cubic", "verdict"};
  bool all_pass = true;
  for (size_t i = 0; i < pts.size(); ++i) {
    Jet2 j = Jet2::from_jet3(f->jet3(pts[i]));
    auto [q1, q2] = quadrics(j);
    auto [c1, c2] = cubics(j);
    double qm = std::max(std::abs(q1), std::abs(q2));
    double cm = std::max(std::abs(c1), std::abs(c2));
    Classification qc = classify(qm, 1.0, cfg.tol);
    Classification cc = classify(cm, 1.0, cfg.tol);
    // the two families must vanish together; disagreement is the failure
    bool pass = !((qc == Classification::Zero && cc == Classification::Nonzero) ||
                  (qc == Classification::Nonzero && cc == Classification::Zero));
    all_pass = all_pass && pass;
    t.add_row({format_index(static_cast<int>(i)), format_number(qm), format_number(cm),
               classification_name(qc), classification_name(cc), verdict(pass)});
  }
  return emit(cfg, {t}, all_pass ? kPass : kFail);
}

int run_characteristics(const RunConfig& cfg) {
  FnPtr f = load_function_file(cfg.spec_path);
  std::vector<Vec> pts = sample_points(*f, cfg);
  RecoveryResult rec = characteristic_recovery(*f, pts);

  ReportTable t;
  t.title = "shared diagonalizing frame search";
  t.columns = {"found", "angle", "max_offdiag"};
  t.add_row({rec.found ? "yes" : "no", format_number(rec.angle), format_number(rec.max_offdiag)});
  return emit(cfg, {t}, rec.found ? kPass : kFail);
}

int run_lift(const RunConfig& cfg, const std::string& from, const std::string& to) {
  FnPtr f = load_function_file(cfg.spec_path);
  Vec x0 = parse_point(from), x1 = parse_point(to);
  SegmentCurve curve(x0, x1);
  Mat a0 = orthonormal_frame(f->hessian(x0));
  LiftOptions opts;
  opts.step = cfg.step;
  opts.record_stride = std::max(1, static_cast<int>(std::lround(0.1 / cfg.step)));
  LiftResult res = horizontal_lift(*f, curve, a0, opts);

  ReportTable t;
  t.title = "horizontal lift along the segment";
  t.columns = {"t", "orthonormality_drift", "tangency_drift"};
  for (const LiftSample& s : res.samples)
    t.add_row({format_number(s.t), format_number(s.orth_drift), format_number(s.c_drift)});

  ReportTable s;
  s.title = "lift summary";
  s.columns = {"max_orthonormality_drift", "halving_gap", "verdict"};
  bool pass = res.max_orth_drift < 1e-7;
  s.add_row({format_number(res.max_orth_drift), format_number(res.halving_gap), verdict(pass)});
  return emit(cfg, {t, s}, pass ? kPass : kFail);
}

int run_legendre(const RunConfig& cfg) {
  FnPtr f = load_function_file(cfg.spec_path);
  std::vector<Vec> pts = sample_points(*f, cfg);

  ReportTable t;
  t.title = "conjugate involution per sample";
  t.columns = {"row", "value_gap", "grad_gap", "point_gap", "verdict"};
  bool all_pass = true;
  for (size_t i = 0; i < pts.size(); ++i) {
    InvolutionReport rep = involution_check(*f, pts[i]);
    double gap = std::max({rep.value_gap, rep.grad_gap, rep.point_gap});
    bool pass = gap < 1e-8;
    all_pass = all_pass && pass;
    t.add_row({format_index(static_cast<int>(i)), format_number(rep.value_gap),
               format_number(rep.grad_gap), format_number(rep.point_gap), verdict(pass)});
  }
  return emit(cfg, {t}, all_pass ? kPass : kFail);
}

const HandleFamilyFn& as_handles(const ConvexFunction& f) {
  const auto* h = dynamic_cast<const HandleFamilyFn*>(&f);
  if (!h) throw Error(ErrorCode::BadSpec, "this command needs a handles spec");
  return *h;
}

int run_handles_build(const RunConfig& cfg) {
  FnPtr f = load_function_file(cfg.spec_path);
  const HandleFamilyFn& fam = as_handles(*f);

  ReportTable t;
  t.title = "handle family build";
  t.columns = {"handle", "glue", "reach", "profile", "face_volume", "verdict"};
  for (size_t l = 0; l < fam.handles().size(); ++l) {
    const Handle& h = fam.handles()[l];
    double vol = 1.0;
    for (int c = 0; c < h.face_lo.size(); ++c) vol *= h.face_hi[c] - h.face_lo[c];
    t.add_row({format_index(static_cast<int>(l)), format_number(h.p), format_number(h.b),
               save_piece(*h.profile).at("kind").get<std::string>(), format_number(vol), "VALID"});
  }
  // round-trip check: the family reserializes to the identical spec
  std::ifstream in(cfg.spec_path);
  nlohmann::json original;
  in >> original;
  bool stable = save_function(fam) == original;
  ReportTable s;
  s.title = "spec round trip";
  s.columns = {"reserializes_identically"};
  s.add_row({stable ? "yes" : "no"});
  return emit(cfg, {t, s}, kPass);
}

int run_handles_check(const RunConfig& cfg) {
  FnPtr f = load_function_file(cfg.spec_path);
  const HandleFamilyFn& fam = as_handles(*f);
  const int count = static_cast<int>(fam.handles().size());
  bool all_pass = true;
  std::vector<ReportTable> tables;

  ReportTable g;
  g.title = "gluing smoothness gaps";
  g.columns = {"handle", "order", "gap", "verdict"};
  for (int l = 0; l < count; ++l) {
    if (cfg.handle >= 0 && l != cfg.handle) continue;
    GluingReport rep;
    if (!cfg.probe.empty())
      rep = gluing_smoothness_check(fam, l, std::vector<Vec>{parse_point(cfg.probe)}, cfg.h,
                                    cfg.orders);
    else
      rep = gluing_smoothness_check(fam, l, 20, cfg.h, cfg.orders);
    for (size_t m = 0; m < rep.order_gap.size(); ++m) {
      bool pass = m > 3 || rep.order_gap[m] < 1e-6;
      all_pass = all_pass && pass;
      g.add_row({format_index(l), format_index(static_cast<int>(m)),
                 format_number(rep.order_gap[m]), verdict(pass)});
    }
    for (const std::string& flag : rep.flags) {
      g.add_row({format_index(l), "probe", flag, "FLAG"});
      all_pass = false;
    }
  }
  tables.push_back(std::move(g));

  ReportTable st;
  st.title = "stratum trace";
  st.columns = {"signature", "count"};
  StratumTrace tr = stratum_trace(fam, fam.domain().sample(cfg.samples));
  for (const auto& [sig, n] : tr.counts) st.add_row({sig, std::to_string(n)});
  tables.push_back(std::move(st));

  ReportTable nc;
  nc.title = "pairwise characteristic separation";
  nc.columns = {"pair", "status", "margin"};
  for (int i = 0; i < count; ++i)
    for (int j = i + 1; j < count; ++j) {
      NoCommonReport rep = no_common_characteristics_check(fam, i, j);
      const char* status = rep.status == NoCommonReport::Status::Separated     ? "Separated"
                           : rep.status == NoCommonReport::Status::CommonFound ? "CommonFound"
                                                                               : "NotApplicable";
      if (rep.status == NoCommonReport::Status::CommonFound) all_pass = false;
      nc.add_row({format_index(i) + "-" + format_index(j), status, format_number(rep.margin)});
    }
  tables.push_back(std::move(nc));

  return emit(cfg, tables, all_pass ? kPass : kFail);
}

int run_poisson_commute(const RunConfig& cfg) {
  FnPtr f = load_function_file(cfg.spec_path);
  std::vector<Vec> pts = sample_points(*f, cfg);
  PoissonEquivReport rep = commuting_equiv_check(f, pts, cfg.tol);

  ReportTable t;
  t.title = "bracket with the standard structure vs curl residuals";
  t.columns = {"row", "bracket_max", "primal_residual", "conjugate_residual", "class", "verdict"};
  bool all_zero = true;
  for (size_t i = 0; i < rep.rows.size(); ++i) {
    const PoissonRow& r = rep.rows[i];
    bool zero = r.class_bracket == Classification::Zero;
    all_zero = all_zero && zero;
    t.add_row({format_index(static_cast<int>(i)), format_number(r.bracket_max),
               format_number(r.primal_residual), format_number(r.dual_residual),
               classification_name(r.class_bracket), verdict(zero)});
  }

  ReportTable s;
  s.title = "componentwise match of bracket against curl";
  s.columns = {"fitted_constant", "match_gap"};
  s.add_row({format_number(rep.fitted_constant), format_number(rep.match_gap)});
  return emit(cfg, {t, s}, all_zero ? kPass : kFail);
}

int run_report_all(const RunConfig& cfg) {
  FnPtr f = load_function_file(cfg.spec_path);
  std::vector<Vec> pts = sample_points(*f, cfg);
  std::vector<ReportTable> tables;
  int worst = kPass;

  {
    std::vector<EquivRow> rows = symmetry_equiv_check(*f, pts, cfg.tol);
    ReportTable t;
    t.title = "propi equivalence routes";
    t.columns = {"row", "residual", "symmetry_defect", "commutator_defect", "class"};
    for (size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].class_R != Classification::Zero) worst = kFail;
      t.add_row({format_index(static_cast<int>(i)), format_number(rows[i].max_R),
                 format_number(rows[i].max_defect), format_number(rows[i].max_commutator),
                 classification_name(rows[i].class_R)});
    }
    tables.push_back(std::move(t));
  }
  {
    PoissonEquivReport rep = commuting_equiv_check(f, pts, cfg.tol);
    ReportTable t;
    t.title = "bracket with the standard structure vs curl residuals";
    t.columns = {"row", "bracket_max", "primal_residual", "conjugate_residual", "class"};
    for (size_t i = 0; i < rep.rows.size(); ++i) {
      const PoissonRow& r = rep.rows[i];
      if (r.class_bracket != Classification::Zero) worst = kFail;
      t.add_row({format_index(static_cast<int>(i)), format_number(r.bracket_max),
                 format_number(r.primal_residual), format_number(r.dual_residual),
                 classification_name(r.class_bracket)});
    }
    tables.push_back(std::move(t));
  }
  if (f->dim() == 2) {
    RecoveryResult rec = characteristic_recovery(*f, pts);
    ReportTable t;
    t.title = "shared diagonalizing frame search";
    t.columns = {"found", "angle", "max_offdiag"};
    t.add_row(
        {rec.found ? "yes" : "no", format_number(rec.angle), format_number(rec.max_offdiag)});
    tables.push_back(std::move(t));
  }
  if (const auto* fam = dynamic_cast<const HandleFamilyFn*>(f.get())) {
    ReportTable t;
    t.title = "gluing smoothness gaps";
    t.columns = {"handle", "order", "gap"};
    for (size_t l = 0; l < fam->handles().size(); ++l) {
      GluingReport rep = gluing_smoothness_check(*fam, static_cast<int>(l), 20, cfg.h, cfg.orders);
      for (size_t m = 0; m < rep.order_gap.size(); ++m) {
        if (m <= 3 && rep.order_gap[m] >= 1e-6) worst = kFail;
        t.add_row({format_index(static_cast<int>(l)), format_index(static_cast<int>(m)),
                   format_number(rep.order_gap[m])});
      }
    }
    tables.push_back(std::move(t));
  }
  return emit(cfg, tables, worst);
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Hessian-metric invariant checks"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string lift_from, lift_to;

  CLI::App* propi = app.add_subcommand("check-propi", "curl residual and equivalent routes");
  add_common(propi, cfg);
  propi->add_option("--point", cfg.point, "single evaluation point x1,x2,...");

  CLI::App* chris = app.add_subcommand("christoffel", "connection matrices and symmetry defect");
  add_common(chris, cfg);
  chris->add_option("--point", cfg.point, "also list matrix entries at this point");

  CLI::App* jets = app.add_subcommand("jets2d", "two-dimensional jet identities");
  add_common(jets, cfg);
  jets->add_option("--point", cfg.point, "single evaluation point x1,x2");

  CLI::App* chars = app.add_subcommand("characteristics", "shared diagonalizing frame recovery");
  add_common(chars, cfg);

  CLI::App* lift = app.add_subcommand("lift", "horizontal lift along a segment");
  add_common(lift, cfg);
  lift->add_option("--from", lift_from, "segment start x1,x2,...")->required();
  lift->add_option("--to", lift_to, "segment end x1,x2,...")->required();
  lift->add_option("--step", cfg.step, "integrator step")->check(CLI::PositiveNumber);

  CLI::App* leg = app.add_subcommand("legendre", "conjugation and involution gaps");
  add_common(leg, cfg);
  leg->add_option("--point", cfg.point, "single evaluation point x1,x2,...");

  CLI::App* hb = app.add_subcommand("handles-build", "validate a handle-family spec");
  add_common(hb, cfg);

  CLI::App* hc = app.add_subcommand("handles-check", "gluing, strata and separation checks");
  add_common(hc, cfg);
  hc->add_option("--handle", cfg.handle, "restrict to one handle index");
  hc->add_option("--hstep", cfg.h, "one-sided difference step")->check(CLI::PositiveNumber);
  hc->add_option("--orders", cfg.orders, "highest gluing order")->check(CLI::Range(0, 5));
  hc->add_option("--probe", cfg.probe, "explicit probe point x1,x2,...");

  CLI::App* pc = app.add_subcommand("poisson-commute", "Schouten bracket vs curl residuals");
  add_common(pc, cfg);
  pc->add_option("--point", cfg.point, "single evaluation point x1,x2,...");

  CLI::App* all = app.add_subcommand("report-all", "every applicable check in one report");
  add_common(all, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kPass : kUsage;
  }

  try {
    if (propi->parsed()) return run_check_propi(cfg);
    if (chris->parsed()) return run_christoffel(cfg);
    if (jets->parsed()) return run_jets2d(cfg);
    if (chars->parsed()) return run_characteristics(cfg);
    if (lift->parsed()) return run_lift(cfg, lift_from, lift_to);
    if (leg->parsed()) return run_legendre(cfg);
    if (hb->parsed()) return run_handles_build(cfg);
    if (hc->parsed()) return run_handles_check(cfg);
    if (pc->parsed()) return run_poisson_commute(cfg);
    if (all->parsed()) return run_report_all(cfg);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return e.code() == ErrorCode::BadSpec ? kUsage : kFail;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace hesslab::cli
