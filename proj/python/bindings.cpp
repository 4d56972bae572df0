#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <memory>

#include "hesslab/connection.hpp"
#include "hesslab/handles.hpp"
#include "hesslab/jets2d.hpp"
#include "hesslab/legendre.hpp"
#include "hesslab/poisson.hpp"
#include "hesslab/propi.hpp"
#include "hesslab/specio.hpp"

namespace py = pybind11;
using namespace hesslab;

namespace {

using PyFn = std::shared_ptr<ConvexFunction>;

PyFn unconst(FnPtr f) { return std::const_pointer_cast<ConvexFunction>(std::move(f)); }

const HandleFamilyFn& as_handles(const ConvexFunction& f) {
  const auto* h = dynamic_cast<const HandleFamilyFn*>(&f);
  if (!h) throw Error(ErrorCode::BadSpec, "this operation needs a handle-family function");
  return *h;
}

}  // namespace

PYBIND11_MODULE(hesslab, m) {
  m.doc() = "Convex functions whose inverse Hessian field is curl-free: residuals, "
            "frame lifts, conjugates, handle families, and bracket checks";

  py::register_exception<Error>(m, "HesslabError");

  py::class_<ConvexFunction, PyFn>(m, "Function")
      .def_property_readonly("dim", &ConvexFunction::dim)
      .def_property_readonly("kind", &ConvexFunction::kind)
      .def("value", &ConvexFunction::value, py::arg("x"))
      .def("gradient", &ConvexFunction::gradient, py::arg("x"))
      .def("hessian", &ConvexFunction::hessian, py::arg("x"))
      .def("contains", [](const ConvexFunction& f, const Vec& x) { return f.domain().contains(x); },
           py::arg("x"))
      .def("sample", [](const ConvexFunction& f, int count) { return f.domain().sample(count); },
           py::arg("count"))
      .def("to_json", [](const ConvexFunction& f) { return save_function(f).dump(2); })
      .def("__repr__", [](const ConvexFunction& f) {
        return "<Function kind='" + f.kind() + "' dim=" + std::to_string(f.dim()) + ">";
      });

  m.def("load_function", [](const std::string& text) {
    return unconst(load_function(nlohmann::json::parse(text)));
  }, py::arg("json_text"), "Build a function from a JSON spec string");
  m.def("load_function_file", [](const std::string& path) {
    return unconst(load_function_file(path));
  }, py::arg("path"), "Build a function from a JSON spec file");

  // curl residual of the inverse Hessian field and its equivalent routes
  m.def("propi_residual", [](const ConvexFunction& f, const Vec& x) {
    return propi_residual(f, x).max_abs();
  }, py::arg("f"), py::arg("x"));
  m.def("fd_propi_residual", [](const ConvexFunction& f, const Vec& x, double h) {
    return fd_propi_residual(f, x, h).max_abs();
  }, py::arg("f"), py::arg("x"), py::arg("h") = 1e-3);
  m.def("symmetry_defect", [](const ConvexFunction& f, const Vec& x) {
    return symmetry_defect(f.jet3(x));
  }, py::arg("f"), py::arg("x"));
  m.def("commutator_defect", [](const ConvexFunction& f, const Vec& x) {
    return commutator_defect(f.jet3(x));
  }, py::arg("f"), py::arg("x"));
  m.def("christoffel", [](const ConvexFunction& f, const Vec& x) { return christoffel(f, x); },
        py::arg("f"), py::arg("x"), "Connection matrices H^-1 H_,k, one per coordinate");

  // matrix geometry of the frame bundle
  m.def("pi_map", &pi_map, py::arg("a"), py::arg("cond_limit") = 1e12);
  m.def("q_map", &q_map, py::arg("a"));
  m.def("cartan_factor", [](const Mat& c) {
    CartanFactor f = cartan_factor(c);
    return py::make_tuple(f.B, f.lambda);
  }, py::arg("c"), "Split an orthogonal-column matrix into (rotation, column norms)");
  m.def("rotation2", &rotation2, py::arg("theta"));

  // horizontal lift along the segment from a to b, started at the
  // deterministic orthonormal frame of H(a)
  m.def("horizontal_lift", [](const ConvexFunction& f, const Vec& a, const Vec& b, double step) {
    SegmentCurve curve(a, b);
    LiftOptions opts;
    opts.step = step;
    LiftResult r = horizontal_lift(f, curve, orthonormal_frame(f.hessian(a)), opts);
    return py::make_tuple(r.final_frame, r.max_orth_drift);
  }, py::arg("f"), py::arg("a"), py::arg("b"), py::arg("step") = 1e-3,
     "Returns (final frame, max orthonormality drift)");

  m.def("characteristic_recovery", [](const ConvexFunction& f, int samples) {
    RecoveryResult r = characteristic_recovery(f, f.domain().sample(samples));
    return py::make_tuple(r.found, r.angle, r.max_offdiag);
  }, py::arg("f"), py::arg("samples") = 50,
     "Search SO(n) for one frame diagonalizing the Hessian everywhere; "
     "returns (found, angle, max off-diagonal)");

  // Legendre conjugation
  m.def("conjugate_value", [](const ConvexFunction& f, const Vec& y) {
    return conjugate_jet3(f, y).jet.value;
  }, py::arg("f"), py::arg("y"));
  m.def("involution_gap", [](const ConvexFunction& f, const Vec& x) {
    InvolutionReport r = involution_check(f, x);
    return std::max({r.value_gap, r.grad_gap, r.point_gap});
  }, py::arg("f"), py::arg("x"), "Worst gap of double conjugation back at x");

  // handle families
  m.def("gluing_gaps", [](const ConvexFunction& f, int handle, double h, int max_order) {
    return gluing_smoothness_check(as_handles(f), handle, 20, h, max_order).order_gap;
  }, py::arg("f"), py::arg("handle"), py::arg("h") = 1e-2, py::arg("max_order") = 3,
     "One-sided derivative gaps across the gluing face, by order");
  m.def("handle_count", [](const ConvexFunction& f) {
    return static_cast<int>(as_handles(f).handles().size());
  }, py::arg("f"));
  m.def("separation_margin", [](const ConvexFunction& f, int i, int j) {
    NoCommonReport r = no_common_characteristics_check(as_handles(f), i, j);
    if (r.status == NoCommonReport::Status::CommonFound)
      throw Error(ErrorCode::UnexpectedStratum, "handles share a diagonalizing frame");
    return r.margin;
  }, py::arg("f"), py::arg("i"), py::arg("j"));
  m.def("conjugate_family", [](const ConvexFunction& f) -> PyFn {
    return std::const_pointer_cast<HandleFamilyFn>(conjugate_handle_family(as_handles(f)));
  }, py::arg("f"), "Structural conjugate of a handle family");

  // bracket with the standard bivector
  m.def("schouten_bracket_max", [](PyFn f, const Vec& x) {
    return schouten_bracket(standard_bivector(f->dim()), kahler_bivector(f), x).max_abs();
  }, py::arg("f"), py::arg("x"));
}
