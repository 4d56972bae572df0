#pragma once

#include <string>

#include <json.hpp>

#include "hesslab/convex.hpp"
#include "hesslab/handles.hpp"
#include "hesslab/oned.hpp"

namespace hesslab {

// JSON specs with the shape {"kind": "...", "dim": n, "params": {...}}.
// Loading is total over the documented kinds and throws BadSpec otherwise;
// saving inverts loading exactly, so specs round-trip through the CLI.
//
// function kinds:  quadratic, separable, rotated, expaffine, custom, handles
// piece kinds:     quadratic, exp, power, logbarrier, flatglued, barrierglued, sum
// domain kinds:    box, polytope, rotated

PiecePtr load_piece(const nlohmann::json& spec);
nlohmann::json save_piece(const OneDPiece& piece);

DomainPtr load_domain(const nlohmann::json& spec);
nlohmann::json save_domain(const Domain& dom);

FnPtr load_function(const nlohmann::json& spec);
nlohmann::json save_function(const ConvexFunction& f);

FnPtr load_function_file(const std::string& path);

}  // namespace hesslab
