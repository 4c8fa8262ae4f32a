// Copyright (c) the mapsep contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "mapsep/ast.hpp"

namespace mapsep {

std::string to_text(const Literal& l);
std::string to_text(const BaseExpr& e);
std::string to_text(const MapExpr& e);
std::string to_text(const BoolExpr& e);
std::string to_text(const Command& c);

// Deterministic pretty-printer. Emits declarations sorted by (kind, name)
// followed by one `label L:`/`error L:` section per location in canonical
// order, each edge as `cmd -> Ldst;`. parse(pretty(p)) reproduces p exactly
// for canonical p.
std::string pretty(const Program& p);

}  // namespace mapsep
