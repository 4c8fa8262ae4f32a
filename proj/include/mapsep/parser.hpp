// Copyright (c) the mapsep contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>

#include "mapsep/ast.hpp"

namespace mapsep {

struct ParseOptions {
    // Accept the IR-only forms produced by the pipeline: atomic{} edges,
    // havoc_eq, wid literals and [int]wid declarations, plus identifiers
    // containing the reserved `__` marker.
    bool allow_ir = false;
    // Reject the succ/pred extension.
    bool strict_grammar = false;
};

// Parses a program in the .mivl text format and returns it in canonical form
// (locations renumbered, statement ids assigned). Throws Diagnostic on error.
Program parse(std::string_view text, const ParseOptions& opts = {});
Program parse_file(const std::string& path, const ParseOptions& opts = {});

}  // namespace mapsep
