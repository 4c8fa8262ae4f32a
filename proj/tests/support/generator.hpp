// Copyright (c) the mapsep contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <random>
#include <string>

#include "mapsep/ast.hpp"

namespace mapsep::testing {

struct GenOptions {
    unsigned seed = 1;
    int statements = 8;  // upper bound on generated statements
    int n_base = 3;
    int n_maps = 2;
    int n_literals = 2;        // literals drawn from [0, n_literals)
    bool allow_havoc_map = true;
    bool allow_map_copy = true;
    bool allow_loops = true;
    // Write every variable before any read so equivalence checking starts
    // from a single concrete initial state.
    bool fully_initializing = true;
};

std::string random_program_text(const GenOptions& opts);
Program random_program(const GenOptions& opts);

}  // namespace mapsep::testing
