// Copyright (c) the mapsep contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "mapsep/ast.hpp"

namespace mapsep {

// The scalable benchmark family: k pointer variables allocated via the
// inlined malloc idiom, one map cell initialized per pointer, a loop that
// nondeterministically bumps one cell (succ for odd indices, pred for even),
// and one assert per pointer at the exit. pred saturates at zero, so even
// cells must still hold zero at the exit; the odd asserts are the trivial
// finite-domain rendering of a lower bound. Deterministic output; k must be
// even and at least 2.
std::string gen_benchmark_text(int k);
Program gen_benchmark(int k);

// Flow-sensitivity showcase: both pointers start equal (aliased) in a phase
// with no map accesses, then get distinct cells via malloc and are accessed
// afterwards.
std::string flow_example_text();

}  // namespace mapsep
