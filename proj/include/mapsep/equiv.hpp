// Copyright (c) the mapsep contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "mapsep/partition.hpp"
#include "mapsep/reach.hpp"

namespace mapsep {

struct ObservationScheme {
    // Observable: the location name plus these base variables. Empty list =
    // all base variables common to both programs.
    std::vector<std::string> base_vars;
};

struct BisimVerdict {
    bool bisimilar = false;
    std::string reason;
    std::vector<std::string> trace;  // distinguishing statement ids, best-effort
    std::uint64_t states_a = 0, states_b = 0;
};

// Strong bisimulation between two programs on one finite instantiation.
// Transitions are labeled by statement id; the two programs must have the
// same id sets (LabelMismatch otherwise). BISIMILAR iff every initial state
// of either side shares a refinement class with an initial state of the
// other.
BisimVerdict check_bisim(const Program& a, const Program& b, const FiniteConfig& cfg,
                         const ObservationScheme& obs = {});

// Cheaper necessary condition, also exposed on its own.
bool equal_observable_reach(const Program& a, const Program& b, const FiniteConfig& cfg,
                            const ObservationScheme& obs = {});

struct RelationVerdict {
    bool holds = false;
    std::string reason;
    std::uint64_t pairs = 0;
};

// Builds the explicit relation between an instrumented program and its
// block-split transform — base variables agree, and per (map, index): shadow
// bot forces all block copies to agree with the source cell, shadow in W
// forces the W copy to agree — and verifies it is a bisimulation relating
// the initial states.
RelationVerdict check_block_relation(const Program& p_pre, const Program& p_prime, const WritePartition& part,
                                     const FiniteConfig& cfg);

}  // namespace mapsep
