// Copyright (c) the mapsep contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "mapsep/reach.hpp"
#include "mapsep/semantics.hpp"

namespace mapsep {

// The bot ("never written") marker used in preimage sets.
inline constexpr const char* kBotMarker = "";

// Exact last-writes data for one program at one finite instantiation:
// (write statement, read statement) pairs plus the per-read preimage
// (write ids, possibly with the bot marker).
struct LastWrites {
    std::set<std::pair<std::string, std::string>> pairs;
    std::map<std::string, std::set<std::string>> preimage;

    bool operator==(const LastWrites& o) const { return pairs == o.pairs; }
};

// An execution: states[0] is initial, stmts[i] leads from states[i] to
// states[i+1].
struct Execution {
    std::vector<State> states;
    std::vector<int> stmts;
};

Execution execution_from_trace(const ReachGraph& g, const ExecutionTrace& t);

// The write statement responsible for map[pos] at the end of `e`, by
// structural recursion over the execution; kBotMarker if never written.
std::string last_write_of(const CompiledProgram& cp, const std::string& map, int pos, const Execution& e);

// Route (a): run the tagged semantics and inspect the tag of every read
// cell at each read statement.
LastWrites exact_last_writes(const Program& p, FiniteConfig cfg);

// Route (b): read the relation off the lw shadow maps of the instrumented
// program. `shadow_last_writes` instruments internally;
// `shadow_last_writes_pre` takes an already-instrumented program.
LastWrites shadow_last_writes(const Program& p, FiniteConfig cfg);
LastWrites shadow_last_writes_pre(const Program& p_pre, FiniteConfig cfg);

struct CrosscheckResult {
    bool equal = false;
    std::set<std::pair<std::string, std::string>> only_exact;
    std::set<std::pair<std::string, std::string>> only_shadow;
};

// Compares the two independent computations.
CrosscheckResult crosscheck_last_writes(const Program& p, const FiniteConfig& cfg);

}  // namespace mapsep
