// Copyright (c) the mapsep contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mapsep/semantics.hpp"

namespace mapsep {

// Full exploration with interned states. Builds the labeled transition
// system (labels = statement indices) and predecessor links, so executions
// can be reconstructed and bisimulations checked. Intended for small finite
// instantiations; throws BudgetExceeded past cfg.state_budget.
struct ReachGraph {
    struct Edge {
        std::uint32_t src;
        std::uint32_t stmt;
        std::uint32_t dst;
    };

    std::vector<State> states;
    std::vector<std::string> keys;          // canonical key per state
    std::vector<std::uint32_t> initial;     // state ids
    std::vector<std::vector<std::uint32_t>> at_loc;
    std::vector<Edge> edges;                // present when build_lts
    std::vector<std::int64_t> pred_state;   // -1 for initial states
    std::vector<std::int32_t> pred_stmt;
    std::vector<bool> loc_reachable;

    std::uint64_t n_states() const { return states.size(); }
};

ReachGraph reach_graph(const CompiledProgram& cp, const FiniteConfig& cfg, bool build_lts = false,
                       const ReadHook* hook = nullptr);

// Reconstructs the execution that first reached `state` as an alternating
// list: statements[i] leads from states[i] to states[i+1].
struct ExecutionTrace {
    std::vector<std::uint32_t> states;
    std::vector<std::uint32_t> stmts;
};
ExecutionTrace trace_to(const ReachGraph& g, std::uint32_t state);

// ---------------------------------------------------------------------------
// Set-summary engines: reachable state sets per location, without the LTS.
// reach_sets_serial is the reference implementation; reach_sets_parallel is
// the OpenMP frontier-batch engine used for large instances. Both support
// live-variable projection; the parallel engine additionally supports chain
// compression (states stored only at junction locations) and requires
// projection to be enabled.

struct ReachSummary {
    std::vector<std::uint64_t> states_per_loc;  // stored states
    std::vector<bool> loc_reached;              // any traversal, including chain interiors
    std::uint64_t stored_states = 0;
    std::uint64_t expansions = 0;
    bool error_reachable = false;
    // Sorted canonical keys per location (filled when keep_keys).
    std::vector<std::vector<std::string>> keys_per_loc;
};

ReachSummary reach_sets_serial(const CompiledProgram& cp, const FiniteConfig& cfg, bool keep_keys = false);
ReachSummary reach_sets_parallel(const CompiledProgram& cp, const FiniteConfig& cfg, bool keep_keys = false);

// Locations where the parallel engine stores states when chain compression
// is on: the initial location, branch/join points, error locations, and
// back-edge targets.
std::vector<bool> junction_locations(const CompiledProgram& cp);

}  // namespace mapsep
