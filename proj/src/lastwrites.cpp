// Copyright (c) the mapsep contributors.
// SPDX-License-Identifier: Apache-2.0

#include "mapsep/lastwrites.hpp"

#include <algorithm>

#include "mapsep/diagnostics.hpp"
#include "mapsep/instrument.hpp"
#include "mapsep/normalize.hpp"

namespace mapsep {

Execution execution_from_trace(const ReachGraph& g, const ExecutionTrace& t) {
    Execution e;
    for (std::uint32_t sid : t.states) e.states.push_back(g.states[sid]);
    for (std::uint32_t st : t.stmts) e.stmts.push_back(static_cast<int>(st));
    return e;
}

namespace {

int need_concrete(const CompiledProgram& cp, const State& s, const std::string& var) {
    const Cell& c = s.base[cp.base_slot.at(var)];
    if (c.v == kStar) throw Diagnostic(DiagCode::InvalidArgument, "index variable unconstrained in execution");
    return c.v;
}

// One step of the recursion, looking at commands of the last edge in reverse
// (instrumented edges bundle shadow stores after the original command; those
// never touch source-sort maps or index variables).
struct StepResult {
    bool resolved = false;
    std::string write;   // valid when resolved
    std::string map;     // map to continue with when !resolved
};

StepResult step_last_write(const CompiledProgram& cp, const std::string& map, int pos, const Statement& stmt,
                           const State& after) {
    std::vector<const Command*> parts;
    if (const auto* seq = std::get_if<SeqCmd>(&stmt.cmd)) {
        for (const auto& part : seq->parts) parts.push_back(&part);
    } else {
        parts.push_back(&stmt.cmd);
    }
    std::string cur = map;
    for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
        const Command& c = **it;
        if (const auto* hm = std::get_if<HavocMap>(&c)) {
            if (hm->var == cur) return {true, kBotMarker, {}};
        } else if (const auto* am = std::get_if<AssignMap>(&c)) {
            if (am->var != cur) continue;
            if (std::holds_alternative<ConstMapExpr>(am->rhs)) return {true, kBotMarker, {}};
            if (const auto* mv = std::get_if<MapVarExpr>(&am->rhs)) {
                cur = mv->name;
                continue;
            }
            const auto& st = std::get<StoreExpr>(am->rhs);
            // Normalized program: store target equals the stored map.
            int idx = need_concrete(cp, after, st.index);
            if (idx == pos) return {true, stmt.id, {}};
        } else if (const auto* he = std::get_if<HavocMapsEqual>(&c)) {
            if (std::find(he->maps.begin(), he->maps.end(), cur) != he->maps.end())
                return {true, kBotMarker, {}};
        }
    }
    return {false, {}, cur};
}

}  // namespace

std::string last_write_of(const CompiledProgram& cp, const std::string& map, int pos, const Execution& e) {
    std::string cur = map;
    for (std::size_t n = e.stmts.size(); n > 0; --n) {
        const Statement& stmt = cp.source->statements[e.stmts[n - 1]];
        StepResult r = step_last_write(cp, cur, pos, stmt, e.states[n]);
        if (r.resolved) return r.write;
        cur = r.map;
    }
    return kBotMarker;
}

namespace {

LastWrites collect_tagged(const Program& p, FiniteConfig cfg) {
    cfg.tagged = true;
    CompiledProgram cp = compile(p);
    LastWrites lw;
    for (const Statement* r : read_statements(p)) lw.preimage[r->id];  // total on reads
    ReadHook hook = [&](int stmt_idx, const State&, int, const Cell& cell) {
        const std::string& read_id = cp.stmt_id(stmt_idx);
        if (cell.tag >= 0) {
            const std::string& write_id = cp.stmt_id(cell.tag);
            lw.pairs.emplace(write_id, read_id);
            lw.preimage[read_id].insert(write_id);
        } else {
            lw.preimage[read_id].insert(kBotMarker);
        }
    };
    reach_graph(cp, cfg, /*build_lts=*/false, &hook);
    return lw;
}

}  // namespace

LastWrites exact_last_writes(const Program& p, FiniteConfig cfg) { return collect_tagged(p, cfg); }

LastWrites shadow_last_writes_pre(const Program& p_pre, FiniteConfig cfg) {
    cfg.tagged = false;
    CompiledProgram cp = compile(p_pre);
    LastWrites lw;
    for (const Statement* r : read_statements(p_pre)) {
        // Reads of shadow maps are not source reads.
        if (!is_shadow_name(as_map_read(r->cmd)->map)) lw.preimage[r->id];
    }
    ReadHook hook = [&](int stmt_idx, const State& s, int idx, const Cell&) {
        // The hook runs after the edge's shadow initialization, so reads on
        // initial edges observe bot.
        const auto& stmt = cp.stmts[stmt_idx];
        int map_slot = -1;
        for (const auto& cc : stmt.cmds)
            if (cc.op == CompiledProgram::Op::AssignSelect) map_slot = cc.b;
        if (map_slot < 0 || cp.shadow_of[map_slot] < 0) return;
        const MapVal& shadow = s.maps[cp.shadow_of[map_slot]];
        if (shadow.star) throw std::logic_error("shadow map unconstrained at a read");
        const std::string& read_id = cp.stmt_id(stmt_idx);
        int wid = shadow.cells[idx].v;
        if (wid == 0) {
            lw.preimage[read_id].insert(kBotMarker);
        } else {
            const std::string& write_id = cp.wid_names[wid - 1];
            lw.pairs.emplace(write_id, read_id);
            lw.preimage[read_id].insert(write_id);
        }
    };
    reach_graph(cp, cfg, /*build_lts=*/false, &hook);
    return lw;
}

LastWrites shadow_last_writes(const Program& p, FiniteConfig cfg) {
    return shadow_last_writes_pre(instrument(p), cfg);
}

CrosscheckResult crosscheck_last_writes(const Program& p, const FiniteConfig& cfg) {
    LastWrites exact = exact_last_writes(p, cfg);
    LastWrites shadow = shadow_last_writes(p, cfg);
    CrosscheckResult r;
    std::set_difference(exact.pairs.begin(), exact.pairs.end(), shadow.pairs.begin(), shadow.pairs.end(),
                        std::inserter(r.only_exact, r.only_exact.end()));
    std::set_difference(shadow.pairs.begin(), shadow.pairs.end(), exact.pairs.begin(), exact.pairs.end(),
                        std::inserter(r.only_shadow, r.only_shadow.end()));
    r.equal = r.only_exact.empty() && r.only_shadow.empty();
    return r;
}

}  // namespace mapsep
