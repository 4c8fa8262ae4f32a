// Copyright (c) the mapsep contributors.
// SPDX-License-Identifier: Apache-2.0

#include "mapsep/equiv.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "mapsep/diagnostics.hpp"

namespace mapsep {

namespace {

std::vector<std::string> shared_base_vars(const Program& a, const Program& b, const ObservationScheme& obs) {
    if (!obs.base_vars.empty()) {
        for (const auto& v : obs.base_vars)
            if (!a.find_var(v) || !b.find_var(v))
                throw Diagnostic(DiagCode::InvalidArgument, "observable variable '" + v + "' missing");
        return obs.base_vars;
    }
    std::vector<std::string> out;
    for (const auto& v : a.vars)
        if (v.kind == VarKind::Base && b.find_var(v.name)) out.push_back(v.name);
    return out;
}

std::string obs_key(const CompiledProgram& cp, const Program& p, const State& s,
                    const std::vector<int>& slots) {
    std::string key = p.loc_names[s.pc];
    key.push_back('\0');
    for (int slot : slots) key.push_back(static_cast<char>(s.base[slot].v));
    return key;
}

struct Lts {
    CompiledProgram cp;
    ReachGraph graph;
    std::vector<int> obs_slots;
};

Lts build_lts(const Program& p, const FiniteConfig& cfg, const std::vector<std::string>& obs_vars) {
    Lts lts;
    lts.cp = compile(p);
    lts.graph = reach_graph(lts.cp, cfg, /*build_lts=*/true);
    for (const auto& v : obs_vars) lts.obs_slots.push_back(lts.cp.base_slot.at(v));
    return lts;
}

}  // namespace

bool equal_observable_reach(const Program& a, const Program& b, const FiniteConfig& cfg,
                            const ObservationScheme& obs) {
    std::vector<std::string> vars = shared_base_vars(a, b, obs);
    auto keys = [&](const Program& p) {
        CompiledProgram cp = compile(p);
        std::vector<int> slots;
        for (const auto& v : vars) slots.push_back(cp.base_slot.at(v));
        ReachGraph g = reach_graph(cp, cfg, false);
        std::vector<std::string> out;
        out.reserve(g.states.size());
        for (const auto& s : g.states) out.push_back(obs_key(cp, p, s, slots));
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    };
    return keys(a) == keys(b);
}

BisimVerdict check_bisim(const Program& a, const Program& b, const FiniteConfig& cfg,
                         const ObservationScheme& obs) {
    std::vector<std::string> vars = shared_base_vars(a, b, obs);

    // Labels are statement ids; both programs must use the same set.
    std::vector<std::string> ids_a, ids_b;
    for (const auto& s : a.statements) ids_a.push_back(s.id);
    for (const auto& s : b.statements) ids_b.push_back(s.id);
    std::sort(ids_a.begin(), ids_a.end());
    std::sort(ids_b.begin(), ids_b.end());
    if (ids_a != ids_b)
        throw Diagnostic(DiagCode::LabelMismatch, "programs have different statement id sets");
    std::map<std::string, int> label_of;
    for (const auto& id : ids_a) label_of.emplace(id, static_cast<int>(label_of.size()));

    Lts A = build_lts(a, cfg, vars);
    Lts B = build_lts(b, cfg, vars);

    BisimVerdict v;
    v.states_a = A.graph.n_states();
    v.states_b = B.graph.n_states();

    const std::uint32_t na = static_cast<std::uint32_t>(A.graph.n_states());
    const std::uint32_t nb = static_cast<std::uint32_t>(B.graph.n_states());
    const std::uint32_t n = na + nb;

    // Successor lists per combined state, labeled.
    std::vector<std::vector<std::pair<int, std::uint32_t>>> succ(n);
    for (const auto& e : A.graph.edges)
        succ[e.src].emplace_back(label_of.at(a.statements[e.stmt].id), e.dst);
    for (const auto& e : B.graph.edges)
        succ[na + e.src].emplace_back(label_of.at(b.statements[e.stmt].id), na + e.dst);
    for (auto& list : succ) std::sort(list.begin(), list.end());

    // Initial partition by observation.
    std::vector<std::uint32_t> block(n);
    {
        std::map<std::string, std::uint32_t> dict;
        for (std::uint32_t i = 0; i < na; ++i) {
            std::string key = obs_key(A.cp, a, A.graph.states[i], A.obs_slots);
            block[i] = dict.emplace(key, static_cast<std::uint32_t>(dict.size())).first->second;
        }
        for (std::uint32_t i = 0; i < nb; ++i) {
            std::string key = obs_key(B.cp, b, B.graph.states[i], B.obs_slots);
            block[na + i] = dict.emplace(key, static_cast<std::uint32_t>(dict.size())).first->second;
        }
    }

    // History of block ids per state: (round, block) when it changed.
    std::vector<std::vector<std::pair<int, std::uint32_t>>> history(n);
    for (std::uint32_t i = 0; i < n; ++i) history[i].emplace_back(0, block[i]);

    int round = 0;
    for (;;) {
        ++round;
        // Signature: old block + sorted set of (label, successor block).
        std::map<std::pair<std::uint32_t, std::vector<std::pair<int, std::uint32_t>>>, std::uint32_t> dict;
        std::vector<std::uint32_t> next(n);
        for (std::uint32_t i = 0; i < n; ++i) {
            std::vector<std::pair<int, std::uint32_t>> sig;
            sig.reserve(succ[i].size());
            for (auto [lab, dst] : succ[i]) sig.emplace_back(lab, block[dst]);
            std::sort(sig.begin(), sig.end());
            sig.erase(std::unique(sig.begin(), sig.end()), sig.end());
            auto key = std::make_pair(block[i], std::move(sig));
            next[i] = dict.emplace(std::move(key), static_cast<std::uint32_t>(dict.size())).first->second;
        }
        bool changed = false;
        for (std::uint32_t i = 0; i < n; ++i) {
            if (next[i] != block[i]) changed = true;
        }
        // Renumber stable: next ids are dense per (old block, sig) pairs.
        std::uint32_t old_blocks = *std::max_element(block.begin(), block.end()) + 1;
        std::uint32_t new_blocks = static_cast<std::uint32_t>(dict.size());
        if (new_blocks == old_blocks) {
            break;  // no further splits
        }
        (void)changed;
        for (std::uint32_t i = 0; i < n; ++i) {
            if (history[i].back().second != next[i]) history[i].emplace_back(round, next[i]);
            block[i] = next[i];
        }
    }

    auto block_at_round = [&](std::uint32_t state, int r) {
        std::uint32_t b = history[state].front().second;
        for (const auto& [rr, bb] : history[state]) {
            if (rr > r) break;
            b = bb;
        }
        return b;
    };

    // Program-level verdict: initial states match up.
    auto find_unmatched = [&](const std::vector<std::uint32_t>& from, const std::vector<std::uint32_t>& to,
                              std::uint32_t to_offset) -> std::int64_t {
        for (std::uint32_t i : from) {
            bool ok = false;
            for (std::uint32_t j : to)
                if (block[i] == block[j + to_offset]) ok = true;
            if (!ok) return i;
        }
        return -1;
    };
    std::vector<std::uint32_t> inits_a = A.graph.initial;
    std::vector<std::uint32_t> inits_b_raw = B.graph.initial;
    std::vector<std::uint32_t> inits_b;
    for (std::uint32_t i : inits_b_raw) inits_b.push_back(na + i);

    std::int64_t bad_a = -1, bad_b = -1;
    for (std::uint32_t i : inits_a) {
        bool ok = false;
        for (std::uint32_t j : inits_b) ok = ok || block[i] == block[j];
        if (!ok) {
            bad_a = i;
            break;
        }
    }
    for (std::uint32_t j : inits_b) {
        bool ok = false;
        for (std::uint32_t i : inits_a) ok = ok || block[i] == block[j];
        if (!ok) {
            bad_b = j;
            break;
        }
    }
    (void)find_unmatched;

    if (bad_a < 0 && bad_b < 0) {
        v.bisimilar = true;
        return v;
    }
    v.bisimilar = false;
    v.reason = bad_a >= 0 ? "an initial state of the first program has no match"
                          : "an initial state of the second program has no match";

    // Distinguishing trace: walk the refinement history of the best pair.
    std::uint32_t s = bad_a >= 0 ? static_cast<std::uint32_t>(bad_a) : static_cast<std::uint32_t>(bad_b);
    const std::vector<std::uint32_t>& others = bad_a >= 0 ? inits_b : inits_a;
    std::uint32_t t = others.empty() ? s : others.front();
    int best_round = -1;
    for (std::uint32_t cand : others) {
        int r = 0;
        while (block_at_round(s, r) == block_at_round(cand, r)) ++r;
        if (r > best_round) {
            best_round = r;
            t = cand;
        }
    }
    if (others.empty()) return v;

    std::vector<int> label_order(label_of.size());
    std::vector<std::string> label_name(label_of.size());
    for (const auto& [id, lab] : label_of) label_name[lab] = id;

    std::function<void(std::uint32_t, std::uint32_t)> explain = [&](std::uint32_t x, std::uint32_t y) {
        if (v.trace.size() > 64) return;
        int r = 0;
        while (block_at_round(x, r) == block_at_round(y, r)) ++r;
        if (r == 0) return;  // observation differs here
        // Find a label move of one side that the other cannot match at r-1.
        for (auto [lab, dst] : succ[x]) {
            bool matched = false;
            std::uint32_t witness = 0;
            bool have_witness = false;
            for (auto [lab2, dst2] : succ[y]) {
                if (lab2 != lab) continue;
                have_witness = true;
                witness = dst2;
                if (block_at_round(dst, r - 1) == block_at_round(dst2, r - 1)) matched = true;
            }
            if (!matched) {
                v.trace.push_back(label_name[lab]);
                if (have_witness) explain(dst, witness);
                return;
            }
        }
        for (auto [lab, dst] : succ[y]) {
            bool matched = false;
            std::uint32_t witness = 0;
            bool have_witness = false;
            for (auto [lab2, dst2] : succ[x]) {
                if (lab2 != lab) continue;
                have_witness = true;
                witness = dst2;
                if (block_at_round(dst, r - 1) == block_at_round(dst2, r - 1)) matched = true;
            }
            if (!matched) {
                v.trace.push_back(label_name[lab]);
                if (have_witness) explain(witness, dst);
                return;
            }
        }
    };
    explain(s, t);
    (void)label_order;
    return v;
}

// ---------------------------------------------------------------------------
// Explicit relation check

RelationVerdict check_block_relation(const Program& p_pre, const Program& p_prime, const WritePartition& part,
                                     const FiniteConfig& cfg) {
    RelationVerdict verdict;
    CompiledProgram ca = compile(p_pre);
    CompiledProgram cb = compile(p_prime);

    // Statement correspondence by id.
    std::vector<std::string> ids_a, ids_b;
    for (const auto& s : p_pre.statements) ids_a.push_back(s.id);
    for (const auto& s : p_prime.statements) ids_b.push_back(s.id);
    std::sort(ids_a.begin(), ids_a.end());
    std::sort(ids_b.begin(), ids_b.end());
    if (ids_a != ids_b) throw Diagnostic(DiagCode::LabelMismatch, "statement id sets differ");

    // Base variables must agree.
    std::vector<int> base_a, base_b;
    for (const auto& v : p_pre.vars) {
        if (v.kind != VarKind::Base) continue;
        if (!p_prime.find_var(v.name))
            throw Diagnostic(DiagCode::InvalidArgument, "base variable '" + v.name + "' missing in transform");
        base_a.push_back(ca.base_slot.at(v.name));
        base_b.push_back(cb.base_slot.at(v.name));
    }

    // Source maps of p_pre (those with shadows) and their block families in
    // p_prime. An unused source map may keep its original declaration.
    struct MapInfo {
        int src_slot;                  // in p_pre
        int shadow_slot;               // in p_pre
        std::vector<int> family;       // in p_prime, by block index
        int bot_slot;                  // in p_prime
    };
    std::vector<MapInfo> maps;
    for (int m = 0; m < ca.n_maps(); ++m) {
        if (ca.shadow_of[m] < 0) continue;
        if (is_shadow_name(ca.map_names[m])) continue;
        MapInfo info;
        info.src_slot = m;
        info.shadow_slot = ca.shadow_of[m];
        const std::string& name = ca.map_names[m];
        bool any = false;
        for (const auto& bn : part.names) {
            auto it = cb.map_slot.find(name + "__" + bn);
            info.family.push_back(it == cb.map_slot.end() ? -1 : it->second);
            any = any || it != cb.map_slot.end();
        }
        auto bot = cb.map_slot.find(name + kBotBlockSuffix);
        info.bot_slot = bot == cb.map_slot.end() ? -1 : bot->second;
        if (bot == cb.map_slot.end() && !any) {
            // Untouched map: identity family.
            auto self = cb.map_slot.find(name);
            if (self == cb.map_slot.end())
                throw Diagnostic(DiagCode::InvalidArgument, "map '" + name + "' missing in transform");
            info.family.assign(part.names.size(), -1);
            info.bot_slot = self->second;
        }
        maps.push_back(info);
    }

    // Wid encoding of p_pre shadow cells -> block index.
    std::vector<int> block_of_wid(ca.wid_names.size() + 1, -1);
    for (std::size_t w = 0; w < ca.wid_names.size(); ++w) block_of_wid[w + 1] = part.block_of(ca.wid_names[w]);

    ReachGraph ga = reach_graph(ca, cfg, /*build_lts=*/true);
    ReachGraph gb = reach_graph(cb, cfg, /*build_lts=*/true);

    auto cells_equal = [](const Cell& x, const Cell& y) { return x.v == y.v; };
    auto map_cell = [&](const State& s, int slot, int idx) -> Cell {
        if (slot < 0) return Cell{};  // family member not declared: unconstrained
        const MapVal& mv = s.maps[slot];
        if (mv.star) return Cell{};
        return mv.cells[idx];
    };

    // Relation membership.
    auto related = [&](const State& s, const State& t) -> bool {
        for (std::size_t k = 0; k < base_a.size(); ++k)
            if (s.base[base_a[k]].v != t.base[base_b[k]].v) return false;
        for (const auto& info : maps) {
            for (std::size_t k = 0; k < base_a.size(); ++k) {
                const Cell& iv = s.base[base_a[k]];
                if (iv.v == kStar) continue;  // index junk: no constraint observable yet
                const MapVal& shadow = s.maps[info.shadow_slot];
                const MapVal& src = s.maps[info.src_slot];
                Cell sc = src.star ? Cell{} : src.cells[iv.v];
                if (shadow.star) {
                    // Uninstantiated shadow: only the star/star case is safe.
                    if (sc.v == kStar) continue;
                    return false;
                }
                int g = shadow.cells[iv.v].v;
                if (g == 0) {
                    // bot: all copies agree with the source cell.
                    for (int b : info.family) {
                        Cell tc = map_cell(t, b, iv.v);
                        if (!(sc.v == kStar && tc.v == kStar) && !cells_equal(sc, tc)) return false;
                    }
                    Cell tb = map_cell(t, info.bot_slot, iv.v);
                    if (!(sc.v == kStar && tb.v == kStar) && !cells_equal(sc, tb)) return false;
                } else {
                    int blk = block_of_wid[g];
                    if (blk < 0) return false;
                    Cell tc = map_cell(t, info.family[blk], iv.v);
                    if (!(sc.v == kStar && tc.v == kStar) && !cells_equal(sc, tc)) return false;
                }
            }
        }
        return true;
    };

    // Bucket states by (loc name, base bytes).
    auto bucket_key = [&](const Program& p, const std::vector<int>& slots, const State& s) {
        std::string key = p.loc_names[s.pc];
        key.push_back('\0');
        for (int slot : slots) key.push_back(static_cast<char>(s.base[slot].v));
        return key;
    };
    std::unordered_map<std::string, std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>>> buckets;
    for (std::uint32_t i = 0; i < ga.n_states(); ++i)
        buckets[bucket_key(p_pre, base_a, ga.states[i])].first.push_back(i);
    for (std::uint32_t j = 0; j < gb.n_states(); ++j)
        buckets[bucket_key(p_prime, base_b, gb.states[j])].second.push_back(j);

    std::unordered_set<std::uint64_t> rel;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> rel_list;
    for (const auto& [key, bucket] : buckets) {
        (void)key;
        for (std::uint32_t i : bucket.first)
            for (std::uint32_t j : bucket.second) {
                if (!related(ga.states[i], gb.states[j])) continue;
                rel.insert((static_cast<std::uint64_t>(i) << 32) | j);
                rel_list.emplace_back(i, j);
                if (rel_list.size() > 10'000'000) throw BudgetExceeded("relation too large");
            }
    }
    verdict.pairs = rel_list.size();

    // Initial coverage.
    for (std::uint32_t i : ga.initial) {
        bool ok = false;
        for (std::uint32_t j : gb.initial) ok = ok || rel.count((static_cast<std::uint64_t>(i) << 32) | j);
        if (!ok) {
            verdict.reason = "an initial state of the instrumented program is unrelated";
            return verdict;
        }
    }
    for (std::uint32_t j : gb.initial) {
        bool ok = false;
        for (std::uint32_t i : ga.initial) ok = ok || rel.count((static_cast<std::uint64_t>(i) << 32) | j);
        if (!ok) {
            verdict.reason = "an initial state of the transformed program is unrelated";
            return verdict;
        }
    }

    // Successors grouped by label.
    std::map<std::string, int> label_of;
    for (const auto& id : ids_a) label_of.emplace(id, static_cast<int>(label_of.size()));
    auto group = [&](const ReachGraph& g, const Program& p, std::uint32_t nstates) {
        std::vector<std::map<int, std::vector<std::uint32_t>>> out(nstates);
        for (const auto& e : g.edges) out[e.src][label_of.at(p.statements[e.stmt].id)].push_back(e.dst);
        return out;
    };
    auto succ_a = group(ga, p_pre, static_cast<std::uint32_t>(ga.n_states()));
    auto succ_b = group(gb, p_prime, static_cast<std::uint32_t>(gb.n_states()));

    // Forward and backward simulation on every related pair.
    for (auto [i, j] : rel_list) {
        for (const auto& [lab, as] : succ_a[i]) {
            auto bt = succ_b[j].find(lab);
            for (std::uint32_t s2 : as) {
                bool ok = false;
                if (bt != succ_b[j].end())
                    for (std::uint32_t t2 : bt->second)
                        if (rel.count((static_cast<std::uint64_t>(s2) << 32) | t2)) {
                            ok = true;
                            break;
                        }
                if (!ok) {
                    verdict.reason = "forward simulation fails at statement " +
                                     p_pre.statements[0].id;  // refined below
                    for (const auto& [id, l] : label_of)
                        if (l == lab) verdict.reason = "forward simulation fails at statement " + id;
                    return verdict;
                }
            }
        }
        for (const auto& [lab, bs] : succ_b[j]) {
            auto at = succ_a[i].find(lab);
            for (std::uint32_t t2 : bs) {
                bool ok = false;
                if (at != succ_a[i].end())
                    for (std::uint32_t s2 : at->second)
                        if (rel.count((static_cast<std::uint64_t>(s2) << 32) | t2)) {
                            ok = true;
                            break;
                        }
                if (!ok) {
                    for (const auto& [id, l] : label_of)
                        if (l == lab) verdict.reason = "backward simulation fails at statement " + id;
                    return verdict;
                }
            }
        }
    }
    verdict.holds = true;
    return verdict;
}

}  // namespace mapsep
