// Copyright (c) the mapsep contributors.
// SPDX-License-Identifier: Apache-2.0

#include "mapsep/reach.hpp"

#include <algorithm>
#include <cstring>
#include <deque>
#include <unordered_map>
#include <unordered_set>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mapsep/diagnostics.hpp"

namespace mapsep {

ReachGraph reach_graph(const CompiledProgram& cp, const FiniteConfig& cfg, bool build_lts, const ReadHook* hook) {
    if (cp.max_base_literal >= cfg.domain_size)
        throw Diagnostic(DiagCode::DomainTooSmall,
                         "program literal " + std::to_string(cp.max_base_literal) + " needs a larger domain");
    ReachGraph g;
    g.at_loc.resize(cp.n_locs);
    g.loc_reachable.assign(cp.n_locs, false);
    std::unordered_map<std::string, std::uint32_t> index;

    auto intern = [&](State&& s, std::int64_t pred, std::int32_t via) -> std::pair<std::uint32_t, bool> {
        std::string key = state_key(cp, cfg, s, true);
        auto it = index.find(key);
        if (it != index.end()) return {it->second, false};
        std::uint32_t id = static_cast<std::uint32_t>(g.states.size());
        if (g.states.size() >= cfg.state_budget)
            throw BudgetExceeded("state budget " + std::to_string(cfg.state_budget) + " exceeded");
        index.emplace(key, id);
        g.keys.push_back(std::move(key));
        g.at_loc[s.pc].push_back(id);
        g.loc_reachable[s.pc] = true;
        g.pred_state.push_back(pred);
        g.pred_stmt.push_back(via);
        g.states.push_back(std::move(s));
        return {id, true};
    };

    std::deque<std::uint32_t> queue;
    enumerate_initial_states(cp, cfg, [&](State&& s) {
        auto [id, fresh] = intern(std::move(s), -1, -1);
        if (fresh) {
            g.initial.push_back(id);
            queue.push_back(id);
        }
    });

    std::vector<std::string> succ_keys;
    while (!queue.empty()) {
        std::uint32_t id = queue.front();
        queue.pop_front();
        const std::uint32_t pc = g.states[id].pc;
        for (int stmt : cp.out[pc]) {
            succ_keys.clear();
            // One expansion can emit duplicate successors (e.g. havoc followed
            // by an overwrite); keep edges unique per (state, statement).
            const State src_state = g.states[id];
            expand_statement(cp, cfg, src_state, stmt, [&](State&& t) {
                std::string k = state_key(cp, cfg, t, true);
                if (std::find(succ_keys.begin(), succ_keys.end(), k) != succ_keys.end()) return;
                succ_keys.push_back(k);
                auto [tid, fresh] = intern(std::move(t), id, stmt);
                if (fresh) queue.push_back(tid);
                if (build_lts) g.edges.push_back({id, static_cast<std::uint32_t>(stmt), tid});
            }, hook);
        }
    }
    return g;
}

ExecutionTrace trace_to(const ReachGraph& g, std::uint32_t state) {
    ExecutionTrace t;
    std::uint32_t cur = state;
    for (;;) {
        t.states.push_back(cur);
        if (g.pred_state[cur] < 0) break;
        t.stmts.push_back(static_cast<std::uint32_t>(g.pred_stmt[cur]));
        cur = static_cast<std::uint32_t>(g.pred_state[cur]);
    }
    std::reverse(t.states.begin(), t.states.end());
    std::reverse(t.stmts.begin(), t.stmts.end());
    return t;
}

// ---------------------------------------------------------------------------

std::vector<bool> junction_locations(const CompiledProgram& cp) {
    std::vector<bool> junction(cp.n_locs, false);
    junction[cp.initial] = true;
    for (std::uint32_t l = 0; l < cp.n_locs; ++l) {
        if (cp.out[l].size() != 1) junction[l] = true;
        if (cp.is_error[l]) junction[l] = true;
    }
    // Back-edge targets, so chains cannot cycle.
    std::vector<int> color(cp.n_locs, 0);  // 0 white, 1 gray, 2 black
    std::vector<std::pair<std::uint32_t, std::size_t>> stack{{cp.initial, 0}};
    color[cp.initial] = 1;
    while (!stack.empty()) {
        auto& [loc, next] = stack.back();
        if (next < cp.out[loc].size()) {
            std::uint32_t dst = cp.stmts[cp.out[loc][next]].dst;
            ++next;
            if (color[dst] == 0) {
                color[dst] = 1;
                stack.push_back({dst, 0});
            } else if (color[dst] == 1) {
                junction[dst] = true;
            }
        } else {
            color[loc] = 2;
            stack.pop_back();
        }
    }
    return junction;
}

namespace {

struct EngineContext {
    const CompiledProgram& cp;
    const FiniteConfig& cfg;
    std::vector<LiveSet> live;
    std::vector<bool> junction;
    bool compress = false;
    bool project = false;

    const LiveSet* live_at(std::uint32_t loc) const { return project ? &live[loc] : nullptr; }
};

// Expands `s` across one statement and, under chain compression, keeps going
// through single-purpose locations until a junction is reached. Emits
// (loc, key) pairs.
void expand_to_stored(const EngineContext& ec, const State& s, int stmt,
                      const std::function<void(std::uint32_t, std::string&&)>& emit,
                      std::vector<bool>* loc_reached, std::uint64_t* expansions) {
    struct Item {
        State s;
        int stmt;
        int fuel;
    };
    std::vector<Item> work;
    work.push_back({s, stmt, static_cast<int>(ec.cp.n_locs) + 2});
    while (!work.empty()) {
        Item it = std::move(work.back());
        work.pop_back();
        ++*expansions;
        expand_statement(ec.cp, ec.cfg, it.s, it.stmt, [&](State&& t) {
            std::uint32_t dst = t.pc;
            if (loc_reached) (*loc_reached)[dst] = true;
            if (!ec.compress || ec.junction[dst]) {
                emit(dst, state_key(ec.cp, ec.cfg, t, false, ec.live_at(dst)));
                return;
            }
            if (it.fuel <= 0) throw std::logic_error("chain without junction (cycle?)");
            for (int next : ec.cp.out[dst]) work.push_back({t, next, it.fuel - 1});
        });
    }
}

ReachSummary finish_summary(const EngineContext& ec, std::vector<std::vector<std::string>>&& sets,
                            std::vector<bool>&& loc_reached, std::uint64_t expansions, bool keep_keys) {
    ReachSummary out;
    out.states_per_loc.resize(ec.cp.n_locs, 0);
    for (std::uint32_t l = 0; l < ec.cp.n_locs; ++l) {
        out.states_per_loc[l] = sets[l].size();
        out.stored_states += sets[l].size();
        if (!sets[l].empty()) loc_reached[l] = true;
        if (ec.cp.is_error[l] && loc_reached[l]) out.error_reachable = true;
    }
    out.loc_reached = std::move(loc_reached);
    out.expansions = expansions;
    if (keep_keys) {
        out.keys_per_loc.resize(ec.cp.n_locs);
        for (std::uint32_t l = 0; l < ec.cp.n_locs; ++l) {
            std::sort(sets[l].begin(), sets[l].end());
            out.keys_per_loc[l] = std::move(sets[l]);
        }
    }
    return out;
}

}  // namespace

ReachSummary reach_sets_serial(const CompiledProgram& cp, const FiniteConfig& cfg, bool keep_keys) {
    if (cp.max_base_literal >= cfg.domain_size)
        throw Diagnostic(DiagCode::DomainTooSmall, "program literal needs a larger domain");
    EngineContext ec{cp, cfg, compute_liveness(cp), junction_locations(cp), cfg.compress_chains,
                     cfg.project_live};
    std::vector<std::unordered_set<std::string>> visited(cp.n_locs);
    std::vector<bool> loc_reached(cp.n_locs, false);
    std::deque<std::pair<std::uint32_t, std::string>> queue;
    std::uint64_t total = 0, expansions = 0;

    auto store = [&](std::uint32_t loc, std::string&& key) {
        auto [it, fresh] = visited[loc].insert(std::move(key));
        if (!fresh) return;
        if (++total > cfg.state_budget) throw BudgetExceeded("state budget exceeded");
        queue.emplace_back(loc, *it);
    };

    enumerate_initial_states(cp, cfg, [&](State&& s) {
        loc_reached[s.pc] = true;
        store(s.pc, state_key(cp, cfg, s, false, ec.live_at(s.pc)));
    });

    while (!queue.empty()) {
        auto [loc, key] = std::move(queue.front());
        queue.pop_front();
        State s = state_from_key(cp, cfg, key, false, loc);
        for (int stmt : cp.out[loc])
            expand_to_stored(ec, s, stmt, [&](std::uint32_t dst, std::string&& k) { store(dst, std::move(k)); },
                             &loc_reached, &expansions);
    }

    std::vector<std::vector<std::string>> sets(cp.n_locs);
    for (std::uint32_t l = 0; l < cp.n_locs; ++l) sets[l].assign(visited[l].begin(), visited[l].end());
    return finish_summary(ec, std::move(sets), std::move(loc_reached), expansions, keep_keys);
}

// ---------------------------------------------------------------------------
// OpenMP frontier-batch engine. Records are fixed-stride per location (live
// projection guarantees a per-location shape), kept in sorted flat buffers.

namespace {

class StridedSet {
  public:
    void init(std::size_t stride) { stride_ = stride; }
    std::size_t stride() const { return stride_; }
    std::size_t size() const { return stride_ ? sorted_.size() / stride_ : 0; }
    const std::uint8_t* record(std::size_t i) const { return sorted_.data() + i * stride_; }

    // Sorts/dedups `batch` in place and returns the records not yet present;
    // merges them into the set.
    std::vector<std::uint8_t> absorb(std::vector<std::uint8_t>&& batch) {
        if (batch.empty()) return {};
        std::size_t n = batch.size() / stride_;
        std::vector<std::uint32_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<std::uint32_t>(i);
        const std::uint8_t* data = batch.data();
        std::size_t stride = stride_;
        auto less = [data, stride](std::uint32_t a, std::uint32_t b) {
            return std::memcmp(data + a * stride, data + b * stride, stride) < 0;
        };
        std::sort(idx.begin(), idx.end(), less);
        idx.erase(std::unique(idx.begin(), idx.end(),
                              [data, stride](std::uint32_t a, std::uint32_t b) {
                                  return std::memcmp(data + a * stride, data + b * stride, stride) == 0;
                              }),
                  idx.end());

        std::vector<std::uint8_t> fresh;
        std::size_t vi = 0, nv = size();
        for (std::uint32_t i : idx) {
            const std::uint8_t* rec = data + i * stride;
            while (vi < nv && std::memcmp(record(vi), rec, stride) < 0) ++vi;
            if (vi < nv && std::memcmp(record(vi), rec, stride) == 0) continue;
            fresh.insert(fresh.end(), rec, rec + stride);
        }
        if (!fresh.empty()) {
            std::vector<std::uint8_t> merged(sorted_.size() + fresh.size());
            std::size_t a = 0, b = 0, o = 0;
            const std::size_t na = size(), nb = fresh.size() / stride_;
            while (a < na || b < nb) {
                bool take_a;
                if (a == na) {
                    take_a = false;
                } else if (b == nb) {
                    take_a = true;
                } else {
                    take_a = std::memcmp(record(a), fresh.data() + b * stride_, stride_) < 0;
                }
                const std::uint8_t* rec = take_a ? record(a++) : fresh.data() + (b++) * stride_;
                std::memcpy(merged.data() + o * stride_, rec, stride_);
                ++o;
            }
            sorted_ = std::move(merged);
        }
        return fresh;
    }

  private:
    std::size_t stride_ = 0;
    std::vector<std::uint8_t> sorted_;
};

}  // namespace

ReachSummary reach_sets_parallel(const CompiledProgram& cp, const FiniteConfig& cfg, bool keep_keys) {
    if (!cfg.project_live)
        throw Diagnostic(DiagCode::InvalidArgument, "the parallel engine requires live projection");
    if (cp.max_base_literal >= cfg.domain_size)
        throw Diagnostic(DiagCode::DomainTooSmall, "program literal needs a larger domain");
    EngineContext ec{cp, cfg, compute_liveness(cp), junction_locations(cp), cfg.compress_chains, true};

    // Per-location record stride under the live projection.
    auto stride_at = [&](std::uint32_t loc) {
        std::size_t cell = cfg.tagged ? 3 : 1;
        std::size_t n = cp.n_base() * cell;
        for (int m = 0; m < cp.n_maps(); ++m) {
            n += 1;
            if (ec.live[loc].maps[m]) n += cell * static_cast<std::size_t>(cfg.domain_size);
        }
        return n;
    };
    std::vector<StridedSet> visited(cp.n_locs);
    for (std::uint32_t l = 0; l < cp.n_locs; ++l) visited[l].init(stride_at(l));

    std::vector<bool> loc_reached(cp.n_locs, false);
    std::vector<std::vector<std::uint8_t>> frontier(cp.n_locs);
    std::uint64_t total = 0, expansions = 0;

    enumerate_initial_states(cp, cfg, [&](State&& s) {
        loc_reached[s.pc] = true;
        std::string key = state_key(cp, cfg, s, false, ec.live_at(s.pc));
        frontier[s.pc].insert(frontier[s.pc].end(), key.begin(), key.end());
    });
    for (std::uint32_t l = 0; l < cp.n_locs; ++l) {
        std::vector<std::uint8_t> fresh = visited[l].absorb(std::move(frontier[l]));
        total += fresh.size() / std::max<std::size_t>(visited[l].stride(), 1);
        frontier[l] = std::move(fresh);
    }

#ifdef _OPENMP
    int n_threads = cfg.threads > 0 ? cfg.threads : omp_get_max_threads();
#else
    int n_threads = 1;
#endif

    for (;;) {
        struct WorkItem {
            std::uint32_t loc;
            std::uint32_t index;
        };
        std::vector<WorkItem> work;
        for (std::uint32_t l = 0; l < cp.n_locs; ++l) {
            std::size_t n = visited[l].stride() ? frontier[l].size() / visited[l].stride() : 0;
            for (std::size_t i = 0; i < n; ++i) work.push_back({l, static_cast<std::uint32_t>(i)});
        }
        if (work.empty()) break;

        std::vector<std::vector<std::vector<std::uint8_t>>> thread_out(
            n_threads, std::vector<std::vector<std::uint8_t>>(cp.n_locs));
        std::vector<std::vector<bool>> thread_reached(n_threads, std::vector<bool>(cp.n_locs, false));
        std::vector<std::uint64_t> thread_exp(n_threads, 0);

#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(n_threads)
#endif
        for (std::int64_t wi = 0; wi < static_cast<std::int64_t>(work.size()); ++wi) {
#ifdef _OPENMP
            int tid = omp_get_thread_num();
#else
            int tid = 0;
#endif
            const WorkItem& item = work[wi];
            const std::size_t stride = visited[item.loc].stride();
            std::string_view key(
                reinterpret_cast<const char*>(frontier[item.loc].data()) + item.index * stride, stride);
            State s = state_from_key(cp, cfg, key, false, item.loc);
            for (int stmt : cp.out[item.loc]) {
                expand_to_stored(ec, s, stmt,
                                 [&](std::uint32_t dst, std::string&& k) {
                                     auto& buf = thread_out[tid][dst];
                                     buf.insert(buf.end(), k.begin(), k.end());
                                 },
                                 &thread_reached[tid], &thread_exp[tid]);
            }
        }

        for (int t = 0; t < n_threads; ++t) {
            expansions += thread_exp[t];
            for (std::uint32_t l = 0; l < cp.n_locs; ++l)
                if (thread_reached[t][l]) loc_reached[l] = true;
        }
        for (std::uint32_t l = 0; l < cp.n_locs; ++l) frontier[l].clear();
        for (std::uint32_t l = 0; l < cp.n_locs; ++l) {
            std::vector<std::uint8_t> batch;
            for (int t = 0; t < n_threads; ++t) {
                batch.insert(batch.end(), thread_out[t][l].begin(), thread_out[t][l].end());
                thread_out[t][l].clear();
                thread_out[t][l].shrink_to_fit();
            }
            std::vector<std::uint8_t> fresh = visited[l].absorb(std::move(batch));
            total += fresh.size() / std::max<std::size_t>(visited[l].stride(), 1);
            if (total > cfg.state_budget) throw BudgetExceeded("state budget exceeded");
            frontier[l] = std::move(fresh);
        }
    }

    std::vector<std::vector<std::string>> sets(cp.n_locs);
    if (keep_keys) {
        for (std::uint32_t l = 0; l < cp.n_locs; ++l) {
            const std::size_t stride = visited[l].stride();
            for (std::size_t i = 0; i < visited[l].size(); ++i)
                sets[l].emplace_back(reinterpret_cast<const char*>(visited[l].record(i)), stride);
        }
    } else {
        for (std::uint32_t l = 0; l < cp.n_locs; ++l)
            sets[l].resize(visited[l].size());  // sizes only
    }
    // finish_summary re-derives counts from set sizes.
    ReachSummary out;
    out.states_per_loc.resize(cp.n_locs, 0);
    for (std::uint32_t l = 0; l < cp.n_locs; ++l) {
        out.states_per_loc[l] = visited[l].size();
        out.stored_states += visited[l].size();
        if (visited[l].size() > 0) loc_reached[l] = true;
        if (cp.is_error[l] && loc_reached[l]) out.error_reachable = true;
    }
    out.loc_reached = std::move(loc_reached);
    out.expansions = expansions;
    if (keep_keys) {
        out.keys_per_loc.resize(cp.n_locs);
        for (std::uint32_t l = 0; l < cp.n_locs; ++l) {
            std::sort(sets[l].begin(), sets[l].end());
            out.keys_per_loc[l] = std::move(sets[l]);
        }
    }
    return out;
}

}  // namespace mapsep
