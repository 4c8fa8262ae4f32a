// Copyright (c) the mapsep contributors.
// SPDX-License-Identifier: Apache-2.0

#include "mapsep/semantics.hpp"

#include <algorithm>
#include <cassert>
#include <cstring>
#include <stdexcept>

#include "mapsep/diagnostics.hpp"

namespace mapsep {

namespace {

int encode_literal(CompiledProgram& cp, const Literal& lit) {
    if (lit.sort == Sort::Base) {
        cp.max_base_literal = std::max(cp.max_base_literal, lit.base_value);
        return lit.base_value;
    }
    return lit.is_bot() ? 0 : cp.encode_wid(lit.wid) + 1;
}

void compile_command(CompiledProgram& cp, const Command& c, std::vector<CompiledProgram::CCmd>& out) {
    using Op = CompiledProgram::Op;
    CompiledProgram::CCmd cc;
    if (const auto* ab = std::get_if<AssignBase>(&c)) {
        cc.a = cp.base_slot.at(ab->var);
        if (const auto* lit = std::get_if<LitExpr>(&ab->rhs)) {
            cc.op = Op::AssignLit;
            cc.lit = encode_literal(cp, lit->value);
        } else if (const auto* v = std::get_if<VarExpr>(&ab->rhs)) {
            cc.op = Op::AssignVar;
            cc.b = cp.base_slot.at(v->name);
        } else if (const auto* sel = std::get_if<SelectExpr>(&ab->rhs)) {
            cc.op = Op::AssignSelect;
            cc.b = cp.map_slot.at(sel->map);
            cc.c = cp.base_slot.at(sel->index);
        } else if (const auto* su = std::get_if<SuccExpr>(&ab->rhs)) {
            cc.op = Op::AssignSucc;
            cc.b = cp.base_slot.at(su->arg);
        } else {
            cc.op = Op::AssignPred;
            cc.b = cp.base_slot.at(std::get<PredExpr>(ab->rhs).arg);
        }
    } else if (const auto* am = std::get_if<AssignMap>(&c)) {
        cc.a = cp.map_slot.at(am->var);
        if (const auto* mv = std::get_if<MapVarExpr>(&am->rhs)) {
            cc.op = Op::MapCopy;
            cc.b = cp.map_slot.at(mv->name);
        } else if (const auto* st = std::get_if<StoreExpr>(&am->rhs)) {
            if (st->map != am->var)
                throw Diagnostic(DiagCode::NotNormalized,
                                 "store over a different map; run normalize first");
            cc.op = Op::Store;
            cc.b = cp.base_slot.at(st->index);
            if (st->value_is_var()) {
                cc.c = cp.base_slot.at(st->value_var());
            } else {
                cc.c = -1;
                cc.lit = encode_literal(cp, st->value_lit());
            }
        } else {
            cc.op = Op::MapConst;
            cc.lit = encode_literal(cp, std::get<ConstMapExpr>(am->rhs).value);
        }
    } else if (const auto* hb = std::get_if<HavocBase>(&c)) {
        cc.op = Op::HavocBase;
        cc.a = cp.base_slot.at(hb->var);
    } else if (const auto* hm = std::get_if<HavocMap>(&c)) {
        cc.op = Op::HavocMap;
        cc.a = cp.map_slot.at(hm->var);
    } else if (const auto* as = std::get_if<Assume>(&c)) {
        cc.op = Op::AssumeOp;
        cc.cond = &as->cond;
    } else if (std::holds_alternative<Skip>(c)) {
        cc.op = Op::SkipOp;
    } else if (const auto* seq = std::get_if<SeqCmd>(&c)) {
        for (const auto& part : seq->parts) compile_command(cp, part, out);
        return;
    } else {
        const auto& he = std::get<HavocMapsEqual>(c);
        cc.op = Op::HavocEq;
        for (const auto& m : he.maps) cc.maps.push_back(cp.map_slot.at(m));
    }
    out.push_back(std::move(cc));
}

}  // namespace

int CompiledProgram::encode_wid(const std::string& stmt_id) {
    auto it = wid_of_stmt.find(stmt_id);
    if (it != wid_of_stmt.end()) return it->second;
    int idx = static_cast<int>(wid_names.size());
    if (idx >= 250) throw Diagnostic(DiagCode::InvalidArgument, "too many write symbols");
    wid_names.push_back(stmt_id);
    wid_of_stmt.emplace(stmt_id, idx);
    return idx;
}

CompiledProgram compile(const Program& p) {
    CompiledProgram cp;
    cp.source = &p;
    cp.initial = p.initial;
    cp.n_locs = p.num_locs();
    cp.is_error = p.is_error;
    for (const auto& v : p.vars) {
        if (v.kind == VarKind::Base) {
            cp.base_slot.emplace(v.name, static_cast<int>(cp.base_names.size()));
            cp.base_names.push_back(v.name);
        } else {
            cp.map_slot.emplace(v.name, static_cast<int>(cp.map_names.size()));
            cp.map_names.push_back(v.name);
            cp.map_sort.push_back(v.cell_sort);
        }
    }
    cp.shadow_of.assign(cp.map_names.size(), -1);
    for (std::size_t m = 0; m < cp.map_names.size(); ++m) {
        auto it = cp.map_slot.find(shadow_name(cp.map_names[m]));
        if (it != cp.map_slot.end()) cp.shadow_of[m] = it->second;
    }
    // Write statements register their wid symbols first, in program order.
    for (const auto& s : p.statements)
        if (is_map_write(s.cmd)) cp.encode_wid(s.id);

    cp.out.resize(cp.n_locs);
    for (std::size_t i = 0; i < p.statements.size(); ++i) {
        const Statement& s = p.statements[i];
        CompiledProgram::CStmt cs;
        cs.src = s.src;
        cs.dst = s.dst;
        cs.index = static_cast<int>(i);
        cs.is_write = is_map_write(s.cmd);
        compile_command(cp, s.cmd, cs.cmds);
        for (const auto& cc : cs.cmds)
            if (cc.op == CompiledProgram::Op::AssignSelect) cs.is_read = true;
        cp.out[s.src].push_back(static_cast<int>(i));
        cp.stmts.push_back(std::move(cs));
    }
    return cp;
}

// ---------------------------------------------------------------------------
// Liveness

namespace {

void live_transfer(const CompiledProgram::CCmd& cc, LiveSet& live, const CompiledProgram& cp) {
    using Op = CompiledProgram::Op;
    auto gen_bool = [&](const BoolExpr& e, auto&& self) -> void {
        if (const auto* eq = std::get_if<EqExpr>(&e)) {
            live.base[static_cast<std::size_t>(cp.base_slot.at(eq->lhs))] = true;
            live.base[static_cast<std::size_t>(cp.base_slot.at(eq->rhs))] = true;
        } else if (const auto* n = std::get_if<NotExpr>(&e)) {
            self(*n->arg, self);
        } else if (const auto* a = std::get_if<AndExpr>(&e)) {
            self(*a->lhs, self);
            self(*a->rhs, self);
        } else {
            const auto& o = std::get<OrExpr>(e);
            self(*o.lhs, self);
            self(*o.rhs, self);
        }
    };
    switch (cc.op) {
    case Op::AssignLit:
        live.base[cc.a] = false;
        break;
    case Op::AssignVar:
    case Op::AssignSucc:
    case Op::AssignPred:
        live.base[cc.a] = false;
        live.base[cc.b] = true;
        break;
    case Op::AssignSelect:
        live.base[cc.a] = false;
        live.maps[cc.b] = true;
        live.base[cc.c] = true;
        break;
    case Op::MapCopy:
        live.maps[cc.a] = false;
        live.maps[cc.b] = true;
        break;
    case Op::MapConst:
        live.maps[cc.a] = false;
        break;
    case Op::Store:
        // The old map value is read; index and stored value must be concrete.
        live.maps[cc.a] = true;
        live.base[cc.b] = true;
        if (cc.c >= 0) live.base[cc.c] = true;
        break;
    case Op::HavocBase:
        live.base[cc.a] = false;
        break;
    case Op::HavocMap:
        live.maps[cc.a] = false;
        break;
    case Op::HavocEq:
        for (int m : cc.maps) live.maps[m] = false;
        break;
    case Op::AssumeOp:
        gen_bool(*cc.cond, gen_bool);
        break;
    case Op::SkipOp:
        break;
    }
}

}  // namespace

std::vector<LiveSet> compute_liveness(const CompiledProgram& cp) {
    std::vector<LiveSet> live(cp.n_locs);
    for (auto& l : live) {
        l.base.assign(cp.n_base(), false);
        l.maps.assign(cp.n_maps(), false);
    }
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto it = cp.stmts.rbegin(); it != cp.stmts.rend(); ++it) {
            LiveSet in = live[it->dst];
            for (auto cc = it->cmds.rbegin(); cc != it->cmds.rend(); ++cc) live_transfer(*cc, in, cp);
            LiveSet& cur = live[it->src];
            for (int i = 0; i < cp.n_base(); ++i) {
                if (in.base[i] && !cur.base[i]) {
                    cur.base[i] = true;
                    changed = true;
                }
            }
            for (int i = 0; i < cp.n_maps(); ++i) {
                if (in.maps[i] && !cur.maps[i]) {
                    cur.maps[i] = true;
                    changed = true;
                }
            }
        }
    }
    return live;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

int need(const Cell& c) {
    if (c.v == kStar) throw std::logic_error("unconstrained value evaluated (liveness bug)");
    return c.v;
}

const MapVal& need_map(const State& s, int slot) {
    const MapVal& mv = s.maps[slot];
    if (mv.star) throw std::logic_error("unconstrained map evaluated (liveness bug)");
    return mv;
}

}  // namespace

int eval_base(const CompiledProgram& cp, const FiniteConfig& cfg, const State& s, const BaseExpr& e) {
    if (const auto* lit = std::get_if<LitExpr>(&e)) {
        if (lit->value.sort != Sort::Base) throw Diagnostic(DiagCode::SortMismatch, "wid literal in base expression");
        return lit->value.base_value;
    }
    if (const auto* v = std::get_if<VarExpr>(&e)) return need(s.base[cp.base_slot.at(v->name)]);
    if (const auto* sel = std::get_if<SelectExpr>(&e)) {
        int idx = need(s.base[cp.base_slot.at(sel->index)]);
        return need(need_map(s, cp.map_slot.at(sel->map)).cells[idx]);
    }
    if (const auto* su = std::get_if<SuccExpr>(&e)) {
        int v = need(s.base[cp.base_slot.at(su->arg)]);
        return std::min(v + 1, cfg.domain_size - 1);
    }
    const auto& pr = std::get<PredExpr>(e);
    int v = need(s.base[cp.base_slot.at(pr.arg)]);
    return std::max(v - 1, 0);
}

bool eval_bool(const CompiledProgram& cp, const State& s, const BoolExpr& e) {
    if (const auto* eq = std::get_if<EqExpr>(&e))
        return need(s.base[cp.base_slot.at(eq->lhs)]) == need(s.base[cp.base_slot.at(eq->rhs)]);
    if (const auto* n = std::get_if<NotExpr>(&e)) return !eval_bool(cp, s, *n->arg);
    if (const auto* a = std::get_if<AndExpr>(&e)) return eval_bool(cp, s, *a->lhs) && eval_bool(cp, s, *a->rhs);
    const auto& o = std::get<OrExpr>(e);
    return eval_bool(cp, s, *o.lhs) || eval_bool(cp, s, *o.rhs);
}

// ---------------------------------------------------------------------------
// Statement expansion

namespace {

// Enumerates all |D|^|D| cell vectors. Throws when |D| exceeds the cap.
void for_each_map_value(const FiniteConfig& cfg, const std::function<void(const std::vector<Cell>&)>& fn) {
    int d = cfg.domain_size;
    if (d > cfg.max_havoc_domain)
        throw Diagnostic(DiagCode::MapHavocDomainTooLarge,
                         "whole-map enumeration needs domain <= " + std::to_string(cfg.max_havoc_domain));
    std::vector<Cell> cells(d);
    for (auto& c : cells) c = Cell{0, kNoTag};
    for (;;) {
        fn(cells);
        int i = 0;
        while (i < d && cells[i].v == d - 1) cells[i++].v = 0;
        if (i == d) break;
        ++cells[i].v;
    }
}

}  // namespace

void expand_statement(const CompiledProgram& cp, const FiniteConfig& cfg, const State& s, int stmt_idx,
                      const std::function<void(State&&)>& sink, const ReadHook* hook) {
    const auto& st = cp.stmts[stmt_idx];
    assert(s.pc == st.src);
    struct Work {
        State s;
        std::size_t ci;
    };
    std::vector<Work> stack;
    stack.push_back({s, 0});
    while (!stack.empty()) {
        Work w = std::move(stack.back());
        stack.pop_back();
        bool killed = false;
        while (w.ci < st.cmds.size()) {
            const auto& cc = st.cmds[w.ci];
            using Op = CompiledProgram::Op;
            switch (cc.op) {
            case Op::AssignLit:
                w.s.base[cc.a] = Cell{static_cast<std::uint8_t>(cc.lit), kNoTag};
                break;
            case Op::AssignVar:
                w.s.base[cc.a] = w.s.base[cc.b];
                break;
            case Op::AssignSelect: {
                int idx = need(w.s.base[cc.c]);
                const Cell cell = need_map(w.s, cc.b).cells[idx];
                if (hook) (*hook)(stmt_idx, w.s, idx, cell);
                w.s.base[cc.a] = Cell{cell.v, kNoTag};
                break;
            }
            case Op::AssignSucc: {
                int v = need(w.s.base[cc.b]);
                w.s.base[cc.a] = Cell{static_cast<std::uint8_t>(std::min(v + 1, cfg.domain_size - 1)), kNoTag};
                break;
            }
            case Op::AssignPred: {
                int v = need(w.s.base[cc.b]);
                w.s.base[cc.a] = Cell{static_cast<std::uint8_t>(std::max(v - 1, 0)), kNoTag};
                break;
            }
            case Op::MapCopy:
                w.s.maps[cc.a] = need_map(w.s, cc.b);
                break;
            case Op::MapConst: {
                MapVal mv;
                mv.star = false;
                mv.cells.assign(cfg.domain_size, Cell{static_cast<std::uint8_t>(cc.lit), kNoTag});
                w.s.maps[cc.a] = std::move(mv);
                break;
            }
            case Op::Store: {
                int idx = need(w.s.base[cc.b]);
                MapVal& mv = w.s.maps[cc.a];
                if (mv.star) throw std::logic_error("store into unconstrained map (liveness bug)");
                Cell val;
                if (cc.c >= 0) {
                    val.v = static_cast<std::uint8_t>(need(w.s.base[cc.c]));
                } else {
                    val.v = static_cast<std::uint8_t>(cc.lit);
                }
                val.tag = (cfg.tagged && cp.map_sort[cc.a] == Sort::Base) ? static_cast<std::int16_t>(stmt_idx)
                                                                          : kNoTag;
                mv.cells[idx] = val;
                break;
            }
            case Op::HavocBase: {
                for (int v = 1; v < cfg.domain_size; ++v) {
                    Work fork{w.s, w.ci + 1};
                    fork.s.base[cc.a] = Cell{static_cast<std::uint8_t>(v), kNoTag};
                    stack.push_back(std::move(fork));
                }
                w.s.base[cc.a] = Cell{0, kNoTag};
                break;
            }
            case Op::HavocMap: {
                std::size_t next = w.ci + 1;
                for_each_map_value(cfg, [&](const std::vector<Cell>& cells) {
                    Work fork{w.s, next};
                    fork.s.maps[cc.a].star = false;
                    fork.s.maps[cc.a].cells = cells;
                    stack.push_back(std::move(fork));
                });
                killed = true;  // all continuations pushed
                break;
            }
            case Op::HavocEq: {
                std::size_t next = w.ci + 1;
                for_each_map_value(cfg, [&](const std::vector<Cell>& cells) {
                    Work fork{w.s, next};
                    for (int m : cc.maps) {
                        fork.s.maps[m].star = false;
                        fork.s.maps[m].cells = cells;
                    }
                    stack.push_back(std::move(fork));
                });
                killed = true;
                break;
            }
            case Op::AssumeOp:
                if (!eval_bool(cp, w.s, *cc.cond)) killed = true;
                break;
            case Op::SkipOp:
                break;
            }
            if (killed) break;
            ++w.ci;
        }
        if (!killed) {
            w.s.pc = st.dst;
            sink(std::move(w.s));
        }
    }
}

std::vector<State> post(const CompiledProgram& cp, const FiniteConfig& cfg, const std::vector<State>& states,
                        int stmt_idx) {
    std::vector<State> out;
    for (const auto& s : states) {
        if (s.pc != cp.stmts[stmt_idx].src) continue;
        expand_statement(cp, cfg, s, stmt_idx, [&](State&& t) { out.push_back(std::move(t)); });
    }
    std::sort(out.begin(), out.end(), [&](const State& a, const State& b) {
        return state_key(cp, cfg, a, true) < state_key(cp, cfg, b, true);
    });
    out.erase(std::unique(out.begin(), out.end(),
                          [&](const State& a, const State& b) {
                              return state_key(cp, cfg, a, true) == state_key(cp, cfg, b, true);
                          }),
              out.end());
    return out;
}

void enumerate_initial_states(const CompiledProgram& cp, const FiniteConfig& cfg,
                              const std::function<void(State&&)>& sink) {
    std::vector<LiveSet> live = compute_liveness(cp);
    const LiveSet& at_entry = live[cp.initial];

    State seed;
    seed.pc = cp.initial;
    seed.base.assign(cp.n_base(), Cell{});
    seed.maps.assign(cp.n_maps(), MapVal{});

    std::vector<int> live_base, live_maps;
    for (int i = 0; i < cp.n_base(); ++i)
        if (at_entry.base[i]) live_base.push_back(i);
    for (int i = 0; i < cp.n_maps(); ++i)
        if (at_entry.maps[i]) live_maps.push_back(i);

    // Odometer over live base variables, then live maps.
    std::function<void(State&, std::size_t)> gen_maps = [&](State& s, std::size_t mi) {
        if (mi == live_maps.size()) {
            State copy = s;
            sink(std::move(copy));
            return;
        }
        for_each_map_value(cfg, [&](const std::vector<Cell>& cells) {
            s.maps[live_maps[mi]].star = false;
            s.maps[live_maps[mi]].cells = cells;
            gen_maps(s, mi + 1);
        });
        s.maps[live_maps[mi]] = MapVal{};
    };
    std::function<void(State&, std::size_t)> gen_base = [&](State& s, std::size_t bi) {
        if (bi == live_base.size()) {
            gen_maps(s, 0);
            return;
        }
        for (int v = 0; v < cfg.domain_size; ++v) {
            s.base[live_base[bi]] = Cell{static_cast<std::uint8_t>(v), kNoTag};
            gen_base(s, bi + 1);
        }
        s.base[live_base[bi]] = Cell{};
    };
    gen_base(seed, 0);
}

// ---------------------------------------------------------------------------
// Canonical byte encoding

std::string state_key(const CompiledProgram& cp, const FiniteConfig& cfg, const State& s, bool include_pc,
                      const LiveSet* live) {
    std::string key;
    key.reserve(8 + s.base.size() * 3 + s.maps.size() * (2 + 3 * cfg.domain_size));
    if (include_pc) {
        key.push_back(static_cast<char>(s.pc & 0xff));
        key.push_back(static_cast<char>((s.pc >> 8) & 0xff));
        key.push_back(static_cast<char>((s.pc >> 16) & 0xff));
        key.push_back(static_cast<char>((s.pc >> 24) & 0xff));
    }
    auto push_cell = [&](const Cell& c) {
        key.push_back(static_cast<char>(c.v));
        if (cfg.tagged) {
            key.push_back(static_cast<char>(c.tag & 0xff));
            key.push_back(static_cast<char>((c.tag >> 8) & 0xff));
        }
    };
    for (std::size_t i = 0; i < s.base.size(); ++i) {
        if (live && !live->base[i]) {
            push_cell(Cell{});
        } else {
            push_cell(s.base[i]);
        }
    }
    for (std::size_t m = 0; m < s.maps.size(); ++m) {
        bool dead = live && !live->maps[m];
        const MapVal& mv = s.maps[m];
        if (dead || mv.star) {
            key.push_back(1);
        } else {
            key.push_back(0);
            for (const Cell& c : mv.cells) push_cell(c);
        }
    }
    return key;
}

State state_from_key(const CompiledProgram& cp, const FiniteConfig& cfg, std::string_view key, bool include_pc,
                     std::uint32_t pc_hint) {
    State s;
    std::size_t pos = 0;
    auto u8 = [&]() { return static_cast<std::uint8_t>(key[pos++]); };
    if (include_pc) {
        std::uint32_t pc = 0;
        pc |= u8();
        pc |= static_cast<std::uint32_t>(u8()) << 8;
        pc |= static_cast<std::uint32_t>(u8()) << 16;
        pc |= static_cast<std::uint32_t>(u8()) << 24;
        s.pc = pc;
    } else {
        s.pc = pc_hint;
    }
    auto read_cell = [&]() {
        Cell c;
        c.v = u8();
        if (cfg.tagged) {
            std::uint16_t t = u8();
            t |= static_cast<std::uint16_t>(u8()) << 8;
            c.tag = static_cast<std::int16_t>(t);
        }
        return c;
    };
    s.base.resize(cp.n_base());
    for (int i = 0; i < cp.n_base(); ++i) s.base[i] = read_cell();
    s.maps.resize(cp.n_maps());
    for (int m = 0; m < cp.n_maps(); ++m) {
        if (u8()) {
            s.maps[m] = MapVal{};
        } else {
            s.maps[m].star = false;
            s.maps[m].cells.resize(cfg.domain_size);
            for (int d = 0; d < cfg.domain_size; ++d) s.maps[m].cells[d] = read_cell();
        }
    }
    return s;
}

void project_state(const CompiledProgram& cp, State& s, const LiveSet& live) {
    for (int i = 0; i < cp.n_base(); ++i)
        if (!live.base[i]) s.base[i] = Cell{};
    for (int m = 0; m < cp.n_maps(); ++m)
        if (!live.maps[m]) s.maps[m] = MapVal{};
}

State untag(const State& s) {
    State t = s;
    for (auto& c : t.base) c.tag = kNoTag;
    for (auto& mv : t.maps)
        for (auto& c : mv.cells) c.tag = kNoTag;
    return t;
}

}  // namespace mapsep
