// Copyright (c) the mapsep contributors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>

#include "mapsep/bench.hpp"
#include "mapsep/diagnostics.hpp"
#include "mapsep/parser.hpp"
#include "mapsep/printer.hpp"
#include "mapsep/reach.hpp"
#include "support/generator.hpp"

using namespace mapsep;

namespace {

State mk_state(const CompiledProgram& cp, const FiniteConfig& cfg, std::uint32_t pc,
               const std::vector<int>& base_vals, const std::vector<std::vector<int>>& map_vals) {
    State s;
    s.pc = pc;
    s.base.resize(cp.n_base());
    for (int i = 0; i < cp.n_base(); ++i) s.base[i] = Cell{static_cast<std::uint8_t>(base_vals[i]), kNoTag};
    s.maps.resize(cp.n_maps());
    for (int m = 0; m < cp.n_maps(); ++m) {
        s.maps[m].star = false;
        s.maps[m].cells.resize(cfg.domain_size);
        for (int d = 0; d < cfg.domain_size; ++d)
            s.maps[m].cells[d] = Cell{static_cast<std::uint8_t>(map_vals[m][d]), kNoTag};
    }
    return s;
}

// ---------------------------------------------------------------------------
// Independent single-step interpreter, written directly from the evaluation
// and post tables over the AST. Shares nothing with the library path.

struct NaiveState {
    std::uint32_t pc = 0;
    std::map<std::string, int> base;
    std::map<std::string, std::vector<int>> maps;

    bool operator<(const NaiveState& o) const {
        return std::tie(pc, base, maps) < std::tie(o.pc, o.base, o.maps);
    }
};

int naive_eval_base(const NaiveState& s, const BaseExpr& e, int domain) {
    if (const auto* lit = std::get_if<LitExpr>(&e)) return lit->value.base_value;
    if (const auto* v = std::get_if<VarExpr>(&e)) return s.base.at(v->name);
    if (const auto* sel = std::get_if<SelectExpr>(&e)) return s.maps.at(sel->map)[s.base.at(sel->index)];
    if (const auto* su = std::get_if<SuccExpr>(&e)) return std::min(s.base.at(su->arg) + 1, domain - 1);
    return std::max(s.base.at(std::get<PredExpr>(e).arg) - 1, 0);
}

bool naive_eval_bool(const NaiveState& s, const BoolExpr& e) {
    if (const auto* eq = std::get_if<EqExpr>(&e)) return s.base.at(eq->lhs) == s.base.at(eq->rhs);
    if (const auto* n = std::get_if<NotExpr>(&e)) return !naive_eval_bool(s, *n->arg);
    if (const auto* a = std::get_if<AndExpr>(&e)) return naive_eval_bool(s, *a->lhs) && naive_eval_bool(s, *a->rhs);
    const auto& o = std::get<OrExpr>(e);
    return naive_eval_bool(s, *o.lhs) || naive_eval_bool(s, *o.rhs);
}

void naive_post_cmd(const Command& c, const NaiveState& in, int domain, std::vector<NaiveState>& out) {
    if (const auto* ab = std::get_if<AssignBase>(&c)) {
        NaiveState t = in;
        t.base[ab->var] = naive_eval_base(in, ab->rhs, domain);
        out.push_back(std::move(t));
    } else if (const auto* am = std::get_if<AssignMap>(&c)) {
        NaiveState t = in;
        if (const auto* mv = std::get_if<MapVarExpr>(&am->rhs)) {
            t.maps[am->var] = in.maps.at(mv->name);
        } else if (const auto* st = std::get_if<StoreExpr>(&am->rhs)) {
            std::vector<int> m = in.maps.at(st->map);
            m[in.base.at(st->index)] =
                st->value_is_var() ? in.base.at(st->value_var()) : st->value_lit().base_value;
            t.maps[am->var] = std::move(m);
        } else {
            const auto& cm = std::get<ConstMapExpr>(am->rhs);
            t.maps[am->var] = std::vector<int>(domain, cm.value.base_value);
        }
        out.push_back(std::move(t));
    } else if (const auto* hb = std::get_if<HavocBase>(&c)) {
        for (int v = 0; v < domain; ++v) {
            NaiveState t = in;
            t.base[hb->var] = v;
            out.push_back(std::move(t));
        }
    } else if (const auto* hm = std::get_if<HavocMap>(&c)) {
        std::vector<int> cells(domain, 0);
        for (;;) {
            NaiveState t = in;
            t.maps[hm->var] = cells;
            out.push_back(std::move(t));
            int i = 0;
            while (i < domain && cells[i] == domain - 1) cells[i++] = 0;
            if (i == domain) break;
            ++cells[i];
        }
    } else if (const auto* as = std::get_if<Assume>(&c)) {
        if (naive_eval_bool(in, as->cond)) out.push_back(in);
    } else if (std::holds_alternative<Skip>(c)) {
        out.push_back(in);
    } else if (const auto* seq = std::get_if<SeqCmd>(&c)) {
        std::vector<NaiveState> cur{in};
        for (const auto& part : seq->parts) {
            std::vector<NaiveState> next;
            for (const auto& s : cur) naive_post_cmd(part, s, domain, next);
            cur = std::move(next);
        }
        for (auto& s : cur) out.push_back(std::move(s));
    } else {
        const auto& he = std::get<HavocMapsEqual>(c);
        std::vector<int> cells(domain, 0);
        for (;;) {
            NaiveState t = in;
            for (const auto& m : he.maps) t.maps[m] = cells;
            out.push_back(std::move(t));
            int i = 0;
            while (i < domain && cells[i] == domain - 1) cells[i++] = 0;
            if (i == domain) break;
            ++cells[i];
        }
    }
}

std::vector<NaiveState> naive_post(const Program& p, const Statement& st, const NaiveState& in, int domain) {
    std::vector<NaiveState> out;
    if (in.pc != st.src) return out;
    naive_post_cmd(st.cmd, in, domain, out);
    for (auto& s : out) s.pc = st.dst;
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end(),
                          [](const NaiveState& a, const NaiveState& b) { return !(a < b) && !(b < a); }),
              out.end());
    return out;
}

NaiveState to_naive(const CompiledProgram& cp, const FiniteConfig& cfg, const State& s) {
    NaiveState n;
    n.pc = s.pc;
    for (int i = 0; i < cp.n_base(); ++i) n.base[cp.base_names[i]] = s.base[i].v;
    for (int m = 0; m < cp.n_maps(); ++m) {
        std::vector<int> cells(cfg.domain_size);
        for (int d = 0; d < cfg.domain_size; ++d) cells[d] = s.maps[m].cells[d].v;
        n.maps[cp.map_names[m]] = std::move(cells);
    }
    return n;
}

}  // namespace

TEST_CASE("eval matches the table") {
    Program p = parse("var i: int;\nvar x: int;\nvar a: [int]int;\n");
    CompiledProgram cp = compile(p);
    FiniteConfig cfg;
    cfg.domain_size = 8;

    State s = mk_state(cp, cfg, 0, {2, 3}, {{5, 5, 5, 5, 5, 5, 5, 5}});
    CHECK(eval_base(cp, cfg, s, SelectExpr{"a", "i"}) == 5);
    CHECK(eval_base(cp, cfg, s, LitExpr{Literal::base(7)}) == 7);
    CHECK(eval_base(cp, cfg, s, VarExpr{"x"}) == 3);
    CHECK(eval_base(cp, cfg, s, SuccExpr{"x"}) == 4);
    CHECK(eval_base(cp, cfg, s, PredExpr{"x"}) == 2);
    // Saturation at both ends.
    State top = mk_state(cp, cfg, 0, {7, 0}, {{0, 0, 0, 0, 0, 0, 0, 0}});
    CHECK(eval_base(cp, cfg, top, SuccExpr{"i"}) == 7);
    CHECK(eval_base(cp, cfg, top, PredExpr{"x"}) == 0);

    CHECK(eval_bool(cp, s, mk_eq("i", "i")));
    CHECK(!eval_bool(cp, s, mk_eq("i", "x")));
    CHECK(eval_bool(cp, s, mk_not(mk_eq("i", "x"))));
    CHECK(eval_bool(cp, s, mk_or(mk_eq("i", "x"), mk_eq("x", "x"))));
}

TEST_CASE("store updates one cell, const fills the map") {
    Program p = parse("var i: int;\nvar x: int;\nvar a: [int]int;\na[i] := x;\na := const(3);\n");
    CompiledProgram cp = compile(p);
    FiniteConfig cfg;
    cfg.domain_size = 4;
    State s = mk_state(cp, cfg, 0, {1, 3}, {{0, 1, 2, 0}});

    std::vector<State> succ = post(cp, cfg, {s}, 0);
    REQUIRE(succ.size() == 1);
    for (int j = 0; j < 4; ++j) {
        int expect = j == 1 ? 3 : s.maps[0].cells[j].v;
        CHECK(succ[0].maps[0].cells[j].v == expect);
    }

    State s1 = succ[0];
    std::vector<State> succ2 = post(cp, cfg, {s1}, 1);
    REQUIRE(succ2.size() == 1);
    for (int j = 0; j < 4; ++j) CHECK(succ2[0].maps[0].cells[j].v == 3);
}

TEST_CASE("post: contradiction and havoc") {
    Program p = parse("var i: int;\nvar x: int;\nassume !(i == i);\nhavoc x;\n");
    CompiledProgram cp = compile(p);
    FiniteConfig cfg;
    cfg.domain_size = 3;
    State s = mk_state(cp, cfg, 0, {1, 1}, {});
    CHECK(post(cp, cfg, {s}, 0).empty());
    State at1 = s;
    at1.pc = 1;
    CHECK(post(cp, cfg, {at1}, 1).size() == 3);
    // States not at the source location contribute nothing.
    CHECK(post(cp, cfg, {s}, 1).empty());
}

TEST_CASE("post agrees with the naive interpreter on 500 random pairs") {
    std::mt19937 rng(7);
    int done = 0;
    for (unsigned seed = 1; done < 500; ++seed) {
        testing::GenOptions opts;
        opts.seed = seed;
        opts.statements = 8;
        Program p = testing::random_program(opts);
        if (p.statements.empty()) continue;
        CompiledProgram cp = compile(p);
        FiniteConfig cfg;
        cfg.domain_size = 2 + static_cast<int>(rng() % 2);

        for (int trial = 0; trial < 10 && done < 500; ++trial, ++done) {
            const Statement& st = p.statements[rng() % p.statements.size()];
            std::vector<int> base_vals(cp.n_base());
            for (auto& v : base_vals) v = static_cast<int>(rng() % cfg.domain_size);
            std::vector<std::vector<int>> map_vals(cp.n_maps(), std::vector<int>(cfg.domain_size));
            for (auto& m : map_vals)
                for (auto& v : m) v = static_cast<int>(rng() % cfg.domain_size);
            int stmt_idx = -1;
            for (std::size_t i = 0; i < p.statements.size(); ++i)
                if (&p.statements[i] == &st) stmt_idx = static_cast<int>(i);
            State s = mk_state(cp, cfg, st.src, base_vals, map_vals);

            std::vector<State> lib = post(cp, cfg, {s}, stmt_idx);
            std::vector<NaiveState> naive = naive_post(p, st, to_naive(cp, cfg, s), cfg.domain_size);
            REQUIRE(lib.size() == naive.size());
            std::vector<NaiveState> lib_naive;
            for (const auto& t : lib) lib_naive.push_back(to_naive(cp, cfg, t));
            std::sort(lib_naive.begin(), lib_naive.end());
            for (std::size_t i = 0; i < naive.size(); ++i) {
                CHECK(!(lib_naive[i] < naive[i]));
                CHECK(!(naive[i] < lib_naive[i]));
            }
        }
    }
}

TEST_CASE("post is monotone and frames unwritten variables") {
    std::mt19937 rng(11);
    for (unsigned seed = 1; seed <= 20; ++seed) {
        testing::GenOptions opts;
        opts.seed = seed;
        Program p = testing::random_program(opts);
        if (p.statements.empty()) continue;
        CompiledProgram cp = compile(p);
        FiniteConfig cfg;
        cfg.domain_size = 2;

        int stmt_idx = static_cast<int>(rng() % p.statements.size());
        const auto& st = p.statements[stmt_idx];
        auto random_state = [&] {
            std::vector<int> base_vals(cp.n_base());
            for (auto& v : base_vals) v = static_cast<int>(rng() % cfg.domain_size);
            std::vector<std::vector<int>> map_vals(cp.n_maps(), std::vector<int>(cfg.domain_size));
            for (auto& m : map_vals)
                for (auto& v : m) v = static_cast<int>(rng() % cfg.domain_size);
            return mk_state(cp, cfg, st.src, base_vals, map_vals);
        };
        State s1 = random_state(), s2 = random_state();
        auto keys = [&](const std::vector<State>& v) {
            std::vector<std::string> out;
            for (const auto& s : v) out.push_back(state_key(cp, cfg, s, true));
            std::sort(out.begin(), out.end());
            return out;
        };
        // Monotonicity: successors of {s1} are successors of {s1, s2}.
        std::vector<std::string> small = keys(post(cp, cfg, {s1}, stmt_idx));
        std::vector<std::string> big = keys(post(cp, cfg, {s1, s2}, stmt_idx));
        CHECK(std::includes(big.begin(), big.end(), small.begin(), small.end()));
        // Frame: base variables a statement does not write are unchanged.
        std::vector<bool> written(cp.n_base(), false);
        for (const auto& cc : cp.stmts[stmt_idx].cmds) {
            using Op = CompiledProgram::Op;
            if (cc.op == Op::AssignLit || cc.op == Op::AssignVar || cc.op == Op::AssignSelect ||
                cc.op == Op::AssignSucc || cc.op == Op::AssignPred || cc.op == Op::HavocBase)
                written[cc.a] = true;
        }
        for (const State& t : post(cp, cfg, {s1}, stmt_idx))
            for (int b = 0; b < cp.n_base(); ++b)
                if (!written[b]) CHECK(t.base[b].v == s1.base[b].v);
    }
}

TEST_CASE("tag erasure commutes with post") {
    std::mt19937 rng(13);
    for (unsigned seed = 1; seed <= 20; ++seed) {
        testing::GenOptions opts;
        opts.seed = seed;
        Program p = testing::random_program(opts);
        if (p.statements.empty()) continue;
        CompiledProgram cp = compile(p);
        FiniteConfig tagged;
        tagged.domain_size = 2;
        tagged.tagged = true;
        FiniteConfig plain;
        plain.domain_size = 2;

        int stmt_idx = static_cast<int>(rng() % p.statements.size());
        const auto& st = p.statements[stmt_idx];
        std::vector<int> base_vals(cp.n_base());
        for (auto& v : base_vals) v = static_cast<int>(rng() % 2);
        std::vector<std::vector<int>> map_vals(cp.n_maps(), std::vector<int>(2));
        for (auto& m : map_vals)
            for (auto& v : m) v = static_cast<int>(rng() % 2);
        State s = mk_state(cp, tagged, st.src, base_vals, map_vals);
        // Give some cells tags as if earlier writes produced them.
        for (auto& mv : s.maps)
            for (auto& c : mv.cells)
                if (rng() % 2) c.tag = static_cast<std::int16_t>(rng() % p.statements.size());

        auto keys = [&](std::vector<State> v, const FiniteConfig& cfg) {
            std::vector<std::string> out;
            for (auto& t : v) out.push_back(state_key(cp, plain, untag(t), true));
            std::sort(out.begin(), out.end());
            out.erase(std::unique(out.begin(), out.end()), out.end());
            return out;
        };
        CHECK(keys(post(cp, tagged, {s}, stmt_idx), tagged) ==
              keys(post(cp, plain, {untag(s)}, stmt_idx), plain));
    }
}

TEST_CASE("reach on a hand-enumerated loop-free program") {
    Program p = parse("var x: int;\nvar y: int;\nassume x == y;\nx := 0;\ny := x;\n");
    CompiledProgram cp = compile(p);
    FiniteConfig cfg;
    cfg.domain_size = 2;
    ReachGraph g = reach_graph(cp, cfg);
    // L0: 4 states, L1: {00,11}, L2: {00,01}, L3: {00}.
    CHECK(g.at_loc[0].size() == 4);
    CHECK(g.at_loc[1].size() == 2);
    CHECK(g.at_loc[2].size() == 2);
    CHECK(g.at_loc[3].size() == 1);
    CHECK(g.n_states() == 9);
    const State& last = g.states[g.at_loc[3][0]];
    CHECK(last.base[cp.base_slot.at("x")].v == 0);
    CHECK(last.base[cp.base_slot.at("y")].v == 0);
}

TEST_CASE("false assume on the first edge keeps only initial states") {
    Program p = parse("var x: int;\nvar y: int;\nassume !(x == x);\ny := x;\n");
    CompiledProgram cp = compile(p);
    FiniteConfig cfg;
    cfg.domain_size = 3;
    ReachGraph g = reach_graph(cp, cfg);
    for (std::uint32_t l = 1; l < cp.n_locs; ++l) CHECK(g.at_loc[l].empty());
    CHECK(g.n_states() == g.initial.size());
}

TEST_CASE("budget is enforced") {
    Program p = parse(gen_benchmark_text(2));
    CompiledProgram cp = compile(p);
    FiniteConfig cfg;
    cfg.domain_size = 3;
    cfg.state_budget = 10;
    CHECK_THROWS_AS(reach_graph(cp, cfg), BudgetExceeded);
}

TEST_CASE("map enumeration respects the domain cap") {
    Program p = parse("var a: [int]int;\nvar x: int;\nhavoc a;\nx := a[x];\n");
    CompiledProgram cp = compile(p);
    FiniteConfig cfg;
    cfg.domain_size = 5;
    cfg.max_havoc_domain = 4;
    CHECK_THROWS_AS(reach_graph(cp, cfg), Diagnostic);
}

TEST_CASE("serial and parallel set engines agree") {
    for (unsigned seed = 1; seed <= 15; ++seed) {
        testing::GenOptions opts;
        opts.seed = seed;
        opts.statements = 8;
        Program p = testing::random_program(opts);
        CompiledProgram cp = compile(p);
        FiniteConfig cfg;
        cfg.domain_size = 2;
        cfg.project_live = true;

        ReachSummary ser = reach_sets_serial(cp, cfg, true);
        ReachSummary par = reach_sets_parallel(cp, cfg, true);
        CHECK(ser.stored_states == par.stored_states);
        CHECK(ser.error_reachable == par.error_reachable);
        REQUIRE(ser.keys_per_loc.size() == par.keys_per_loc.size());
        for (std::size_t l = 0; l < ser.keys_per_loc.size(); ++l) CHECK(ser.keys_per_loc[l] == par.keys_per_loc[l]);
    }
}

TEST_CASE("chain compression preserves junction sets and error reachability") {
    Program p = parse(gen_benchmark_text(2));
    CompiledProgram cp = compile(p);
    FiniteConfig plain_cfg;
    plain_cfg.domain_size = 4;
    plain_cfg.project_live = true;
    FiniteConfig comp_cfg = plain_cfg;
    comp_cfg.compress_chains = true;

    ReachSummary full = reach_sets_parallel(cp, plain_cfg, true);
    ReachSummary comp = reach_sets_parallel(cp, comp_cfg, true);
    CHECK(full.error_reachable == comp.error_reachable);
    std::vector<bool> junction = junction_locations(cp);
    for (std::uint32_t l = 0; l < cp.n_locs; ++l) {
        if (junction[l]) {
            CHECK(full.keys_per_loc[l] == comp.keys_per_loc[l]);
        } else {
            CHECK(comp.keys_per_loc[l].empty());
        }
    }
}

TEST_CASE("benchmark error locations are unreachable at domain 4") {
    Program p = parse(gen_benchmark_text(2));
    CompiledProgram cp = compile(p);
    FiniteConfig cfg;
    cfg.domain_size = 4;
    ReachGraph g = reach_graph(cp, cfg);
    for (std::uint32_t l = 0; l < cp.n_locs; ++l)
        if (cp.is_error[l]) CHECK(g.at_loc[l].empty());
}
