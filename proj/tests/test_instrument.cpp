// Copyright (c) the mapsep contributors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>

#include "mapsep/bench.hpp"
#include "mapsep/diagnostics.hpp"
#include "mapsep/instrument.hpp"
#include "mapsep/normalize.hpp"
#include "mapsep/parser.hpp"
#include "mapsep/printer.hpp"
#include "mapsep/reach.hpp"
#include "support/generator.hpp"

using namespace mapsep;

namespace {

Program tiny() {
    return parse(
        "var x: int;\nvar y: int;\nvar i: int;\nvar a: [int]int;\nvar b: [int]int;\n"
        "havoc a;\nb := const(1);\nb := a;\nx := y;\na[i] := x;\ny := a[i];\n");
}

// Projection of a reachable-state set onto the source variables, as sorted
// canonical strings (location name + base values + source map contents).
std::vector<std::string> source_projection(const Program& p, const FiniteConfig& cfg,
                                           const std::vector<std::string>& source_maps) {
    CompiledProgram cp = compile(p);
    ReachGraph g = reach_graph(cp, cfg);
    std::vector<std::string> out;
    for (const State& s : g.states) {
        std::string key = p.loc_names[s.pc];
        key.push_back('|');
        for (int b = 0; b < cp.n_base(); ++b) key.push_back(static_cast<char>(s.base[b].v));
        for (const auto& name : source_maps) {
            const MapVal& mv = s.maps[cp.map_slot.at(name)];
            key.push_back(mv.star ? 1 : 0);
            if (!mv.star)
                for (const Cell& c : mv.cells) key.push_back(static_cast<char>(c.v));
        }
        out.push_back(std::move(key));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace

TEST_CASE("command rewriting: havoc, const, copy, and everything else") {
    Program p = tiny();
    // havoc a ~> havoc a; a__lw := const(@bot)
    Command c = instrument_command(HavocMap{"a"}, p);
    auto* seq = std::get_if<SeqCmd>(&c);
    REQUIRE(seq);
    CHECK(to_text(c) == "atomic { havoc a; a__lw := const(@bot) }");
    // const assignment also resets the shadow
    c = instrument_command(AssignMap{"a", ConstMapExpr{Literal::base(1)}}, p);
    CHECK(to_text(c) == "atomic { a := const(1); a__lw := const(@bot) }");
    // map copy copies the shadow
    c = instrument_command(AssignMap{"b", MapVarExpr{"a"}}, p);
    CHECK(to_text(c) == "atomic { b := a; b__lw := a__lw }");
    // base statements are untouched
    c = instrument_command(AssignBase{"x", VarExpr{"y"}}, p);
    CHECK(to_text(c) == "x := y");
    c = instrument_command(Assume{mk_eq("x", "y")}, p);
    CHECK(to_text(c) == "assume x == y");
}

TEST_CASE("statement rewriting: writes update the shadow at the same index") {
    Program p = tiny();
    for (const auto& s : p.statements) {
        Statement t = instrument_statement(s, p);
        CHECK(t.id == s.id);
        if (const auto* st = as_map_write(s.cmd)) {
            auto* seq = std::get_if<SeqCmd>(&t.cmd);
            REQUIRE(seq);
            REQUIRE(seq->parts.size() == 2);
            const auto* ghost = std::get_if<AssignMap>(&seq->parts[1]);
            REQUIRE(ghost);
            CHECK(ghost->var == shadow_name(st->map));
            const auto& gs = std::get<StoreExpr>(ghost->rhs);
            CHECK(gs.index == st->index);
            CHECK(gs.value_lit().wid == s.id);
        } else if (is_map_read(s.cmd)) {
            CHECK(to_text(t.cmd) == to_text(s.cmd));
        }
    }
}

TEST_CASE("instrument declares shadows and seeds them on initial edges") {
    Program p = gen_benchmark(2);
    Program pre = instrument(p);
    CHECK(pre.find_var("mem__lw") != nullptr);
    CHECK(pre.find_var("valid__lw") != nullptr);
    CHECK(pre.find_var("mem__lw")->cell_sort == Sort::WriteId);
    // Every edge leaving the initial location starts with the bot seeds.
    for (const auto& s : pre.statements) {
        if (s.src != pre.initial) continue;
        const auto* seq = std::get_if<SeqCmd>(&s.cmd);
        REQUIRE(seq);
        const auto* first = std::get_if<AssignMap>(&seq->parts[0]);
        REQUIRE(first);
        CHECK(is_shadow_name(first->var));
        CHECK(std::get<ConstMapExpr>(first->rhs).value.is_bot());
    }
    // Same locations, same ids.
    CHECK(pre.loc_names == p.loc_names);
    for (std::size_t i = 0; i < p.statements.size(); ++i) CHECK(pre.statements[i].id == p.statements[i].id);
}

TEST_CASE("a program without maps instruments to itself") {
    Program p = parse("var x: int;\nvar y: int;\nx := y;\nhavoc y;\n");
    Program pre = instrument(p);
    CHECK(pretty(pre) == pretty(p));
}

TEST_CASE("re-instrumenting is rejected") {
    Program pre = instrument(tiny());
    CHECK_THROWS_AS(instrument(pre), Diagnostic);
}

TEST_CASE("every write id appears in exactly one shadow store") {
    Program p = normalize(gen_benchmark(4));
    Program pre = instrument(p);
    std::map<std::string, int> ghost_stores;
    for (const auto& s : pre.statements) {
        const auto* seq = std::get_if<SeqCmd>(&s.cmd);
        if (!seq) continue;
        for (const auto& part : seq->parts) {
            const auto* am = std::get_if<AssignMap>(&part);
            if (!am || !is_shadow_name(am->var)) continue;
            const auto* st = std::get_if<StoreExpr>(&am->rhs);
            if (!st || st->value_is_var()) continue;
            ++ghost_stores[st->value_lit().wid];
        }
    }
    auto writes = write_statements(p);
    CHECK(ghost_stores.size() == writes.size());
    for (const Statement* w : writes) CHECK(ghost_stores[w->id] == 1);
}

TEST_CASE("shadow erasure: instrumented reach projects onto the source reach") {
    std::vector<Program> programs{tiny(), gen_benchmark(2), parse(flow_example_text())};
    for (unsigned seed = 1; seed <= 10; ++seed) {
        testing::GenOptions opts;
        opts.seed = seed + 40;
        opts.statements = 6;
        programs.push_back(testing::random_program(opts));
    }
    for (const Program& p0 : programs) {
        Program p = normalize(p0);
        Program pre = instrument(p);
        CAPTURE(pretty(p));
        FiniteConfig cfg;
        cfg.domain_size = 3;
        std::vector<std::string> source_maps;
        for (const auto& v : p.vars)
            if (v.kind == VarKind::Map) source_maps.push_back(v.name);
        CHECK(source_projection(p, cfg, source_maps) == source_projection(pre, cfg, source_maps));
    }
}
