// Copyright (c) the mapsep contributors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "mapsep/bench.hpp"
#include "mapsep/diagnostics.hpp"
#include "mapsep/equiv.hpp"
#include "mapsep/parser.hpp"
#include "mapsep/pipeline.hpp"
#include "mapsep/printer.hpp"

using namespace mapsep;

namespace {

LastWrites table_of(std::initializer_list<std::pair<std::string, std::set<std::string>>> reads) {
    LastWrites lw;
    for (const auto& [read, pre] : reads) {
        lw.preimage[read] = pre;
        for (const auto& w : pre)
            if (w != kBotMarker) lw.pairs.emplace(w, read);
    }
    return lw;
}

}  // namespace

TEST_CASE("influence relation from preimages") {
    LastWrites lw = table_of({{"r1", {"w1", "w2", kBotMarker}}, {"r2", {"w3"}}, {"r3", {}}});
    auto r = build_influence_relation(lw);
    CHECK(r.count({"w1", "w2"}) == 1);
    CHECK(r.count({"w2", "w1"}) == 1);
    CHECK(r.count({"w1", "w1"}) == 1);
    CHECK(r.count({"w3", "w3"}) == 1);
    CHECK(r.count({"w1", "w3"}) == 0);
    // One read with a three-write preimage gives all nine pairs.
    LastWrites lw3 = table_of({{"r", {"a", "b", "c"}}});
    CHECK(build_influence_relation(lw3).size() == 9);
    // No reads: empty relation.
    CHECK(build_influence_relation(LastWrites{}).empty());
}

TEST_CASE("partition: unrelated writes become singletons") {
    Program p = parse(
        "var i: int;\nvar x: int;\nvar a: [int]int;\n"
        "havoc a;\na[i] := x;\na[i] := x;\na[i] := x;\n");
    LastWrites lw;  // no reads at all
    WritePartition part = partition_writes(p, lw);
    CHECK(part.blocks.size() == 3);
    for (const auto& b : part.blocks) CHECK(b.size() == 1);
    // Deterministic naming: lexicographically least member, sanitized.
    for (std::size_t i = 0; i < part.blocks.size(); ++i)
        CHECK(part.names[i] == sanitize_block_name(*part.blocks[i].begin()));
}

TEST_CASE("partition equals the transitive closure of the influence relation") {
    // Benchmark at size 10, checked against a dense closure computation.
    Program p = gen_benchmark(10);
    PipelineResult r = run_pipeline(p);
    const LastWrites& lw = r.analysis.approx;

    std::vector<std::string> writes;
    for (const Statement* w : write_statements(r.input)) writes.push_back(w->id);
    std::sort(writes.begin(), writes.end());
    int n = static_cast<int>(writes.size());
    auto index = [&](const std::string& w) {
        return static_cast<int>(std::lower_bound(writes.begin(), writes.end(), w) - writes.begin());
    };
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (int i = 0; i < n; ++i) reach[i][i] = true;
    for (const auto& [w1, w2] : build_influence_relation(lw)) {
        reach[index(w1)][index(w2)] = true;
        reach[index(w2)][index(w1)] = true;
    }
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (reach[i][k] && reach[k][j]) reach[i][j] = true;

    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            bool same_block = r.partition.block_of(writes[i]) == r.partition.block_of(writes[j]);
            CHECK(same_block == reach[i][j]);
        }
    CHECK(r.blocks_per_map.at("mem") == 10);
}

TEST_CASE("partition invariants: disjoint cover and preimage containment") {
    Program p = gen_benchmark(6);
    PipelineResult r = run_pipeline(p);
    std::set<std::string> seen;
    std::size_t total = 0;
    for (const auto& b : r.partition.blocks) {
        CHECK(!b.empty());
        total += b.size();
        for (const auto& w : b) CHECK(seen.insert(w).second);
    }
    CHECK(total == write_statements(r.input).size());
    for (const auto& [read, pre] : r.analysis.approx.preimage) {
        (void)read;
        int block = -1;
        for (const auto& w : pre) {
            if (w == kBotMarker) continue;
            int b = r.partition.block_of(w);
            CHECK(b >= 0);
            if (block >= 0) CHECK(b == block);
            block = b;
        }
    }
}

TEST_CASE("a read whose preimage spans blocks is rejected") {
    Program p = parse(
        "var i: int;\nvar x: int;\nvar y: int;\nvar a: [int]int;\n"
        "havoc a;\na[i] := x;\na[i] := x;\ny := a[i];\n");
    auto writes = write_statements(p);
    REQUIRE(writes.size() == 2);
    std::string rid;
    for (const auto& s : p.statements)
        if (is_map_read(s.cmd)) rid = s.id;
    // A partition that separates the two writes contradicts this preimage.
    LastWrites lying = table_of({{rid, {writes[0]->id}}});
    WritePartition part = partition_writes(p, lying);
    LastWrites spanning = table_of({{rid, {writes[0]->id, writes[1]->id}}});
    CHECK_THROWS_AS(transform(p, part, spanning), Diagnostic);
}

TEST_CASE("transform: benchmark splits mem and rewires reads and writes") {
    Program p = gen_benchmark(2);
    PipelineResult r = run_pipeline(p);
    const Program& out = r.output;
    // mem is gone; two block copies plus bot exist.
    CHECK(out.var_index("mem") < 0);
    int mem_family = 0, valid_family = 0;
    for (const auto& v : out.vars) {
        if (v.name.rfind("mem__", 0) == 0) ++mem_family;
        if (v.name.rfind("valid__", 0) == 0) ++valid_family;
    }
    CHECK(mem_family == 3);  // two blocks + bot
    CHECK(r.blocks_per_map.at("mem") == 2);
    CHECK(valid_family >= 2);

    // Loop writes and their reads use the same family member, and the two
    // loop branches use different members.
    std::set<std::string> loop_write_targets;
    for (const auto& s : out.statements)
        if (const auto* st = as_map_write(s.cmd); st && st->map.rfind("mem__", 0) == 0)
            loop_write_targets.insert(st->map);
    CHECK(loop_write_targets.size() == 2);
    CHECK(loop_write_targets.count("mem__bot") == 0);
    for (const auto& s : out.statements)
        if (const auto* sel = as_map_read(s.cmd); sel && sel->map.rfind("mem", 0) == 0)
            CHECK(loop_write_targets.count(sel->map) == 1);

    // Hygiene: every statement references only declared variables; no
    // original map name appears anywhere.
    check_well_formed(out, true);
    std::string text = pretty(out);
    CHECK(text.find("mem[") == std::string::npos);
    CHECK(text.find("valid[") == std::string::npos);
    // Shape preserved: same locations, one edge per edge.
    CHECK(out.loc_names == r.input.loc_names);
    CHECK(out.statements.size() == r.input.statements.size());
}

TEST_CASE("transform: program without map statements is unchanged") {
    Program p = parse("var x: int;\nvar y: int;\nvar a: [int]int;\nx := y;\nhavoc y;\n");
    PipelineResult r = run_pipeline(p);
    CHECK(pretty(r.output) == pretty(r.input));
}

TEST_CASE("transform: a read whose preimage is bot plus one write uses that write's block") {
    Program p = parse(
        "var p: int;\nvar q: int;\nvar x: int;\nvar y: int;\nvar a: [int]int;\n"
        "a := const(0);\nhavoc p;\nhavoc q;\nhavoc x;\n"
        "a[p] := x;\n"
        "y := a[q];\n");
    PipelineResult r = run_pipeline(p);
    std::string wid;
    for (const auto& s : r.input.statements)
        if (is_map_write(s.cmd)) wid = s.id;
    // The read's preimage is {bot, wid}; it must read from wid's block.
    for (const auto& s : r.output.statements) {
        const auto* sel = as_map_read(s.cmd);
        if (!sel) continue;
        int b = r.partition.block_of(wid);
        CHECK(sel->map == "a__" + r.partition.names[b]);
    }
    FiniteConfig cfg;
    cfg.domain_size = 3;
    CHECK(check_bisim(r.input, r.output, cfg).bisimilar);
}

TEST_CASE("transform: reads of never-written maps go to the bot copy") {
    Program p = parse(
        "var i: int;\nvar y: int;\nvar a: [int]int;\n"
        "havoc a;\nhavoc i;\n"
        "y := a[i];\n");
    PipelineResult r = run_pipeline(p);
    bool saw = false;
    for (const auto& s : r.output.statements)
        if (const auto* sel = as_map_read(s.cmd)) {
            CHECK(sel->map == "a__bot");
            saw = true;
        }
    CHECK(saw);
}

TEST_CASE("transform: copies and havocs fan out over the whole family") {
    Program p = parse(
        "var i: int;\nvar x: int;\nvar y: int;\nvar a: [int]int;\nvar b: [int]int;\n"
        "a := const(0);\nb := const(0);\nhavoc i;\nhavoc x;\n"
        "a[i] := x;\n"
        "b := a;\n"
        "havoc a;\n"
        "y := b[i];\n");
    PipelineResult r = run_pipeline(p);
    int copies = 0, havoc_eq = 0;
    for (const auto& s : r.output.statements) {
        if (const auto* seq = std::get_if<SeqCmd>(&s.cmd)) {
            bool all_copies = !seq->parts.empty();
            for (const auto& part : seq->parts) {
                const auto* am = std::get_if<AssignMap>(&part);
                all_copies = all_copies && am && std::holds_alternative<MapVarExpr>(am->rhs);
            }
            if (all_copies) {
                ++copies;
                CHECK(seq->parts.size() == r.partition.blocks.size() + 1);
            }
        }
        if (const auto* he = std::get_if<HavocMapsEqual>(&s.cmd)) {
            ++havoc_eq;
            CHECK(he->maps.size() == r.partition.blocks.size() + 1);
        }
    }
    CHECK(copies == 1);
    CHECK(havoc_eq == 1);
    FiniteConfig cfg;
    cfg.domain_size = 2;
    CHECK(check_bisim(r.input, r.output, cfg).bisimilar);
}
