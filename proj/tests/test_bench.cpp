// Copyright (c) the mapsep contributors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "mapsep/bench.hpp"
#include "mapsep/diagnostics.hpp"
#include "mapsep/parser.hpp"
#include "mapsep/pipeline.hpp"
#include "mapsep/printer.hpp"

using namespace mapsep;

TEST_CASE("generator output is deterministic and well-formed for k up to 20") {
    for (int k = 2; k <= 20; k += 2) {
        std::string text = gen_benchmark_text(k);
        CHECK(text == gen_benchmark_text(k));
        Program p = parse(text);
        check_well_formed(p, false);
        Program q = parse(pretty(p));
        CHECK(pretty(q) == pretty(p));
    }
    CHECK_THROWS_AS(gen_benchmark(3), Diagnostic);
    CHECK_THROWS_AS(gen_benchmark(0), Diagnostic);
}

TEST_CASE("the size-k instance has k mallocs, k branches, and k asserts") {
    Program p = gen_benchmark(4);
    int havocs = 0, asserts = 0;
    for (const auto& s : p.statements) {
        if (std::holds_alternative<HavocBase>(s.cmd)) ++havocs;
        if (p.is_error[s.dst]) ++asserts;
    }
    CHECK(havocs == 4);
    CHECK(asserts == 4);
    int mem_writes = 0;
    for (const auto& s : p.statements)
        if (const auto* st = as_map_write(s.cmd); st && st->map == "mem") ++mem_writes;
    CHECK(mem_writes == 8);  // 4 initializations + 4 loop writes
}

TEST_CASE("pipeline splits mem into k blocks across the family") {
    for (int k : {2, 4, 6, 10}) {
        PipelineResult r = run_pipeline(gen_benchmark(k));
        CHECK(r.blocks_per_map.at("mem") == k);
        CHECK(r.blocks_per_map.at("valid") >= 1);
        CHECK(r.statements_out == r.statements_in);
    }
}

TEST_CASE("the flow example separates the post-allocation accesses") {
    PipelineResult r = run_pipeline(parse(flow_example_text()));
    CHECK(r.blocks_per_map.at("mem") == 2);
}

TEST_CASE("pipeline report serialization is stable") {
    PipelineResult r1 = run_pipeline(gen_benchmark(2));
    PipelineResult r2 = run_pipeline(gen_benchmark(2));
    CHECK(partition_to_json(r1.partition) == partition_to_json(r2.partition));
    CHECK(lastwrites_to_json(r1.analysis.approx) == lastwrites_to_json(r2.analysis.approx));
    CHECK(pretty(r1.output) == pretty(r2.output));
}

TEST_CASE("pipeline verification passes on the benchmark") {
    PipelineResult r = run_pipeline(gen_benchmark(2));
    VerifyOptions vo;
    vo.cfg.domain_size = 2;
    VerifyReport rep = verify_pipeline(r, vo);
    for (const auto& f : rep.failures) MESSAGE(f);
    CHECK(rep.ok);
}
