// Copyright (c) the mapsep contributors.
// SPDX-License-Identifier: Apache-2.0

#include "mapsep/pipeline.hpp"

#include <chrono>

#include <json.hpp>

#include "mapsep/instrument.hpp"
#include "mapsep/lastwrites.hpp"
#include "mapsep/normalize.hpp"
#include "mapsep/printer.hpp"

namespace mapsep {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

}  // namespace

PipelineResult run_pipeline(const Program& p) {
    PipelineResult r;
    auto total0 = Clock::now();

    auto t0 = Clock::now();
    r.input = normalize(p);
    r.times.normalize_ms = ms_since(t0);
    r.statements_in = static_cast<int>(r.input.statements.size());

    t0 = Clock::now();
    r.pre = instrument(r.input);
    r.times.instrument_ms = ms_since(t0);

    t0 = Clock::now();
    CompiledProgram cp = compile(r.pre);
    r.analysis = analyze(cp);
    r.times.analyze_ms = ms_since(t0);

    t0 = Clock::now();
    r.partition = partition_writes(r.input, r.analysis.approx);
    r.times.partition_ms = ms_since(t0);

    t0 = Clock::now();
    r.output = transform(r.input, r.partition, r.analysis.approx);
    r.times.transform_ms = ms_since(t0);

    r.times.total_ms = ms_since(total0);
    r.statements_out = static_cast<int>(r.output.statements.size());
    r.blocks_per_map = r.partition.blocks_per_map(r.input);
    return r;
}

VerifyReport verify_pipeline(const PipelineResult& r, const VerifyOptions& opts) {
    VerifyReport rep;
    auto fail = [&](std::string why) {
        rep.ok = false;
        rep.failures.push_back(std::move(why));
    };
    if (opts.soundness) {
        LastWrites exact = exact_last_writes(r.input, opts.cfg);
        for (const auto& pr : exact.pairs)
            if (!r.analysis.approx.pairs.count(pr))
                fail("lastwrites approximation misses (" + pr.first + ", " + pr.second + ")");
        CrosscheckResult cross = crosscheck_last_writes(r.input, opts.cfg);
        if (!cross.equal) fail("tagged and shadow last-writes computations disagree");
    }
    if (opts.bisimulation) {
        BisimVerdict v1 = check_bisim(r.input, r.pre, opts.cfg);
        if (!v1.bisimilar) fail("input and instrumented program are not bisimilar: " + v1.reason);
        BisimVerdict v2 = check_bisim(r.pre, r.output, opts.cfg);
        if (!v2.bisimilar) fail("instrumented and transformed program are not bisimilar: " + v2.reason);
        RelationVerdict rv = check_block_relation(r.pre, r.output, r.partition, opts.cfg);
        if (!rv.holds) fail("explicit block relation is not a bisimulation: " + rv.reason);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// JSON serializations (stable field and element order).

namespace {
using json = nlohmann::ordered_json;
}

std::string partition_to_json(const WritePartition& part) {
    json j;
    j["blocks"] = json::array();
    for (std::size_t i = 0; i < part.blocks.size(); ++i) {
        json b;
        b["name"] = part.names[i];
        b["writes"] = json::array();
        for (const auto& w : part.blocks[i]) b["writes"].push_back(w);
        j["blocks"].push_back(std::move(b));
    }
    return j.dump(2) + "\n";
}

std::string lastwrites_to_json(const LastWrites& lw) {
    json j;
    j["pairs"] = json::array();
    for (const auto& [w, r] : lw.pairs) j["pairs"].push_back(json{{"write", w}, {"read", r}});
    j["preimage"] = json::object();
    for (const auto& [read, pre] : lw.preimage) {
        json arr = json::array();
        for (const auto& w : pre) arr.push_back(w == kBotMarker ? "bot" : w);
        j["preimage"][read] = std::move(arr);
    }
    return j.dump(2) + "\n";
}

std::string analysis_to_json(const CompiledProgram& cp, const AnalysisResult& a, const Program& p_pre) {
    json j;
    j["locations"] = json::object();
    for (std::uint32_t l = 0; l < p_pre.num_locs(); ++l)
        j["locations"][p_pre.loc_names[l]] = a.at[l].to_text(cp, a.universe);
    j["iterations"] = a.iterations;
    json pre = json::object();
    for (const auto& [read, set] : a.approx.preimage) {
        json arr = json::array();
        for (const auto& w : set) arr.push_back(w == kBotMarker ? "bot" : w);
        pre[read] = std::move(arr);
    }
    j["preimage"] = std::move(pre);
    json pairs = json::array();
    for (const auto& [w, r] : a.approx.pairs) pairs.push_back(json{{"write", w}, {"read", r}});
    j["pairs"] = std::move(pairs);
    return j.dump(2) + "\n";
}

std::string report_to_json(const PipelineResult& r, const VerifyReport* verify) {
    json j;
    j["statements_in"] = r.statements_in;
    j["statements_out"] = r.statements_out;
    j["blocks_per_map"] = json::object();
    for (const auto& [m, n] : r.blocks_per_map) j["blocks_per_map"][m] = n;
    j["times_ms"] = {
        {"normalize", r.times.normalize_ms}, {"instrument", r.times.instrument_ms},
        {"analyze", r.times.analyze_ms},     {"partition", r.times.partition_ms},
        {"transform", r.times.transform_ms}, {"total", r.times.total_ms},
    };
    json pre = json::object();
    for (const auto& [read, set] : r.analysis.approx.preimage) {
        json arr = json::array();
        for (const auto& w : set) arr.push_back(w == kBotMarker ? "bot" : w);
        pre[read] = std::move(arr);
    }
    j["preimage"] = std::move(pre);
    if (verify) {
        j["verify"] = {{"ok", verify->ok}, {"failures", verify->failures}};
    }
    return j.dump(2) + "\n";
}

std::string lts_to_json(const Program& p, const FiniteConfig& cfg) {
    CompiledProgram cp = compile(p);
    ReachGraph g = reach_graph(cp, cfg, /*build_lts=*/true);
    // Canonical numbering: states sorted by key.
    std::vector<std::uint32_t> order(g.states.size());
    for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::uint32_t a, std::uint32_t b) { return g.keys[a] < g.keys[b]; });
    std::vector<std::uint32_t> rank(order.size());
    for (std::uint32_t i = 0; i < order.size(); ++i) rank[order[i]] = i;

    auto state_text = [&](const State& s) {
        std::string out = p.loc_names[s.pc];
        for (int b = 0; b < cp.n_base(); ++b) {
            out += " " + cp.base_names[b] + "=";
            out += s.base[b].v == kStar ? "*" : std::to_string(static_cast<int>(s.base[b].v));
        }
        for (int m = 0; m < cp.n_maps(); ++m) {
            out += " " + cp.map_names[m] + "=";
            if (s.maps[m].star) {
                out += "*";
            } else {
                out += "[";
                for (int d = 0; d < cfg.domain_size; ++d) {
                    if (d) out += ",";
                    out += std::to_string(static_cast<int>(s.maps[m].cells[d].v));
                }
                out += "]";
            }
        }
        return out;
    };

    json j;
    j["domain"] = cfg.domain_size;
    j["states"] = json::array();
    for (std::uint32_t i : order) j["states"].push_back(state_text(g.states[i]));
    j["initial"] = json::array();
    {
        std::vector<std::uint32_t> inits;
        for (std::uint32_t i : g.initial) inits.push_back(rank[i]);
        std::sort(inits.begin(), inits.end());
        for (std::uint32_t i : inits) j["initial"].push_back(i);
    }
    std::vector<std::tuple<std::uint32_t, std::string, std::uint32_t>> edges;
    for (const auto& e : g.edges) edges.emplace_back(rank[e.src], p.statements[e.stmt].id, rank[e.dst]);
    std::sort(edges.begin(), edges.end());
    j["transitions"] = json::array();
    for (const auto& [src, id, dst] : edges) j["transitions"].push_back(json{{"from", src}, {"stmt", id}, {"to", dst}});
    return j.dump(2) + "\n";
}

}  // namespace mapsep
