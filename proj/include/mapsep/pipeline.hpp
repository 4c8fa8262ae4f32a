// Copyright (c) the mapsep contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>

#include "mapsep/analyzer.hpp"
#include "mapsep/equiv.hpp"
#include "mapsep/transform.hpp"

namespace mapsep {

struct StageTimes {
    double normalize_ms = 0, instrument_ms = 0, analyze_ms = 0, partition_ms = 0, transform_ms = 0;
    double total_ms = 0;
};

struct PipelineResult {
    Program input;    // normalized source
    Program pre;      // instrumented
    Program output;   // block-split transform
    AnalysisResult analysis;
    WritePartition partition;
    StageTimes times;
    std::map<std::string, int> blocks_per_map;
    int statements_in = 0;
    int statements_out = 0;
};

// normalize -> instrument -> analyze -> partition -> transform.
PipelineResult run_pipeline(const Program& p);

struct VerifyOptions {
    FiniteConfig cfg;
    bool soundness = true;    // lastwrites♯ ⊇ exact and the two oracles agree
    bool bisimulation = true; // P ~ P_pre, P_pre ~ P', and the explicit relation
};

struct VerifyReport {
    bool ok = true;
    std::vector<std::string> failures;
};

VerifyReport verify_pipeline(const PipelineResult& r, const VerifyOptions& opts);

// Stable-text serializations for the CLI.
std::string analysis_to_json(const CompiledProgram& cp, const AnalysisResult& a, const Program& p_pre);
std::string partition_to_json(const WritePartition& part);
std::string lastwrites_to_json(const LastWrites& lw);
std::string report_to_json(const PipelineResult& r, const VerifyReport* verify);
std::string lts_to_json(const Program& p, const FiniteConfig& cfg);

}  // namespace mapsep
