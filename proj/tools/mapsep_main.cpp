// Copyright (c) the mapsep contributors.
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mapsep/bench.hpp"
#include "mapsep/diagnostics.hpp"
#include "mapsep/instrument.hpp"
#include "mapsep/normalize.hpp"
#include "mapsep/parser.hpp"
#include "mapsep/pipeline.hpp"
#include "mapsep/printer.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerification = 1;
constexpr int kExitUsage = 2;
constexpr int kExitBudget = 3;

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw mapsep::Diagnostic(mapsep::DiagCode::InvalidArgument, "cannot write '" + path + "'");
    out << text;
}

struct CommonConfig {
    int domain = 3;
    std::uint64_t budget = 1'000'000;
    bool strict_grammar = false;
    int threads = 0;
};

// --config file.json supplies defaults; explicit flags override them.
void load_config(int argc, char** argv, CommonConfig& cfg) {
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) != "--config") continue;
        std::ifstream in(argv[i + 1]);
        if (!in) throw mapsep::Diagnostic(mapsep::DiagCode::InvalidArgument, "cannot open config file");
        nlohmann::json j;
        in >> j;
        if (j.contains("domain")) cfg.domain = j["domain"].get<int>();
        if (j.contains("budget")) cfg.budget = j["budget"].get<std::uint64_t>();
        if (j.contains("strict_grammar")) cfg.strict_grammar = j["strict_grammar"].get<bool>();
        if (j.contains("threads")) cfg.threads = j["threads"].get<int>();
    }
}

mapsep::FiniteConfig finite_config(const CommonConfig& c) {
    mapsep::FiniteConfig f;
    f.domain_size = c.domain;
    f.state_budget = c.budget;
    f.threads = c.threads;
    return f;
}

struct SweepRow {
    int k = 0;
    mapsep::StageTimes times;
    int mem_blocks = 0;
    int statements_in = 0, statements_out = 0;
};

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    os << "k,normalize_ms,instrument_ms,analyze_ms,partition_ms,transform_ms,total_ms,"
          "mem_blocks,statements_in,statements_out\n";
    for (const auto& r : rows) {
        os << r.k << ',' << r.times.normalize_ms << ',' << r.times.instrument_ms << ','
           << r.times.analyze_ms << ',' << r.times.partition_ms << ',' << r.times.transform_ms << ','
           << r.times.total_ms << ',' << r.mem_blocks << ',' << r.statements_in << ',' << r.statements_out
           << '\n';
    }
    return os.str();
}

std::string sweep_plot_data(const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    os << "# k total_ms analyze_ms mem_blocks\n";
    for (const auto& r : rows)
        os << r.k << ' ' << r.times.total_ms << ' ' << r.times.analyze_ms << ' ' << r.mem_blocks << '\n';
    return os.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"map separation preprocessor for a minimal intermediate verification language"};
    app.require_subcommand(1);

    CommonConfig common;
    try {
        load_config(argc, argv, common);
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    }
    std::string config_file;
    app.add_option("--config", config_file, "JSON config file with defaults");

    // parse
    auto* cmd_parse = app.add_subcommand("parse", "parse, validate and pretty-print a program");
    std::string in_path, out_path, lts_path;
    bool do_normalize = false, allow_ir = false;
    cmd_parse->add_option("input", in_path)->required();
    cmd_parse->add_option("-o,--output", out_path, "write the canonical pretty-printed form");
    cmd_parse->add_flag("--normalize", do_normalize, "normalize cross-map stores");
    cmd_parse->add_flag("--ir", allow_ir, "accept IR-only forms (atomic, havoc_eq, wid)");
    cmd_parse->add_flag("--strict-grammar", common.strict_grammar, "reject succ/pred");
    cmd_parse->add_option("--lts", lts_path, "dump the reachable transition system as JSON");
    cmd_parse->add_option("--domain", common.domain, "finite domain size");
    cmd_parse->add_option("--budget", common.budget, "state budget");

    // instrument
    auto* cmd_inst = app.add_subcommand("instrument", "add lw shadow maps");
    std::string inst_in, inst_out;
    cmd_inst->add_option("input", inst_in)->required();
    cmd_inst->add_option("-o,--output", inst_out)->required();

    // analyze
    auto* cmd_analyze = app.add_subcommand("analyze", "run the static analysis and dump facts");
    std::string an_in, an_out;
    bool an_pre = false;
    cmd_analyze->add_option("input", an_in)->required();
    cmd_analyze->add_option("-o,--output", an_out, "analysis JSON (default stdout)");
    cmd_analyze->add_flag("--pre", an_pre, "input is already instrumented");

    // partition
    auto* cmd_part = app.add_subcommand("partition", "compute the write partition");
    std::string part_in, part_out;
    cmd_part->add_option("input", part_in)->required();
    cmd_part->add_option("-o,--output", part_out, "partition JSON (default stdout)");

    // transform
    auto* cmd_tr = app.add_subcommand("transform", "run the full pipeline and emit the transformed program");
    std::string tr_in, tr_out, tr_part, tr_report;
    bool tr_verify = false;
    cmd_tr->add_option("input", tr_in)->required();
    cmd_tr->add_option("-o,--output", tr_out)->required();
    cmd_tr->add_option("--emit-partition", tr_part);
    cmd_tr->add_option("--report", tr_report);
    cmd_tr->add_flag("--verify", tr_verify, "check soundness and bisimilarity at the configured domain");
    cmd_tr->add_option("--domain", common.domain);
    cmd_tr->add_option("--budget", common.budget);

    // check
    auto* cmd_check = app.add_subcommand("check", "bisimulation check between two programs");
    std::string chk_a, chk_b, chk_report, chk_lemma;
    cmd_check->add_option("first", chk_a)->required();
    cmd_check->add_option("second", chk_b)->required();
    cmd_check->add_option("--domain", common.domain);
    cmd_check->add_option("--budget", common.budget);
    cmd_check->add_option("--report", chk_report);
    cmd_check->add_option("--relation-partition", chk_lemma,
                          "also verify the explicit block relation using this partition JSON");

    // gen-bench
    auto* cmd_gen = app.add_subcommand("gen-bench", "emit a benchmark instance");
    int gen_k = 2;
    std::string gen_out;
    cmd_gen->add_option("-k,--size", gen_k, "number of index variables (even)")->required();
    cmd_gen->add_option("-o,--output", gen_out);

    // sweep
    auto* cmd_sweep = app.add_subcommand("sweep", "run the pipeline over a benchmark size range");
    int kmin = 2, kmax = 20, kstep = 2, repeats = 3;
    std::string sweep_dir = "sweep-out";
    bool sweep_verify = false;
    cmd_sweep->add_option("--kmin", kmin);
    cmd_sweep->add_option("--kmax", kmax);
    cmd_sweep->add_option("--step", kstep);
    cmd_sweep->add_option("--repeats", repeats);
    cmd_sweep->add_option("-o,--out-dir", sweep_dir);
    cmd_sweep->add_flag("--verify", sweep_verify);
    cmd_sweep->add_option("--domain", common.domain);
    cmd_sweep->add_option("--budget", common.budget);
    cmd_sweep->add_option("--threads", common.threads);

    // stats
    auto* cmd_stats = app.add_subcommand("stats", "rebuild CSV and plot data from sweep reports");
    std::string stats_dir, stats_csv = "stats.csv", stats_dat;
    cmd_stats->add_option("dir", stats_dir)->required();
    cmd_stats->add_option("-o,--output", stats_csv);
    cmd_stats->add_option("--plot-data", stats_dat);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? kExitUsage : kExitOk;
    }

    using namespace mapsep;
    try {
        if (*cmd_parse) {
            ParseOptions popts;
            popts.allow_ir = allow_ir;
            popts.strict_grammar = common.strict_grammar;
            Program p = parse_file(in_path, popts);
            if (do_normalize) p = normalize(p);
            std::string text = pretty(p);
            if (!out_path.empty()) {
                write_file(out_path, text);
            } else {
                std::cout << text;
            }
            if (!lts_path.empty()) write_file(lts_path, lts_to_json(p, finite_config(common)));
            return kExitOk;
        }
        if (*cmd_inst) {
            Program p = normalize(parse_file(inst_in));
            write_file(inst_out, pretty(instrument(p)));
            return kExitOk;
        }
        if (*cmd_analyze) {
            ParseOptions popts;
            popts.allow_ir = an_pre;
            Program p = parse_file(an_in, popts);
            Program pre = an_pre ? p : instrument(normalize(p));
            CompiledProgram cp = compile(pre);
            AnalysisResult a = analyze(cp);
            std::string text = analysis_to_json(cp, a, pre);
            if (an_out.empty()) {
                std::cout << text;
            } else {
                write_file(an_out, text);
            }
            return kExitOk;
        }
        if (*cmd_part) {
            Program p = normalize(parse_file(part_in));
            Program pre = instrument(p);
            CompiledProgram cp = compile(pre);
            AnalysisResult a = analyze(cp);
            WritePartition part = partition_writes(p, a.approx);
            std::string text = partition_to_json(part);
            if (part_out.empty()) {
                std::cout << text;
            } else {
                write_file(part_out, text);
            }
            return kExitOk;
        }
        if (*cmd_tr) {
            Program p = parse_file(tr_in);
            PipelineResult r = run_pipeline(p);
            write_file(tr_out, pretty(r.output));
            if (!tr_part.empty()) write_file(tr_part, partition_to_json(r.partition));
            VerifyReport rep;
            if (tr_verify) {
                VerifyOptions vo;
                vo.cfg = finite_config(common);
                rep = verify_pipeline(r, vo);
                for (const auto& f : rep.failures) std::cerr << "verify: " << f << "\n";
            }
            if (!tr_report.empty()) write_file(tr_report, report_to_json(r, tr_verify ? &rep : nullptr));
            return tr_verify && !rep.ok ? kExitVerification : kExitOk;
        }
        if (*cmd_check) {
            ParseOptions popts;
            popts.allow_ir = true;
            Program a = parse_file(chk_a, popts);
            Program b = parse_file(chk_b, popts);
            BisimVerdict v = check_bisim(a, b, finite_config(common));
            bool relation_ok = true;
            std::string relation_reason;
            if (!chk_lemma.empty()) {
                std::ifstream in(chk_lemma);
                nlohmann::json j;
                in >> j;
                WritePartition part;
                for (const auto& blk : j["blocks"]) {
                    part.names.push_back(blk["name"].get<std::string>());
                    std::set<std::string> members;
                    for (const auto& w : blk["writes"]) members.insert(w.get<std::string>());
                    part.blocks.push_back(std::move(members));
                }
                RelationVerdict rv = check_block_relation(a, b, part, finite_config(common));
                relation_ok = rv.holds;
                relation_reason = rv.reason;
            }
            nlohmann::ordered_json j;
            j["bisimilar"] = v.bisimilar;
            j["states_first"] = v.states_a;
            j["states_second"] = v.states_b;
            if (!v.bisimilar) {
                j["reason"] = v.reason;
                j["distinguishing_trace"] = v.trace;
            }
            if (!chk_lemma.empty()) {
                j["relation_holds"] = relation_ok;
                if (!relation_ok) j["relation_reason"] = relation_reason;
            }
            std::string text = j.dump(2) + "\n";
            if (chk_report.empty()) {
                std::cout << text;
            } else {
                write_file(chk_report, text);
            }
            return v.bisimilar && relation_ok ? kExitOk : kExitVerification;
        }
        if (*cmd_gen) {
            std::string text = gen_benchmark_text(gen_k);
            if (gen_out.empty()) {
                std::cout << text;
            } else {
                write_file(gen_out, text);
            }
            return kExitOk;
        }
        if (*cmd_sweep) {
            std::filesystem::create_directories(sweep_dir);
            std::vector<int> ks;
            for (int k = kmin; k <= kmax; k += kstep) ks.push_back(k);
            std::vector<SweepRow> rows(ks.size());
            std::vector<std::string> reports(ks.size());
            bool verify_failed = false;
#ifdef _OPENMP
            if (common.threads > 0) omp_set_num_threads(common.threads);
#pragma omp parallel for schedule(dynamic)
#endif
            for (std::size_t i = 0; i < ks.size(); ++i) {
                Program p = gen_benchmark(ks[i]);
                PipelineResult best;
                for (int rep = 0; rep < std::max(1, repeats); ++rep) {
                    PipelineResult r = run_pipeline(p);
                    if (rep == 0 || r.times.total_ms < best.times.total_ms) best = std::move(r);
                }
                VerifyReport vrep;
                if (sweep_verify) {
                    VerifyOptions vo;
                    vo.cfg = finite_config(common);
                    vrep = verify_pipeline(best, vo);
                    if (!vrep.ok) {
#ifdef _OPENMP
#pragma omp critical
#endif
                        verify_failed = true;
                    }
                }
                rows[i] = SweepRow{ks[i], best.times, best.blocks_per_map.at("mem"), best.statements_in,
                                   best.statements_out};
                reports[i] = report_to_json(best, sweep_verify ? &vrep : nullptr);
            }
            for (std::size_t i = 0; i < ks.size(); ++i)
                write_file(sweep_dir + "/report_k" + std::to_string(ks[i]) + ".json", reports[i]);
            write_file(sweep_dir + "/sweep.csv", sweep_csv(rows));
            write_file(sweep_dir + "/sweep.dat", sweep_plot_data(rows));
            std::cout << sweep_csv(rows);
            return verify_failed ? kExitVerification : kExitOk;
        }
        if (*cmd_stats) {
            std::vector<SweepRow> rows;
            for (const auto& entry : std::filesystem::directory_iterator(stats_dir)) {
                const std::string name = entry.path().filename().string();
                if (name.rfind("report_k", 0) != 0 || entry.path().extension() != ".json") continue;
                std::ifstream in(entry.path());
                nlohmann::json j;
                in >> j;
                SweepRow r;
                r.k = std::stoi(name.substr(8, name.size() - 8 - 5));
                r.times.normalize_ms = j["times_ms"]["normalize"].get<double>();
                r.times.instrument_ms = j["times_ms"]["instrument"].get<double>();
                r.times.analyze_ms = j["times_ms"]["analyze"].get<double>();
                r.times.partition_ms = j["times_ms"]["partition"].get<double>();
                r.times.transform_ms = j["times_ms"]["transform"].get<double>();
                r.times.total_ms = j["times_ms"]["total"].get<double>();
                r.mem_blocks = j["blocks_per_map"].value("mem", 0);
                r.statements_in = j["statements_in"].get<int>();
                r.statements_out = j["statements_out"].get<int>();
                rows.push_back(r);
            }
            std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) { return a.k < b.k; });
            write_file(stats_csv, sweep_csv(rows));
            if (!stats_dat.empty()) write_file(stats_dat, sweep_plot_data(rows));
            return kExitOk;
        }
    } catch (const BudgetExceeded& e) {
        std::cerr << e.what() << "\n";
        return kExitBudget;
    } catch (const Diagnostic& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
