// Copyright (c) the mapsep contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mapsep/ast.hpp"

namespace mapsep {

// Finite instantiation of the base sort: values are {0..domain_size-1}.
// succ/pred saturate at the domain ends.
struct FiniteConfig {
    int domain_size = 3;
    bool tagged = false;  // mint a write tag per dynamic store (oracle mode)
    std::uint64_t state_budget = 1'000'000;
    int max_havoc_domain = 4;  // |D| cap for whole-map enumeration
    // Options for the set-summary engines:
    bool project_live = false;     // project stored states onto live variables
    bool compress_chains = false;  // store states only at junction locations
    int threads = 0;               // 0 = library default
};

// A cell value. kStar marks a value that is unconstrained and provably never
// read before being overwritten (dead at the initial location, or projected
// away); it is copied around but never evaluated.
inline constexpr std::uint8_t kStar = 0xff;
inline constexpr std::int16_t kNoTag = -1;

struct Cell {
    std::uint8_t v = kStar;
    std::int16_t tag = kNoTag;  // statement index of the writing store, oracle mode only

    friend bool operator==(const Cell& a, const Cell& b) { return a.v == b.v && a.tag == b.tag; }
};

// A map value: either whole-map unconstrained (star) or one cell per domain
// element. WriteId-sorted maps encode bot as 0 and write symbol w as w+1.
struct MapVal {
    bool star = true;
    std::vector<Cell> cells;  // size = domain_size when !star
};

struct State {
    std::uint32_t pc = 0;
    std::vector<Cell> base;   // per base slot
    std::vector<MapVal> maps; // per map slot
};

// ---------------------------------------------------------------------------
// Compiled program: name-resolved statements for fast interpretation.

class CompiledProgram {
  public:
    enum class Op : std::uint8_t {
        AssignLit,     // base[a] := lit
        AssignVar,     // base[a] := base[b]
        AssignSelect,  // base[a] := maps[m][base[i]]
        AssignSucc,    // base[a] := succ(base[b])
        AssignPred,
        MapCopy,   // maps[a] := maps[b]
        MapConst,  // maps[a] := const(lit)
        Store,     // maps[m][base[i]] := base[x] or literal
        HavocBase,
        HavocMap,
        HavocEq,
        AssumeOp,
        SkipOp,
    };

    struct CCmd {
        Op op = Op::SkipOp;
        int a = -1;  // target slot (base or map depending on op)
        int b = -1;  // source slot / index slot
        int c = -1;  // stored value slot (-1: literal store)
        int lit = 0; // encoded literal (base value, or wid encoding for wid sorts)
        const BoolExpr* cond = nullptr;
        std::vector<int> maps;  // HavocEq
    };

    struct CStmt {
        LocId src = 0, dst = 0;
        std::vector<CCmd> cmds;  // Seq flattened
        int index = -1;          // position in program statement order
        bool is_write = false;   // top-level map write statement
        bool is_read = false;    // contains a map read
    };

    const Program* source = nullptr;
    std::vector<std::string> base_names, map_names;
    std::map<std::string, int> base_slot, map_slot;
    std::vector<Sort> map_sort;
    std::vector<int> shadow_of;  // map slot -> its lw shadow slot, or -1

    // WriteId encoding: cell value 0 = bot, w+1 = wid symbol w.
    std::vector<std::string> wid_names;        // symbol index -> statement id
    std::map<std::string, int> wid_of_stmt;    // statement id -> symbol index
    int max_base_literal = -1;

    std::vector<CStmt> stmts;
    std::vector<std::vector<int>> out;  // per location: statement indices
    LocId initial = 0;
    std::uint32_t n_locs = 0;
    std::vector<bool> is_error;

    int n_base() const { return static_cast<int>(base_names.size()); }
    int n_maps() const { return static_cast<int>(map_names.size()); }

    // Encodes a wid literal as a cell value (registers unknown ids).
    int encode_wid(const std::string& stmt_id);
    const std::string& stmt_id(int stmt_index) const { return source->statements[stmt_index].id; }
};

CompiledProgram compile(const Program& p);

// ---------------------------------------------------------------------------
// Liveness (backward may-analysis). Used to seed only live-at-entry variables
// and, optionally, to project stored states.

struct LiveSet {
    std::vector<bool> base;
    std::vector<bool> maps;
};

std::vector<LiveSet> compute_liveness(const CompiledProgram& cp);

// ---------------------------------------------------------------------------
// Evaluation and the post operator.

int eval_base(const CompiledProgram& cp, const FiniteConfig& cfg, const State& s, const BaseExpr& e);
bool eval_bool(const CompiledProgram& cp, const State& s, const BoolExpr& e);

// Observer for map-read events: (statement index, state at the read,
// index value, read cell).
using ReadHook = std::function<void(int, const State&, int, const Cell&)>;

// Expands one statement from `s` (which must be at the statement's source
// location), passing every successor to `sink`.
void expand_statement(const CompiledProgram& cp, const FiniteConfig& cfg, const State& s, int stmt_idx,
                      const std::function<void(State&&)>& sink, const ReadHook* hook = nullptr);

// The concrete post operator on canonical state sets.
std::vector<State> post(const CompiledProgram& cp, const FiniteConfig& cfg, const std::vector<State>& states,
                        int stmt_idx);

// Initial states: live-at-entry variables enumerate all values (maps all
// functions, capped by max_havoc_domain), dead ones start as star.
void enumerate_initial_states(const CompiledProgram& cp, const FiniteConfig& cfg,
                              const std::function<void(State&&)>& sink);

// Canonical byte encoding (dedup key / ordering). When `live` is given, dead
// variables are encoded as star.
std::string state_key(const CompiledProgram& cp, const FiniteConfig& cfg, const State& s, bool include_pc,
                      const LiveSet* live = nullptr);
State state_from_key(const CompiledProgram& cp, const FiniteConfig& cfg, std::string_view key, bool include_pc,
                     std::uint32_t pc_hint = 0);

void project_state(const CompiledProgram& cp, State& s, const LiveSet& live);

// Erases write tags (oracle mode support).
State untag(const State& s);

}  // namespace mapsep
