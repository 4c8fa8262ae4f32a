// Copyright (c) the mapsep contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace mapsep {

// Two value sorts: the base sort (instantiated as a finite domain {0..n-1}
// when the program is executed) and the write-id sort used only by the lw
// shadow maps introduced by the instrumentation pass.
enum class Sort : std::uint8_t { Base, WriteId };

// A literal. Base-sort literals are non-negative integers. WriteId-sort
// literals name a map-write statement by its statement id; the empty id is
// the distinguished "never written" symbol (printed `@bot`).
struct Literal {
    Sort sort = Sort::Base;
    int base_value = 0;   // meaningful for Sort::Base
    std::string wid;      // meaningful for Sort::WriteId; "" = bot

    static Literal base(int v) { return Literal{Sort::Base, v, {}}; }
    static Literal bot() { return Literal{Sort::WriteId, 0, {}}; }
    static Literal write(std::string id) { return Literal{Sort::WriteId, 0, std::move(id)}; }

    bool is_bot() const { return sort == Sort::WriteId && wid.empty(); }
    friend bool operator==(const Literal& a, const Literal& b) {
        return a.sort == b.sort && (a.sort == Sort::Base ? a.base_value == b.base_value : a.wid == b.wid);
    }
    friend bool operator!=(const Literal& a, const Literal& b) { return !(a == b); }
    friend bool operator<(const Literal& a, const Literal& b) {
        if (a.sort != b.sort) return a.sort < b.sort;
        return a.sort == Sort::Base ? a.base_value < b.base_value : a.wid < b.wid;
    }
};

// ---------------------------------------------------------------------------
// Expressions

struct LitExpr {
    Literal value;
};
struct VarExpr {
    std::string name;
};
struct SelectExpr {
    std::string map;
    std::string index;  // always a base variable
};
// Saturating successor/predecessor on a base variable. Off under the strict
// grammar; the parser introduces temporaries so the argument is always a
// plain variable.
struct SuccExpr {
    std::string arg;
};
struct PredExpr {
    std::string arg;
};
using BaseExpr = std::variant<LitExpr, VarExpr, SelectExpr, SuccExpr, PredExpr>;

struct MapVarExpr {
    std::string name;
};
// a[i:=v]. The stored value is a base variable in source programs; the
// instrumenter also stores write-id literals into shadow maps.
struct StoreExpr {
    std::string map;
    std::string index;
    std::variant<std::string, Literal> value;

    bool value_is_var() const { return std::holds_alternative<std::string>(value); }
    const std::string& value_var() const { return std::get<std::string>(value); }
    const Literal& value_lit() const { return std::get<Literal>(value); }
};
struct ConstMapExpr {
    Literal value;
};
using MapExpr = std::variant<MapVarExpr, StoreExpr, ConstMapExpr>;

// Boolean expressions: equality between base variables closed under !, &&, ||.
struct EqExpr;
struct NotExpr;
struct AndExpr;
struct OrExpr;
using BoolExpr = std::variant<EqExpr, NotExpr, AndExpr, OrExpr>;

struct EqExpr {
    std::string lhs;
    std::string rhs;
};
struct NotExpr {
    std::shared_ptr<const BoolExpr> arg;
};
struct AndExpr {
    std::shared_ptr<const BoolExpr> lhs;
    std::shared_ptr<const BoolExpr> rhs;
};
struct OrExpr {
    std::shared_ptr<const BoolExpr> lhs;
    std::shared_ptr<const BoolExpr> rhs;
};

BoolExpr mk_eq(std::string a, std::string b);
BoolExpr mk_not(BoolExpr e);
BoolExpr mk_and(BoolExpr a, BoolExpr b);
BoolExpr mk_or(BoolExpr a, BoolExpr b);

// ---------------------------------------------------------------------------
// Commands

struct AssignBase {
    std::string var;
    BaseExpr rhs;
};
struct AssignMap {
    std::string var;
    MapExpr rhs;
};
struct HavocBase {
    std::string var;
};
struct HavocMap {
    std::string var;
};
struct Assume {
    BoolExpr cond;
};
struct Skip {};

struct SeqCmd;
struct HavocMapsEqual;

using Command = std::variant<AssignBase, AssignMap, HavocBase, HavocMap, Assume, Skip, SeqCmd, HavocMapsEqual>;

// IR-only: several commands executed as one atomic edge. Produced by the
// instrumenter and the transformer, rejected by the parser in source mode.
struct SeqCmd {
    std::vector<Command> parts;
};
// IR-only: havoc every listed map to one shared arbitrary value.
struct HavocMapsEqual {
    std::vector<std::string> maps;
};

// ---------------------------------------------------------------------------
// Program

using LocId = std::uint32_t;

struct Statement {
    LocId src = 0;
    LocId dst = 0;
    Command cmd;
    std::string id;  // "<srcLocName>#<k>", assigned by canonicalization
};

enum class VarKind : std::uint8_t { Base, Map };

struct VarDecl {
    std::string name;
    VarKind kind = VarKind::Base;
    Sort cell_sort = Sort::Base;  // for maps: the value sort of cells
};

struct Program {
    std::vector<std::string> loc_names;  // index = LocId; loc_names[initial] is the entry
    LocId initial = 0;
    std::vector<bool> is_error;  // per location: target of an assert violation edge
    std::vector<VarDecl> vars;   // sorted by (kind, name) after canonicalization
    std::vector<Statement> statements;

    LocId num_locs() const { return static_cast<LocId>(loc_names.size()); }
    int var_index(const std::string& name) const;  // -1 if absent
    const VarDecl* find_var(const std::string& name) const;
    bool has_error_loc() const;
};

// The reserved shadow-map suffix. Source programs may not contain `__` in
// variable names so instrumented and transformed names never collide.
inline constexpr const char* kShadowSuffix = "__lw";
inline constexpr const char* kBotBlockSuffix = "__bot";

bool is_shadow_name(const std::string& name);
std::string shadow_name(const std::string& map);
// Inverse of shadow_name; empty if `name` is not a shadow name.
std::string shadow_source(const std::string& name);

// ---------------------------------------------------------------------------
// Queries and invariant checks

bool is_map_write(const Command& c);  // a := a[i:=x] with matching target
bool is_map_read(const Command& c);   // x := a[i]
const StoreExpr* as_map_write(const Command& c);
const SelectExpr* as_map_read(const Command& c);

std::vector<const Statement*> write_statements(const Program& p);
std::vector<const Statement*> read_statements(const Program& p);

// Throws Diagnostic if a structural invariant is violated (undeclared
// variables, incoming edges at the initial location, sort mismatches, ...).
// `allow_ir` additionally admits Seq/HavocMapsEqual commands, wid literals
// and shadow declarations.
void check_well_formed(const Program& p, bool allow_ir);

// Renumbers locations (L0.. from the initial location, breadth-first, with
// out-edges ordered by printed command text) and reassigns statement ids.
// Iterated to a fixpoint so pretty/parse round-trips are bit-exact.
Program canonicalize(const Program& p);

// Structural equality modulo canonical renaming.
bool equal_canonical(const Program& a, const Program& b);

}  // namespace mapsep
