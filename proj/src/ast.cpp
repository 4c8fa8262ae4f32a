// Copyright (c) the mapsep contributors.
// SPDX-License-Identifier: Apache-2.0

#include "mapsep/ast.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <map>
#include <set>

#include "mapsep/diagnostics.hpp"
#include "mapsep/printer.hpp"

namespace mapsep {

const char* diag_code_name(DiagCode code) {
    switch (code) {
    case DiagCode::SyntaxError: return "SyntaxError";
    case DiagCode::MapEqualityAssume: return "MapEqualityAssume";
    case DiagCode::EdgeIntoInitial: return "EdgeIntoInitial";
    case DiagCode::UndeclaredVariable: return "UndeclaredVariable";
    case DiagCode::DuplicateDeclaration: return "DuplicateDeclaration";
    case DiagCode::ReservedIdentifier: return "ReservedIdentifier";
    case DiagCode::SortMismatch: return "SortMismatch";
    case DiagCode::IrFormNotAllowed: return "IrFormNotAllowed";
    case DiagCode::StrictGrammarViolation: return "StrictGrammarViolation";
    case DiagCode::InvalidStoreOperand: return "InvalidStoreOperand";
    case DiagCode::NotNormalized: return "NotNormalized";
    case DiagCode::AlreadyInstrumented: return "AlreadyInstrumented";
    case DiagCode::InconsistentPartition: return "InconsistentPartition";
    case DiagCode::LabelMismatch: return "LabelMismatch";
    case DiagCode::StateSpaceBudgetExceeded: return "StateSpaceBudgetExceeded";
    case DiagCode::MapHavocDomainTooLarge: return "MapHavocDomainTooLarge";
    case DiagCode::DomainTooSmall: return "DomainTooSmall";
    case DiagCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

Diagnostic::Diagnostic(DiagCode code, std::string message, int line, int col)
    : std::runtime_error(std::string(diag_code_name(code)) + ": " + message +
                         (line > 0 ? " (line " + std::to_string(line) + ", col " + std::to_string(col) + ")" : "")),
      code_(code), line_(line), col_(col) {}

BoolExpr mk_eq(std::string a, std::string b) { return EqExpr{std::move(a), std::move(b)}; }
BoolExpr mk_not(BoolExpr e) { return NotExpr{std::make_shared<const BoolExpr>(std::move(e))}; }
BoolExpr mk_and(BoolExpr a, BoolExpr b) {
    return AndExpr{std::make_shared<const BoolExpr>(std::move(a)), std::make_shared<const BoolExpr>(std::move(b))};
}
BoolExpr mk_or(BoolExpr a, BoolExpr b) {
    return OrExpr{std::make_shared<const BoolExpr>(std::move(a)), std::make_shared<const BoolExpr>(std::move(b))};
}

int Program::var_index(const std::string& name) const {
    for (std::size_t i = 0; i < vars.size(); ++i)
        if (vars[i].name == name) return static_cast<int>(i);
    return -1;
}

const VarDecl* Program::find_var(const std::string& name) const {
    int i = var_index(name);
    return i < 0 ? nullptr : &vars[i];
}

bool Program::has_error_loc() const {
    for (bool e : is_error)
        if (e) return true;
    return false;
}

bool is_shadow_name(const std::string& name) {
    const std::string suffix = kShadowSuffix;
    return name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string shadow_name(const std::string& map) { return map + kShadowSuffix; }

std::string shadow_source(const std::string& name) {
    if (!is_shadow_name(name)) return {};
    return name.substr(0, name.size() - std::string(kShadowSuffix).size());
}

const StoreExpr* as_map_write(const Command& c) {
    const auto* am = std::get_if<AssignMap>(&c);
    if (!am) return nullptr;
    const auto* st = std::get_if<StoreExpr>(&am->rhs);
    if (!st) return nullptr;
    return st->map == am->var ? st : nullptr;
}

const SelectExpr* as_map_read(const Command& c) {
    const auto* ab = std::get_if<AssignBase>(&c);
    if (!ab) return nullptr;
    return std::get_if<SelectExpr>(&ab->rhs);
}

bool is_map_write(const Command& c) { return as_map_write(c) != nullptr; }
bool is_map_read(const Command& c) { return as_map_read(c) != nullptr; }

std::vector<const Statement*> write_statements(const Program& p) {
    std::vector<const Statement*> out;
    for (const auto& s : p.statements)
        if (is_map_write(s.cmd)) out.push_back(&s);
    return out;
}

std::vector<const Statement*> read_statements(const Program& p) {
    std::vector<const Statement*> out;
    for (const auto& s : p.statements)
        if (is_map_read(s.cmd)) out.push_back(&s);
    return out;
}

namespace {

struct WfContext {
    const Program& p;
    bool allow_ir;

    const VarDecl& require(const std::string& name, VarKind kind) const {
        const VarDecl* d = p.find_var(name);
        if (!d) throw Diagnostic(DiagCode::UndeclaredVariable, "variable '" + name + "' is not declared");
        if (d->kind != kind)
            throw Diagnostic(DiagCode::SortMismatch, "variable '" + name + "' used as " +
                                                         (kind == VarKind::Base ? "base" : "map") + " variable");
        return *d;
    }

    void check_lit(const Literal& l) const {
        if (l.sort == Sort::WriteId && !allow_ir)
            throw Diagnostic(DiagCode::IrFormNotAllowed, "write-id literal outside IR mode");
        if (l.sort == Sort::Base && l.base_value < 0)
            throw Diagnostic(DiagCode::SyntaxError, "negative literal");
    }

    void check_base_expr(const BaseExpr& e) const {
        if (const auto* lit = std::get_if<LitExpr>(&e)) {
            check_lit(lit->value);
            if (lit->value.sort != Sort::Base)
                throw Diagnostic(DiagCode::SortMismatch, "write-id literal in a base expression");
        } else if (const auto* v = std::get_if<VarExpr>(&e)) {
            require(v->name, VarKind::Base);
        } else if (const auto* sel = std::get_if<SelectExpr>(&e)) {
            require(sel->map, VarKind::Map);
            require(sel->index, VarKind::Base);
        } else if (const auto* su = std::get_if<SuccExpr>(&e)) {
            require(su->arg, VarKind::Base);
        } else if (const auto* pr = std::get_if<PredExpr>(&e)) {
            require(pr->arg, VarKind::Base);
        }
    }

    void check_bool(const BoolExpr& e) const {
        if (const auto* eq = std::get_if<EqExpr>(&e)) {
            // Equality is allowed between base variables only; a map operand
            // gets its own diagnostic code.
            for (const auto* name : {&eq->lhs, &eq->rhs}) {
                const VarDecl* d = p.find_var(*name);
                if (!d) throw Diagnostic(DiagCode::UndeclaredVariable, "variable '" + *name + "' is not declared");
                if (d->kind == VarKind::Map)
                    throw Diagnostic(DiagCode::MapEqualityAssume,
                                     "map variable '" + *name + "' may not occur in an assume");
            }
        } else if (const auto* n = std::get_if<NotExpr>(&e)) {
            check_bool(*n->arg);
        } else if (const auto* a = std::get_if<AndExpr>(&e)) {
            check_bool(*a->lhs);
            check_bool(*a->rhs);
        } else if (const auto* o = std::get_if<OrExpr>(&e)) {
            check_bool(*o->lhs);
            check_bool(*o->rhs);
        }
    }

    void check_cmd(const Command& c) const {
        if (const auto* ab = std::get_if<AssignBase>(&c)) {
            require(ab->var, VarKind::Base);
            check_base_expr(ab->rhs);
        } else if (const auto* am = std::get_if<AssignMap>(&c)) {
            const VarDecl& target = require(am->var, VarKind::Map);
            if (const auto* mv = std::get_if<MapVarExpr>(&am->rhs)) {
                const VarDecl& src = require(mv->name, VarKind::Map);
                if (src.cell_sort != target.cell_sort)
                    throw Diagnostic(DiagCode::SortMismatch, "map assignment between different cell sorts");
            } else if (const auto* st = std::get_if<StoreExpr>(&am->rhs)) {
                const VarDecl& src = require(st->map, VarKind::Map);
                if (src.cell_sort != target.cell_sort)
                    throw Diagnostic(DiagCode::SortMismatch, "store between different cell sorts");
                require(st->index, VarKind::Base);
                if (st->value_is_var()) {
                    require(st->value_var(), VarKind::Base);
                    if (target.cell_sort != Sort::Base)
                        throw Diagnostic(DiagCode::SortMismatch, "base variable stored into write-id map");
                } else {
                    check_lit(st->value_lit());
                    if (st->value_lit().sort != target.cell_sort)
                        throw Diagnostic(DiagCode::SortMismatch, "stored literal sort does not match map");
                }
            } else if (const auto* cm = std::get_if<ConstMapExpr>(&am->rhs)) {
                check_lit(cm->value);
                if (cm->value.sort != target.cell_sort)
                    throw Diagnostic(DiagCode::SortMismatch, "const map literal sort does not match map");
            }
        } else if (const auto* hb = std::get_if<HavocBase>(&c)) {
            require(hb->var, VarKind::Base);
        } else if (const auto* hm = std::get_if<HavocMap>(&c)) {
            require(hm->var, VarKind::Map);
        } else if (const auto* as = std::get_if<Assume>(&c)) {
            check_bool(as->cond);
        } else if (std::holds_alternative<Skip>(c)) {
        } else if (const auto* seq = std::get_if<SeqCmd>(&c)) {
            if (!allow_ir) throw Diagnostic(DiagCode::IrFormNotAllowed, "atomic command outside IR mode");
            for (const auto& part : seq->parts) {
                if (std::holds_alternative<SeqCmd>(part))
                    throw Diagnostic(DiagCode::SyntaxError, "nested atomic command");
                check_cmd(part);
            }
        } else if (const auto* he = std::get_if<HavocMapsEqual>(&c)) {
            if (!allow_ir) throw Diagnostic(DiagCode::IrFormNotAllowed, "havoc_eq outside IR mode");
            if (he->maps.empty()) throw Diagnostic(DiagCode::SyntaxError, "havoc_eq needs at least one map");
            Sort sort = require(he->maps.front(), VarKind::Map).cell_sort;
            for (const auto& m : he->maps)
                if (require(m, VarKind::Map).cell_sort != sort)
                    throw Diagnostic(DiagCode::SortMismatch, "havoc_eq over maps of different cell sorts");
        }
    }
};

}  // namespace

void check_well_formed(const Program& p, bool allow_ir) {
    if (p.loc_names.empty() || p.initial >= p.num_locs())
        throw Diagnostic(DiagCode::SyntaxError, "program has no valid initial location");
    if (p.is_error.size() != p.loc_names.size())
        throw Diagnostic(DiagCode::SyntaxError, "error-location table out of sync");

    std::set<std::string> names;
    for (const auto& v : p.vars) {
        if (!names.insert(v.name).second)
            throw Diagnostic(DiagCode::DuplicateDeclaration, "variable '" + v.name + "' declared twice");
        if (v.kind == VarKind::Base && v.cell_sort != Sort::Base)
            throw Diagnostic(DiagCode::SortMismatch, "base variable with non-base sort");
        if (!allow_ir && v.name.find("__") != std::string::npos)
            throw Diagnostic(DiagCode::ReservedIdentifier,
                             "variable '" + v.name + "' uses the reserved '__' marker");
    }

    WfContext ctx{p, allow_ir};
    for (const auto& s : p.statements) {
        if (s.src >= p.num_locs() || s.dst >= p.num_locs())
            throw Diagnostic(DiagCode::SyntaxError, "statement references unknown location");
        if (s.dst == p.initial)
            throw Diagnostic(DiagCode::EdgeIntoInitial, "control flow edge into the initial location");
        ctx.check_cmd(s.cmd);
    }
}

// Renumbers locations breadth-first from the initial location, following
// edges in statement order, and reassigns statement ids positionally. The
// relative order of statements is preserved, so the pass is idempotent and
// pretty/parse round-trips are exact. Instrumentation and transformation
// keep statement order, which keeps ids aligned across pipeline stages.
Program canonicalize(const Program& p) {
    const LocId n = p.num_locs();
    std::vector<std::vector<const Statement*>> out(n);
    for (const auto& s : p.statements) out[s.src].push_back(&s);

    std::vector<LocId> order;  // old ids in canonical order
    std::vector<bool> seen(n, false);
    std::deque<LocId> queue{p.initial};
    seen[p.initial] = true;
    while (!queue.empty()) {
        LocId loc = queue.front();
        queue.pop_front();
        order.push_back(loc);
        for (const Statement* s : out[loc]) {
            if (!seen[s->dst]) {
                seen[s->dst] = true;
                queue.push_back(s->dst);
            }
        }
    }
    // Unreachable locations keep a stable order by old name.
    std::vector<LocId> rest;
    for (LocId l = 0; l < n; ++l)
        if (!seen[l]) rest.push_back(l);
    std::sort(rest.begin(), rest.end(), [&](LocId a, LocId b) { return p.loc_names[a] < p.loc_names[b]; });
    order.insert(order.end(), rest.begin(), rest.end());

    std::vector<LocId> renum(n, 0);
    for (LocId i = 0; i < n; ++i) renum[order[i]] = i;

    Program q;
    q.initial = 0;
    q.loc_names.resize(n);
    q.is_error.resize(n, false);
    for (LocId i = 0; i < n; ++i) {
        q.loc_names[i] = "L" + std::to_string(i);
        q.is_error[i] = p.is_error[order[i]];
    }
    q.vars = p.vars;
    std::sort(q.vars.begin(), q.vars.end(), [](const VarDecl& a, const VarDecl& b) {
        if (a.kind != b.kind) return a.kind < b.kind;
        return a.name < b.name;
    });

    for (LocId i = 0; i < n; ++i) {
        LocId old = order[i];
        int k = 0;
        for (const Statement* s : out[old]) {
            Statement t;
            t.src = i;
            t.dst = renum[s->dst];
            t.cmd = s->cmd;
            t.id = q.loc_names[i] + "#" + std::to_string(k++);
            q.statements.push_back(std::move(t));
        }
    }
    return q;
}

bool equal_canonical(const Program& a, const Program& b) {
    return pretty(canonicalize(a)) == pretty(canonicalize(b));
}

}  // namespace mapsep
