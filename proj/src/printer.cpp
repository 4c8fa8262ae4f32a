// Copyright (c) the mapsep contributors.
// SPDX-License-Identifier: Apache-2.0

#include "mapsep/printer.hpp"

#include <sstream>

namespace mapsep {

std::string to_text(const Literal& l) {
    if (l.sort == Sort::Base) return std::to_string(l.base_value);
    return l.is_bot() ? "@bot" : "@" + l.wid;
}

std::string to_text(const BaseExpr& e) {
    if (const auto* lit = std::get_if<LitExpr>(&e)) return to_text(lit->value);
    if (const auto* v = std::get_if<VarExpr>(&e)) return v->name;
    if (const auto* sel = std::get_if<SelectExpr>(&e)) return sel->map + "[" + sel->index + "]";
    if (const auto* su = std::get_if<SuccExpr>(&e)) return "succ(" + su->arg + ")";
    const auto& pr = std::get<PredExpr>(e);
    return "pred(" + pr.arg + ")";
}

std::string to_text(const MapExpr& e) {
    if (const auto* mv = std::get_if<MapVarExpr>(&e)) return mv->name;
    if (const auto* st = std::get_if<StoreExpr>(&e)) {
        std::string val = st->value_is_var() ? st->value_var() : to_text(st->value_lit());
        return st->map + "[" + st->index + " := " + val + "]";
    }
    const auto& cm = std::get<ConstMapExpr>(e);
    return "const(" + to_text(cm.value) + ")";
}

namespace {

// Precedence: ! binds tighter than &&, which binds tighter than ||.
void print_bool(std::ostringstream& os, const BoolExpr& e, int parent_prec) {
    if (const auto* eq = std::get_if<EqExpr>(&e)) {
        os << eq->lhs << " == " << eq->rhs;
    } else if (const auto* n = std::get_if<NotExpr>(&e)) {
        os << "!(";
        print_bool(os, *n->arg, 0);
        os << ")";
    } else if (const auto* a = std::get_if<AndExpr>(&e)) {
        bool parens = parent_prec > 1;
        if (parens) os << "(";
        print_bool(os, *a->lhs, 1);
        os << " && ";
        print_bool(os, *a->rhs, 1);
        if (parens) os << ")";
    } else {
        const auto& o = std::get<OrExpr>(e);
        bool parens = parent_prec > 0;
        if (parens) os << "(";
        print_bool(os, *o.lhs, 0);
        os << " || ";
        print_bool(os, *o.rhs, 0);
        if (parens) os << ")";
    }
}

}  // namespace

std::string to_text(const BoolExpr& e) {
    std::ostringstream os;
    print_bool(os, e, 0);
    return os.str();
}

std::string to_text(const Command& c) {
    if (const auto* ab = std::get_if<AssignBase>(&c)) return ab->var + " := " + to_text(ab->rhs);
    if (const auto* am = std::get_if<AssignMap>(&c)) {
        // A same-map store prints in the abbreviated a[i] := x form.
        if (const auto* st = as_map_write(c)) {
            std::string val = st->value_is_var() ? st->value_var() : to_text(st->value_lit());
            return am->var + "[" + st->index + "] := " + val;
        }
        return am->var + " := " + to_text(am->rhs);
    }
    if (const auto* hb = std::get_if<HavocBase>(&c)) return "havoc " + hb->var;
    if (const auto* hm = std::get_if<HavocMap>(&c)) return "havoc " + hm->var;
    if (const auto* as = std::get_if<Assume>(&c)) return "assume " + to_text(as->cond);
    if (std::holds_alternative<Skip>(c)) return "skip";
    if (const auto* seq = std::get_if<SeqCmd>(&c)) {
        std::string out = "atomic { ";
        for (std::size_t i = 0; i < seq->parts.size(); ++i) {
            if (i) out += "; ";
            out += to_text(seq->parts[i]);
        }
        return out + " }";
    }
    const auto& he = std::get<HavocMapsEqual>(c);
    std::string out = "havoc_eq ";
    for (std::size_t i = 0; i < he.maps.size(); ++i) {
        if (i) out += ", ";
        out += he.maps[i];
    }
    return out;
}

std::string pretty(const Program& p) {
    std::ostringstream os;
    for (const auto& v : p.vars) {
        os << "var " << v.name << ": ";
        if (v.kind == VarKind::Base) {
            os << "int";
        } else {
            os << "[int]" << (v.cell_sort == Sort::Base ? "int" : "wid");
        }
        os << ";\n";
    }
    os << "\n";
    for (LocId loc = 0; loc < p.num_locs(); ++loc) {
        os << (p.is_error[loc] ? "error " : "label ") << p.loc_names[loc] << ":\n";
        for (const auto& s : p.statements) {
            if (s.src != loc) continue;
            os << "  " << to_text(s.cmd) << " -> " << p.loc_names[s.dst] << ";\n";
        }
    }
    return os.str();
}

}  // namespace mapsep
