// Copyright (c) the mapsep contributors.
// SPDX-License-Identifier: Apache-2.0

#include "mapsep/instrument.hpp"

#include <algorithm>

#include "mapsep/diagnostics.hpp"
#include "mapsep/normalize.hpp"

namespace mapsep {

namespace {

void flatten_into(Command&& c, std::vector<Command>& parts) {
    if (auto* seq = std::get_if<SeqCmd>(&c)) {
        for (auto& part : seq->parts) parts.push_back(std::move(part));
    } else {
        parts.push_back(std::move(c));
    }
}

Command seq_or_single(std::vector<Command>&& parts) {
    if (parts.size() == 1) return std::move(parts.front());
    return SeqCmd{std::move(parts)};
}

}  // namespace

Command instrument_command(const Command& c, const Program& p) {
    if (const auto* hm = std::get_if<HavocMap>(&c)) {
        std::vector<Command> parts;
        parts.push_back(c);
        parts.push_back(AssignMap{shadow_name(hm->var), ConstMapExpr{Literal::bot()}});
        return SeqCmd{std::move(parts)};
    }
    if (const auto* am = std::get_if<AssignMap>(&c)) {
        if (std::holds_alternative<ConstMapExpr>(am->rhs)) {
            std::vector<Command> parts;
            parts.push_back(c);
            parts.push_back(AssignMap{shadow_name(am->var), ConstMapExpr{Literal::bot()}});
            return SeqCmd{std::move(parts)};
        }
        if (const auto* mv = std::get_if<MapVarExpr>(&am->rhs)) {
            std::vector<Command> parts;
            parts.push_back(c);
            parts.push_back(AssignMap{shadow_name(am->var), MapVarExpr{shadow_name(mv->name)}});
            return SeqCmd{std::move(parts)};
        }
    }
    (void)p;
    return c;
}

Statement instrument_statement(const Statement& s, const Program& p) {
    Statement out = s;
    if (const auto* st = as_map_write(s.cmd)) {
        std::vector<Command> parts;
        parts.push_back(s.cmd);
        StoreExpr ghost;
        ghost.map = shadow_name(st->map);
        ghost.index = st->index;
        ghost.value = Literal::write(s.id);
        parts.push_back(AssignMap{ghost.map, std::move(ghost)});
        out.cmd = SeqCmd{std::move(parts)};
    } else {
        out.cmd = instrument_command(s.cmd, p);
    }
    return out;
}

Program instrument(const Program& p) {
    for (const auto& v : p.vars)
        if (is_shadow_name(v.name))
            throw Diagnostic(DiagCode::AlreadyInstrumented,
                             "program already declares shadow variable '" + v.name + "'");
    if (!is_normalized(p)) throw Diagnostic(DiagCode::NotNormalized, "instrument requires a normalized program");

    Program q = p;
    std::vector<std::string> map_names;
    for (const auto& v : p.vars) {
        if (v.kind != VarKind::Map) continue;
        map_names.push_back(v.name);
        q.vars.push_back(VarDecl{shadow_name(v.name), VarKind::Map, Sort::WriteId});
    }
    std::sort(map_names.begin(), map_names.end());
    std::sort(q.vars.begin(), q.vars.end(), [](const VarDecl& a, const VarDecl& b) {
        if (a.kind != b.kind) return a.kind < b.kind;
        return a.name < b.name;
    });

    for (auto& s : q.statements) {
        Statement inst = instrument_statement(s, p);
        if (s.src == p.initial) {
            std::vector<Command> parts;
            for (const auto& m : map_names)
                parts.push_back(AssignMap{shadow_name(m), ConstMapExpr{Literal::bot()}});
            flatten_into(std::move(inst.cmd), parts);
            inst.cmd = seq_or_single(std::move(parts));
        } else if (auto* seq = std::get_if<SeqCmd>(&inst.cmd)) {
            std::vector<Command> parts;
            for (auto& part : seq->parts) flatten_into(std::move(part), parts);
            inst.cmd = seq_or_single(std::move(parts));
        }
        s.cmd = std::move(inst.cmd);
    }
    check_well_formed(q, /*allow_ir=*/true);
    return q;
}

}  // namespace mapsep
