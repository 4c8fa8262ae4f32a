// Copyright (c) the mapsep contributors.
// SPDX-License-Identifier: Apache-2.0

#include "mapsep/transform.hpp"

#include <algorithm>
#include <set>

#include "mapsep/diagnostics.hpp"
#include "mapsep/normalize.hpp"

namespace mapsep {

std::vector<std::string> block_family(const std::string& map, const WritePartition& part) {
    std::vector<std::string> family;
    for (const auto& name : part.names) family.push_back(map + "__" + name);
    family.push_back(map + kBotBlockSuffix);
    return family;
}

namespace {

struct Rewriter {
    const Program& p;
    const WritePartition& part;
    const LastWrites& lw;
    std::set<std::string> used_maps;  // maps occurring in statements

    std::string write_target(const std::string& map, const std::string& stmt_id) const {
        int b = part.block_of(stmt_id);
        if (b < 0) throw Diagnostic(DiagCode::InconsistentPartition, "write " + stmt_id + " not in any block");
        return map + "__" + part.names[b];
    }

    std::string read_target(const std::string& map, const std::string& stmt_id) const {
        auto it = lw.preimage.find(stmt_id);
        if (it == lw.preimage.end())
            throw Diagnostic(DiagCode::InconsistentPartition, "read " + stmt_id + " missing from the preimage table");
        int block = -1;
        for (const auto& w : it->second) {
            if (w == kBotMarker) continue;
            int b = part.block_of(w);
            if (b < 0 || (block >= 0 && b != block))
                throw Diagnostic(DiagCode::InconsistentPartition,
                                 "preimage of read " + stmt_id + " spans blocks");
            block = b;
        }
        if (block < 0) return map + kBotBlockSuffix;
        return map + "__" + part.names[block];
    }

    Command rewrite(const Command& c, const std::string& stmt_id) const {
        if (const auto* ab = std::get_if<AssignBase>(&c)) {
            if (const auto* sel = std::get_if<SelectExpr>(&ab->rhs))
                return AssignBase{ab->var, SelectExpr{read_target(sel->map, stmt_id), sel->index}};
            return c;
        }
        if (const auto* am = std::get_if<AssignMap>(&c)) {
            if (const auto* st = std::get_if<StoreExpr>(&am->rhs)) {
                if (st->map != am->var)
                    throw Diagnostic(DiagCode::NotNormalized, "transform requires a normalized program");
                std::string target = write_target(am->var, stmt_id);
                StoreExpr ns = *st;
                ns.map = target;
                return AssignMap{target, std::move(ns)};
            }
            if (const auto* mv = std::get_if<MapVarExpr>(&am->rhs)) {
                std::vector<Command> parts;
                std::vector<std::string> dst = block_family(am->var, part);
                std::vector<std::string> src = block_family(mv->name, part);
                for (std::size_t i = 0; i < dst.size(); ++i)
                    parts.push_back(AssignMap{dst[i], MapVarExpr{src[i]}});
                if (parts.size() == 1) return parts.front();
                return SeqCmd{std::move(parts)};
            }
            const auto& cm = std::get<ConstMapExpr>(am->rhs);
            std::vector<Command> parts;
            for (const auto& name : block_family(am->var, part))
                parts.push_back(AssignMap{name, ConstMapExpr{cm.value}});
            if (parts.size() == 1) return parts.front();
            return SeqCmd{std::move(parts)};
        }
        if (const auto* hm = std::get_if<HavocMap>(&c)) {
            std::vector<std::string> family = block_family(hm->var, part);
            if (family.size() == 1) return HavocMap{family.front()};
            return HavocMapsEqual{std::move(family)};
        }
        if (std::holds_alternative<SeqCmd>(c) || std::holds_alternative<HavocMapsEqual>(c))
            throw Diagnostic(DiagCode::InvalidArgument, "transform expects a source-level program");
        return c;
    }
};

void collect_used_maps(const Program& p, std::set<std::string>& used) {
    for (const auto& s : p.statements) {
        if (const auto* ab = std::get_if<AssignBase>(&s.cmd)) {
            if (const auto* sel = std::get_if<SelectExpr>(&ab->rhs)) used.insert(sel->map);
        } else if (const auto* am = std::get_if<AssignMap>(&s.cmd)) {
            used.insert(am->var);
            if (const auto* mv = std::get_if<MapVarExpr>(&am->rhs)) used.insert(mv->name);
            if (const auto* st = std::get_if<StoreExpr>(&am->rhs)) used.insert(st->map);
        } else if (const auto* hm = std::get_if<HavocMap>(&s.cmd)) {
            used.insert(hm->var);
        }
    }
}

}  // namespace

Program transform(const Program& p, const WritePartition& part, const LastWrites& lw) {
    if (!is_normalized(p)) throw Diagnostic(DiagCode::NotNormalized, "transform requires a normalized program");
    Rewriter rw{p, part, lw, {}};
    collect_used_maps(p, rw.used_maps);

    Program q = p;
    q.vars.clear();
    for (const auto& v : p.vars) {
        if (v.kind != VarKind::Map || !rw.used_maps.count(v.name)) {
            q.vars.push_back(v);
            continue;
        }
        for (const auto& name : block_family(v.name, part))
            q.vars.push_back(VarDecl{name, VarKind::Map, v.cell_sort});
    }
    std::sort(q.vars.begin(), q.vars.end(), [](const VarDecl& a, const VarDecl& b) {
        if (a.kind != b.kind) return a.kind < b.kind;
        return a.name < b.name;
    });

    for (auto& s : q.statements) s.cmd = rw.rewrite(s.cmd, s.id);
    check_well_formed(q, /*allow_ir=*/true);
    return q;
}

}  // namespace mapsep
