// Copyright (c) the mapsep contributors.
// SPDX-License-Identifier: Apache-2.0

#include "mapsep/normalize.hpp"

#include "mapsep/diagnostics.hpp"

namespace mapsep {

namespace {

bool is_cross_map_store(const Command& c) {
    const auto* am = std::get_if<AssignMap>(&c);
    if (!am) return false;
    const auto* st = std::get_if<StoreExpr>(&am->rhs);
    return st && st->map != am->var;
}

bool command_normalized(const Command& c) {
    if (is_cross_map_store(c)) return false;
    if (const auto* seq = std::get_if<SeqCmd>(&c)) {
        for (const auto& part : seq->parts)
            if (!command_normalized(part)) return false;
    }
    return true;
}

}  // namespace

bool is_normalized(const Program& p) {
    for (const auto& s : p.statements)
        if (!command_normalized(s.cmd)) return false;
    return true;
}

Program normalize(const Program& p) {
    Program q = p;
    std::vector<Statement> out;
    for (const auto& s : q.statements) {
        if (const auto* seq = std::get_if<SeqCmd>(&s.cmd)) {
            for (const auto& part : seq->parts)
                if (is_cross_map_store(part))
                    throw Diagnostic(DiagCode::NotNormalized, "cross-map store inside an atomic edge");
        }
        if (!is_cross_map_store(s.cmd)) {
            out.push_back(s);
            continue;
        }
        const auto& am = std::get<AssignMap>(s.cmd);
        const auto& st = std::get<StoreExpr>(am.rhs);
        LocId mid = q.num_locs();
        q.loc_names.push_back("%norm" + std::to_string(mid));
        q.is_error.push_back(false);

        Statement copy;
        copy.src = s.src;
        copy.dst = mid;
        copy.cmd = AssignMap{am.var, MapVarExpr{st.map}};
        out.push_back(std::move(copy));

        Statement store;
        store.src = mid;
        store.dst = s.dst;
        StoreExpr inplace = st;
        inplace.map = am.var;
        store.cmd = AssignMap{am.var, std::move(inplace)};
        out.push_back(std::move(store));
    }
    q.statements = std::move(out);
    return canonicalize(q);
}

}  // namespace mapsep
