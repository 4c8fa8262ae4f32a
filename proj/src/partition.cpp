// Copyright (c) the mapsep contributors.
// SPDX-License-Identifier: Apache-2.0

#include "mapsep/partition.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

#include "mapsep/diagnostics.hpp"

namespace mapsep {

std::string sanitize_block_name(const std::string& id) {
    std::string out;
    for (char c : id) out += (std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
    return out;
}

int WritePartition::block_of(const std::string& write_id) const {
    for (std::size_t i = 0; i < blocks.size(); ++i)
        if (blocks[i].count(write_id)) return static_cast<int>(i);
    return -1;
}

std::map<std::string, int> WritePartition::blocks_per_map(const Program& p) const {
    std::map<std::string, int> counts;
    for (const auto& v : p.vars)
        if (v.kind == VarKind::Map) counts[v.name] = 0;
    for (const auto& block : blocks) {
        std::set<std::string> maps;
        for (const auto& wid : block) {
            for (const auto& s : p.statements) {
                if (s.id != wid) continue;
                if (const auto* st = as_map_write(s.cmd)) maps.insert(st->map);
            }
        }
        for (const auto& m : maps) ++counts[m];
    }
    return counts;
}

std::set<std::pair<std::string, std::string>> build_influence_relation(const LastWrites& lw) {
    std::set<std::pair<std::string, std::string>> r;
    for (const auto& [read, pre] : lw.preimage) {
        (void)read;
        for (const auto& w1 : pre) {
            if (w1 == kBotMarker) continue;
            for (const auto& w2 : pre) {
                if (w2 == kBotMarker) continue;
                r.emplace(w1, w2);
            }
        }
    }
    return r;
}

WritePartition partition_writes(const Program& p, const LastWrites& lw) {
    std::vector<std::string> writes;
    for (const Statement* w : write_statements(p)) writes.push_back(w->id);
    std::sort(writes.begin(), writes.end());

    std::map<std::string, int> index;
    for (std::size_t i = 0; i < writes.size(); ++i) index[writes[i]] = static_cast<int>(i);

    // Union-find over write ids.
    std::vector<int> parent(writes.size());
    for (std::size_t i = 0; i < writes.size(); ++i) parent[i] = static_cast<int>(i);
    std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    auto unite = [&](int a, int b) { parent[find(a)] = find(b); };

    for (const auto& [w1, w2] : build_influence_relation(lw)) {
        auto i1 = index.find(w1), i2 = index.find(w2);
        if (i1 == index.end() || i2 == index.end())
            throw Diagnostic(DiagCode::InconsistentPartition, "preimage mentions unknown write '" + w1 + "'");
        unite(i1->second, i2->second);
    }

    std::map<int, std::set<std::string>> groups;
    for (std::size_t i = 0; i < writes.size(); ++i) groups[find(static_cast<int>(i))].insert(writes[i]);

    WritePartition part;
    std::vector<std::pair<std::string, std::set<std::string>>> named;
    for (auto& [root, members] : groups) {
        (void)root;
        named.emplace_back(sanitize_block_name(*members.begin()), members);
    }
    std::sort(named.begin(), named.end());
    for (auto& [name, members] : named) {
        part.names.push_back(name);
        part.blocks.push_back(std::move(members));
    }

    // Refinement soundness: each read's stripped preimage fits in one block.
    for (const auto& [read, pre] : lw.preimage) {
        int block = -1;
        for (const auto& w : pre) {
            if (w == kBotMarker) continue;
            int b = part.block_of(w);
            if (b < 0)
                throw Diagnostic(DiagCode::InconsistentPartition,
                                 "read " + read + " influenced by unknown write " + w);
            if (block >= 0 && b != block)
                throw Diagnostic(DiagCode::InconsistentPartition,
                                 "preimage of read " + read + " spans two blocks");
            block = b;
        }
    }
    return part;
}

}  // namespace mapsep
