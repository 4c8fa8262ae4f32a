// Copyright (c) the mapsep contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "mapsep/lastwrites.hpp"

namespace mapsep {

// Partition of the write statements into groups that may influence a common
// read, plus the distinguished bot block for never-written reads. Block
// names are the lexicographically least member id, sanitized to identifier
// characters; the bot block is named "bot".
struct WritePartition {
    std::vector<std::set<std::string>> blocks;  // sorted by block name
    std::vector<std::string> names;

    int block_of(const std::string& write_id) const;  // -1 if unknown
    std::map<std::string, int> blocks_per_map(const Program& p) const;
};

// R: writes related iff some read's preimage contains both (bot ignored).
std::set<std::pair<std::string, std::string>> build_influence_relation(const LastWrites& lw);

// Smallest equivalence containing R, restricted to the write statements of
// p; singleton blocks for unrelated writes. Throws InconsistentPartition if
// some read's preimage (minus bot) is not contained in one block.
WritePartition partition_writes(const Program& p, const LastWrites& lw);

std::string sanitize_block_name(const std::string& id);

}  // namespace mapsep
