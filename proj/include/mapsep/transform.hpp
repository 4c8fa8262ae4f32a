// Copyright (c) the mapsep contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "mapsep/partition.hpp"

namespace mapsep {

// Applies the block-splitting rewrite: every map variable that occurs in a
// statement is replaced by one copy per partition block plus a `__bot` copy
// for never-written reads. Writes go to their block's copy, reads to the
// block containing their preimage, copies and havocs fan out over the whole
// family. Locations and statement ids are preserved.
Program transform(const Program& p, const WritePartition& part, const LastWrites& lw);

// The family of block-map names for one source map (blocks first, bot last).
std::vector<std::string> block_family(const std::string& map, const WritePartition& part);

}  // namespace mapsep
