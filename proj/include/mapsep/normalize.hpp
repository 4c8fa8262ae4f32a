// Copyright (c) the mapsep contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "mapsep/ast.hpp"

namespace mapsep {

// Rewrites stores over a different map (`a := b[i:=x]`) into a map assignment
// followed by an in-place store, introducing a fresh intermediate location.
// Idempotent; the result is canonical.
Program normalize(const Program& p);

bool is_normalized(const Program& p);

}  // namespace mapsep
