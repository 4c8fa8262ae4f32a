// Copyright (c) the mapsep contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "mapsep/ast.hpp"

namespace mapsep {

// Command-level shadow rewriting: havoc/const assignments reset the lw
// shadow to bot, map copies copy the shadow, everything else is unchanged.
Command instrument_command(const Command& c, const Program& p);

// Statement-level rewriting: a map write additionally stores its own id
// into the shadow map at the written index.
Statement instrument_statement(const Statement& s, const Program& p);

// Builds the instrumented program: one `a__lw` shadow per map variable,
// statement-level rewriting everywhere, and shadow bot-initialization
// prefixed to every edge leaving the initial location. The shadow
// initializations run before the edge's own command so a store on an
// initial edge is not clobbered. Locations and statement ids are preserved.
Program instrument(const Program& p);

}  // namespace mapsep
