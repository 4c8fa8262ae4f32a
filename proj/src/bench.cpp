// Copyright (c) the mapsep contributors.
// SPDX-License-Identifier: Apache-2.0

#include "mapsep/bench.hpp"

#include <sstream>

#include "mapsep/diagnostics.hpp"
#include "mapsep/parser.hpp"

namespace mapsep {

std::string gen_benchmark_text(int k) {
    if (k < 2 || k % 2 != 0)
        throw Diagnostic(DiagCode::InvalidArgument, "benchmark size must be even and at least 2");
    std::ostringstream os;
    os << "// scalable map separation benchmark, " << k << " index variables\n";
    os << "var fls: int;\n";
    os << "var tru: int;\n";
    os << "var zero: int;\n";
    for (int i = 1; i <= k; ++i) os << "var p" << i << ": int;\n";
    os << "var t: int;\n";
    os << "var u: int;\n";
    os << "var v: int;\n";
    os << "var w: int;\n";
    os << "var mem: [int]int;\n";
    os << "var valid: [int]int;\n";
    os << "\n";
    os << "mem := const(0);\n";
    os << "valid := const(0);\n";
    os << "fls := 0;\n";
    os << "tru := 1;\n";
    os << "zero := 0;\n";
    for (int i = 1; i <= k; ++i) {
        os << "havoc p" << i << ";\n";
        os << "t := valid[p" << i << "];\n";
        os << "assume t == fls;\n";
        os << "valid[p" << i << "] := tru;\n";
    }
    for (int i = 1; i <= k; ++i) os << "mem[p" << i << "] := zero;\n";
    os << "while (*) {\n";
    for (int i = 1; i <= k; ++i) {
        if (i == 1) {
            os << "  if (*) {\n";
        } else if (i < k) {
            os << "  } else if (*) {\n";
        } else {
            os << "  } else {\n";
        }
        os << "    u := mem[p" << i << "];\n";
        os << "    v := " << (i % 2 == 1 ? "succ" : "pred") << "(u);\n";
        os << "    mem[p" << i << "] := v;\n";
    }
    os << "  }\n";
    os << "}\n";
    for (int i = 1; i <= k; ++i) {
        os << "w := mem[p" << i << "];\n";
        if (i % 2 == 1) {
            os << "assert w == w;\n";
        } else {
            os << "assert w == zero;\n";
        }
    }
    return os.str();
}

Program gen_benchmark(int k) { return parse(gen_benchmark_text(k)); }

std::string flow_example_text() {
    return
        "// both pointers alias before allocation; accesses happen only after\n"
        "var fls: int;\n"
        "var tru: int;\n"
        "var zero: int;\n"
        "var one: int;\n"
        "var p: int;\n"
        "var q: int;\n"
        "var t: int;\n"
        "var u: int;\n"
        "var v: int;\n"
        "var mem: [int]int;\n"
        "var valid: [int]int;\n"
        "\n"
        "mem := const(0);\n"
        "valid := const(0);\n"
        "fls := 0;\n"
        "tru := 1;\n"
        "zero := 0;\n"
        "one := 1;\n"
        "p := zero;\n"
        "q := zero;\n"
        "havoc p;\n"
        "t := valid[p];\n"
        "assume t == fls;\n"
        "valid[p] := tru;\n"
        "havoc q;\n"
        "t := valid[q];\n"
        "assume t == fls;\n"
        "valid[q] := tru;\n"
        "mem[p] := one;\n"
        "mem[q] := zero;\n"
        "u := mem[p];\n"
        "v := mem[q];\n"
        "assert u == one;\n"
        "assert v == zero;\n";
}

}  // namespace mapsep
