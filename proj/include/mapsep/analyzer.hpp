// Copyright (c) the mapsep contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <bitset>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "mapsep/lastwrites.hpp"
#include "mapsep/semantics.hpp"

namespace mapsep {

// ---------------------------------------------------------------------------
// Term universe: base variables, literals occurring in the program, and
// select(map, indexVar) for co-occurring pairs (mirrored between a source map
// and its lw shadow). Fixed per program, so the abstract lattice is finite.

class TermUniverse {
  public:
    enum class Kind : std::uint8_t { Var, Lit, Select };
    struct Term {
        Kind kind = Kind::Var;
        Sort sort = Sort::Base;
        int var = -1;      // Var: base slot
        Literal lit;       // Lit
        int encoded = -1;  // Lit: cell encoding (base value, or 0=bot / w+1)
        int map = -1;      // Select: map slot
        int index = -1;    // Select: index base slot
    };

    static TermUniverse build(const CompiledProgram& cp);

    int size() const { return static_cast<int>(terms_.size()); }
    const Term& term(int t) const { return terms_[t]; }
    int var_term(int base_slot) const { return var_term_[base_slot]; }
    int lit_term(Sort sort, int encoded) const;  // -1 if absent
    int select_term(int map_slot, int index_slot) const;
    const std::vector<int>& selects_of_map(int map_slot) const { return selects_by_map_[map_slot]; }
    const std::vector<int>& all_selects() const { return all_selects_; }
    std::string term_text(const CompiledProgram& cp, int t) const;

    int n_wid_bits = 1;  // 1 + number of wid symbols

  private:
    int add(const Term& t);
    std::vector<Term> terms_;
    std::vector<int> var_term_;
    std::map<std::pair<int, int>, int> lit_index_;     // (sort, encoded) -> term
    std::map<std::pair<int, int>, int> select_index_;  // (map, index) -> term
    std::vector<std::vector<int>> selects_by_map_;
    std::vector<int> all_selects_;
};

// Set of write ids (bit 0 = bot, bit w+1 = wid symbol w).
struct WidSet {
    std::bitset<256> bits;

    static WidSet top(int n_bits);
    static WidSet single(int encoded);  // encoded cell value: 0 = bot
    bool contains(int encoded) const { return bits.test(static_cast<std::size_t>(encoded)); }
    bool disjoint(const WidSet& o) const { return (bits & o.bits).none(); }
    bool subset_of(const WidSet& o) const { return (bits & ~o.bits).none(); }
    WidSet union_with(const WidSet& o) const { return WidSet{bits | o.bits}; }
    bool operator==(const WidSet& o) const { return bits == o.bits; }
};

// ---------------------------------------------------------------------------
// Abstract state: congruence-closed equalities over the term universe,
// disequalities between classes, and wid-set constraints on WriteId-sorted
// classes. Literal terms carry their value, so distinct literals are
// implicitly disequal and merging them yields bottom.

class AbstractState {
  public:
    AbstractState() = default;
    static AbstractState top(const TermUniverse& u);
    static AbstractState bottom(const TermUniverse& u);

    bool is_bottom() const { return bottom_; }
    int root(int t) const { return cls_[t]; }
    bool equal(int t1, int t2) const { return !bottom_ && cls_[t1] == cls_[t2]; }
    bool disequal(int t1, int t2) const;
    // Effective set for a term: its class constraint intersected with the
    // per-map bound when the term is a select.
    WidSet wid_set(int t) const;
    // Set of write ids any cell of this WriteId-sorted map may contain.
    WidSet map_bound(int map_slot) const;
    void set_map_bound(int map_slot, const WidSet& s);
    void clear_map_bound(int map_slot);

    void add_eq(int t1, int t2);
    void add_diseq(int t1, int t2);
    void restrict_wid(int t, const WidSet& s);
    void close(const TermUniverse& u);  // congruence + derived disequalities

    bool leq(const AbstractState& o, const TermUniverse& u) const;
    static AbstractState join(const AbstractState& a, const AbstractState& b, const TermUniverse& u);

    std::string to_text(const CompiledProgram& cp, const TermUniverse& u) const;

    // Structural facts, for rebuilding states across strong updates.
    struct Facts {
        std::vector<std::pair<int, int>> eqs;
        std::vector<std::pair<int, int>> diseqs;
        std::vector<std::pair<int, WidSet>> wids;
        std::vector<std::pair<int, WidSet>> bounds;  // by map slot
    };
    Facts extract_facts(const TermUniverse& u, const std::vector<bool>& drop) const;

  private:
    friend class Analyzer;
    bool bottom_ = false;
    std::vector<int> cls_;                 // term -> class root (min member id)
    std::vector<int> term_map_;            // term -> map slot for selects, else -1
    std::set<std::pair<int, int>> diseq_;  // root pairs, normalized (min, max)
    std::map<int, WidSet> wid_;            // root -> set (absent = top)
    std::map<int, WidSet> map_bound_;      // map slot -> set (absent = top)
    std::map<int, std::pair<Sort, int>> lit_of_;  // root -> literal value
    int n_wid_bits_ = 1;

    void merge(int t1, int t2);
    void renormalize();
};

// Satisfaction of an abstract state by a concrete state (property tests).
bool satisfies(const CompiledProgram& cp, const TermUniverse& u, const State& s, const AbstractState& a);

// ---------------------------------------------------------------------------
// Fixpoint analysis over an instrumented program.

struct AnalysisResult {
    TermUniverse universe;
    std::vector<AbstractState> at;  // per location
    LastWrites approx;              // lastwrites♯: pairs + per-read preimages
    int iterations = 0;
};

AnalysisResult analyze(const CompiledProgram& cp);

// One-statement abstract transfer (exposed for unit tests).
AbstractState transfer(const CompiledProgram& cp, const TermUniverse& u, int stmt_idx, const AbstractState& in);

}  // namespace mapsep
