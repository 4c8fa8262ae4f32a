// Copyright (c) the mapsep contributors.
// SPDX-License-Identifier: Apache-2.0

#include "mapsep/analyzer.hpp"

#include <algorithm>
#include <cassert>
#include <deque>

#include "mapsep/diagnostics.hpp"
#include "mapsep/printer.hpp"

namespace mapsep {

// ---------------------------------------------------------------------------
// TermUniverse

int TermUniverse::add(const Term& t) {
    terms_.push_back(t);
    return static_cast<int>(terms_.size()) - 1;
}

int TermUniverse::lit_term(Sort sort, int encoded) const {
    auto it = lit_index_.find({static_cast<int>(sort), encoded});
    return it == lit_index_.end() ? -1 : it->second;
}

int TermUniverse::select_term(int map_slot, int index_slot) const {
    auto it = select_index_.find({map_slot, index_slot});
    return it == select_index_.end() ? -1 : it->second;
}

std::string TermUniverse::term_text(const CompiledProgram& cp, int t) const {
    const Term& tm = term(t);
    switch (tm.kind) {
    case Kind::Var: return cp.base_names[tm.var];
    case Kind::Lit: return to_text(tm.lit);
    case Kind::Select: return cp.map_names[tm.map] + "[" + cp.base_names[tm.index] + "]";
    }
    return "?";
}

TermUniverse TermUniverse::build(const CompiledProgram& cp) {
    TermUniverse u;
    u.n_wid_bits = 1 + static_cast<int>(cp.wid_names.size());
    u.var_term_.resize(cp.n_base());
    for (int b = 0; b < cp.n_base(); ++b) {
        Term t;
        t.kind = Kind::Var;
        t.sort = Sort::Base;
        t.var = b;
        u.var_term_[b] = u.add(t);
    }
    auto add_lit = [&](Sort sort, int encoded) {
        auto key = std::make_pair(static_cast<int>(sort), encoded);
        if (u.lit_index_.count(key)) return;
        Term t;
        t.kind = Kind::Lit;
        t.sort = sort;
        t.encoded = encoded;
        if (sort == Sort::Base) {
            t.lit = Literal::base(encoded);
        } else {
            t.lit = encoded == 0 ? Literal::bot() : Literal::write(cp.wid_names[encoded - 1]);
        }
        u.lit_index_.emplace(key, u.add(t));
    };
    add_lit(Sort::WriteId, 0);  // bot

    std::set<std::pair<int, int>> pairs;
    for (const auto& st : cp.stmts) {
        for (const auto& cc : st.cmds) {
            using Op = CompiledProgram::Op;
            switch (cc.op) {
            case Op::AssignLit:
                add_lit(Sort::Base, cc.lit);
                break;
            case Op::AssignSelect:
                pairs.emplace(cc.b, cc.c);
                break;
            case Op::MapConst:
                add_lit(cp.map_sort[cc.a], cc.lit);
                break;
            case Op::Store:
                pairs.emplace(cc.a, cc.b);
                if (cc.c < 0) add_lit(cp.map_sort[cc.a], cc.lit);
                break;
            default:
                break;
            }
        }
    }
    // Mirror pairs between source maps and their shadows.
    std::vector<int> shadow_src(cp.n_maps(), -1);
    for (int m = 0; m < cp.n_maps(); ++m)
        if (cp.shadow_of[m] >= 0) shadow_src[cp.shadow_of[m]] = m;
    std::set<std::pair<int, int>> mirrored = pairs;
    for (auto [m, i] : pairs) {
        if (cp.shadow_of[m] >= 0) mirrored.emplace(cp.shadow_of[m], i);
        if (shadow_src[m] >= 0) mirrored.emplace(shadow_src[m], i);
    }
    u.selects_by_map_.resize(cp.n_maps());
    for (auto [m, i] : mirrored) {
        Term t;
        t.kind = Kind::Select;
        t.sort = cp.map_sort[m];
        t.map = m;
        t.index = i;
        int id = u.add(t);
        u.select_index_.emplace(std::make_pair(m, i), id);
        u.selects_by_map_[m].push_back(id);
        u.all_selects_.push_back(id);
    }
    return u;
}

// ---------------------------------------------------------------------------
// WidSet

WidSet WidSet::top(int n_bits) {
    WidSet s;
    for (int i = 0; i < n_bits; ++i) s.bits.set(i);
    return s;
}

WidSet WidSet::single(int encoded) {
    WidSet s;
    s.bits.set(static_cast<std::size_t>(encoded));
    return s;
}

// ---------------------------------------------------------------------------
// AbstractState

AbstractState AbstractState::top(const TermUniverse& u) {
    AbstractState s;
    s.n_wid_bits_ = u.n_wid_bits;
    s.cls_.resize(u.size());
    s.term_map_.assign(u.size(), -1);
    for (int t = 0; t < u.size(); ++t) s.cls_[t] = t;
    for (int t = 0; t < u.size(); ++t) {
        const auto& tm = u.term(t);
        if (tm.kind == TermUniverse::Kind::Select) s.term_map_[t] = tm.map;
        if (tm.kind != TermUniverse::Kind::Lit) continue;
        s.lit_of_[t] = {tm.sort, tm.encoded};
        if (tm.sort == Sort::WriteId) s.wid_[t] = WidSet::single(tm.encoded);
    }
    return s;
}

AbstractState AbstractState::bottom(const TermUniverse& u) {
    AbstractState s = top(u);
    s.bottom_ = true;
    return s;
}

bool AbstractState::disequal(int t1, int t2) const {
    if (bottom_) return true;
    int r1 = cls_[t1], r2 = cls_[t2];
    if (r1 == r2) return false;
    if (diseq_.count({std::min(r1, r2), std::max(r1, r2)})) return true;
    auto l1 = lit_of_.find(r1), l2 = lit_of_.find(r2);
    if (l1 != lit_of_.end() && l2 != lit_of_.end() && l1->second != l2->second) return true;
    auto w1 = wid_.find(r1), w2 = wid_.find(r2);
    if (w1 != wid_.end() && w2 != wid_.end() && w1->second.disjoint(w2->second)) return true;
    return false;
}

WidSet AbstractState::wid_set(int t) const {
    auto it = wid_.find(cls_[t]);
    WidSet s = it == wid_.end() ? WidSet::top(n_wid_bits_) : it->second;
    if (term_map_[t] >= 0) s.bits &= map_bound(term_map_[t]).bits;
    return s;
}

WidSet AbstractState::map_bound(int map_slot) const {
    auto it = map_bound_.find(map_slot);
    return it == map_bound_.end() ? WidSet::top(n_wid_bits_) : it->second;
}

void AbstractState::set_map_bound(int map_slot, const WidSet& s) { map_bound_[map_slot] = s; }

void AbstractState::clear_map_bound(int map_slot) { map_bound_.erase(map_slot); }

void AbstractState::merge(int t1, int t2) {
    int r1 = cls_[t1], r2 = cls_[t2];
    if (r1 == r2 || bottom_) return;
    int keep = std::min(r1, r2), gone = std::max(r1, r2);
    // Literal values must agree.
    auto lk = lit_of_.find(keep), lg = lit_of_.find(gone);
    if (lk != lit_of_.end() && lg != lit_of_.end() && lk->second != lg->second) {
        bottom_ = true;
        return;
    }
    if (lg != lit_of_.end()) lit_of_[keep] = lg->second;
    // Wid sets intersect.
    auto wk = wid_.find(keep), wg = wid_.find(gone);
    if (wg != wid_.end()) {
        WidSet merged = wg->second;
        if (wk != wid_.end()) merged.bits &= wk->second.bits;
        if (merged.bits.none()) {
            bottom_ = true;
            return;
        }
        wid_[keep] = merged;
    }
    lit_of_.erase(gone);
    wid_.erase(gone);
    // Rewrite class ids and disequalities.
    for (auto& c : cls_)
        if (c == gone) c = keep;
    std::set<std::pair<int, int>> nd;
    for (auto [a, b] : diseq_) {
        if (a == gone) a = keep;
        if (b == gone) b = keep;
        if (a == b) {
            bottom_ = true;
            return;
        }
        nd.emplace(std::min(a, b), std::max(a, b));
    }
    diseq_ = std::move(nd);
}

void AbstractState::add_eq(int t1, int t2) { merge(t1, t2); }

void AbstractState::add_diseq(int t1, int t2) {
    if (bottom_) return;
    int r1 = cls_[t1], r2 = cls_[t2];
    if (r1 == r2) {
        bottom_ = true;
        return;
    }
    diseq_.emplace(std::min(r1, r2), std::max(r1, r2));
}

void AbstractState::restrict_wid(int t, const WidSet& s) {
    if (bottom_) return;
    int r = cls_[t];
    WidSet cur = wid_set(t);
    cur.bits &= s.bits;
    if (cur.bits.none()) {
        bottom_ = true;
        return;
    }
    wid_[r] = cur;
}

void AbstractState::renormalize() {
    // Keep lit/wid tables keyed by current roots only.
    std::map<int, std::pair<Sort, int>> lits;
    std::map<int, WidSet> wids;
    for (const auto& [r, v] : lit_of_) lits[cls_[r]] = v;
    for (const auto& [r, v] : wid_) wids[cls_[r]] = v;
    lit_of_ = std::move(lits);
    wid_ = std::move(wids);
}

void AbstractState::close(const TermUniverse& u) {
    if (bottom_) return;
    bool changed = true;
    while (changed && !bottom_) {
        changed = false;
        // Congruence: equal indices make selects of one map equal.
        for (std::size_t mi = 0; mi < u.all_selects().size(); ++mi) {
            int t1 = u.all_selects()[mi];
            for (std::size_t mj = mi + 1; mj < u.all_selects().size(); ++mj) {
                int t2 = u.all_selects()[mj];
                const auto& a = u.term(t1);
                const auto& b = u.term(t2);
                if (a.map != b.map) continue;
                if (cls_[t1] == cls_[t2]) continue;
                if (cls_[u.var_term(a.index)] == cls_[u.var_term(b.index)]) {
                    merge(t1, t2);
                    renormalize();
                    if (bottom_) return;
                    changed = true;
                }
            }
        }
        // Contrapositive: disequal selects of one map make indices disequal.
        for (std::size_t mi = 0; mi < u.all_selects().size() && !bottom_; ++mi) {
            int t1 = u.all_selects()[mi];
            for (std::size_t mj = mi + 1; mj < u.all_selects().size(); ++mj) {
                int t2 = u.all_selects()[mj];
                const auto& a = u.term(t1);
                const auto& b = u.term(t2);
                if (a.map != b.map) continue;
                int i1 = u.var_term(a.index), i2 = u.var_term(b.index);
                if (disequal(t1, t2) && !disequal(i1, i2)) {
                    add_diseq(i1, i2);
                    if (bottom_) return;
                    changed = true;
                }
            }
        }
    }
}

AbstractState::Facts AbstractState::extract_facts(const TermUniverse& u, const std::vector<bool>& drop) const {
    Facts f;
    std::map<int, std::vector<int>> classes;
    for (int t = 0; t < u.size(); ++t)
        if (!drop[t]) classes[cls_[t]].push_back(t);
    for (const auto& [r, members] : classes) {
        for (std::size_t k = 1; k < members.size(); ++k) f.eqs.emplace_back(members[0], members[k]);
    }
    for (auto [r1, r2] : diseq_) {
        auto a = classes.find(r1);
        auto b = classes.find(r2);
        if (a != classes.end() && b != classes.end())
            f.diseqs.emplace_back(a->second.front(), b->second.front());
    }
    for (const auto& [r, set] : wid_) {
        auto it = classes.find(r);
        if (it != classes.end()) f.wids.emplace_back(it->second.front(), set);
    }
    for (const auto& [m, set] : map_bound_) f.bounds.emplace_back(m, set);
    return f;
}

bool AbstractState::leq(const AbstractState& o, const TermUniverse& u) const {
    if (bottom_) return true;
    if (o.bottom_) return false;
    for (int t1 = 0; t1 < u.size(); ++t1) {
        for (int t2 = t1 + 1; t2 < u.size(); ++t2) {
            if (o.equal(t1, t2) && !equal(t1, t2)) return false;
            if (o.disequal(t1, t2) && !disequal(t1, t2)) return false;
        }
        if (u.term(t1).sort == Sort::WriteId && !wid_set(t1).subset_of(o.wid_set(t1))) return false;
    }
    for (const auto& [m, set] : o.map_bound_)
        if (!map_bound(m).subset_of(set)) return false;
    return true;
}

AbstractState AbstractState::join(const AbstractState& a, const AbstractState& b, const TermUniverse& u) {
    if (a.bottom_) return b;
    if (b.bottom_) return a;
    AbstractState j = top(u);
    // Equalities valid in both: product partition.
    std::map<std::pair<int, int>, std::vector<int>> groups;
    for (int t = 0; t < u.size(); ++t) groups[{a.cls_[t], b.cls_[t]}].push_back(t);
    for (const auto& [key, members] : groups) {
        (void)key;
        for (std::size_t k = 1; k < members.size(); ++k) j.merge(members[0], members[k]);
    }
    j.renormalize();
    // Disequalities valid in both (using the full query on each side).
    for (int t1 = 0; t1 < u.size(); ++t1)
        for (int t2 = t1 + 1; t2 < u.size(); ++t2)
            if (!j.equal(t1, t2) && a.disequal(t1, t2) && b.disequal(t1, t2)) j.add_diseq(t1, t2);
    // Wid sets and map bounds: pointwise union.
    for (int t = 0; t < u.size(); ++t) {
        if (u.term(t).sort != Sort::WriteId) continue;
        WidSet s = a.wid_set(t).union_with(b.wid_set(t));
        if (!(s == WidSet::top(u.n_wid_bits))) j.restrict_wid(t, s);
    }
    for (const auto& [m, set] : a.map_bound_) {
        auto it = b.map_bound_.find(m);
        if (it != b.map_bound_.end()) j.map_bound_[m] = set.union_with(it->second);
    }
    j.close(u);
    return j;
}

std::string AbstractState::to_text(const CompiledProgram& cp, const TermUniverse& u) const {
    if (bottom_) return "bottom";
    std::string out;
    std::map<int, std::vector<int>> classes;
    for (int t = 0; t < u.size(); ++t) classes[cls_[t]].push_back(t);
    for (const auto& [r, members] : classes) {
        (void)r;
        if (members.size() < 2) continue;
        out += "{";
        for (std::size_t i = 0; i < members.size(); ++i) {
            if (i) out += " = ";
            out += u.term_text(cp, members[i]);
        }
        out += "} ";
    }
    for (auto [r1, r2] : diseq_)
        out += u.term_text(cp, r1) + " != " + u.term_text(cp, r2) + "; ";
    auto set_text = [&](const WidSet& s) {
        std::string txt = "{";
        bool first = true;
        for (int i = 0; i < n_wid_bits_; ++i) {
            if (!s.contains(i)) continue;
            if (!first) txt += ",";
            first = false;
            txt += i == 0 ? "bot" : cp.wid_names[i - 1];
        }
        return txt + "}";
    };
    for (const auto& [r, s] : wid_) out += u.term_text(cp, r) + " in " + set_text(s) + "; ";
    for (const auto& [m, s] : map_bound_) out += cp.map_names[m] + "[*] in " + set_text(s) + "; ";
    return out;
}

// ---------------------------------------------------------------------------
// Transfer

namespace {

class TransferEngine {
  public:
    TransferEngine(const CompiledProgram& cp, const TermUniverse& u) : cp_(cp), u_(u) {}

    AbstractState apply(const AbstractState& in, const CompiledProgram::CStmt& st) const {
        AbstractState s = in;
        for (const auto& cc : st.cmds) {
            if (s.is_bottom()) break;
            s = apply_cmd(s, cc);
        }
        return s;
    }

  private:
    // Rebuilds `s` without any facts mentioning the terms in `drop`. Per-map
    // bounds are carried over.
    AbstractState rebuild_without(const AbstractState& s, const std::vector<bool>& drop) const {
        AbstractState::Facts f = s.extract_facts(u_, drop);
        AbstractState out = AbstractState::top(u_);
        for (auto [a, b] : f.eqs) out.add_eq(a, b);
        for (auto [a, b] : f.diseqs) out.add_diseq(a, b);
        for (auto& [t, set] : f.wids) out.restrict_wid(t, set);
        for (auto& [m, set] : f.bounds) out.set_map_bound(m, set);
        return out;
    }

    // A dropped select term over an unchanged map still holds one of the
    // map's cells; pin the drop-time bound onto it.
    void materialize_dropped(AbstractState& s, const std::vector<bool>& drop, const AbstractState& pre) const {
        for (int t : u_.all_selects()) {
            if (!drop[t] || u_.term(t).sort != Sort::WriteId) continue;
            s.restrict_wid(t, pre.map_bound(u_.term(t).map));
        }
    }

    std::vector<bool> drop_for_var(int base_slot) const {
        std::vector<bool> drop(u_.size(), false);
        drop[u_.var_term(base_slot)] = true;
        for (int t : u_.all_selects())
            if (u_.term(t).index == base_slot) drop[t] = true;
        return drop;
    }

    std::vector<bool> drop_for_map(int map_slot) const {
        std::vector<bool> drop(u_.size(), false);
        for (int t : u_.selects_of_map(map_slot)) drop[t] = true;
        return drop;
    }

    AbstractState apply_cmd(const AbstractState& in, const CompiledProgram::CCmd& cc) const {
        using Op = CompiledProgram::Op;
        switch (cc.op) {
        case Op::AssignLit: {
            AbstractState s = rebuild_without(in, drop_for_var(cc.a));
            int lt = u_.lit_term(Sort::Base, cc.lit);
            if (lt >= 0) s.add_eq(u_.var_term(cc.a), lt);
            s.close(u_);
            return s;
        }
        case Op::AssignVar: {
            if (cc.a == cc.b) return in;
            AbstractState s = rebuild_without(in, drop_for_var(cc.a));
            s.add_eq(u_.var_term(cc.a), u_.var_term(cc.b));
            s.close(u_);
            return s;
        }
        case Op::AssignSelect: {
            int sel = u_.select_term(cc.b, cc.c);
            AbstractState s = rebuild_without(in, drop_for_var(cc.a));
            // If the assigned variable is the index itself the post-state
            // select denotes a different cell; no fact then.
            if (sel >= 0 && cc.a != cc.c) s.add_eq(u_.var_term(cc.a), sel);
            s.close(u_);
            return s;
        }
        case Op::AssignSucc:
        case Op::AssignPred: {
            AbstractState s = rebuild_without(in, drop_for_var(cc.a));
            s.close(u_);
            return s;
        }
        case Op::MapCopy: {
            if (cc.a == cc.b) return in;
            AbstractState s = rebuild_without(in, drop_for_map(cc.a));
            for (int t : u_.selects_of_map(cc.a)) {
                int src = u_.select_term(cc.b, u_.term(t).index);
                if (src >= 0) s.add_eq(t, src);
            }
            s.close(u_);
            return s;
        }
        case Op::MapConst: {
            AbstractState s = rebuild_without(in, drop_for_map(cc.a));
            int lt = u_.lit_term(cp_.map_sort[cc.a], cc.lit);
            for (int t : u_.selects_of_map(cc.a))
                if (lt >= 0) s.add_eq(t, lt);
            s.close(u_);
            return s;
        }
        case Op::Store:
            return apply_store(in, cc);
        case Op::HavocBase: {
            AbstractState s = rebuild_without(in, drop_for_var(cc.a));
            s.close(u_);
            return s;
        }
        case Op::HavocMap: {
            AbstractState s = rebuild_without(in, drop_for_map(cc.a));
            s.close(u_);
            return s;
        }
        case Op::HavocEq: {
            std::vector<bool> drop(u_.size(), false);
            for (int m : cc.maps)
                for (int t : u_.selects_of_map(m)) drop[t] = true;
            AbstractState s = rebuild_without(in, drop);
            for (std::size_t k = 1; k < cc.maps.size(); ++k) {
                for (int t : u_.selects_of_map(cc.maps[0])) {
                    int other = u_.select_term(cc.maps[k], u_.term(t).index);
                    if (other >= 0) s.add_eq(t, other);
                }
            }
            s.close(u_);
            return s;
        }
        case Op::AssumeOp:
            return apply_assume(in, *cc.cond);
        case Op::SkipOp:
            return in;
        }
        return in;
    }

    AbstractState apply_store(const AbstractState& in, const CompiledProgram::CCmd& cc) const {
        const int map = cc.a, index = cc.b;
        const bool wid_sorted = cp_.map_sort[map] == Sort::WriteId;
        const int ivar = u_.var_term(index);

        // Affected selects: same map, index not provably distinct beforehand.
        std::vector<int> affected;
        std::vector<bool> drop(u_.size(), false);
        for (int t : u_.selects_of_map(map)) {
            int jvar = u_.var_term(u_.term(t).index);
            if (in.disequal(ivar, jvar)) continue;
            affected.push_back(t);
            drop[t] = true;
        }
        // For shadow stores keep "old set or the stored id" at possibly-equal
        // indices instead of dropping to top.
        std::map<int, WidSet> weak_sets;
        if (wid_sorted && cc.c < 0) {
            for (int t : affected)
                weak_sets[t] = in.wid_set(t).union_with(WidSet::single(cc.lit));
        }

        AbstractState s = rebuild_without(in, drop);
        int sel = u_.select_term(map, index);
        for (auto& [t, set] : weak_sets)
            if (t != sel) s.restrict_wid(t, set);
        if (sel >= 0) {
            if (cc.c >= 0) {
                s.add_eq(sel, u_.var_term(cc.c));
            } else {
                int lt = u_.lit_term(cp_.map_sort[map], cc.lit);
                if (lt >= 0) s.add_eq(sel, lt);
                if (wid_sorted) s.restrict_wid(sel, WidSet::single(cc.lit));
            }
        }
        s.close(u_);
        return s;
    }

    AbstractState apply_assume(const AbstractState& in, const BoolExpr& e) const {
        // Disjunctive normal form over (dis)equality literals.
        struct Lit {
            int a, b;
            bool negated;
        };
        using Conj = std::vector<Lit>;
        std::function<std::vector<Conj>(const BoolExpr&, bool)> dnf = [&](const BoolExpr& ex,
                                                                          bool neg) -> std::vector<Conj> {
            if (const auto* eq = std::get_if<EqExpr>(&ex)) {
                Lit l{cp_.base_slot.at(eq->lhs), cp_.base_slot.at(eq->rhs), neg};
                return {{l}};
            }
            if (const auto* n = std::get_if<NotExpr>(&ex)) return dnf(*n->arg, !neg);
            const BoolExpr *lhs, *rhs;
            bool conj;
            if (const auto* a = std::get_if<AndExpr>(&ex)) {
                lhs = a->lhs.get();
                rhs = a->rhs.get();
                conj = !neg;
            } else {
                const auto& o = std::get<OrExpr>(ex);
                lhs = o.lhs.get();
                rhs = o.rhs.get();
                conj = neg;
            }
            auto l = dnf(*lhs, neg), r = dnf(*rhs, neg);
            if (!conj) {
                for (auto& c : r) l.push_back(std::move(c));
                return l;
            }
            std::vector<Conj> out;
            for (const auto& cl : l)
                for (const auto& cr : r) {
                    Conj c = cl;
                    c.insert(c.end(), cr.begin(), cr.end());
                    out.push_back(std::move(c));
                }
            return out;
        };
        std::vector<Conj> disjuncts = dnf(e, false);
        AbstractState acc = AbstractState::bottom(u_);
        for (const auto& conj : disjuncts) {
            AbstractState s = in;
            for (const auto& l : conj) {
                if (s.is_bottom()) break;
                int ta = u_.var_term(l.a), tb = u_.var_term(l.b);
                if (l.negated) {
                    if (l.a == l.b) {
                        s = AbstractState::bottom(u_);
                        break;
                    }
                    s.add_diseq(ta, tb);
                } else {
                    s.add_eq(ta, tb);
                }
            }
            if (!s.is_bottom()) {
                s.close(u_);
                acc = acc.is_bottom() ? s : AbstractState::join(acc, s, u_);
            }
        }
        return acc;
    }

    const CompiledProgram& cp_;
    const TermUniverse& u_;
};

}  // namespace

AbstractState transfer(const CompiledProgram& cp, const TermUniverse& u, int stmt_idx, const AbstractState& in) {
    return TransferEngine(cp, u).apply(in, cp.stmts[stmt_idx]);
}

// ---------------------------------------------------------------------------
// Fixpoint

namespace {

std::vector<int> reverse_postorder(const CompiledProgram& cp) {
    std::vector<int> order;
    std::vector<int> color(cp.n_locs, 0);
    std::vector<std::pair<std::uint32_t, std::size_t>> stack{{cp.initial, 0}};
    color[cp.initial] = 1;
    while (!stack.empty()) {
        auto& [loc, next] = stack.back();
        if (next < cp.out[loc].size()) {
            std::uint32_t dst = cp.stmts[cp.out[loc][next]].dst;
            ++next;
            if (color[dst] == 0) {
                color[dst] = 1;
                stack.push_back({dst, 0});
            }
        } else {
            order.push_back(static_cast<int>(loc));
            stack.pop_back();
        }
    }
    std::reverse(order.begin(), order.end());
    // Unreachable locations last, in index order.
    for (std::uint32_t l = 0; l < cp.n_locs; ++l)
        if (color[l] == 0) order.push_back(static_cast<int>(l));
    return order;
}

}  // namespace

AnalysisResult analyze(const CompiledProgram& cp) {
    AnalysisResult res;
    res.universe = TermUniverse::build(cp);
    const TermUniverse& u = res.universe;
    TransferEngine eng(cp, u);

    res.at.assign(cp.n_locs, AbstractState::bottom(u));
    res.at[cp.initial] = AbstractState::top(u);

    std::vector<int> rpo = reverse_postorder(cp);
    std::vector<int> rpo_rank(cp.n_locs, 0);
    for (std::size_t i = 0; i < rpo.size(); ++i) rpo_rank[rpo[i]] = static_cast<int>(i);

    // Worklist keyed by RPO rank; finite lattice, so termination is a bound,
    // not a hope — assert it.
    const long long t = u.size();
    const long long height_bound = (t * t + 256 * t + 2) * static_cast<long long>(cp.n_locs) + 16;
    long long iterations = 0;

    std::set<std::pair<int, int>> worklist;  // (rank, loc)
    worklist.emplace(rpo_rank[cp.initial], cp.initial);
    while (!worklist.empty()) {
        auto [rank, loc] = *worklist.begin();
        worklist.erase(worklist.begin());
        (void)rank;
        for (int si : cp.out[loc]) {
            const auto& st = cp.stmts[si];
            AbstractState ns = eng.apply(res.at[loc], st);
            if (ns.is_bottom()) continue;
            if (!ns.leq(res.at[st.dst], u)) {
                res.at[st.dst] = AbstractState::join(res.at[st.dst], ns, u);
                worklist.emplace(rpo_rank[st.dst], st.dst);
            }
            if (++iterations > height_bound)
                throw std::logic_error("fixpoint exceeded its termination bound");
        }
        ++iterations;
    }
    res.iterations = static_cast<int>(iterations);

    // Read preimages per the shadow-map recipe.
    for (const auto& st : cp.stmts) {
        if (!st.is_read) continue;
        int map = -1, index = -1;
        for (const auto& cc : st.cmds)
            if (cc.op == CompiledProgram::Op::AssignSelect) {
                map = cc.b;
                index = cc.c;
            }
        if (map < 0 || cp.shadow_of[map] < 0) continue;  // not a source-map read
        const std::string& read_id = cp.stmt_id(st.index);
        auto& pre = res.approx.preimage[read_id];
        const AbstractState& a = res.at[st.src];
        if (a.is_bottom()) continue;  // unreachable read: empty preimage
        int sel = u.select_term(cp.shadow_of[map], index);
        WidSet set = sel >= 0 ? a.wid_set(sel) : WidSet::top(u.n_wid_bits);
        for (int bit = 0; bit < u.n_wid_bits; ++bit) {
            if (!set.contains(bit)) continue;
            if (bit == 0) {
                pre.insert(kBotMarker);
            } else {
                pre.insert(cp.wid_names[bit - 1]);
                res.approx.pairs.emplace(cp.wid_names[bit - 1], read_id);
            }
        }
    }
    return res;
}

// ---------------------------------------------------------------------------

bool satisfies(const CompiledProgram& cp, const TermUniverse& u, const State& s, const AbstractState& a) {
    (void)cp;
    if (a.is_bottom()) return false;
    // Term evaluation; -1 when unavailable (star).
    auto value_of = [&](int t) -> int {
        const auto& tm = u.term(t);
        switch (tm.kind) {
        case TermUniverse::Kind::Var: {
            const Cell& c = s.base[tm.var];
            return c.v == kStar ? -1 : c.v;
        }
        case TermUniverse::Kind::Lit:
            return tm.encoded;
        case TermUniverse::Kind::Select: {
            const Cell& ic = s.base[tm.index];
            if (ic.v == kStar || s.maps[tm.map].star) return -1;
            const Cell& c = s.maps[tm.map].cells[ic.v];
            return c.v == kStar ? -1 : c.v;
        }
        }
        return -1;
    };
    for (int t1 = 0; t1 < u.size(); ++t1) {
        int v1 = value_of(t1);
        if (v1 < 0) continue;
        if (u.term(t1).sort == Sort::WriteId && !a.wid_set(t1).contains(v1)) return false;
        for (int t2 = t1 + 1; t2 < u.size(); ++t2) {
            if (u.term(t1).sort != u.term(t2).sort) continue;
            int v2 = value_of(t2);
            if (v2 < 0) continue;
            if (a.equal(t1, t2) && v1 != v2) return false;
            if (a.disequal(t1, t2) && v1 == v2) return false;
        }
    }
    return true;
}

}  // namespace mapsep
