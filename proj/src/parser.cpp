// Copyright (c) the mapsep contributors.
// SPDX-License-Identifier: Apache-2.0

#include "mapsep/parser.hpp"

#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "mapsep/diagnostics.hpp"

namespace mapsep {

namespace {

enum class Tok {
    Ident, Int, WidLit,
    Var, Colon, Semi, Comma, Assign, Arrow,
    LParen, RParen, LBracket, RBracket, LBrace, RBrace,
    EqEq, AndAnd, OrOr, Bang, Star,
    KwInt, KwWid, KwLabel, KwError, KwGoto, KwIf, KwElse, KwWhile,
    KwHavoc, KwHavocEq, KwAssume, KwAssert, KwSkip, KwAtomic,
    KwSucc, KwPred, KwConst,
    Eof,
};

struct Token {
    Tok kind = Tok::Eof;
    std::string text;
    int int_value = 0;
    int line = 0;
    int col = 0;
};

class Lexer {
  public:
    explicit Lexer(std::string_view src) : src_(src) { advance(); }

    const Token& peek() const { return tok_; }
    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

  private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw Diagnostic(DiagCode::SyntaxError, msg, line_, col_);
    }

    int cur() const { return pos_ < src_.size() ? static_cast<unsigned char>(src_[pos_]) : -1; }

    void bump() {
        if (pos_ < src_.size()) {
            if (src_[pos_] == '\n') {
                ++line_;
                col_ = 1;
            } else {
                ++col_;
            }
            ++pos_;
        }
    }

    void skip_trivia() {
        for (;;) {
            while (std::isspace(cur())) bump();
            if (cur() == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
                while (cur() != -1 && cur() != '\n') bump();
                continue;
            }
            break;
        }
    }

    void advance() {
        skip_trivia();
        tok_ = Token{};
        tok_.line = line_;
        tok_.col = col_;
        int c = cur();
        if (c == -1) {
            tok_.kind = Tok::Eof;
            return;
        }
        if (std::isalpha(c) || c == '_') {
            std::string s;
            while (std::isalnum(cur()) || cur() == '_') {
                s += static_cast<char>(cur());
                bump();
            }
            static const std::map<std::string, Tok> keywords = {
                {"var", Tok::Var},       {"int", Tok::KwInt},       {"wid", Tok::KwWid},
                {"label", Tok::KwLabel}, {"error", Tok::KwError},   {"goto", Tok::KwGoto},
                {"if", Tok::KwIf},       {"else", Tok::KwElse},     {"while", Tok::KwWhile},
                {"havoc", Tok::KwHavoc}, {"havoc_eq", Tok::KwHavocEq},
                {"assume", Tok::KwAssume}, {"assert", Tok::KwAssert},
                {"skip", Tok::KwSkip},   {"atomic", Tok::KwAtomic},
                {"succ", Tok::KwSucc},   {"pred", Tok::KwPred},     {"const", Tok::KwConst},
            };
            auto it = keywords.find(s);
            tok_.kind = it == keywords.end() ? Tok::Ident : it->second;
            tok_.text = std::move(s);
            return;
        }
        if (std::isdigit(c)) {
            int v = 0;
            while (std::isdigit(cur())) {
                v = v * 10 + (cur() - '0');
                if (v > 1'000'000) fail("literal too large");
                bump();
            }
            tok_.kind = Tok::Int;
            tok_.int_value = v;
            return;
        }
        if (c == '@') {
            bump();
            std::string s;
            while (std::isalnum(cur()) || cur() == '_' || cur() == '#') {
                s += static_cast<char>(cur());
                bump();
            }
            if (s.empty()) fail("empty write-id literal");
            tok_.kind = Tok::WidLit;
            tok_.text = std::move(s);
            return;
        }
        auto two = [&](char a, char b) {
            return c == a && pos_ + 1 < src_.size() && src_[pos_ + 1] == b;
        };
        if (two(':', '=')) { bump(); bump(); tok_.kind = Tok::Assign; return; }
        if (two('-', '>')) { bump(); bump(); tok_.kind = Tok::Arrow; return; }
        if (two('=', '=')) { bump(); bump(); tok_.kind = Tok::EqEq; return; }
        if (two('&', '&')) { bump(); bump(); tok_.kind = Tok::AndAnd; return; }
        if (two('|', '|')) { bump(); bump(); tok_.kind = Tok::OrOr; return; }
        switch (c) {
        case ':': bump(); tok_.kind = Tok::Colon; return;
        case ';': bump(); tok_.kind = Tok::Semi; return;
        case ',': bump(); tok_.kind = Tok::Comma; return;
        case '(': bump(); tok_.kind = Tok::LParen; return;
        case ')': bump(); tok_.kind = Tok::RParen; return;
        case '[': bump(); tok_.kind = Tok::LBracket; return;
        case ']': bump(); tok_.kind = Tok::RBracket; return;
        case '{': bump(); tok_.kind = Tok::LBrace; return;
        case '}': bump(); tok_.kind = Tok::RBrace; return;
        case '!': bump(); tok_.kind = Tok::Bang; return;
        case '*': bump(); tok_.kind = Tok::Star; return;
        default: fail(std::string("unexpected character '") + static_cast<char>(c) + "'");
        }
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
    Token tok_;
};

constexpr const char* kAnonPrefix = "%anon";

class Parser {
  public:
    Parser(std::string_view text, const ParseOptions& opts) : lex_(text), opts_(opts) {}

    Program run() {
        parse_decls();
        prog_.initial = fresh_loc();
        cur_ = prog_.initial;
        flow_open_ = true;
        while (lex_.peek().kind != Tok::Eof) parse_item();
        drop_orphan_locs();
        prog_.is_error.assign(prog_.loc_names.size(), false);
        for (LocId l : error_locs_) prog_.is_error[l] = true;
        check_well_formed(prog_, opts_.allow_ir);
        return canonicalize(prog_);
    }

  private:
    [[noreturn]] void fail(DiagCode code, const std::string& msg) {
        const Token& t = lex_.peek();
        throw Diagnostic(code, msg, t.line, t.col);
    }

    Token expect(Tok kind, const char* what) {
        if (lex_.peek().kind != kind) fail(DiagCode::SyntaxError, std::string("expected ") + what);
        return lex_.take();
    }

    bool accept(Tok kind) {
        if (lex_.peek().kind != kind) return false;
        lex_.take();
        return true;
    }

    std::string expect_ident() { return expect(Tok::Ident, "identifier").text; }

    void parse_decls() {
        while (lex_.peek().kind == Tok::Var) {
            lex_.take();
            std::string name = expect_ident();
            expect(Tok::Colon, "':'");
            VarDecl d;
            d.name = name;
            if (accept(Tok::LBracket)) {
                expect(Tok::KwInt, "'int'");
                expect(Tok::RBracket, "']'");
                d.kind = VarKind::Map;
                if (accept(Tok::KwWid)) {
                    if (!opts_.allow_ir) fail(DiagCode::IrFormNotAllowed, "wid maps are IR-only");
                    d.cell_sort = Sort::WriteId;
                } else {
                    expect(Tok::KwInt, "'int' or 'wid'");
                    d.cell_sort = Sort::Base;
                }
            } else {
                expect(Tok::KwInt, "'int'");
                d.kind = VarKind::Base;
            }
            expect(Tok::Semi, "';'");
            prog_.vars.push_back(std::move(d));
        }
    }

    LocId fresh_loc() {
        prog_.loc_names.push_back(kAnonPrefix + std::to_string(prog_.loc_names.size()));
        return static_cast<LocId>(prog_.loc_names.size() - 1);
    }

    LocId named_loc(const std::string& name) {
        auto it = labels_.find(name);
        if (it != labels_.end()) return it->second;
        prog_.loc_names.push_back(name);
        LocId l = static_cast<LocId>(prog_.loc_names.size() - 1);
        labels_.emplace(name, l);
        return l;
    }

    LocId error_loc() {
        if (shared_error_ == kNoLoc) {
            shared_error_ = fresh_loc();
            error_locs_.push_back(shared_error_);
        }
        return shared_error_;
    }

    void add_edge(LocId src, Command cmd, LocId dst) {
        Statement s;
        s.src = src;
        s.dst = dst;
        s.cmd = std::move(cmd);
        prog_.statements.push_back(std::move(s));
    }

    enum class SectionMode { Unset, Flow, Explicit };

    void parse_item() {
        switch (lex_.peek().kind) {
        case Tok::KwLabel:
        case Tok::KwError: {
            bool is_err = lex_.take().kind == Tok::KwError;
            std::string name = expect_ident();
            expect(Tok::Colon, "':'");
            LocId loc;
            auto it = labels_.find(name);
            if (it == labels_.end()) {
                // Fall-through binds the name to the open flow point. Other
                // new labels (explicit sections, empty sections) get their own
                // location. The very first label names the initial location.
                bool at_start = prog_.statements.empty() && cur_ == prog_.initial && labels_.empty();
                bool bind_here = at_start || (!is_err && flow_open_ && section_ == SectionMode::Flow);
                if (bind_here) {
                    loc = cur_;
                    labels_.emplace(name, loc);
                } else {
                    loc = named_loc(name);
                }
            } else {
                loc = it->second;
                if (!is_err && flow_open_ && cur_ != loc && section_ == SectionMode::Flow)
                    add_edge(cur_, Skip{}, loc);
            }
            if (is_err) error_locs_.push_back(loc);
            cur_ = loc;
            flow_open_ = true;
            section_ = SectionMode::Unset;
            return;
        }
        case Tok::KwGoto: {
            require_flow("goto");
            lex_.take();
            for (;;) {
                std::string target = expect_ident();
                add_edge(cur_, Skip{}, named_loc(target));
                if (!accept(Tok::Comma)) break;
            }
            expect(Tok::Semi, "';'");
            flow_open_ = false;
            return;
        }
        case Tok::KwIf: {
            require_flow("if");
            LocId entry = cur_;
            LocId join = parse_if_chain(entry);
            cur_ = join;
            flow_open_ = true;
            section_ = SectionMode::Flow;
            return;
        }
        case Tok::KwWhile: {
            require_flow("while");
            lex_.take();
            parse_star_guard();
            LocId head = flow_point_avoiding_initial();
            parse_block(head, head);
            cur_ = head;
            flow_open_ = true;
            section_ = SectionMode::Flow;
            return;
        }
        default: {
            Command cmd = parse_simple();
            std::vector<StoreExpr> chain;
            bool has_chain = take_pending_chain(chain);
            if (lex_.peek().kind == Tok::Arrow) {
                if (section_ == SectionMode::Flow)
                    fail(DiagCode::SyntaxError, "explicit edge after flow statements in one section");
                if (has_chain || assert_pending_)
                    fail(DiagCode::SyntaxError, "this statement form cannot be an explicit edge");
                section_ = SectionMode::Explicit;
                lex_.take();
                std::string target = expect_ident();
                expect(Tok::Semi, "';'");
                add_edge(cur_, std::move(cmd), named_loc(target));
                return;
            }
            if (section_ == SectionMode::Explicit)
                fail(DiagCode::SyntaxError, "flow statement after explicit edges in one section");
            if (!flow_open_) {
                cur_ = fresh_loc();  // code after goto: fresh (unreachable) location
                flow_open_ = true;
            }
            section_ = SectionMode::Flow;
            expect(Tok::Semi, "';'");
            append_flow(std::move(cmd));
            for (auto& st : chain) append_flow(AssignMap{st.map, st});
            return;
        }
        }
    }

    // `if (*) {..} [else ..]`, all alternatives forking from `entry`.
    // Returns the join location.
    LocId parse_if_chain(LocId entry) {
        expect(Tok::KwIf, "'if'");
        parse_star_guard();
        LocId join = fresh_loc();
        parse_block(entry, join);
        if (accept(Tok::KwElse)) {
            if (lex_.peek().kind == Tok::KwIf) {
                LocId inner = parse_if_chain(entry);
                add_edge(inner, Skip{}, join);
            } else {
                parse_block(entry, join);
            }
        } else {
            add_edge(entry, Skip{}, join);
        }
        return join;
    }

    void require_flow(const char* what) {
        if (section_ == SectionMode::Explicit)
            fail(DiagCode::SyntaxError, std::string(what) + " after explicit edges in one section");
        if (!flow_open_) {
            cur_ = fresh_loc();  // code after goto: fresh (possibly unreachable) location
            flow_open_ = true;
        }
    }

    // Loop heads need incoming edges, which the initial location cannot have.
    LocId flow_point_avoiding_initial() {
        if (cur_ == prog_.initial) {
            LocId next = fresh_loc();
            add_edge(cur_, Skip{}, next);
            cur_ = next;
        }
        return cur_;
    }

    void append_flow(Command cmd) {
        if (auto* as = std::get_if<Assume>(&cmd); as && assert_pending_) {
            assert_pending_ = false;
            LocId next = fresh_loc();
            add_edge(cur_, Assume{mk_not(as->cond)}, error_loc());
            add_edge(cur_, Assume{std::move(as->cond)}, next);
            cur_ = next;
            return;
        }
        LocId next = fresh_loc();
        add_edge(cur_, std::move(cmd), next);
        cur_ = next;
    }

    void parse_star_guard() {
        expect(Tok::LParen, "'('");
        expect(Tok::Star, "'*'");
        expect(Tok::RParen, "')'");
    }

    void parse_block(LocId entry, LocId exit) {
        LocId saved_cur = cur_;
        bool saved_open = flow_open_;
        SectionMode saved_section = section_;
        cur_ = entry;
        flow_open_ = true;
        section_ = SectionMode::Flow;
        expect(Tok::LBrace, "'{'");
        bool any = false;
        while (lex_.peek().kind != Tok::RBrace) {
            if (lex_.peek().kind == Tok::KwLabel || lex_.peek().kind == Tok::KwError)
                fail(DiagCode::SyntaxError, "labels are not allowed inside blocks");
            parse_item();
            any = true;
        }
        lex_.take();
        if (!any) {
            add_edge(entry, Skip{}, exit);
        } else if (flow_open_) {
            if (cur_ == entry) {
                add_edge(cur_, Skip{}, exit);
            } else {
                redirect_loc(cur_, exit);
            }
        }
        cur_ = saved_cur;
        flow_open_ = saved_open;
        section_ = saved_section;
    }

    // Replaces every use of a block-internal flow location by `target`.
    void redirect_loc(LocId from, LocId target) {
        for (auto& s : prog_.statements) {
            if (s.src == from) s.src = target;
            if (s.dst == from) s.dst = target;
        }
    }

    // Flow lowering leaves behind anonymous locations with no incident
    // edges; remove them before canonicalization.
    void drop_orphan_locs() {
        std::vector<bool> used(prog_.loc_names.size(), false);
        used[prog_.initial] = true;
        for (const auto& s : prog_.statements) {
            used[s.src] = true;
            used[s.dst] = true;
        }
        for (LocId l : error_locs_) used[l] = true;
        for (const auto& [name, loc] : labels_) {
            (void)name;
            used[loc] = true;
        }
        std::vector<LocId> renum(prog_.loc_names.size(), 0);
        std::vector<std::string> names;
        for (LocId l = 0; l < prog_.num_locs(); ++l) {
            if (used[l]) {
                renum[l] = static_cast<LocId>(names.size());
                names.push_back(prog_.loc_names[l]);
            }
        }
        for (auto& s : prog_.statements) {
            s.src = renum[s.src];
            s.dst = renum[s.dst];
        }
        for (auto& l : error_locs_) l = renum[l];
        prog_.initial = renum[prog_.initial];
        prog_.loc_names = std::move(names);
    }

    Command parse_simple() {
        const Token& t = lex_.peek();
        switch (t.kind) {
        case Tok::KwHavoc: {
            lex_.take();
            std::string v = expect_ident();
            const VarDecl* d = prog_.find_var(v);
            if (d && d->kind == VarKind::Map) return HavocMap{v};
            return HavocBase{v};
        }
        case Tok::KwHavocEq: {
            if (!opts_.allow_ir) fail(DiagCode::IrFormNotAllowed, "havoc_eq is IR-only");
            lex_.take();
            HavocMapsEqual he;
            he.maps.push_back(expect_ident());
            while (accept(Tok::Comma)) he.maps.push_back(expect_ident());
            return he;
        }
        case Tok::KwAssume:
            lex_.take();
            return Assume{parse_bool()};
        case Tok::KwAssert:
            lex_.take();
            assert_pending_ = true;
            return Assume{parse_bool()};
        case Tok::KwSkip:
            lex_.take();
            return Skip{};
        case Tok::KwAtomic: {
            if (!opts_.allow_ir) fail(DiagCode::IrFormNotAllowed, "atomic is IR-only");
            lex_.take();
            expect(Tok::LBrace, "'{'");
            SeqCmd seq;
            for (;;) {
                seq.parts.push_back(parse_simple());
                if (assert_pending_ || !pending_chain_.empty())
                    fail(DiagCode::SyntaxError, "this statement form is not allowed inside atomic");
                if (!accept(Tok::Semi)) break;
                if (lex_.peek().kind == Tok::RBrace) break;
            }
            expect(Tok::RBrace, "'}'");
            return seq;
        }
        case Tok::Ident:
            return parse_assignment();
        default:
            fail(DiagCode::SyntaxError, "expected a statement");
        }
    }

    Command parse_assignment() {
        std::string name = expect_ident();
        if (accept(Tok::LBracket)) {
            std::string index = expect_ident();
            expect(Tok::RBracket, "']'");
            expect(Tok::Assign, "':='");
            StoreExpr st;
            st.map = name;
            st.index = index;
            if (lex_.peek().kind == Tok::WidLit) {
                st.value = parse_wid_literal();
            } else if (lex_.peek().kind == Tok::Int) {
                fail(DiagCode::InvalidStoreOperand, "stored value must be a variable");
            } else {
                st.value = expect_ident();
            }
            return AssignMap{name, std::move(st)};
        }
        expect(Tok::Assign, "':='");
        const VarDecl* d = prog_.find_var(name);
        bool is_map = d && d->kind == VarKind::Map;
        if (is_map) return AssignMap{name, parse_map_rhs(name)};
        return AssignBase{name, parse_base_rhs()};
    }

    Literal parse_wid_literal() {
        Token t = expect(Tok::WidLit, "write-id literal");
        if (!opts_.allow_ir) fail(DiagCode::IrFormNotAllowed, "write-id literal outside IR mode");
        if (t.text == "bot") return Literal::bot();
        return Literal::write(t.text);
    }

    BaseExpr parse_base_rhs() {
        switch (lex_.peek().kind) {
        case Tok::Int:
            return LitExpr{Literal::base(lex_.take().int_value)};
        case Tok::KwSucc:
        case Tok::KwPred: {
            if (opts_.strict_grammar)
                fail(DiagCode::StrictGrammarViolation, "succ/pred are disabled under the strict grammar");
            bool is_succ = lex_.take().kind == Tok::KwSucc;
            expect(Tok::LParen, "'('");
            std::string arg = expect_ident();
            expect(Tok::RParen, "')'");
            if (is_succ) return SuccExpr{arg};
            return PredExpr{arg};
        }
        case Tok::Ident: {
            std::string name = lex_.take().text;
            if (accept(Tok::LBracket)) {
                std::string index = expect_ident();
                expect(Tok::RBracket, "']'");
                return SelectExpr{name, index};
            }
            return VarExpr{name};
        }
        default:
            fail(DiagCode::SyntaxError, "expected a base expression");
        }
    }

    // Right-hand side of `a := ...` for a map variable. Store chains are
    // split into sequential store edges.
    MapExpr parse_map_rhs(const std::string& target) {
        if (accept(Tok::KwConst)) {
            expect(Tok::LParen, "'('");
            Literal lit;
            if (lex_.peek().kind == Tok::WidLit) {
                lit = parse_wid_literal();
            } else {
                lit = Literal::base(expect(Tok::Int, "literal").int_value);
            }
            expect(Tok::RParen, "')'");
            return ConstMapExpr{lit};
        }
        std::string src = expect_ident();
        if (lex_.peek().kind != Tok::LBracket) return MapVarExpr{src};

        std::vector<StoreExpr> updates;
        while (accept(Tok::LBracket)) {
            StoreExpr st;
            st.map = updates.empty() ? src : target;
            st.index = expect_ident();
            expect(Tok::Assign, "':='");
            if (lex_.peek().kind == Tok::WidLit) {
                st.value = parse_wid_literal();
            } else if (lex_.peek().kind == Tok::Int) {
                fail(DiagCode::InvalidStoreOperand, "stored value must be a variable");
            } else {
                st.value = expect_ident();
            }
            expect(Tok::RBracket, "']'");
            updates.push_back(std::move(st));
        }
        for (std::size_t i = 1; i < updates.size(); ++i) pending_chain_.push_back(updates[i]);
        return updates.front();
    }

    bool take_pending_chain(std::vector<StoreExpr>& out) {
        if (pending_chain_.empty()) return false;
        out = std::move(pending_chain_);
        pending_chain_.clear();
        return true;
    }

    // bool expression grammar: or := and ('||' and)*; and := atom ('&&' atom)*;
    // atom := '!' atom | '(' or ')' | ident '==' ident
    BoolExpr parse_bool() {
        BoolExpr lhs = parse_bool_and();
        while (accept(Tok::OrOr)) lhs = mk_or(std::move(lhs), parse_bool_and());
        return lhs;
    }

    BoolExpr parse_bool_and() {
        BoolExpr lhs = parse_bool_atom();
        while (accept(Tok::AndAnd)) lhs = mk_and(std::move(lhs), parse_bool_atom());
        return lhs;
    }

    BoolExpr parse_bool_atom() {
        if (accept(Tok::Bang)) return mk_not(parse_bool_atom());
        if (accept(Tok::LParen)) {
            BoolExpr e = parse_bool();
            expect(Tok::RParen, "')'");
            return e;
        }
        std::string lhs = expect_ident();
        expect(Tok::EqEq, "'=='");
        std::string rhs = expect_ident();
        return mk_eq(std::move(lhs), std::move(rhs));
    }

    Lexer lex_;
    ParseOptions opts_;
    Program prog_;
    std::map<std::string, LocId> labels_;
    std::vector<LocId> error_locs_;
    static constexpr LocId kNoLoc = 0xffffffffu;
    LocId shared_error_ = kNoLoc;
    LocId cur_ = 0;
    bool flow_open_ = true;
    bool assert_pending_ = false;
    SectionMode section_ = SectionMode::Unset;
    std::vector<StoreExpr> pending_chain_;
};

}  // namespace

Program parse(std::string_view text, const ParseOptions& opts) {
    Parser p(text, opts);
    return p.run();
}

Program parse_file(const std::string& path, const ParseOptions& opts) {
    std::ifstream in(path);
    if (!in) throw Diagnostic(DiagCode::InvalidArgument, "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), opts);
}

}  // namespace mapsep
