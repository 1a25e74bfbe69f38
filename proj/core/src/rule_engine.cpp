#include "kandy/rule_engine.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "kandy/errors.hpp"

namespace kandy {

// --- terms -------------------------------------------------------------

TermPtr Term::make_var(int id) {
    auto t = std::make_shared<Term>();
    t->kind = Kind::var;
    t->var = id;
    return t;
}

TermPtr Term::make_atom(std::string name) {
    auto t = std::make_shared<Term>();
    t->kind = Kind::atom;
    t->text = std::move(name);
    return t;
}

TermPtr Term::make_int(long long v) {
    auto t = std::make_shared<Term>();
    t->kind = Kind::integer;
    t->value = v;
    return t;
}

TermPtr Term::make_shape(Atom a) {
    auto t = std::make_shared<Term>();
    t->kind = Kind::shape;
    t->shape = a;
    return t;
}

TermPtr Term::make_compound(std::string functor, std::vector<Ptr> args) {
    auto t = std::make_shared<Term>();
    t->kind = Kind::compound;
    t->text = std::move(functor);
    t->args = std::move(args);
    return t;
}

TermPtr Term::nil() {
    static const TermPtr n = make_atom("[]");
    return n;
}

TermPtr Term::cons(Ptr head, Ptr tail) {
    return make_compound(".", {std::move(head), std::move(tail)});
}

TermPtr Term::make_list(const std::vector<Ptr>& items) {
    TermPtr list = nil();
    for (auto it = items.rbegin(); it != items.rend(); ++it) list = cons(*it, list);
    return list;
}

TermPtr tree_to_term(const SymbolTree& tree) {
    if (tree.is_leaf()) return Term::make_shape(tree.atom());
    std::vector<TermPtr> items;
    items.reserve(tree.children().size());
    for (const auto& c : tree.children()) items.push_back(tree_to_term(c));
    return Term::make_compound(std::string(to_string(tree.op())), {Term::make_list(items)});
}

// --- tokenizer / parser -------------------------------------------------

namespace {

enum class Tok { atom, variable, integer, punct, op, end };

struct Token {
    Tok kind;
    std::string text;
    long long value = 0;
    int line = 1;
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
    void advance() {
        skip_space();
        tok_.line = line_;
        if (pos_ >= src_.size()) {
            tok_ = {Tok::end, "", 0, line_};
            return;
        }
        char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t start = pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            tok_ = {Tok::integer, std::string(src_.substr(start, pos_ - start)), 0, line_};
            tok_.value = std::stoll(tok_.text);
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
                ++pos_;
            }
            std::string text(src_.substr(start, pos_ - start));
            bool is_var = std::isupper(static_cast<unsigned char>(c)) || c == '_';
            tok_ = {is_var ? Tok::variable : Tok::atom, std::move(text), 0, line_};
            return;
        }
        static const char* multi[] = {":-", "=:=", "=\\=", "=<", ">=", "\\="};
        for (const char* m : multi) {
            std::string_view mv(m);
            if (src_.substr(pos_).starts_with(mv)) {
                pos_ += mv.size();
                tok_ = {Tok::op, std::string(mv), 0, line_};
                return;
            }
        }
        if (std::string_view("<>=+-*").find(c) != std::string_view::npos) {
            ++pos_;
            tok_ = {Tok::op, std::string(1, c), 0, line_};
            return;
        }
        if (std::string_view("()[],|.").find(c) != std::string_view::npos) {
            ++pos_;
            tok_ = {Tok::punct, std::string(1, c), 0, line_};
            return;
        }
        throw RuleCompileError("line " + std::to_string(line_) + ": unexpected character '" +
                               std::string(1, c) + "'");
    }

    void skip_space() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '%') {
                while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
            } else if (c == '\n') {
                ++line_;
                ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    std::string_view src_;
    size_t pos_ = 0;
    int line_ = 1;
    Token tok_;
};

class RuleParser {
public:
    explicit RuleParser(std::string_view src) : lex_(src) {}

    std::vector<Clause> parse_program() {
        std::vector<Clause> clauses;
        while (lex_.peek().kind != Tok::end) clauses.push_back(parse_clause());
        return clauses;
    }

private:
    [[noreturn]] void fail(const std::string& msg) {
        throw RuleCompileError("line " + std::to_string(lex_.peek().line) + ": " + msg);
    }

    bool at_punct(const char* p) const {
        return lex_.peek().kind == Tok::punct && lex_.peek().text == p;
    }
    bool at_op(const char* p) const { return lex_.peek().kind == Tok::op && lex_.peek().text == p; }

    void expect_punct(const char* p) {
        if (!at_punct(p)) fail(std::string("expected '") + p + "'");
        lex_.take();
    }

    Clause parse_clause() {
        vars_.clear();
        var_count_ = 0;
        int line = lex_.peek().line;
        TermPtr head = parse_expr();
        if (!head || head->kind != Term::Kind::compound || head->is_cons()) {
            throw RuleCompileError("line " + std::to_string(line) + ": malformed clause head");
        }
        std::vector<TermPtr> body;
        if (at_op(":-")) {
            lex_.take();
            body = parse_conjunction();
        }
        if (!at_punct(".")) fail("expected '.' at end of clause");
        lex_.take();
        Clause c;
        c.head = std::move(head);
        c.body = std::move(body);
        c.var_count = var_count_;
        c.line = line;
        return c;
    }

    std::vector<TermPtr> parse_conjunction() {
        std::vector<TermPtr> goals;
        goals.push_back(parse_expr());
        while (at_punct(",")) {
            lex_.take();
            goals.push_back(parse_expr());
        }
        return goals;
    }

    // expr := arith ( relop arith )?    relop builds a binary compound.
    TermPtr parse_expr() {
        TermPtr lhs = parse_arith();
        static const std::set<std::string> relops = {"=:=", "=\\=", "=<", ">=", "<",
                                                     ">",   "=",    "\\="};
        if (lex_.peek().kind == Tok::op && relops.count(lex_.peek().text)) {
            std::string op = lex_.take().text;
            TermPtr rhs = parse_arith();
            return Term::make_compound(op, {lhs, rhs});
        }
        if (lex_.peek().kind == Tok::atom && lex_.peek().text == "is") {
            lex_.take();
            TermPtr rhs = parse_arith();
            return Term::make_compound("is", {lhs, rhs});
        }
        return lhs;
    }

    TermPtr parse_arith() {
        TermPtr lhs = parse_mul();
        while (at_op("+") || at_op("-")) {
            std::string op = lex_.take().text;
            TermPtr rhs = parse_mul();
            lhs = Term::make_compound(op, {lhs, rhs});
        }
        return lhs;
    }

    TermPtr parse_mul() {
        TermPtr lhs = parse_primary();
        while (at_op("*") || (lex_.peek().kind == Tok::atom &&
                              (lex_.peek().text == "mod" || lex_.peek().text == "div"))) {
            std::string op = lex_.take().text;
            TermPtr rhs = parse_primary();
            lhs = Term::make_compound(op, {lhs, rhs});
        }
        return lhs;
    }

    TermPtr parse_primary() {
        const Token& t = lex_.peek();
        switch (t.kind) {
            case Tok::integer: {
                Token tok = lex_.take();
                return Term::make_int(tok.value);
            }
            case Tok::variable: {
                Token tok = lex_.take();
                if (tok.text == "_") return Term::make_var(var_count_++);
                auto it = vars_.find(tok.text);
                if (it != vars_.end()) return Term::make_var(it->second);
                int id = var_count_++;
                vars_.emplace(tok.text, id);
                return Term::make_var(id);
            }
            case Tok::atom: {
                Token tok = lex_.take();
                if (at_punct("(")) {
                    lex_.take();
                    std::vector<TermPtr> args = parse_conjunction();
                    expect_punct(")");
                    return Term::make_compound(tok.text, std::move(args));
                }
                if (auto atom = Atom::parse(tok.text)) return Term::make_shape(*atom);
                return Term::make_atom(tok.text);
            }
            case Tok::punct:
                if (t.text == "[") return parse_list();
                if (t.text == "(") {
                    lex_.take();
                    std::vector<TermPtr> goals = parse_conjunction();
                    expect_punct(")");
                    TermPtr out = goals.back();
                    for (auto it = goals.rbegin() + 1; it != goals.rend(); ++it) {
                        out = Term::make_compound(",", {*it, out});
                    }
                    return out;
                }
                break;
            default:
                break;
        }
        fail("unexpected token '" + t.text + "'");
    }

    TermPtr parse_list() {
        expect_punct("[");
        if (at_punct("]")) {
            lex_.take();
            return Term::nil();
        }
        std::vector<TermPtr> items;
        items.push_back(parse_expr());
        while (at_punct(",")) {
            lex_.take();
            items.push_back(parse_expr());
        }
        TermPtr tail = Term::nil();
        if (at_punct("|")) {
            lex_.take();
            tail = parse_expr();
        }
        expect_punct("]");
        TermPtr list = tail;
        for (auto it = items.rbegin(); it != items.rend(); ++it) list = Term::cons(*it, list);
        return list;
    }

    Lexer lex_;
    std::map<std::string, int> vars_;
    int var_count_ = 0;
};

// --- built-in predicate library -----------------------------------------

// Predicates implemented natively on terms (attribute access, arithmetic,
// control). Everything else from the library below is ordinary clauses.
const std::set<std::pair<std::string, int>>& native_predicates() {
    static const std::set<std::pair<std::string, int>> natives = {
        {"extract_shape", 2}, {"extract_color", 2},      {"extract_size", 2},
        {"extract_operator", 2}, {"extract_children", 2}, {"extract_op_and_chld", 3},
        {"length", 2},        {"atom", 1},               {"odd", 1},
        {"even", 1},          {"is", 2},                 {"=:=", 2},
        {"=\\=", 2},          {"=<", 2},                 {"<", 2},
        {">", 2},             {">=", 2},                 {"=", 2},
        {"\\=", 2},           {"not", 1},                {"forall", 2},
        {",", 2},
    };
    return natives;
}

constexpr const char* kLibrarySource = R"PL(
color(red). color(green). color(blue). color(cyan). color(magenta). color(yellow).
shape(triangle). shape(circle). shape(square).
size(small). size(large).

non_diag(stack). non_diag(side_by_side). non_diag(stack_reduce_bb).
non_diag(side_by_side_reduce_bb). non_diag(grid).
diag(diag_ul_lr). diag(diag_ll_ur).

quadrant_ul(quadrant_ul). quadrant_ur(quadrant_ur).
quadrant_ll(quadrant_ll). quadrant_lr(quadrant_lr).
quadrant(quadrant_ul). quadrant(quadrant_ur).
quadrant(quadrant_ll). quadrant(quadrant_lr).

quadrant_or_center(in).
quadrant_or_center(X) :- quadrant(X).
non_random(X) :- diag(X).
non_random(X) :- non_diag(X).
non_random(X) :- quadrant(X).
any_composition(X) :- non_random(X).
any_composition(random).
line(X) :- non_diag(X), X \= grid.
line(X) :- diag(X).

house(C) :- extract_op_and_chld(C, stack, [C1, C2]),
            extract_shape(C1, triangle),
            extract_shape(C2, square),
            same_size(_, [C1, C2]).
car(C) :- extract_op_and_chld(C, side_by_side, [C1, C2]),
          extract_shape(C1, circle),
          extract_shape(C2, circle),
          same_size(_, [C1, C2]),
          same_color(_, [C1, C2]).
tower(C) :- extract_op_and_chld(C, stack, L),
            same_shape(square, L),
            same_size(_, L),
            length(L, N), N >= 2, N =< 3.
wagon(C) :- extract_op_and_chld(C, side_by_side, L),
            same_shape(square, L),
            same_size(_, L),
            length(L, N), N >= 2, N =< 3.
traffic_light(C) :- extract_op_and_chld(C, stack, [C1, C2, C3]),
                    same_shape(circle, [C1, C2, C3]),
                    same_size(_, [C1, C2, C3]),
                    extract_color(C1, red),
                    extract_color(C2, yellow),
                    extract_color(C3, green).
named_object(house).
named_object(car).
named_object(tower).
named_object(wagon).
named_object(traffic_light).
is_named_object(C, house) :- house(C).
is_named_object(C, car) :- car(C).
is_named_object(C, tower) :- tower(C).
is_named_object(C, wagon) :- wagon(C).
is_named_object(C, traffic_light) :- traffic_light(C).

exists_shape(SH, [H|_]) :- extract_shape(H, SH).
exists_shape(SH, [_|T]) :- exists_shape(SH, T).
same_shape(SH, [H]) :- extract_shape(H, SH).
same_shape(SH, [H|T]) :- extract_shape(H, SH), same_shape(SH, T).
exists_color(CO, [H|_]) :- extract_color(H, CO).
exists_color(CO, [_|T]) :- exists_color(CO, T).
same_color(CO, [H]) :- extract_color(H, CO).
same_color(CO, [H|T]) :- extract_color(H, CO), same_color(CO, T).
exists_size(SZ, [H|_]) :- extract_size(H, SZ).
exists_size(SZ, [_|T]) :- exists_size(SZ, T).
same_size(SZ, [H]) :- extract_size(H, SZ).
same_size(SZ, [H|T]) :- extract_size(H, SZ), same_size(SZ, T).

contains(C, X) :- extract_children(C, L), member(X, L).
recursive_contains(C, X) :- contains(C, X), atom(X).
recursive_contains(C, X) :- contains(C, C1), recursive_contains(C1, X).
recursive_contains2(C, X, 0) :- contains(C, X).
recursive_contains2(C, X, I) :- contains(C, C1),
                                recursive_contains2(C1, X, J),
                                I is J + 1.
contains_composition(C, COMP) :- extract_operator(C, COMP).
contains_composition(C, COMP) :- recursive_contains2(C, C1, _),
                                 extract_operator(C1, COMP).
contains_composition_depth(C, COMP, 0) :- extract_operator(C, COMP).
contains_composition_depth(C, COMP, I) :- recursive_contains2(C, C1, J),
                                          extract_operator(C1, COMP), I is J + 1.

same_attribute(L) :- same_shape(_, L).
same_attribute(L) :- same_color(_, L).
same_attribute(L) :- same_size(_, L).
same_non_size(L) :- same_shape(_, L).
same_non_size(L) :- same_color(_, L).
all_same(H, [H]).
all_same(H, [H|T]) :- all_same(H, T).

expand2([A, B], A, B).
expand4([A, B, C, D], A, B, C, D).
expand8([A, B, C, D, E, F, G, H], A, B, C, D, E, F, G, H).
expand9([A, B, C, D, E, F, G, H, I], A, B, C, D, E, F, G, H, I).

member(X, [X|_]).
member(X, [_|T]) :- member(X, T).
reverse(L, R) :- reverse_acc(L, [], R).
reverse_acc([], A, A).
reverse_acc([H|T], A, R) :- reverse_acc(T, [H|A], R).
first([H|_], H).
last([H], H).
last([_|T], X) :- last(T, X).
prepend(X, L, [X|L]).
droplast([_], []).
droplast([H|T], [H|T2]) :- droplast(T, T2).
middle([_|T], T2) :- droplast(T, T2).
getmiddle(L, X) :- length(L, N), odd(N), N1 is div(N, 2), nth0(N1, L, X).
dropmiddle(L, L1) :- getmiddle(L, X), delete(L, X, L1).
nth0(0, [H|_], H).
nth0(N, [_|T], X) :- N > 0, N1 is N - 1, nth0(N1, T, X).
delete([], _, []).
delete([H|T], X, R) :- H = X, delete(T, X, R).
delete([H|T], X, [H|R]) :- H \= X, delete(T, X, R).

less_eq(N, N1) :- N =< N1.
less(N, N1) :- N < N1.
greater(N, N1) :- N > N1.
same(X, Y) :- X = Y.
different(X, Y) :- X \= Y.

symmetric_list(L) :- reverse(L, L).
forall_shared_shape(C, SH) :- forall(contains(C, C1),
                                (contains(C1, C2), extract_shape(C2, SH))).
forall_shared_color(C, CO) :- forall(contains(C, C1),
                                (contains(C1, C2), extract_color(C2, CO))).
forall_shared_named_obj(C, X) :- forall(contains(C, C1),
                                (contains(C1, C2), is_named_object(C2, X))).

pseudo_palindrome([]).
pseudo_palindrome([_]).
pseudo_palindrome(L) :- middle(L, M), pseudo_palindrome(M),
                        last(L, A), first(L, B), same_shape(_, [A, B]).
pseudo_palindrome(L) :- middle(L, M), pseudo_palindrome(M),
                        last(L, A), first(L, B), same_color(_, [A, B]).
pseudo_palindrome2([]).
pseudo_palindrome2([_]).
pseudo_palindrome2(L) :- middle(L, M), pseudo_palindrome2(M),
                         last(L, A), first(L, B), same_shape(_, [A, B]).
pseudo_palindrome2(L) :- middle(L, M), pseudo_palindrome2(M),
                         last(L, A), first(L, B), same_color(_, [A, B]).
pseudo_palindrome2(L) :- middle(L, M), pseudo_palindrome2(M),
                         last(L, C1), first(L, C2),
                         is_named_object(C1, X), is_named_object(C2, X).
)PL";

const std::map<std::pair<std::string, int>, std::vector<Clause>>& library_index() {
    static const auto index = [] {
        std::map<std::pair<std::string, int>, std::vector<Clause>> idx;
        RuleParser parser(kLibrarySource);
        for (auto& clause : parser.parse_program()) {
            auto key = std::make_pair(clause.head->text, static_cast<int>(clause.head->args.size()));
            idx[key].push_back(std::move(clause));
        }
        return idx;
    }();
    return index;
}

// --- solver ---------------------------------------------------------------

class Env {
public:
    TermPtr walk(TermPtr t) const {
        while (t->kind == Term::Kind::var) {
            const TermPtr& b = binding(t->var);
            if (!b) return t;
            t = b;
        }
        return t;
    }

    int fresh_block(int count) {
        int base = static_cast<int>(bindings_.size());
        bindings_.resize(bindings_.size() + static_cast<size_t>(count));
        return base;
    }

    size_t mark() const { return trail_.size(); }

    void undo(size_t mark) {
        while (trail_.size() > mark) {
            bindings_[static_cast<size_t>(trail_.back())] = nullptr;
            trail_.pop_back();
        }
    }

    void bind(int var, TermPtr t) {
        bindings_[static_cast<size_t>(var)] = std::move(t);
        trail_.push_back(var);
    }

    bool unify(TermPtr a, TermPtr b) {
        a = walk(std::move(a));
        b = walk(std::move(b));
        if (a->kind == Term::Kind::var) {
            if (b->kind == Term::Kind::var && a->var == b->var) return true;
            bind(a->var, b);
            return true;
        }
        if (b->kind == Term::Kind::var) {
            bind(b->var, a);
            return true;
        }
        if (a->kind != b->kind) return false;
        switch (a->kind) {
            case Term::Kind::atom: return a->text == b->text;
            case Term::Kind::integer: return a->value == b->value;
            case Term::Kind::shape: return a->shape == b->shape;
            case Term::Kind::compound: {
                if (a->text != b->text || a->args.size() != b->args.size()) return false;
                for (size_t i = 0; i < a->args.size(); ++i) {
                    if (!unify(a->args[i], b->args[i])) return false;
                }
                return true;
            }
            default: return false;
        }
    }

private:
    const TermPtr& binding(int var) const { return bindings_[static_cast<size_t>(var)]; }
    std::vector<TermPtr> bindings_;
    std::vector<int> trail_;
};

TermPtr instantiate(const TermPtr& t, int base) {
    switch (t->kind) {
        case Term::Kind::var: return Term::make_var(base + t->var);
        case Term::Kind::compound: {
            std::vector<TermPtr> args;
            args.reserve(t->args.size());
            for (const auto& a : t->args) args.push_back(instantiate(a, base));
            return Term::make_compound(t->text, std::move(args));
        }
        default: return t;
    }
}

}  // namespace

class Solver {
public:
    using Cont = std::function<bool()>;

    Solver(const RuleSet& rules, Env& env) : rules_(rules), env_(env) {}

    // Depth-first, left-to-right, clause source order. Returns true when the
    // continuation requested a stop (i.e. a solution was accepted).
    bool solve(const TermPtr& goal_in, int depth, const Cont& k) {
        TermPtr goal = env_.walk(goal_in);
        if (goal->kind == Term::Kind::atom) {
            return solve_user(goal->text, 0, goal, depth, k);
        }
        if (goal->kind != Term::Kind::compound) {
            throw EvaluationError("goal is not callable");
        }
        const std::string& f = goal->text;
        int arity = static_cast<int>(goal->args.size());

        if (f == "," && arity == 2) {
            return solve(goal->args[0], depth, [&] { return solve(goal->args[1], depth, k); });
        }
        if (f == "not" && arity == 1) {
            size_t m = env_.mark();
            bool proven = solve(goal->args[0], depth, [] { return true; });
            env_.undo(m);
            return proven ? false : k();
        }
        if (f == "forall" && arity == 2) {
            size_t m = env_.mark();
            bool counterexample = solve(goal->args[0], depth, [&] {
                size_t m2 = env_.mark();
                bool ok = solve(goal->args[1], depth, [] { return true; });
                env_.undo(m2);
                return !ok;  // stop enumeration at the first failing instance
            });
            env_.undo(m);
            return counterexample ? false : k();
        }
        if (f == "=" && arity == 2) {
            size_t m = env_.mark();
            if (env_.unify(goal->args[0], goal->args[1]) && k()) return true;
            env_.undo(m);
            return false;
        }
        if (f == "\\=" && arity == 2) {
            size_t m = env_.mark();
            bool unifies = env_.unify(goal->args[0], goal->args[1]);
            env_.undo(m);
            return unifies ? false : k();
        }
        if (f == "is" && arity == 2) {
            TermPtr v = Term::make_int(eval_arith(goal->args[1]));
            size_t m = env_.mark();
            if (env_.unify(goal->args[0], v) && k()) return true;
            env_.undo(m);
            return false;
        }
        if (arity == 2 && (f == "=:=" || f == "=\\=" || f == "=<" || f == "<" || f == ">" ||
                           f == ">=")) {
            long long a = eval_arith(goal->args[0]);
            long long b = eval_arith(goal->args[1]);
            bool ok = f == "=:=" ? a == b
                      : f == "=\\=" ? a != b
                      : f == "=<" ? a <= b
                      : f == "<" ? a < b
                      : f == ">" ? a > b
                                 : a >= b;
            return ok ? k() : false;
        }
        if ((f == "odd" || f == "even") && arity == 1) {
            long long v = eval_arith(goal->args[0]);
            bool is_odd = ((v % 2) + 2) % 2 == 1;
            return (f == "odd" ? is_odd : !is_odd) ? k() : false;
        }
        if (f == "atom" && arity == 1) {
            TermPtr t = env_.walk(goal->args[0]);
            bool ok = t->kind == Term::Kind::shape || (t->kind == Term::Kind::atom && !t->is_nil());
            return ok ? k() : false;
        }
        if (f == "length" && arity == 2) {
            TermPtr list = env_.walk(goal->args[0]);
            long long n = 0;
            while (list->is_cons()) {
                ++n;
                list = env_.walk(list->args[1]);
            }
            if (!list->is_nil()) {
                if (list->kind == Term::Kind::var) {
                    throw EvaluationError("length/2 requires a proper list");
                }
                return false;
            }
            size_t m = env_.mark();
            if (env_.unify(goal->args[1], Term::make_int(n)) && k()) return true;
            env_.undo(m);
            return false;
        }
        if ((f == "extract_shape" || f == "extract_color" || f == "extract_size") && arity == 2) {
            TermPtr t = env_.walk(goal->args[0]);
            if (t->kind != Term::Kind::shape) return false;
            std::string_view label = f == "extract_shape" ? to_string(t->shape.shape)
                                     : f == "extract_color" ? to_string(t->shape.color)
                                                            : to_string(t->shape.size);
            size_t m = env_.mark();
            if (env_.unify(goal->args[1], Term::make_atom(std::string(label))) && k()) return true;
            env_.undo(m);
            return false;
        }
        if ((f == "extract_operator" || f == "extract_children") && arity == 2) {
            TermPtr t = env_.walk(goal->args[0]);
            if (!is_tree_node(t)) return false;
            TermPtr out = f == "extract_operator" ? Term::make_atom(t->text) : t->args[0];
            size_t m = env_.mark();
            if (env_.unify(goal->args[1], out) && k()) return true;
            env_.undo(m);
            return false;
        }
        if (f == "extract_op_and_chld" && arity == 3) {
            TermPtr t = env_.walk(goal->args[0]);
            if (!is_tree_node(t)) return false;
            size_t m = env_.mark();
            if (env_.unify(goal->args[1], Term::make_atom(t->text)) &&
                env_.unify(goal->args[2], t->args[0]) && k()) {
                return true;
            }
            env_.undo(m);
            return false;
        }
        return solve_user(f, arity, goal, depth, k);
    }

private:
    static bool is_tree_node(const TermPtr& t) {
        return t->kind == Term::Kind::compound && t->args.size() == 1 && !t->is_cons() &&
               comp_op_from_string(t->text).has_value();
    }

    long long eval_arith(const TermPtr& t_in) {
        TermPtr t = env_.walk(t_in);
        switch (t->kind) {
            case Term::Kind::integer: return t->value;
            case Term::Kind::var: throw EvaluationError("unbound variable in arithmetic");
            case Term::Kind::compound: {
                if (t->args.size() == 2) {
                    long long a = eval_arith(t->args[0]);
                    long long b = eval_arith(t->args[1]);
                    if (t->text == "+") return a + b;
                    if (t->text == "-") return a - b;
                    if (t->text == "*") return a * b;
                    if (t->text == "div") {
                        if (b == 0) throw EvaluationError("division by zero");
                        long long q = a / b;
                        if ((a % b != 0) && ((a < 0) != (b < 0))) --q;  // floor division
                        return q;
                    }
                    if (t->text == "mod") {
                        if (b == 0) throw EvaluationError("division by zero");
                        long long r = a % b;
                        if (r != 0 && ((r < 0) != (b < 0))) r += b;
                        return r;
                    }
                }
                throw EvaluationError("unknown arithmetic function '" + t->text + "'");
            }
            default: throw EvaluationError("bad arithmetic operand");
        }
    }

    bool solve_user(const std::string& name, int arity, const TermPtr& goal, int depth,
                    const Cont& k) {
        auto it = rules_.index_.find({name, arity});
        if (it == rules_.index_.end()) {
            throw EvaluationError("unknown predicate " + name + "/" + std::to_string(arity));
        }
        if (depth + 1 > rules_.depth_limit_) {
            throw EvaluationError("proof depth limit exceeded at " + name + "/" +
                                  std::to_string(arity));
        }
        for (const Clause& clause : it->second) {
            size_t m = env_.mark();
            int base = env_.fresh_block(clause.var_count);
            TermPtr head = instantiate(clause.head, base);
            if (env_.unify(head, goal)) {
                if (solve_body(clause.body, 0, base, depth + 1, k)) return true;
            }
            env_.undo(m);
        }
        return false;
    }

    bool solve_body(const std::vector<TermPtr>& body, size_t idx, int base, int depth,
                    const Cont& k) {
        if (idx == body.size()) return k();
        TermPtr goal = instantiate(body[idx], base);
        return solve(goal, depth, [&] { return solve_body(body, idx + 1, base, depth, k); });
    }

    const RuleSet& rules_;
    Env& env_;
};

// --- RuleSet -----------------------------------------------------------

namespace {

// Collects every predicate referenced by a goal, recursing through control
// constructs, for the compile-time known-predicate check.
void collect_goal_refs(const TermPtr& goal, std::vector<std::pair<std::string, int>>& out) {
    if (goal->kind == Term::Kind::atom) {
        out.emplace_back(goal->text, 0);
        return;
    }
    if (goal->kind != Term::Kind::compound) return;
    const std::string& f = goal->text;
    int arity = static_cast<int>(goal->args.size());
    if ((f == "," && arity == 2) || (f == "not" && arity == 1)) {
        for (const auto& a : goal->args) collect_goal_refs(a, out);
        return;
    }
    if (f == "forall" && arity == 2) {
        collect_goal_refs(goal->args[0], out);
        collect_goal_refs(goal->args[1], out);
        return;
    }
    if (arity == 2 && (f == "is" || f == "=:=" || f == "=\\=" || f == "=<" || f == "<" ||
                       f == ">" || f == ">=" || f == "=" || f == "\\=")) {
        return;  // argument positions hold arithmetic terms, not goals
    }
    out.emplace_back(f, arity);
}

}  // namespace

RuleSet RuleSet::compile(const std::string& source, int depth_limit) {
    RuleSet rs;
    rs.depth_limit_ = depth_limit;
    rs.index_ = library_index();

    RuleParser parser(source);
    std::vector<Clause> user = parser.parse_program();

    // User definitions shadow library predicates of the same name/arity.
    std::set<std::pair<std::string, int>> user_keys;
    for (const auto& clause : user) {
        user_keys.insert({clause.head->text, static_cast<int>(clause.head->args.size())});
    }
    for (const auto& key : user_keys) rs.index_[key].clear();
    for (auto& clause : user) {
        auto key = std::make_pair(clause.head->text, static_cast<int>(clause.head->args.size()));
        rs.index_[key].push_back(std::move(clause));
    }

    for (const auto& [key, clauses] : rs.index_) {
        if (!user_keys.count(key)) continue;  // library already validated
        for (const Clause& clause : clauses) {
            std::vector<std::pair<std::string, int>> refs;
            for (const auto& goal : clause.body) collect_goal_refs(goal, refs);
            for (const auto& ref : refs) {
                if (native_predicates().count(ref)) continue;
                if (rs.index_.count(ref)) continue;
                throw RuleCompileError("line " + std::to_string(clause.line) +
                                       ": unknown predicate " + ref.first + "/" +
                                       std::to_string(ref.second));
            }
        }
    }
    return rs;
}

bool RuleSet::holds(const SymbolTree& tree) const { return query("valid", tree); }

bool RuleSet::query(const std::string& predicate, const SymbolTree& tree) const {
    if (!index_.count({predicate, 1})) {
        throw EvaluationError("predicate " + predicate + "/1 is not defined");
    }
    Env env;
    Solver solver(*this, env);
    TermPtr goal = Term::make_compound(predicate, {tree_to_term(tree)});
    return solver.solve(goal, 0, [] { return true; });
}

size_t RuleSet::clause_count(const std::string& name, int arity) const {
    auto it = index_.find({name, arity});
    return it == index_.end() ? 0 : it->second.size();
}

}  // namespace kandy
