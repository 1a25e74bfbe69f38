#ifndef KANDY_RULE_ENGINE_HPP
#define KANDY_RULE_ENGINE_HPP

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "kandy/symbol_tree.hpp"

namespace kandy {

/// Logic terms mirroring the canonical tree encoding: grounded shape atoms
/// are first-class leaves (attribute access is native, no string surgery),
/// compositional nodes are compounds `op([children])`, lists are cons cells.
class Term {
public:
    enum class Kind : uint8_t { var, atom, integer, shape, compound };
    using Ptr = std::shared_ptr<const Term>;

    Kind kind;
    int var = -1;           // kind == var
    std::string text;       // atom name or compound functor
    long long value = 0;    // kind == integer
    Atom shape{};           // kind == shape
    std::vector<Ptr> args;  // kind == compound

    static Ptr make_var(int id);
    static Ptr make_atom(std::string name);
    static Ptr make_int(long long v);
    static Ptr make_shape(Atom a);
    static Ptr make_compound(std::string functor, std::vector<Ptr> args);
    static Ptr nil();
    static Ptr cons(Ptr head, Ptr tail);
    static Ptr make_list(const std::vector<Ptr>& items);

    bool is_nil() const { return kind == Kind::atom && text == "[]"; }
    bool is_cons() const { return kind == Kind::compound && text == "." && args.size() == 2; }
};

using TermPtr = Term::Ptr;

/// Converts a grounded symbol tree into its term encoding.
TermPtr tree_to_term(const SymbolTree& tree);

/// One Horn clause; variables are numbered 0..var_count-1 and renamed apart
/// at every activation.
struct Clause {
    TermPtr head;
    std::vector<TermPtr> body;
    int var_count = 0;
    int line = 0;
};

/// A compiled rule program: user clauses layered over the built-in
/// predicate library, evaluable with depth-limited resolution, negation as
/// failure (`not/1`) and a bounded universal check (`forall/2`).
///
/// Immutable after compile; holds()/query() are pure and reentrant.
class RuleSet {
public:
    /// Compiles rule text. User clauses shadow same-name/arity library
    /// predicates. Unknown predicates and malformed clauses raise
    /// RuleCompileError with the source line.
    static RuleSet compile(const std::string& source, int depth_limit = 64);

    /// True iff valid/1 succeeds on the tree. Depth-limit overruns raise
    /// EvaluationError (distinct from a false verdict).
    bool holds(const SymbolTree& tree) const;

    /// Evaluates an arbitrary unary predicate on the tree (test access to
    /// library predicates such as house/1 or tower/1).
    bool query(const std::string& predicate, const SymbolTree& tree) const;

    size_t clause_count(const std::string& name, int arity) const;
    int depth_limit() const { return depth_limit_; }

private:
    friend class Solver;
    std::map<std::pair<std::string, int>, std::vector<Clause>> index_;
    int depth_limit_ = 64;
};

}  // namespace kandy

#endif
