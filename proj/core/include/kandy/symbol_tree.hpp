#ifndef KANDY_SYMBOL_TREE_HPP
#define KANDY_SYMBOL_TREE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kandy/atoms.hpp"

namespace kandy {

/// The 13 compositional operators. The enum order is the documented
/// canonical order used whenever an operator is drawn from a set.
enum class CompOp : uint8_t {
    in = 0,
    quadrant_ul,
    quadrant_ur,
    quadrant_ll,
    quadrant_lr,
    random,
    stack,
    side_by_side,
    stack_reduce_bb,
    side_by_side_reduce_bb,
    diag_ul_lr,
    diag_ll_ur,
    grid,
};
inline constexpr int kCompOpCount = 13;

std::string_view to_string(CompOp op);
std::optional<CompOp> comp_op_from_string(std::string_view name);

/// A fully grounded sample: leaves are atomic shapes, inner nodes are
/// compositional operators with an ordered, nonempty child list. Child
/// order is semantic (left-to-right / top-to-bottom drawing order).
class SymbolTree {
public:
    static SymbolTree leaf(Atom a) {
        SymbolTree t;
        t.leaf_ = a;
        return t;
    }
    static SymbolTree node(CompOp op, std::vector<SymbolTree> children);

    bool is_leaf() const { return leaf_.has_value(); }
    Atom atom() const { return *leaf_; }
    CompOp op() const { return op_; }
    const std::vector<SymbolTree>& children() const { return children_; }

    bool operator==(const SymbolTree& other) const;

    int depth() const;
    int leaf_count() const;

private:
    SymbolTree() = default;
    std::optional<Atom> leaf_;
    CompOp op_ = CompOp::in;
    std::vector<SymbolTree> children_;
};

/// Serializes a grounded tree to its canonical form, e.g.
/// `in([grid([circle_red_small, square_red_large])])`.
/// The output is byte-stable: single ", " separators, lowercase labels.
/// Equal trees produce equal strings, which is what deduplication relies on.
std::string to_canonical(const SymbolTree& tree);

/// Parses a canonical string back into a tree. Throws CanonicalParseError
/// with the byte offset of the first offending character.
SymbolTree from_canonical(std::string_view text);

}  // namespace kandy

#endif
