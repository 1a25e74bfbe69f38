#ifndef KANDY_TEMPLATE_TREE_HPP
#define KANDY_TEMPLATE_TREE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kandy/atoms.hpp"
#include "kandy/symbol_tree.hpp"

namespace kandy {

/// Auxiliary (list-expansion) operators. Operators with the `_before`
/// suffix and the set-based family rewrite before grounding; the rest
/// rewrite after grounding. None of them survive into symbol annotations.
enum class AuxOp : uint8_t {
    // deterministic
    repeat_before,
    sort,
    mirror,
    // random
    permute,
    pick,
    pick_before,
    random_repeat_before,
    // memory
    store,
    store_before,
    recall,
    // set-based
    union_,
    difference,
    symmetric_difference,
    intersect,
};

std::string_view to_string(AuxOp op);
std::optional<AuxOp> aux_op_from_string(std::string_view name);
bool is_pre_ground(AuxOp op);
bool is_set_op(AuxOp op);

/// A set of candidate compositional operators; grounding picks one
/// uniformly (in CompOp enum order). Wildcard names in the DSL
/// (any_diag, quadrant_or_center, ...) map to non-singleton sets.
class OperatorSet {
public:
    OperatorSet() = default;
    static OperatorSet of(CompOp op) { return OperatorSet(uint16_t{1} << static_cast<int>(op)); }
    static OperatorSet from_bits(uint16_t bits) { return OperatorSet(bits); }
    /// Resolves a concrete or wildcard operator name; nullopt if unknown.
    static std::optional<OperatorSet> from_name(std::string_view name);

    int count() const { return __builtin_popcount(bits_); }
    bool is_singleton() const { return count() == 1; }
    CompOp single() const;
    CompOp ground(Rng& rng) const;
    bool contains(CompOp op) const { return (bits_ >> static_cast<int>(op)) & 1; }
    uint16_t bits() const { return bits_; }
    std::string name() const;

    bool operator==(const OperatorSet&) const = default;

private:
    explicit OperatorSet(uint16_t bits) : bits_(bits) {}
    uint16_t bits_ = 0;
};

/// One node of a parsed generation template: a template atom, a
/// compositional node, or an auxiliary list-expansion node.
struct TemplateNode {
    enum class Kind : uint8_t { atom, comp, aux };
    Kind kind = Kind::atom;

    // kind == atom
    ProductDescriptor descriptor;

    // kind == comp
    OperatorSet ops;

    // kind == aux
    AuxOp aux = AuxOp::permute;
    int n = 0;         // repeat_before / pick / pick_before
    int min = 0;       // random_repeat_before
    int max = 0;
    std::string alias;  // store / store_before / recall

    std::vector<TemplateNode> children;

    static TemplateNode make_atom(ProductDescriptor d) {
        TemplateNode t;
        t.kind = Kind::atom;
        t.descriptor = d;
        return t;
    }
    static TemplateNode make_comp(OperatorSet ops, std::vector<TemplateNode> children) {
        TemplateNode t;
        t.kind = Kind::comp;
        t.ops = ops;
        t.children = std::move(children);
        return t;
    }
    static TemplateNode make_aux(AuxOp op, std::vector<TemplateNode> children) {
        TemplateNode t;
        t.kind = Kind::aux;
        t.aux = op;
        t.children = std::move(children);
        return t;
    }

    bool operator==(const TemplateNode&) const = default;
};

}  // namespace kandy

#endif
