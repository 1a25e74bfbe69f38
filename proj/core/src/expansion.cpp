#include "kandy/expansion.hpp"

#include "kandy/errors.hpp"

namespace kandy {

void MemoryStore::store_templates(const std::string& alias, std::vector<TemplateNode> items) {
    Entry e;
    e.before = true;
    e.templates = std::move(items);
    entries_[alias] = std::move(e);
}

void MemoryStore::store_grounded(const std::string& alias, std::vector<SymbolTree> items) {
    Entry e;
    e.before = false;
    e.grounded = std::move(items);
    entries_[alias] = std::move(e);
}

const MemoryStore::Entry* MemoryStore::find(const std::string& alias) const {
    auto it = entries_.find(alias);
    return it == entries_.end() ? nullptr : &it->second;
}

namespace {

constexpr int kMaxExpansionDepth = 64;

struct DepthGuard {
    explicit DepthGuard(ExpansionContext& ctx) : ctx_(ctx) {
        if (++ctx_.depth > kMaxExpansionDepth) {
            throw ExpansionError("template expansion exceeds depth limit");
        }
    }
    ~DepthGuard() { --ctx_.depth; }
    ExpansionContext& ctx_;
};

std::vector<TemplateNode> expand_pre_list(const std::vector<TemplateNode>& children,
                                          ExpansionContext& ctx) {
    std::vector<TemplateNode> out;
    for (const auto& c : children) {
        auto items = expand_pre(c, ctx);
        out.insert(out.end(), std::make_move_iterator(items.begin()),
                   std::make_move_iterator(items.end()));
    }
    return out;
}

std::vector<TemplateNode> repeat_list(const std::vector<TemplateNode>& items, int times) {
    std::vector<TemplateNode> out;
    out.reserve(items.size() * static_cast<size_t>(times));
    for (int k = 0; k < times; ++k) out.insert(out.end(), items.begin(), items.end());
    return out;
}

// Set operators act on the three attribute sets independently, so the
// result is again a product.
ProductDescriptor apply_set_op(AuxOp op, ProductDescriptor acc, ProductDescriptor rhs) {
    switch (op) {
        case AuxOp::union_: return acc.set_union(rhs);
        case AuxOp::difference: return acc.set_difference(rhs);
        case AuxOp::symmetric_difference: return acc.set_symmetric_difference(rhs);
        case AuxOp::intersect: return acc.set_intersect(rhs);
        default: throw Error("not a set operator");
    }
}

// Resolves a set-operator operand list to descriptors. Recall is legal here
// only for aliases stored before grounding.
std::vector<ProductDescriptor> set_operands(const TemplateNode& node, ExpansionContext& ctx) {
    std::vector<ProductDescriptor> out;
    for (const auto& child : node.children) {
        if (child.kind == TemplateNode::Kind::aux && child.aux == AuxOp::recall) {
            const auto* entry = ctx.memory.find(child.alias);
            if (!entry) {
                throw ExpansionError("recall of unknown alias '" + child.alias + "'");
            }
            if (!entry->before) {
                throw ExpansionError("set operator over grounded items (alias '" + child.alias +
                                     "' was stored after grounding)");
            }
            for (const auto& item : entry->templates) {
                if (item.kind != TemplateNode::Kind::atom) {
                    throw ExpansionError("set operator operand is not an atomic shape");
                }
                out.push_back(item.descriptor);
            }
            continue;
        }
        auto items = expand_pre(child, ctx);
        for (const auto& item : items) {
            if (item.kind != TemplateNode::Kind::atom) {
                throw ExpansionError("set operator operand is not an atomic shape");
            }
            out.push_back(item.descriptor);
        }
    }
    return out;
}

}  // namespace

std::vector<TemplateNode> expand_pre(const TemplateNode& node, ExpansionContext& ctx) {
    DepthGuard guard(ctx);
    switch (node.kind) {
        case TemplateNode::Kind::atom:
            return {node};
        case TemplateNode::Kind::comp: {
            TemplateNode out = node;
            out.children = expand_pre_list(node.children, ctx);
            return {std::move(out)};
        }
        case TemplateNode::Kind::aux:
            break;
    }

    if (is_set_op(node.aux)) {
        auto operands = set_operands(node, ctx);
        if (operands.empty()) throw ExpansionError("set operator with no operands");
        ProductDescriptor acc = operands[0];
        for (size_t i = 1; i < operands.size(); ++i) {
            acc = apply_set_op(node.aux, acc, operands[i]);
        }
        if (acc.empty()) {
            throw EmptyDescriptorError("set operation produced the empty atom set");
        }
        return {TemplateNode::make_atom(acc)};
    }

    switch (node.aux) {
        case AuxOp::repeat_before: {
            auto items = expand_pre_list(node.children, ctx);
            return repeat_list(items, node.n);
        }
        case AuxOp::random_repeat_before: {
            auto items = expand_pre_list(node.children, ctx);
            int times = static_cast<int>(ctx.rng.int_range(node.min, node.max));
            return repeat_list(items, times);
        }
        case AuxOp::pick_before: {
            auto items = expand_pre_list(node.children, ctx);
            if (static_cast<size_t>(node.n) > items.size()) {
                throw ExpansionError("pick_before n exceeds list size");
            }
            auto chosen = ctx.rng.sample_indices(static_cast<size_t>(node.n), items.size());
            std::vector<TemplateNode> out;
            out.reserve(chosen.size());
            for (size_t idx : chosen) out.push_back(std::move(items[idx]));
            return out;
        }
        case AuxOp::store_before: {
            auto items = expand_pre_list(node.children, ctx);
            ctx.memory.store_templates(node.alias, items);
            return items;
        }
        default: {
            // Post-grounding operator: keep the node, pre-expand its list.
            TemplateNode out = node;
            out.children = expand_pre_list(node.children, ctx);
            return {std::move(out)};
        }
    }
}

TemplateNode ground_template(const TemplateNode& node, ExpansionContext& ctx) {
    DepthGuard guard(ctx);
    switch (node.kind) {
        case TemplateNode::Kind::atom:
            return TemplateNode::make_atom(
                ProductDescriptor::of(node.descriptor.mask().ground(ctx.rng)));
        case TemplateNode::Kind::comp: {
            TemplateNode out = node;
            out.ops = OperatorSet::of(node.ops.ground(ctx.rng));
            std::vector<TemplateNode> children;
            children.reserve(node.children.size());
            for (const auto& c : node.children) children.push_back(ground_template(c, ctx));
            out.children = std::move(children);
            return out;
        }
        case TemplateNode::Kind::aux: {
            TemplateNode out = node;
            std::vector<TemplateNode> children;
            children.reserve(node.children.size());
            for (const auto& c : node.children) children.push_back(ground_template(c, ctx));
            out.children = std::move(children);
            return out;
        }
    }
    throw Error("unreachable");
}

namespace {

std::vector<SymbolTree> expand_post_list(const std::vector<TemplateNode>& children,
                                         ExpansionContext& ctx) {
    std::vector<SymbolTree> out;
    for (const auto& c : children) {
        auto items = expand_post(c, ctx);
        out.insert(out.end(), std::make_move_iterator(items.begin()),
                   std::make_move_iterator(items.end()));
    }
    return out;
}

}  // namespace

std::vector<SymbolTree> expand_post(const TemplateNode& node, ExpansionContext& ctx) {
    DepthGuard guard(ctx);
    switch (node.kind) {
        case TemplateNode::Kind::atom:
            if (!node.descriptor.is_singleton()) {
                throw ExpansionError("atom reached post-grounding expansion ungrounded");
            }
            return {SymbolTree::leaf(node.descriptor.mask().single())};
        case TemplateNode::Kind::comp: {
            auto children = expand_post_list(node.children, ctx);
            if (children.empty()) {
                throw ExpansionError("compositional operator expanded to zero children");
            }
            return {SymbolTree::node(node.ops.single(), std::move(children))};
        }
        case TemplateNode::Kind::aux:
            break;
    }

    switch (node.aux) {
        case AuxOp::permute: {
            auto items = expand_post_list(node.children, ctx);
            ctx.rng.shuffle(items);
            return items;
        }
        case AuxOp::pick: {
            auto items = expand_post_list(node.children, ctx);
            if (static_cast<size_t>(node.n) > items.size()) {
                throw ExpansionError("pick n exceeds list size");
            }
            auto chosen = ctx.rng.sample_indices(static_cast<size_t>(node.n), items.size());
            std::vector<SymbolTree> out;
            out.reserve(chosen.size());
            for (size_t idx : chosen) out.push_back(std::move(items[idx]));
            return out;
        }
        case AuxOp::mirror: {
            auto items = expand_post_list(node.children, ctx);
            std::reverse(items.begin(), items.end());
            return items;
        }
        case AuxOp::sort: {
            // Sort key: universe index. Defined for atomic items only.
            auto items = expand_post_list(node.children, ctx);
            for (const auto& item : items) {
                if (!item.is_leaf()) {
                    throw ExpansionError("sort requires atomic shapes");
                }
            }
            std::sort(items.begin(), items.end(), [](const SymbolTree& a, const SymbolTree& b) {
                return a.atom().index() < b.atom().index();
            });
            return items;
        }
        case AuxOp::store: {
            auto items = expand_post_list(node.children, ctx);
            ctx.memory.store_grounded(node.alias, items);
            return items;
        }
        case AuxOp::recall: {
            const auto* entry = ctx.memory.find(node.alias);
            if (!entry) throw ExpansionError("recall of unknown alias '" + node.alias + "'");
            if (!entry->before) return entry->grounded;
            // Items stored before grounding re-ground per occurrence: the
            // pinned attributes transfer, free attributes stay independent.
            std::vector<SymbolTree> out;
            for (const auto& tmpl : entry->templates) {
                TemplateNode grounded = ground_template(tmpl, ctx);
                auto items = expand_post(grounded, ctx);
                out.insert(out.end(), std::make_move_iterator(items.begin()),
                           std::make_move_iterator(items.end()));
            }
            return out;
        }
        default:
            throw ExpansionError(std::string("operator '") + std::string(to_string(node.aux)) +
                                 "' survived into post-grounding expansion");
    }
}

SymbolTree expand_sample(const TemplateNode& root, Rng& rng) {
    ExpansionContext ctx{rng};
    ctx.phase = Phase::pre_ground;
    auto pre = expand_pre(root, ctx);
    if (pre.size() != 1) {
        throw ExpansionError("template root must expand to exactly one tree");
    }
    TemplateNode grounded = ground_template(pre[0], ctx);
    ctx.phase = Phase::post_ground;
    auto post = expand_post(grounded, ctx);
    if (post.size() != 1) {
        throw ExpansionError("template root must expand to exactly one tree");
    }
    if (post[0].is_leaf()) {
        throw ExpansionError("sample root must be a compositional operator");
    }
    return std::move(post[0]);
}

}  // namespace kandy
