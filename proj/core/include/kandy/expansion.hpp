#ifndef KANDY_EXPANSION_HPP
#define KANDY_EXPANSION_HPP

#include <map>
#include <string>
#include <vector>

#include "kandy/template_tree.hpp"

namespace kandy {

/// Alias memory shared by store/store_before/recall within one sample.
/// Entries tagged `before` hold template items captured before grounding;
/// `recall` then re-grounds a fresh copy per occurrence, so only the pinned
/// attributes are shared. Entries stored after grounding hold concrete
/// trees, and recall returns those identical items.
class MemoryStore {
public:
    struct Entry {
        bool before = false;
        std::vector<TemplateNode> templates;  // before-grounding payload
        std::vector<SymbolTree> grounded;     // after-grounding payload
    };

    void store_templates(const std::string& alias, std::vector<TemplateNode> items);
    void store_grounded(const std::string& alias, std::vector<SymbolTree> items);
    const Entry* find(const std::string& alias) const;
    bool empty() const { return entries_.empty(); }

private:
    std::map<std::string, Entry> entries_;
};

enum class Phase { pre_ground, post_ground };

/// Per-sample rewriting state. Not shared across threads; each sample owns
/// its context and rng stream. The phase moves exactly once per sample:
/// pre_ground -> grounding -> post_ground.
struct ExpansionContext {
    Rng& rng;
    MemoryStore memory;
    Phase phase = Phase::pre_ground;
    int depth = 0;
};

/// Pre-grounding rewriting: eliminates every `_before` operator and all
/// set-based operators. A node may expand to several siblings (splicing).
std::vector<TemplateNode> expand_pre(const TemplateNode& node, ExpansionContext& ctx);

/// Grounds every template atom (uniform draw over its descriptor) and
/// resolves operator wildcards, depth-first left-to-right.
TemplateNode ground_template(const TemplateNode& node, ExpansionContext& ctx);

/// Post-grounding rewriting: eliminates the remaining auxiliary operators,
/// yielding pure symbol trees.
std::vector<SymbolTree> expand_post(const TemplateNode& node, ExpansionContext& ctx);

/// Runs the full rewrite of one top-level template into a grounded sample.
/// Throws EmptyDescriptorError when a set operation or constraint bottoms
/// out empty (callers treat this as a retriable rejection) and
/// ExpansionError for structural failures.
SymbolTree expand_sample(const TemplateNode& root, Rng& rng);

}  // namespace kandy

#endif
