#include "kandy/task_dsl.hpp"

#include <yaml-cpp/yaml.h>

#include <array>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "kandy/errors.hpp"

namespace kandy {

// --- template_tree support -------------------------------------------------

namespace {

struct AuxInfo {
    std::string_view name;
    AuxOp op;
    bool pre;
    bool set_op;
};

constexpr std::array<AuxInfo, 14> kAuxTable = {{
    {"repeat_before", AuxOp::repeat_before, true, false},
    {"sort", AuxOp::sort, false, false},
    {"mirror", AuxOp::mirror, false, false},
    {"permute", AuxOp::permute, false, false},
    {"pick", AuxOp::pick, false, false},
    {"pick_before", AuxOp::pick_before, true, false},
    {"random_repeat_before", AuxOp::random_repeat_before, true, false},
    {"store", AuxOp::store, false, false},
    {"store_before", AuxOp::store_before, true, false},
    {"recall", AuxOp::recall, false, false},
    {"union", AuxOp::union_, true, true},
    {"difference", AuxOp::difference, true, true},
    {"symmetric_difference", AuxOp::symmetric_difference, true, true},
    {"intersect", AuxOp::intersect, true, true},
}};

const AuxInfo& aux_info(AuxOp op) {
    for (const auto& e : kAuxTable) {
        if (e.op == op) return e;
    }
    throw Error("bad aux op");
}

uint16_t ops_bits(std::initializer_list<CompOp> ops) {
    uint16_t bits = 0;
    for (CompOp op : ops) bits |= uint16_t{1} << static_cast<int>(op);
    return bits;
}

struct WildcardEntry {
    std::string_view name;
    uint16_t bits;
};

// Operator classes available in templates. The groups mirror the
// operator taxonomy of the rule library (diag/1, line/1, ...).
const std::vector<WildcardEntry>& wildcard_table() {
    static const std::vector<WildcardEntry> table = {
        {"quadrant_or_center",
         ops_bits({CompOp::in, CompOp::quadrant_ul, CompOp::quadrant_ur, CompOp::quadrant_ll,
                   CompOp::quadrant_lr})},
        {"any_quadrant",
         ops_bits({CompOp::quadrant_ul, CompOp::quadrant_ur, CompOp::quadrant_ll,
                   CompOp::quadrant_lr})},
        {"any_diag", ops_bits({CompOp::diag_ul_lr, CompOp::diag_ll_ur})},
        {"any_non_diag",
         ops_bits({CompOp::stack, CompOp::side_by_side, CompOp::stack_reduce_bb,
                   CompOp::side_by_side_reduce_bb, CompOp::grid})},
        {"any_displacement",
         ops_bits({CompOp::stack, CompOp::side_by_side, CompOp::stack_reduce_bb,
                   CompOp::side_by_side_reduce_bb, CompOp::diag_ul_lr, CompOp::diag_ll_ur})},
        {"any_line",
         ops_bits({CompOp::stack, CompOp::side_by_side, CompOp::stack_reduce_bb,
                   CompOp::side_by_side_reduce_bb, CompOp::diag_ul_lr, CompOp::diag_ll_ur})},
        {"any_composition",
         ops_bits({CompOp::quadrant_ul, CompOp::quadrant_ur, CompOp::quadrant_ll,
                   CompOp::quadrant_lr, CompOp::random, CompOp::stack, CompOp::side_by_side,
                   CompOp::stack_reduce_bb, CompOp::side_by_side_reduce_bb, CompOp::diag_ul_lr,
                   CompOp::diag_ll_ur, CompOp::grid})},
    };
    return table;
}

}  // namespace

std::string_view to_string(AuxOp op) { return aux_info(op).name; }

std::optional<AuxOp> aux_op_from_string(std::string_view name) {
    for (const auto& e : kAuxTable) {
        if (e.name == name) return e.op;
    }
    return std::nullopt;
}

bool is_pre_ground(AuxOp op) { return aux_info(op).pre; }
bool is_set_op(AuxOp op) { return aux_info(op).set_op; }

std::optional<OperatorSet> OperatorSet::from_name(std::string_view name) {
    if (auto op = comp_op_from_string(name)) return OperatorSet::of(*op);
    for (const auto& e : wildcard_table()) {
        if (e.name == name) return OperatorSet::from_bits(e.bits);
    }
    return std::nullopt;
}

CompOp OperatorSet::single() const {
    if (!is_singleton()) throw Error("operator set is not a singleton");
    return static_cast<CompOp>(__builtin_ctz(bits_));
}

CompOp OperatorSet::ground(Rng& rng) const {
    if (bits_ == 0) throw Error("empty operator set");
    int n = count();
    if (n == 1) return single();
    size_t pick = rng.index(static_cast<size_t>(n));
    uint16_t bits = bits_;
    for (size_t k = 0; k < pick; ++k) bits &= bits - 1;
    return static_cast<CompOp>(__builtin_ctz(bits));
}

std::string OperatorSet::name() const {
    if (is_singleton()) return std::string(to_string(single()));
    for (const auto& e : wildcard_table()) {
        if (e.bits == bits_) return std::string(e.name);
    }
    return "operator_set";
}

// --- YAML parsing ----------------------------------------------------------

namespace {

// Expands YAML merge keys ("<<"), which yaml-cpp leaves untouched. Aliases
// are already resolved by the loader; this rebuilds maps so that merged
// keys are visible, with locally defined keys taking precedence.
YAML::Node expand_merge_keys(const YAML::Node& node, int depth = 0) {
    if (depth > 256) throw ParseError("YAML nesting too deep (alias cycle?)");
    if (node.IsSequence()) {
        YAML::Node out(YAML::NodeType::Sequence);
        for (const auto& item : node) out.push_back(expand_merge_keys(item, depth + 1));
        return out;
    }
    if (!node.IsMap()) return node;
    YAML::Node out(YAML::NodeType::Map);
    for (const auto& kv : node) {
        std::string key = kv.first.Scalar();
        if (key != "<<") continue;
        auto merge_one = [&](const YAML::Node& src) {
            YAML::Node m = expand_merge_keys(src, depth + 1);
            if (!m.IsMap()) throw ParseError("merge key value must be a mapping");
            for (const auto& mkv : m) {
                if (!out[mkv.first.Scalar()]) out[mkv.first.Scalar()] = mkv.second;
            }
        };
        if (kv.second.IsSequence()) {
            for (const auto& src : kv.second) merge_one(src);
        } else {
            merge_one(kv.second);
        }
    }
    for (const auto& kv : node) {
        std::string key = kv.first.Scalar();
        if (key == "<<") continue;
        YAML::Node value = expand_merge_keys(kv.second, depth + 1);
        out[key] = value;  // local keys override merged ones
    }
    return out;
}

class TemplateParser {
public:
    explicit TemplateParser(std::string task_label) : task_label_(std::move(task_label)) {}

    std::vector<TemplateNode> parse_forest(const YAML::Node& node, const std::string& path) {
        if (!node.IsSequence() || node.size() == 0) {
            fail(path, "template forest must be a nonempty sequence");
        }
        std::vector<TemplateNode> forest;
        for (size_t i = 0; i < node.size(); ++i) {
            forest.push_back(parse_node(node[i], path + "[" + std::to_string(i) + "]"));
        }
        return forest;
    }

    TemplateNode parse_node(const YAML::Node& node, const std::string& path) {
        if (!node.IsMap()) fail(path, "template node must be a mapping");
        if (is_atom_map(node)) return parse_atom(node, path);
        if (node.size() != 1) {
            fail(path, "operator node must have exactly one key");
        }
        auto kv = *node.begin();
        std::string name = kv.first.Scalar();
        std::string sub = path + "." + name;
        if (auto ops = OperatorSet::from_name(name)) {
            return TemplateNode::make_comp(*ops, parse_forest(kv.second, sub));
        }
        if (auto aux = aux_op_from_string(name)) {
            return parse_aux(*aux, kv.second, sub);
        }
        fail(path, "unknown operator '" + name + "'");
    }

private:
    [[noreturn]] void fail(const std::string& path, const std::string& msg) const {
        throw ParseError(task_label_ + ": " + path + ": " + msg);
    }

    static bool is_atom_map(const YAML::Node& node) {
        for (const auto& kv : node) {
            std::string key = kv.first.Scalar();
            if (key == "shape" || key == "color" || key == "size") return true;
        }
        return false;
    }

    static std::string constraint_text(const YAML::Node& node) {
        if (!node || node.IsNull()) return "any";
        return node.Scalar();
    }

    TemplateNode parse_atom(const YAML::Node& node, const std::string& path) {
        for (const auto& kv : node) {
            std::string key = kv.first.Scalar();
            if (key != "shape" && key != "color" && key != "size") {
                fail(path, "unexpected key '" + key + "' in atom");
            }
        }
        try {
            ProductDescriptor d = product_from_constraints(constraint_text(node["shape"]),
                                                           constraint_text(node["color"]),
                                                           constraint_text(node["size"]));
            if (d.empty()) fail(path, "atom constraints describe the empty set");
            return TemplateNode::make_atom(d);
        } catch (const ParseError& e) {
            fail(path, e.what());
        }
    }

    int int_param(const YAML::Node& params, const char* key, const std::string& path) {
        if (!params[key]) fail(path, std::string("missing parameter '") + key + "'");
        try {
            return params[key].as<int>();
        } catch (const YAML::Exception&) {
            fail(path, std::string("parameter '") + key + "' must be an integer");
        }
    }

    TemplateNode parse_aux(AuxOp op, const YAML::Node& value, const std::string& path) {
        TemplateNode t;
        t.kind = TemplateNode::Kind::aux;
        t.aux = op;
        switch (op) {
            case AuxOp::permute:
            case AuxOp::sort:
            case AuxOp::mirror:
            case AuxOp::union_:
            case AuxOp::difference:
            case AuxOp::symmetric_difference:
            case AuxOp::intersect:
                t.children = parse_forest(value, path);
                break;
            case AuxOp::repeat_before:
            case AuxOp::pick:
            case AuxOp::pick_before: {
                if (!value.IsMap()) fail(path, "expected {n, list} parameters");
                t.n = int_param(value, "n", path);
                if (t.n < 1) fail(path, "parameter 'n' must be >= 1");
                t.children = parse_forest(value["list"], path + ".list");
                break;
            }
            case AuxOp::random_repeat_before: {
                if (!value.IsMap()) fail(path, "expected {min, max, list} parameters");
                t.min = int_param(value, "min", path);
                t.max = int_param(value, "max", path);
                if (t.min < 0 || t.min > t.max) fail(path, "requires 0 <= min <= max");
                t.children = parse_forest(value["list"], path + ".list");
                break;
            }
            case AuxOp::store:
            case AuxOp::store_before: {
                if (!value.IsMap() || !value["alias"]) fail(path, "expected {alias, list}");
                t.alias = value["alias"].Scalar();
                if (t.alias.empty()) fail(path, "alias must be nonempty");
                t.children = parse_forest(value["list"], path + ".list");
                break;
            }
            case AuxOp::recall: {
                if (!value.IsMap() || !value["alias"]) fail(path, "expected {alias}");
                t.alias = value["alias"].Scalar();
                if (t.alias.empty()) fail(path, "alias must be nonempty");
                break;
            }
        }
        for (const auto& c : t.children) {
            if (is_set_op(op) && c.kind == TemplateNode::Kind::comp) {
                fail(path, "set operators cannot take compositional subtrees");
            }
        }
        return t;
    }

    std::string task_label_;
};

// Checks that every recall can find a store of its alias earlier in the
// depth-first order of the same template. Also reports "conditional" stores
// (inside pick alternatives or zero-min repeats) as soft findings.
struct AliasCheck {
    std::set<std::string> stored;
    std::set<std::string> conditionally_stored;
    std::vector<std::string>* warnings = nullptr;

    void walk(const TemplateNode& node, const std::string& path, bool conditional) {
        if (node.kind == TemplateNode::Kind::aux) {
            bool child_conditional = conditional;
            if (node.aux == AuxOp::pick || node.aux == AuxOp::pick_before) {
                child_conditional = child_conditional || node.n < static_cast<int>(node.children.size());
            }
            if (node.aux == AuxOp::random_repeat_before && node.min == 0) {
                child_conditional = true;
            }
            for (size_t i = 0; i < node.children.size(); ++i) {
                walk(node.children[i], path + "." + std::string(to_string(node.aux)) + "[" +
                                           std::to_string(i) + "]",
                     child_conditional);
            }
            if (node.aux == AuxOp::store || node.aux == AuxOp::store_before) {
                if (conditional || child_conditional) {
                    conditionally_stored.insert(node.alias);
                } else {
                    stored.insert(node.alias);
                }
            }
            if (node.aux == AuxOp::recall) {
                if (!stored.count(node.alias) && !conditionally_stored.count(node.alias)) {
                    throw ParseError(path + ": recall of alias '" + node.alias +
                                     "' before any store defines it");
                }
                if (!stored.count(node.alias) && warnings) {
                    warnings->push_back(path + ": alias '" + node.alias +
                                        "' is only stored on some expansion paths");
                }
            }
            return;
        }
        for (size_t i = 0; i < node.children.size(); ++i) {
            std::string label = node.kind == TemplateNode::Kind::comp ? node.ops.name() : "atom";
            walk(node.children[i], path + "." + label + "[" + std::to_string(i) + "]", conditional);
        }
    }
};

void check_aliases(const std::vector<TemplateNode>& forest, const std::string& label) {
    for (size_t i = 0; i < forest.size(); ++i) {
        AliasCheck check;
        check.walk(forest[i], label + "[" + std::to_string(i) + "]", false);
    }
}

std::array<double, 3> parse_splits(const YAML::Node& node, const std::string& label) {
    if (!node.IsSequence() || node.size() != 3) {
        throw ParseError(label + ": splits must be a [train, val, test] triple");
    }
    std::array<double, 3> f{node[0].as<double>(), node[1].as<double>(), node[2].as<double>()};
    for (double v : f) {
        if (v < 0.0 || v > 1.0) throw ParseError(label + ": split fractions must lie in [0, 1]");
    }
    if (std::fabs(f[0] + f[1] + f[2] - 1.0) > 1e-9) {
        throw ParseError(label + ": split fractions must sum to 1");
    }
    return f;
}

double parse_probability(const YAML::Node& node, const char* key, const std::string& label) {
    double v = node.as<double>();
    if (v < 0.0 || v > 1.0) {
        throw ParseError(label + ": " + key + " must lie in [0, 1]");
    }
    return v;
}

}  // namespace

std::vector<TemplateNode> parse_template_forest(const std::string& document) {
    YAML::Node root = expand_merge_keys(YAML::Load(document));
    return TemplateParser("forest").parse_forest(root, "");
}

CurriculumConfig parse_curriculum(const std::string& document) {
    YAML::Node root;
    try {
        root = expand_merge_keys(YAML::Load(document));
    } catch (const YAML::Exception& e) {
        throw ParseError(std::string("YAML error: ") + e.what());
    }
    if (!root.IsMap()) throw ParseError("curriculum document must be a mapping");

    CurriculumConfig cfg;
    if (root["resolution"]) {
        cfg.resolution = root["resolution"].as<int>();
        if (cfg.resolution <= 0) throw ParseError("resolution must be positive");
    }
    if (root["background"]) {
        const auto& bg = root["background"];
        if (!bg.IsSequence() || bg.size() != 3) {
            throw ParseError("background must be an [r, g, b] triple");
        }
        for (int i = 0; i < 3; ++i) {
            int v = bg[i].as<int>();
            if (v < 0 || v > 255) throw ParseError("background components must be in [0, 255]");
            cfg.background[static_cast<size_t>(i)] = static_cast<uint8_t>(v);
        }
    }
    if (root["sizes"]) {
        const auto& sz = root["sizes"];
        if (!sz.IsMap() || !sz["small"] || !sz["large"]) {
            throw ParseError("sizes must be a {small, large} mapping");
        }
        cfg.small_px = sz["small"].as<int>();
        cfg.large_px = sz["large"].as<int>();
        if (cfg.small_px < 1 || cfg.large_px < 1) throw ParseError("sizes must be >= 1 pixel");
    }
    if (root["noise"]) {
        const auto& nz = root["noise"];
        if (nz["size_jitter"]) {
            cfg.noise.size_jitter = nz["size_jitter"].as<int>();
            if (cfg.noise.size_jitter < 0) throw ParseError("size_jitter must be >= 0");
        }
        if (nz["hsv_sigma"]) {
            const auto& hs = nz["hsv_sigma"];
            if (!hs.IsSequence() || hs.size() != 3) {
                throw ParseError("hsv_sigma must be a [h, s, v] triple");
            }
            cfg.noise.sigma_h = hs[0].as<double>();
            cfg.noise.sigma_s = hs[1].as<double>();
            cfg.noise.sigma_v = hs[2].as<double>();
        }
    }
    if (root["patience"]) {
        cfg.patience = root["patience"].as<int>();
        if (cfg.patience < 1) throw ParseError("patience must be >= 1");
    }
    if (root["seed"]) {
        cfg.seed = root["seed"].as<uint64_t>();
        cfg.has_seed = true;
    }

    int default_samples = 100;
    std::array<double, 3> default_splits = {0.5, 0.25, 0.25};
    double default_gamma = 1.0;
    double default_beta = 1.0;
    if (root["defaults"]) {
        const auto& d = root["defaults"];
        if (d["samples"]) default_samples = d["samples"].as<int>();
        if (d["splits"]) default_splits = parse_splits(d["splits"], "defaults");
        if (d["gamma"]) default_gamma = parse_probability(d["gamma"], "gamma", "defaults");
        if (d["beta"]) default_beta = parse_probability(d["beta"], "beta", "defaults");
    }

    if (!root["tasks"] || !root["tasks"].IsSequence() || root["tasks"].size() == 0) {
        throw ParseError("curriculum requires a nonempty 'tasks' sequence");
    }
    int task_id = 0;
    for (const auto& tnode : root["tasks"]) {
        std::string label = "task " + std::to_string(task_id);
        if (!tnode.IsMap()) throw ParseError(label + ": task must be a mapping");
        TaskSpec spec;
        spec.task_id = task_id;
        if (tnode["name"]) spec.name = tnode["name"].Scalar();
        if (!spec.name.empty()) label += " (" + spec.name + ")";
        spec.target_samples = tnode["samples"] ? tnode["samples"].as<int>() : default_samples;
        if (spec.target_samples < 1) throw ParseError(label + ": samples must be >= 1");
        spec.split_fractions =
            tnode["splits"] ? parse_splits(tnode["splits"], label) : default_splits;
        spec.gamma =
            tnode["gamma"] ? parse_probability(tnode["gamma"], "gamma", label) : default_gamma;
        spec.beta = tnode["beta"] ? parse_probability(tnode["beta"], "beta", label) : default_beta;
        if (tnode["patience"]) {
            spec.patience = tnode["patience"].as<int>();
            if (*spec.patience < 1) throw ParseError(label + ": patience must be >= 1");
        }
        if (tnode["rule"]) spec.rule_text = tnode["rule"].Scalar();

        TemplateParser parser(label);
        if (!tnode["positive"]) throw ParseError(label + ": missing 'positive' forest");
        if (!tnode["negative"]) throw ParseError(label + ": missing 'negative' forest");
        spec.positive_templates = parser.parse_forest(tnode["positive"], "positive");
        spec.negative_templates = parser.parse_forest(tnode["negative"], "negative");
        try {
            check_aliases(spec.positive_templates, "positive");
            check_aliases(spec.negative_templates, "negative");
        } catch (const ParseError& e) {
            throw ParseError(label + ": " + e.what());
        }
        cfg.tasks.push_back(std::move(spec));
        ++task_id;
    }
    return cfg;
}

CurriculumConfig parse_curriculum_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open curriculum file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_curriculum(buf.str());
}

namespace {

// validate_semantics helpers: walk with knowledge of which aliases were
// defined by store (post-grounding) vs store_before.
struct SemanticsWalk {
    std::vector<std::string>* warnings;
    std::set<std::string> store_before_aliases;
    std::set<std::string> store_post_aliases;

    void walk(const TemplateNode& node, const std::string& path, bool inside_set_op) {
        if (node.kind == TemplateNode::Kind::aux) {
            if (node.aux == AuxOp::store_before) store_before_aliases.insert(node.alias);
            if (node.aux == AuxOp::store) store_post_aliases.insert(node.alias);
            if (node.aux == AuxOp::recall && inside_set_op &&
                store_post_aliases.count(node.alias) && !store_before_aliases.count(node.alias)) {
                warnings->push_back(
                    path + ": set operators can only take non-grounded atoms or items stored "
                           "before grounding; alias '" +
                    node.alias + "' is stored after grounding");
            }
            bool set_ctx = is_set_op(node.aux);
            for (size_t i = 0; i < node.children.size(); ++i) {
                walk(node.children[i],
                     path + "." + std::string(to_string(node.aux)) + "[" + std::to_string(i) + "]",
                     set_ctx);
            }
            return;
        }
        if (node.kind == TemplateNode::Kind::comp) {
            if (node.ops.is_singleton() && node.ops.single() == CompOp::grid &&
                node.children.size() == 1 &&
                node.children[0].kind != TemplateNode::Kind::aux) {
                warnings->push_back(path + ": grid with a single child is degenerate");
            }
            for (size_t i = 0; i < node.children.size(); ++i) {
                walk(node.children[i], path + "." + node.ops.name() + "[" + std::to_string(i) + "]",
                     inside_set_op);
            }
        }
    }
};

}  // namespace

std::vector<std::string> validate_semantics(const TaskSpec& spec) {
    std::vector<std::string> warnings;
    SemanticsWalk w{&warnings, {}, {}};
    for (size_t i = 0; i < spec.positive_templates.size(); ++i) {
        w.store_before_aliases.clear();
        w.store_post_aliases.clear();
        w.walk(spec.positive_templates[i], "positive[" + std::to_string(i) + "]", false);
    }
    for (size_t i = 0; i < spec.negative_templates.size(); ++i) {
        w.store_before_aliases.clear();
        w.store_post_aliases.clear();
        w.walk(spec.negative_templates[i], "negative[" + std::to_string(i) + "]", false);
    }
    // Conditional-store findings surface here as well.
    for (size_t i = 0; i < spec.positive_templates.size(); ++i) {
        AliasCheck check;
        check.warnings = &warnings;
        check.walk(spec.positive_templates[i], "positive[" + std::to_string(i) + "]", false);
    }
    for (size_t i = 0; i < spec.negative_templates.size(); ++i) {
        AliasCheck check;
        check.warnings = &warnings;
        check.walk(spec.negative_templates[i], "negative[" + std::to_string(i) + "]", false);
    }
    return warnings;
}

}  // namespace kandy
