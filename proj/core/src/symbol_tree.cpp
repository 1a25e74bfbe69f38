#include "kandy/symbol_tree.hpp"

#include <algorithm>
#include <array>

#include "kandy/errors.hpp"

namespace kandy {

namespace {

constexpr std::array<std::string_view, kCompOpCount> kOpNames = {
    "in",
    "quadrant_ul",
    "quadrant_ur",
    "quadrant_ll",
    "quadrant_lr",
    "random",
    "stack",
    "side_by_side",
    "stack_reduce_bb",
    "side_by_side_reduce_bb",
    "diag_ul_lr",
    "diag_ll_ur",
    "grid",
};

}  // namespace

std::string_view to_string(CompOp op) { return kOpNames[static_cast<int>(op)]; }

std::optional<CompOp> comp_op_from_string(std::string_view name) {
    for (int i = 0; i < kCompOpCount; ++i) {
        if (kOpNames[i] == name) return static_cast<CompOp>(i);
    }
    return std::nullopt;
}

SymbolTree SymbolTree::node(CompOp op, std::vector<SymbolTree> children) {
    if (children.empty()) throw Error("compositional node requires at least one child");
    SymbolTree t;
    t.op_ = op;
    t.children_ = std::move(children);
    return t;
}

bool SymbolTree::operator==(const SymbolTree& other) const {
    if (is_leaf() != other.is_leaf()) return false;
    if (is_leaf()) return *leaf_ == *other.leaf_;
    return op_ == other.op_ && children_ == other.children_;
}

int SymbolTree::depth() const {
    if (is_leaf()) return 0;
    int d = 0;
    for (const auto& c : children_) d = std::max(d, c.depth());
    return d + 1;
}

int SymbolTree::leaf_count() const {
    if (is_leaf()) return 1;
    int n = 0;
    for (const auto& c : children_) n += c.leaf_count();
    return n;
}

namespace {

void serialize(const SymbolTree& t, std::string& out) {
    if (t.is_leaf()) {
        out += t.atom().label();
        return;
    }
    out += to_string(t.op());
    out += "([";
    bool first = true;
    for (const auto& c : t.children()) {
        if (!first) out += ", ";
        first = false;
        serialize(c, out);
    }
    out += "])";
}

class CanonicalParser {
public:
    explicit CanonicalParser(std::string_view text) : text_(text) {}

    SymbolTree parse() {
        SymbolTree t = parse_tree();
        if (pos_ != text_.size()) fail("trailing characters after tree");
        return t;
    }

private:
    [[noreturn]] void fail(const std::string& msg) { throw CanonicalParseError(msg, pos_); }

    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

    void expect(char c) {
        if (peek() != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    std::string_view identifier() {
        size_t start = pos_;
        while (pos_ < text_.size() &&
               ((text_[pos_] >= 'a' && text_[pos_] <= 'z') || text_[pos_] == '_')) {
            ++pos_;
        }
        if (pos_ == start) fail("expected identifier");
        return text_.substr(start, pos_ - start);
    }

    SymbolTree parse_tree() {
        size_t id_start = pos_;
        std::string_view name = identifier();
        if (peek() == '(') {
            auto op = comp_op_from_string(name);
            if (!op) {
                pos_ = id_start;
                fail("unknown operator '" + std::string(name) + "'");
            }
            ++pos_;
            expect('[');
            std::vector<SymbolTree> children;
            children.push_back(parse_tree());
            while (peek() == ',') {
                ++pos_;
                expect(' ');
                children.push_back(parse_tree());
            }
            expect(']');
            expect(')');
            return SymbolTree::node(*op, std::move(children));
        }
        auto atom = Atom::parse(name);
        if (!atom) {
            pos_ = id_start;
            fail("unknown atom '" + std::string(name) + "'");
        }
        return SymbolTree::leaf(*atom);
    }

    std::string_view text_;
    size_t pos_ = 0;
};

}  // namespace

std::string to_canonical(const SymbolTree& tree) {
    std::string out;
    serialize(tree, out);
    return out;
}

SymbolTree from_canonical(std::string_view text) { return CanonicalParser(text).parse(); }

}  // namespace kandy
