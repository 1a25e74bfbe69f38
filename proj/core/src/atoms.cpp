#include "kandy/atoms.hpp"

#include <array>

namespace kandy {

namespace {

constexpr std::array<std::string_view, kShapeCount> kShapeNames = {"triangle", "circle", "square"};
constexpr std::array<std::string_view, kColorCount> kColorNames = {"red",  "green",   "blue",
                                                                   "cyan", "magenta", "yellow"};
constexpr std::array<std::string_view, kSizeCount> kSizeNames = {"small", "large"};

template <typename Enum, size_t N>
std::optional<Enum> lookup(const std::array<std::string_view, N>& names, std::string_view s) {
    for (size_t i = 0; i < N; ++i) {
        if (names[i] == s) return static_cast<Enum>(i);
    }
    return std::nullopt;
}

}  // namespace

std::string_view to_string(Shape s) { return kShapeNames[static_cast<int>(s)]; }
std::string_view to_string(Color c) { return kColorNames[static_cast<int>(c)]; }
std::string_view to_string(Size z) { return kSizeNames[static_cast<int>(z)]; }

std::optional<Shape> shape_from_string(std::string_view s) { return lookup<Shape>(kShapeNames, s); }
std::optional<Color> color_from_string(std::string_view s) { return lookup<Color>(kColorNames, s); }
std::optional<Size> size_from_string(std::string_view s) { return lookup<Size>(kSizeNames, s); }

Atom Atom::from_index(int i) {
    return Atom{static_cast<Shape>(i / (kColorCount * kSizeCount)),
                static_cast<Color>((i / kSizeCount) % kColorCount),
                static_cast<Size>(i % kSizeCount)};
}

std::string Atom::label() const {
    std::string out;
    out.reserve(24);
    out += to_string(shape);
    out += '_';
    out += to_string(color);
    out += '_';
    out += to_string(size);
    return out;
}

std::optional<Atom> Atom::parse(std::string_view text) {
    size_t p1 = text.find('_');
    if (p1 == std::string_view::npos) return std::nullopt;
    size_t p2 = text.find('_', p1 + 1);
    if (p2 == std::string_view::npos) return std::nullopt;
    auto shape = shape_from_string(text.substr(0, p1));
    auto color = color_from_string(text.substr(p1 + 1, p2 - p1 - 1));
    auto size = size_from_string(text.substr(p2 + 1));
    if (!shape || !color || !size) return std::nullopt;
    return Atom{*shape, *color, *size};
}

Atom AtomDescriptor::single() const {
    if (!is_singleton()) throw Error("descriptor is not a singleton");
    return Atom::from_index(__builtin_ctzll(bits_));
}

Atom AtomDescriptor::ground(Rng& rng) const {
    if (empty()) throw EmptyDescriptorError();
    int n = count();
    if (n == 1) return Atom::from_index(__builtin_ctzll(bits_));
    size_t pick = rng.index(static_cast<size_t>(n));
    uint64_t bits = bits_;
    for (size_t k = 0; k < pick; ++k) bits &= bits - 1;  // clear lowest set bits
    return Atom::from_index(__builtin_ctzll(bits));
}

std::vector<Atom> AtomDescriptor::atoms() const {
    std::vector<Atom> out;
    out.reserve(static_cast<size_t>(count()));
    for (int i = 0; i < kUniverseSize; ++i) {
        if (test(i)) out.push_back(Atom::from_index(i));
    }
    return out;
}

namespace {

// Parses one attribute constraint into a bitmask over that attribute's domain.
template <typename Enum>
uint32_t attribute_mask(std::string_view text, std::string_view attribute,
                        std::optional<Enum> (*parse)(std::string_view), int domain_size) {
    const uint32_t full = (uint32_t{1} << domain_size) - 1;
    if (text.empty() || text == "~" || text == "any") return full;
    if (text.starts_with("not_")) {
        auto v = parse(text.substr(4));
        if (!v) {
            throw ParseError("unknown " + std::string(attribute) + " label '" +
                             std::string(text.substr(4)) + "'");
        }
        return full & ~(uint32_t{1} << static_cast<int>(*v));
    }
    uint32_t mask = 0;
    size_t start = 0;
    while (true) {
        size_t bar = text.find('|', start);
        std::string_view tok = text.substr(start, bar == std::string_view::npos ? bar : bar - start);
        auto v = parse(tok);
        if (!v) {
            throw ParseError("unknown " + std::string(attribute) + " label '" + std::string(tok) +
                             "'");
        }
        mask |= uint32_t{1} << static_cast<int>(*v);
        if (bar == std::string_view::npos) break;
        start = bar + 1;
    }
    return mask;
}

}  // namespace

AtomDescriptor ProductDescriptor::mask() const {
    uint64_t bits = 0;
    for (int s = 0; s < kShapeCount; ++s) {
        if (!((shapes_ >> s) & 1)) continue;
        for (int c = 0; c < kColorCount; ++c) {
            if (!((colors_ >> c) & 1)) continue;
            for (int z = 0; z < kSizeCount; ++z) {
                if (!((sizes_ >> z) & 1)) continue;
                bits |= uint64_t{1} << Atom{static_cast<Shape>(s), static_cast<Color>(c),
                                            static_cast<Size>(z)}
                                          .index();
            }
        }
    }
    return AtomDescriptor::from_bits(bits);
}

ProductDescriptor product_from_constraints(std::string_view shape_constraint,
                                           std::string_view color_constraint,
                                           std::string_view size_constraint) {
    uint32_t shapes = attribute_mask<Shape>(shape_constraint, "shape", shape_from_string, kShapeCount);
    uint32_t colors = attribute_mask<Color>(color_constraint, "color", color_from_string, kColorCount);
    uint32_t sizes = attribute_mask<Size>(size_constraint, "size", size_from_string, kSizeCount);
    return ProductDescriptor(static_cast<uint8_t>(shapes), static_cast<uint8_t>(colors),
                             static_cast<uint8_t>(sizes));
}

AtomDescriptor descriptor_from_constraints(std::string_view shape_constraint,
                                           std::string_view color_constraint,
                                           std::string_view size_constraint) {
    return product_from_constraints(shape_constraint, color_constraint, size_constraint).mask();
}

}  // namespace kandy
