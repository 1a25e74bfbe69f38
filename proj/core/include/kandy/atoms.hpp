#ifndef KANDY_ATOMS_HPP
#define KANDY_ATOMS_HPP

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kandy/errors.hpp"
#include "kandy/rng.hpp"

namespace kandy {

// The atom universe: 3 shapes x 6 colors x 2 sizes = 36 atomic shapes.
// Index order is fixed shape-major, then color, then size, so that
// descriptor masks are stable across runs and platforms.

enum class Shape : uint8_t { triangle = 0, circle = 1, square = 2 };
enum class Color : uint8_t { red = 0, green = 1, blue = 2, cyan = 3, magenta = 4, yellow = 5 };
enum class Size : uint8_t { small = 0, large = 1 };

inline constexpr int kShapeCount = 3;
inline constexpr int kColorCount = 6;
inline constexpr int kSizeCount = 2;
inline constexpr int kUniverseSize = kShapeCount * kColorCount * kSizeCount;

std::string_view to_string(Shape s);
std::string_view to_string(Color c);
std::string_view to_string(Size z);
std::optional<Shape> shape_from_string(std::string_view s);
std::optional<Color> color_from_string(std::string_view s);
std::optional<Size> size_from_string(std::string_view s);

/// A fully grounded atomic shape.
struct Atom {
    Shape shape;
    Color color;
    Size size;

    int index() const {
        return (static_cast<int>(shape) * kColorCount + static_cast<int>(color)) * kSizeCount +
               static_cast<int>(size);
    }
    static Atom from_index(int i);

    /// Canonical label, e.g. "triangle_red_small".
    std::string label() const;
    /// Parses a canonical label; nullopt on any malformed input.
    static std::optional<Atom> parse(std::string_view text);

    auto operator<=>(const Atom&) const = default;
};

/// A set of atomic shapes, stored as a 36-bit mask over the universe.
///
/// Grounded atom <=> exactly one bit set. Constraint products yield
/// rectangular sets; set operations may produce arbitrary masks.
class AtomDescriptor {
public:
    AtomDescriptor() = default;

    static AtomDescriptor none() { return AtomDescriptor(0); }
    static AtomDescriptor all() { return AtomDescriptor(kFullMask); }
    static AtomDescriptor of(Atom a) { return AtomDescriptor(uint64_t{1} << a.index()); }
    static AtomDescriptor from_bits(uint64_t bits) { return AtomDescriptor(bits & kFullMask); }

    uint64_t bits() const { return bits_; }
    bool empty() const { return bits_ == 0; }
    int count() const { return __builtin_popcountll(bits_); }
    bool is_singleton() const { return count() == 1; }
    bool test(int i) const { return (bits_ >> i) & 1; }
    bool contains(Atom a) const { return test(a.index()); }

    /// The unique atom of a singleton descriptor. Throws on non-singletons.
    Atom single() const;

    /// Uniform choice among the set atoms. Singleton sets consume no draw.
    /// Throws EmptyDescriptorError on the empty set.
    Atom ground(Rng& rng) const;

    AtomDescriptor operator&(AtomDescriptor o) const { return AtomDescriptor(bits_ & o.bits_); }
    AtomDescriptor operator|(AtomDescriptor o) const { return AtomDescriptor(bits_ | o.bits_); }
    AtomDescriptor operator^(AtomDescriptor o) const { return AtomDescriptor(bits_ ^ o.bits_); }
    AtomDescriptor operator~() const { return AtomDescriptor(~bits_ & kFullMask); }
    AtomDescriptor difference(AtomDescriptor o) const { return AtomDescriptor(bits_ & ~o.bits_); }

    bool operator==(const AtomDescriptor&) const = default;

    std::vector<Atom> atoms() const;

private:
    explicit AtomDescriptor(uint64_t bits) : bits_(bits) {}
    static constexpr uint64_t kFullMask = (uint64_t{1} << kUniverseSize) - 1;
    uint64_t bits_ = 0;
};

/// A rectangular atom set held as three per-attribute value sets. This is
/// the template-atom representation: the DSL's set-based operators act on
/// each attribute independently (so their results stay products), which is
/// what makes constructions like "transfer the stored color onto a square"
/// come out right.
class ProductDescriptor {
public:
    ProductDescriptor() = default;
    ProductDescriptor(uint8_t shapes, uint8_t colors, uint8_t sizes)
        : shapes_(shapes & full_mask(kShapeCount)),
          colors_(colors & full_mask(kColorCount)),
          sizes_(sizes & full_mask(kSizeCount)) {}

    static ProductDescriptor all() {
        return ProductDescriptor(full_mask(kShapeCount), full_mask(kColorCount),
                                 full_mask(kSizeCount));
    }
    static ProductDescriptor of(Atom a) {
        return ProductDescriptor(uint8_t{1} << static_cast<int>(a.shape),
                                 uint8_t{1} << static_cast<int>(a.color),
                                 uint8_t{1} << static_cast<int>(a.size));
    }

    uint8_t shapes() const { return shapes_; }
    uint8_t colors() const { return colors_; }
    uint8_t sizes() const { return sizes_; }

    bool empty() const { return shapes_ == 0 || colors_ == 0 || sizes_ == 0; }
    int count() const {
        return __builtin_popcount(shapes_) * __builtin_popcount(colors_) *
               __builtin_popcount(sizes_);
    }
    bool is_singleton() const { return count() == 1; }

    /// The equivalent flat mask over the 36-atom universe.
    AtomDescriptor mask() const;

    // Attribute-wise set algebra.
    ProductDescriptor set_union(ProductDescriptor o) const {
        return ProductDescriptor(shapes_ | o.shapes_, colors_ | o.colors_, sizes_ | o.sizes_);
    }
    ProductDescriptor set_intersect(ProductDescriptor o) const {
        return ProductDescriptor(shapes_ & o.shapes_, colors_ & o.colors_, sizes_ & o.sizes_);
    }
    ProductDescriptor set_difference(ProductDescriptor o) const {
        return ProductDescriptor(shapes_ & ~o.shapes_, colors_ & ~o.colors_, sizes_ & ~o.sizes_);
    }
    ProductDescriptor set_symmetric_difference(ProductDescriptor o) const {
        return ProductDescriptor(shapes_ ^ o.shapes_, colors_ ^ o.colors_, sizes_ ^ o.sizes_);
    }

    bool operator==(const ProductDescriptor&) const = default;

private:
    static constexpr uint8_t full_mask(int n) {
        return static_cast<uint8_t>((uint32_t{1} << n) - 1);
    }
    uint8_t shapes_ = 0;
    uint8_t colors_ = 0;
    uint8_t sizes_ = 0;
};

/// Builds the product set of three per-attribute constraints.
///
/// Each constraint is a literal label, "any" (the DSL's `~`), "not_<label>",
/// or a disjunction "a|b|...|k" of labels from that attribute's domain.
/// Unknown labels raise ParseError naming the attribute and the bad token.
ProductDescriptor product_from_constraints(std::string_view shape_constraint,
                                           std::string_view color_constraint,
                                           std::string_view size_constraint);

/// The flat-mask view of the same product (see ProductDescriptor::mask).
AtomDescriptor descriptor_from_constraints(std::string_view shape_constraint,
                                           std::string_view color_constraint,
                                           std::string_view size_constraint);

}  // namespace kandy

#endif
