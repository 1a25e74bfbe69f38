#ifndef KANDY_RENDERER_HPP
#define KANDY_RENDERER_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "kandy/symbol_tree.hpp"
#include "kandy/task_dsl.hpp"

namespace kandy {

using Rgb = std::array<uint8_t, 3>;

/// Pixel rectangle, half-open on both axes.
struct Box {
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    int width() const { return x1 - x0; }
    int height() const { return y1 - y0; }
    bool overlaps(const Box& o) const {
        return x0 < o.x1 && o.x0 < x1 && y0 < o.y1 && o.y0 < y1;
    }
    bool operator==(const Box&) const = default;
};

struct RenderConfig {
    int resolution = 224;
    Rgb background = {128, 128, 128};
    int small_px = 10;
    int large_px = 25;
    bool noise = true;
    NoiseConfig noise_params;
    std::array<Rgb, kColorCount> palette = {{
        {255, 0, 0},      // red
        {0, 255, 0},      // green
        {0, 0, 255},      // blue
        {0, 255, 255},    // cyan
        {255, 0, 255},    // magenta
        {255, 255, 0},    // yellow
    }};

    static RenderConfig from_curriculum(const CurriculumConfig& cfg);
    int nominal_size(Size s) const { return s == Size::small ? small_px : large_px; }
};

/// 8-bit RGB raster, row-major, no alpha.
class Image {
public:
    Image(int width, int height, Rgb fill);

    int width() const { return width_; }
    int height() const { return height_; }
    const std::vector<uint8_t>& bytes() const { return data_; }

    Rgb pixel(int x, int y) const {
        size_t i = idx(x, y);
        return {data_[i], data_[i + 1], data_[i + 2]};
    }
    void set_pixel(int x, int y, Rgb c) {
        if (x < 0 || y < 0 || x >= width_ || y >= height_) return;
        size_t i = idx(x, y);
        data_[i] = c[0];
        data_[i + 1] = c[1];
        data_[i + 2] = c[2];
    }

    bool operator==(const Image&) const = default;

private:
    size_t idx(int x, int y) const {
        return (static_cast<size_t>(y) * static_cast<size_t>(width_) + static_cast<size_t>(x)) * 3;
    }
    int width_;
    int height_;
    std::vector<uint8_t> data_;
};

/// Splits a drawing area into n child areas per the operator's layout
/// semantics. Only `random` consumes rng. Child areas of stack-like splits
/// use integer boundaries floor(i*extent/n), so slab extents differ by at
/// most one pixel.
std::vector<Box> layout(CompOp op, int child_count, const Box& area, Rng& rng);

/// Grid side length: the smallest m with m*m >= child_count (row-major
/// fill, incomplete last row allowed).
int grid_side(int child_count);

struct AtomAppearance {
    Rgb color;
    int size_px;
};

/// Applies the configured perceptual noise to one atom: additive uniform
/// integer size jitter, zero-mean gaussian HSV color noise (hue wraps,
/// saturation/value clamp). With noise disabled returns nominals exactly
/// and consumes no rng.
AtomAppearance perturb_atom(Atom atom, const RenderConfig& config, Rng& rng);

/// Rasterizes a grounded tree. Atoms draw at their nominal size regardless
/// of depth, centered in their leaf box; children draw in list order
/// (left-to-right / top-to-bottom), later children over earlier ones.
Image render(const SymbolTree& tree, const RenderConfig& config, Rng& rng);

// HSV <-> RGB on [0,1] components (hue in [0,1)); exposed for tests.
std::array<double, 3> rgb_to_hsv(Rgb c);
Rgb hsv_to_rgb(const std::array<double, 3>& hsv);

}  // namespace kandy

#endif
