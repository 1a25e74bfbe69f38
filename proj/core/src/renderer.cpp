#include "kandy/renderer.hpp"

#include <algorithm>
#include <cmath>

#include "kandy/errors.hpp"

namespace kandy {

RenderConfig RenderConfig::from_curriculum(const CurriculumConfig& cfg) {
    RenderConfig rc;
    rc.resolution = cfg.resolution;
    rc.background = cfg.background;
    rc.small_px = cfg.small_px;
    rc.large_px = cfg.large_px;
    rc.noise_params = cfg.noise;
    return rc;
}

Image::Image(int width, int height, Rgb fill) : width_(width), height_(height) {
    data_.resize(static_cast<size_t>(width) * static_cast<size_t>(height) * 3);
    for (size_t i = 0; i < data_.size(); i += 3) {
        data_[i] = fill[0];
        data_[i + 1] = fill[1];
        data_[i + 2] = fill[2];
    }
}

int grid_side(int child_count) {
    int m = 1;
    while (m * m < child_count) ++m;
    return m;
}

namespace {

Box quadrant_box(CompOp op, const Box& a) {
    int xm = a.x0 + a.width() / 2;
    int ym = a.y0 + a.height() / 2;
    switch (op) {
        case CompOp::quadrant_ul: return {a.x0, a.y0, xm, ym};
        case CompOp::quadrant_ur: return {xm, a.y0, a.x1, ym};
        case CompOp::quadrant_ll: return {a.x0, ym, xm, a.y1};
        case CompOp::quadrant_lr: return {xm, ym, a.x1, a.y1};
        default: throw Error("not a quadrant operator");
    }
}

Box centered_square(const Box& cell) {
    int side = std::min(cell.width(), cell.height());
    int x0 = cell.x0 + (cell.width() - side) / 2;
    int y0 = cell.y0 + (cell.height() - side) / 2;
    return {x0, y0, x0 + side, y0 + side};
}

}  // namespace

std::vector<Box> layout(CompOp op, int n, const Box& area, Rng& rng) {
    if (n < 1) throw Error("layout requires at least one child");
    std::vector<Box> boxes;
    boxes.reserve(static_cast<size_t>(n));
    const int w = area.width();
    const int h = area.height();

    switch (op) {
        case CompOp::in:
            boxes.assign(static_cast<size_t>(n), area);
            break;
        case CompOp::quadrant_ul:
        case CompOp::quadrant_ur:
        case CompOp::quadrant_ll:
        case CompOp::quadrant_lr:
            boxes.assign(static_cast<size_t>(n), quadrant_box(op, area));
            break;
        case CompOp::stack:
        case CompOp::stack_reduce_bb:
            for (int i = 0; i < n; ++i) {
                Box slab{area.x0, area.y0 + i * h / n, area.x1, area.y0 + (i + 1) * h / n};
                boxes.push_back(op == CompOp::stack ? slab : centered_square(slab));
            }
            break;
        case CompOp::side_by_side:
        case CompOp::side_by_side_reduce_bb:
            for (int i = 0; i < n; ++i) {
                Box slab{area.x0 + i * w / n, area.y0, area.x0 + (i + 1) * w / n, area.y1};
                boxes.push_back(op == CompOp::side_by_side ? slab : centered_square(slab));
            }
            break;
        case CompOp::diag_ul_lr:
            for (int i = 0; i < n; ++i) {
                boxes.push_back({area.x0 + i * w / n, area.y0 + i * h / n,
                                 area.x0 + (i + 1) * w / n, area.y0 + (i + 1) * h / n});
            }
            break;
        case CompOp::diag_ll_ur:
            for (int i = 0; i < n; ++i) {
                int j = n - 1 - i;
                boxes.push_back({area.x0 + i * w / n, area.y0 + j * h / n,
                                 area.x0 + (i + 1) * w / n, area.y0 + (j + 1) * h / n});
            }
            break;
        case CompOp::grid: {
            int m = grid_side(n);
            for (int i = 0; i < n; ++i) {
                int r = i / m;
                int c = i % m;
                boxes.push_back({area.x0 + c * w / m, area.y0 + r * h / m,
                                 area.x0 + (c + 1) * w / m, area.y0 + (r + 1) * h / m});
            }
            break;
        }
        case CompOp::random: {
            // Greedy rejection against overlap, bounded attempts; the last
            // attempt is accepted regardless (overlaps are tolerated in
            // crowded scenes).
            int m = grid_side(n);
            int bw = std::max(1, w / m);
            int bh = std::max(1, h / m);
            for (int i = 0; i < n; ++i) {
                Box candidate{};
                for (int attempt = 0; attempt < 100; ++attempt) {
                    int rx = area.x0 + (w > bw ? static_cast<int>(rng.index(static_cast<size_t>(w - bw + 1))) : 0);
                    int ry = area.y0 + (h > bh ? static_cast<int>(rng.index(static_cast<size_t>(h - bh + 1))) : 0);
                    candidate = Box{rx, ry, rx + bw, ry + bh};
                    bool clash = false;
                    for (const Box& b : boxes) {
                        if (candidate.overlaps(b)) {
                            clash = true;
                            break;
                        }
                    }
                    if (!clash) break;
                }
                boxes.push_back(candidate);
            }
            break;
        }
    }
    return boxes;
}

std::array<double, 3> rgb_to_hsv(Rgb c) {
    double r = c[0] / 255.0, g = c[1] / 255.0, b = c[2] / 255.0;
    double mx = std::max({r, g, b});
    double mn = std::min({r, g, b});
    double d = mx - mn;
    double h = 0.0;
    if (d > 0.0) {
        if (mx == r) {
            h = (g - b) / d;
            if (h < 0) h += 6.0;
        } else if (mx == g) {
            h = (b - r) / d + 2.0;
        } else {
            h = (r - g) / d + 4.0;
        }
        h /= 6.0;
    }
    double s = mx == 0.0 ? 0.0 : d / mx;
    return {h, s, mx};
}

Rgb hsv_to_rgb(const std::array<double, 3>& hsv) {
    double h = hsv[0], s = hsv[1], v = hsv[2];
    double hh = h * 6.0;
    int i = static_cast<int>(std::floor(hh)) % 6;
    double f = hh - std::floor(hh);
    double p = v * (1.0 - s);
    double q = v * (1.0 - s * f);
    double t = v * (1.0 - s * (1.0 - f));
    double r, g, b;
    switch (i) {
        case 0: r = v; g = t; b = p; break;
        case 1: r = q; g = v; b = p; break;
        case 2: r = p; g = v; b = t; break;
        case 3: r = p; g = q; b = v; break;
        case 4: r = t; g = p; b = v; break;
        default: r = v; g = p; b = q; break;
    }
    auto to8 = [](double x) {
        int vi = static_cast<int>(std::lround(x * 255.0));
        return static_cast<uint8_t>(std::clamp(vi, 0, 255));
    };
    return {to8(r), to8(g), to8(b)};
}

AtomAppearance perturb_atom(Atom atom, const RenderConfig& config, Rng& rng) {
    Rgb nominal = config.palette[static_cast<size_t>(atom.color)];
    int size = config.nominal_size(atom.size);
    if (!config.noise) return {nominal, size};

    const NoiseConfig& nz = config.noise_params;
    if (nz.size_jitter > 0) {
        size += static_cast<int>(rng.int_range(-nz.size_jitter, nz.size_jitter));
    }
    size = std::max(1, size);

    auto hsv = rgb_to_hsv(nominal);
    double h = hsv[0] + rng.gaussian(nz.sigma_h);
    h -= std::floor(h);  // hue is an angle, wrap mod 1
    double s = std::clamp(hsv[1] + rng.gaussian(nz.sigma_s), 0.0, 1.0);
    double v = std::clamp(hsv[2] + rng.gaussian(nz.sigma_v), 0.0, 1.0);
    return {hsv_to_rgb({h, s, v}), size};
}

namespace {

void draw_atom(Image& img, const Box& box, Atom atom, const AtomAppearance& look) {
    int s = look.size_px;
    int cx = box.x0 + box.width() / 2;
    int cy = box.y0 + box.height() / 2;
    int left = cx - s / 2;
    int top = cy - s / 2;
    double ccx = left + s / 2.0;
    double ccy = top + s / 2.0;
    double radius = s / 2.0;

    switch (atom.shape) {
        case Shape::square:
            for (int y = top; y < top + s; ++y) {
                for (int x = left; x < left + s; ++x) img.set_pixel(x, y, look.color);
            }
            break;
        case Shape::circle:
            for (int y = top; y < top + s; ++y) {
                for (int x = left; x < left + s; ++x) {
                    double dx = x + 0.5 - ccx;
                    double dy = y + 0.5 - ccy;
                    if (dx * dx + dy * dy <= radius * radius) img.set_pixel(x, y, look.color);
                }
            }
            break;
        case Shape::triangle:
            // Upward isoceles triangle inscribed in the size box.
            for (int y = top; y < top + s; ++y) {
                double t = (y + 0.5 - top) / s;
                if (t < 0.0 || t > 1.0) continue;
                double half = t * s / 2.0;
                for (int x = left; x < left + s; ++x) {
                    double dx = std::abs(x + 0.5 - ccx);
                    if (dx <= half) img.set_pixel(x, y, look.color);
                }
            }
            break;
    }
}

void draw_tree(Image& img, const SymbolTree& tree, const Box& box, const RenderConfig& config,
               Rng& rng) {
    if (tree.is_leaf()) {
        AtomAppearance look = perturb_atom(tree.atom(), config, rng);
        draw_atom(img, box, tree.atom(), look);
        return;
    }
    auto boxes = layout(tree.op(), static_cast<int>(tree.children().size()), box, rng);
    for (size_t i = 0; i < tree.children().size(); ++i) {
        draw_tree(img, tree.children()[i], boxes[i], config, rng);
    }
}

}  // namespace

Image render(const SymbolTree& tree, const RenderConfig& config, Rng& rng) {
    Image img(config.resolution, config.resolution, config.background);
    Box full{0, 0, config.resolution, config.resolution};
    draw_tree(img, tree, full, config, rng);
    return img;
}

}  // namespace kandy
