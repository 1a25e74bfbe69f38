#ifndef KANDY_PNG_IO_HPP
#define KANDY_PNG_IO_HPP

#include <string>

#include "kandy/renderer.hpp"

namespace kandy {

/// Writes an image as 8-bit RGB PNG (no alpha, no ancillary chunks), so the
/// encoded bytes are a pure function of the pixel data.
void write_png(const std::string& path, const Image& image);

/// Reads an RGB(A)/gray PNG back as 8-bit RGB.
Image read_png(const std::string& path);

struct PngInfo {
    int width = 0;
    int height = 0;
    int bit_depth = 0;
    int channels = 0;
};

/// Header-only probe (cheap dimension check without full decode).
PngInfo read_png_info(const std::string& path);

}  // namespace kandy

#endif
