#pragma once

#include <string_view>
#include <vector>

#include "mmzero/image.hpp"
#include "svg/geometry.hpp"
#include "svg/raster.hpp"

namespace mmzero::svg {

// Advance width of UTF-8 text at the given font size, in user units.
double text_advance(std::string_view utf8, double font_size);

// Ascent of the embedded font as a fraction of the font size.
double font_ascent_ratio();
double font_descent_ratio();

// Coverage of the text run whose baseline starts at `origin` (user space),
// drawn through `ctm` into a canvas of the given size. `bold` thickens glyphs
// slightly.
CoverageMask text_coverage(std::string_view utf8, Point origin, double font_size, const Affine& ctm, bool bold,
                           int canvas_w, int canvas_h, Deadline& deadline);

// Decodes UTF-8; malformed bytes become U+FFFD.
std::vector<char32_t> decode_utf8(std::string_view s);

}  // namespace mmzero::svg
