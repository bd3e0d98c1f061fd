#pragma once

#include <optional>
#include <string_view>

namespace mmzero::svg {

struct Rgba {
  double r = 0, g = 0, b = 0, a = 1;  // components in [0, 1]
};

// #rgb, #rgba, #rrggbb, #rrggbbaa, rgb()/rgba() with numbers or percentages,
// hsl()/hsla(), CSS named colors and "transparent". nullopt if unrecognised.
std::optional<Rgba> parse_color(std::string_view text);

}  // namespace mmzero::svg
