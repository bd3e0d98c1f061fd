#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mmzero/error.hpp"

namespace mmzero {

// 8-bit RGB raster, row-major, no padding.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  RgbImage() = default;
  RgbImage(int w, int h, std::uint8_t fill = 255)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3, fill) {}

  std::uint8_t* at(int x, int y) {
    return pixels.data() + (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) * 3;
  }
  const std::uint8_t* at(int x, int y) const {
    return pixels.data() + (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) * 3;
  }
};

class PngError : public Error {
 public:
  using Error::Error;
};

// Deterministic encoding: fixed compression level and filter, no metadata
// chunks, so equal pixels give equal bytes.
std::vector<std::uint8_t> encode_png(const RgbImage& image);

struct DecodedPng {
  int width = 0;
  int height = 0;
  int channels = 0;  // after expansion to 8-bit: 1..4
  std::vector<std::uint8_t> pixels;
};

// Throws PngError on anything that is not a valid PNG.
DecodedPng decode_png(std::span<const std::uint8_t> bytes);

std::string base64_encode(std::span<const std::uint8_t> bytes);
// Strict RFC 4648 decoding (padded, no whitespace); nullopt on malformed input.
std::optional<std::vector<std::uint8_t>> base64_decode(std::string_view text);

}  // namespace mmzero
