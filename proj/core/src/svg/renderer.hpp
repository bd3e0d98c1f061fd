#pragma once

#include <string>
#include <string_view>

#include "mmzero/image.hpp"
#include "svg/dom.hpp"
#include "svg/geometry.hpp"

namespace mmzero::svg {

struct Viewport {
  int width = 0;
  int height = 0;
  double exact_width = 0;   // before rounding up to whole pixels
  double exact_height = 0;
  Affine root;              // user space of the root element to device pixels
};

struct RenderFailure {
  std::string message;
};

// Output size and root transform from width/height/viewBox/preserveAspectRatio.
// Missing sizes fall back to the viewBox, then to 300 x 150.
Viewport compute_viewport(const Document& doc);

// Draws the document onto a white canvas of the viewport size. Throws
// RenderTimeout or RenderFailure.
RgbImage draw_document(const Document& doc, const Viewport& vp, Deadline& deadline);

}  // namespace mmzero::svg
