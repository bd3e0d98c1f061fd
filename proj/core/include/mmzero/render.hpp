#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mmzero/error.hpp"

namespace mmzero {

struct SvgSource {
  std::string markup;  // starts with "<svg"
  std::string origin;  // rollout identifier
};

// First ```svg fenced block, else the first <svg ...>...</svg> element.
// nullopt when neither is present.
std::optional<SvgSource> extract_svg(std::string_view raw, std::string origin = {});

enum class RenderStatus { ok, syntax_error, render_error, timeout, invalid_dimensions };

std::string_view to_string(RenderStatus s);
RenderStatus parse_render_status(std::string_view s);

struct RenderLimits {
  double max_aspect_ratio = 100.0;
  int max_dimension = 16384;
  std::chrono::milliseconds timeout{30000};
  int workers = 4;

  void validate() const;
};

struct RenderOutcome {
  RenderStatus status = RenderStatus::render_error;
  std::vector<std::uint8_t> png;  // non-empty iff status == ok
  int width = 0;
  int height = 0;
  std::chrono::milliseconds elapsed{0};
  std::string detail;

  bool ok() const { return status == RenderStatus::ok; }
};

// Never throws: every failure is reported through RenderOutcome::status.
RenderOutcome render_svg(const SvgSource& src, const RenderLimits& limits);

// Renders each source on a pool of limits.workers threads. Output order matches
// input order. Throws UsageError on an empty list.
std::vector<RenderOutcome> render_batch(std::span<const SvgSource> sources, const RenderLimits& limits);

class NotRenderedError : public Error {
 public:
  NotRenderedError() : Error("outcome has no rendered image") {}
};

// RFC 4648 base64 (padded) of the PNG bytes. Throws NotRenderedError unless ok.
std::string encode_png_base64(const RenderOutcome& outcome);

}  // namespace mmzero
