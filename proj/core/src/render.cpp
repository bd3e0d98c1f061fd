#include "mmzero/render.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "mmzero/image.hpp"
#include "svg/dom.hpp"
#include "svg/renderer.hpp"

namespace mmzero {

namespace {

std::optional<std::size_t> matching_close(std::string_view raw, std::size_t open) {
  // Tracks nested <svg> elements so the outer element is returned whole.
  int depth = 0;
  std::size_t pos = open;
  while (pos < raw.size()) {
    const auto next_open = raw.find("<svg", pos);
    const auto next_close = raw.find("</svg>", pos);
    if (next_open != std::string_view::npos && next_open < next_close) {
      const auto gt = raw.find('>', next_open);
      if (gt == std::string_view::npos) return std::nullopt;
      if (raw[gt - 1] == '/') {
        pos = gt + 1;  // self-closing <svg/>
        if (depth == 0) return pos;
        continue;
      }
      ++depth;
      pos = gt + 1;
    } else if (next_close != std::string_view::npos) {
      --depth;
      pos = next_close + 6;
      if (depth == 0) return pos;
    } else {
      return std::nullopt;
    }
  }
  return std::nullopt;
}

std::optional<std::string> element_in(std::string_view text) {
  const auto open = text.find("<svg");
  if (open == std::string_view::npos) return std::nullopt;
  const auto end = matching_close(text, open);
  if (!end) return std::nullopt;
  return std::string(text.substr(open, *end - open));
}

}  // namespace

std::optional<SvgSource> extract_svg(std::string_view raw, std::string origin) {
  const auto fence = raw.find("```svg");
  if (fence != std::string_view::npos) {
    auto body_start = raw.find('\n', fence);
    if (body_start != std::string_view::npos) {
      ++body_start;
      const auto close = raw.find("```", body_start);
      std::string_view body = raw.substr(body_start, close == std::string_view::npos ? raw.npos : close - body_start);
      if (auto el = element_in(body)) return SvgSource{std::move(*el), std::move(origin)};
    }
  }
  if (auto el = element_in(raw)) return SvgSource{std::move(*el), std::move(origin)};
  return std::nullopt;
}

std::string_view to_string(RenderStatus s) {
  switch (s) {
    case RenderStatus::ok: return "ok";
    case RenderStatus::syntax_error: return "syntax_error";
    case RenderStatus::render_error: return "render_error";
    case RenderStatus::timeout: return "timeout";
    case RenderStatus::invalid_dimensions: return "invalid_dimensions";
  }
  return "render_error";
}

RenderStatus parse_render_status(std::string_view s) {
  for (auto st : {RenderStatus::ok, RenderStatus::syntax_error, RenderStatus::render_error, RenderStatus::timeout,
                  RenderStatus::invalid_dimensions}) {
    if (to_string(st) == s) return st;
  }
  throw UsageError("unknown render status '" + std::string(s) + "'");
}

void RenderLimits::validate() const {
  if (!(max_aspect_ratio > 0) || max_dimension <= 0 || timeout.count() <= 0 || workers <= 0) {
    throw ConfigError("render limits must all be strictly positive");
  }
}

RenderOutcome render_svg(const SvgSource& src, const RenderLimits& limits) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  svg::Deadline deadline(start + limits.timeout);
  RenderOutcome out;
  auto finish = [&](RenderStatus status, std::string detail) {
    out.status = status;
    out.detail = std::move(detail);
    if (status != RenderStatus::ok) out.png.clear();
    out.elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(clock::now() - start);
    return out;
  };
  try {
    svg::Document doc;
    try {
      doc = svg::parse_document(src.markup, deadline);
    } catch (const svg::XmlSyntaxError& e) {
      return finish(RenderStatus::syntax_error, e.message);
    }
    const auto vp = svg::compute_viewport(doc);
    out.width = vp.width;
    out.height = vp.height;
    // Checked before allocating the canvas; the outcome equals checking the
    // rasterized image because the canvas size is exactly the viewport size.
    if (vp.width <= 0 || vp.height <= 0) {
      return finish(RenderStatus::invalid_dimensions, "empty output image");
    }
    if (vp.width > limits.max_dimension || vp.height > limits.max_dimension) {
      return finish(RenderStatus::invalid_dimensions, "dimension exceeds " + std::to_string(limits.max_dimension));
    }
    const double aspect =
        static_cast<double>(std::max(vp.width, vp.height)) / static_cast<double>(std::min(vp.width, vp.height));
    if (aspect > limits.max_aspect_ratio) {
      return finish(RenderStatus::invalid_dimensions, "aspect ratio " + std::to_string(aspect) + " too large");
    }
    const RgbImage img = svg::draw_document(doc, vp, deadline);
    deadline.check();
    out.png = encode_png(img);
    return finish(RenderStatus::ok, "");
  } catch (const svg::RenderTimeout&) {
    return finish(RenderStatus::timeout, "exceeded " + std::to_string(limits.timeout.count()) + " ms");
  } catch (const svg::RenderFailure& e) {
    return finish(RenderStatus::render_error, e.message);
  } catch (const std::bad_alloc&) {
    return finish(RenderStatus::render_error, "out of memory");
  } catch (const std::exception& e) {
    return finish(RenderStatus::render_error, e.what());
  } catch (...) {
    return finish(RenderStatus::render_error, "unknown failure");
  }
}

std::vector<RenderOutcome> render_batch(std::span<const SvgSource> sources, const RenderLimits& limits) {
  if (sources.empty()) throw UsageError("render_batch needs at least one source");
  limits.validate();
  std::vector<RenderOutcome> out(sources.size());
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(limits.workers), sources.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < sources.size(); i = next++) out[i] = render_svg(sources[i], limits);
  };
  if (workers <= 1) {
    work();
    return out;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  pool.clear();
  return out;
}

std::string encode_png_base64(const RenderOutcome& outcome) {
  if (!outcome.ok() || outcome.png.empty()) throw NotRenderedError();
  return base64_encode(outcome.png);
}

}  // namespace mmzero
