#!/usr/bin/env python3
"""Generate core/src/font_atlas.inc from DejaVu Sans.

The atlas holds 8-bit coverage bitmaps for printable ASCII plus a handful of
Latin-1 symbols that show up in chart labels. Metrics are in atlas pixels at
EM_PX pixels per em. Re-run only when changing the glyph set or size:

    python3 tools/gen_font_atlas.py /usr/share/fonts/truetype/dejavu/DejaVuSans.ttf
"""
import sys
from pathlib import Path

from PIL import Image, ImageDraw, ImageFont

EM_PX = 40
EXTRA = "°±×÷µ²³·–—•€£¥"


def main() -> None:
    font_path = sys.argv[1]
    out = Path(__file__).resolve().parent.parent / "core" / "src" / "font_atlas.inc"
    font = ImageFont.truetype(font_path, EM_PX)
    ascent, descent = font.getmetrics()
    chars = [chr(c) for c in range(32, 127)] + list(EXTRA)

    lines = [
        "// Generated by tools/gen_font_atlas.py from DejaVu Sans. Do not edit.",
        f"constexpr int kAtlasEmPx = {EM_PX};",
        f"constexpr int kAtlasAscent = {ascent};",
        f"constexpr int kAtlasDescent = {descent};",
    ]
    glyphs = []
    pixels = []
    for ch in chars:
        advance = font.getlength(ch)
        # Draw on a padded canvas with the baseline origin at (pad, pad) and
        # take the tight ink box, so left/top are offsets from the origin.
        pad = 2 * EM_PX
        canvas = Image.new("L", (4 * EM_PX, 4 * EM_PX), 0)
        ImageDraw.Draw(canvas).text((pad, pad), ch, font=font, fill=255, anchor="ls")
        box = canvas.getbbox()
        offset = len(pixels)
        if box is None:
            left = top = w = h = 0
        else:
            left, top = box[0] - pad, box[1] - pad
            w, h = box[2] - box[0], box[3] - box[1]
            pixels.extend(canvas.crop(box).tobytes())
        glyphs.append((ord(ch), advance, left, top, w, h, offset))

    lines.append("constexpr AtlasGlyph kAtlasGlyphs[] = {")
    for cp, adv, left, top, w, h, off in glyphs:
        lines.append(f"    {{{cp}, {adv:.4f}f, {left}, {top}, {w}, {h}, {off}}},")
    lines.append("};")
    lines.append("constexpr unsigned char kAtlasPixels[] = {")
    for i in range(0, len(pixels), 24):
        lines.append("    " + ",".join(str(p) for p in pixels[i:i + 24]) + ",")
    lines.append("};")
    out.write_text("\n".join(lines) + "\n")
    print(f"wrote {out} ({len(glyphs)} glyphs, {len(pixels)} bytes)")


if __name__ == "__main__":
    main()
