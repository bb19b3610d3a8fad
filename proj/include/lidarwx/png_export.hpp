#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <png.h>

#include "lidarwx/error.hpp"
#include "lidarwx/grid.hpp"

namespace lidarwx {

struct PngScaling {
  float min = 0.0f;
  float max = 0.0f;
};

/// Writes one channel as an 8-bit grayscale PNG for inspection. Values are
/// mapped linearly from [min, max] of the valid pixels to [0, 255]; the
/// bounds are stored in tEXt chunks "lidarwx.min" / "lidarwx.max".
inline PngScaling export_png(const Grid<float>& plane, const std::filesystem::path& path,
                             const Grid<std::uint8_t>* mask = nullptr) {
  if (mask) require_same_shape(plane, *mask, "export_png");
  PngScaling sc{std::numeric_limits<float>::infinity(), -std::numeric_limits<float>::infinity()};
  for (std::size_t i = 0; i < plane.size(); ++i) {
    if (mask && !(*mask)[i]) continue;
    sc.min = std::min(sc.min, plane[i]);
    sc.max = std::max(sc.max, plane[i]);
  }
  if (sc.min > sc.max) sc = {0.0f, 0.0f};
  const float span = sc.max - sc.min;

  std::vector<png_byte> pixels(plane.size(), 0);
  for (std::size_t i = 0; i < plane.size(); ++i) {
    if (mask && !(*mask)[i]) continue;
    const float t = span > 0.0f ? (plane[i] - sc.min) / span : 0.0f;
    pixels[i] = static_cast<png_byte>(std::lround(std::clamp(t, 0.0f, 1.0f) * 255.0f));
  }

  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.string().c_str(), "wb"), &std::fclose);
  if (!fp) throw IoError("cannot open " + path.string() + " for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng failed while writing " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(plane.width()), static_cast<png_uint_32>(plane.height()), 8,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  std::string smin = std::to_string(sc.min), smax = std::to_string(sc.max);
  png_text text[2] = {};
  text[0].compression = PNG_TEXT_COMPRESSION_NONE;
  text[0].key = const_cast<char*>("lidarwx.min");
  text[0].text = smin.data();
  text[1].compression = PNG_TEXT_COMPRESSION_NONE;
  text[1].key = const_cast<char*>("lidarwx.max");
  text[1].text = smax.data();
  png_set_text(png, info, text, 2);
  png_write_info(png, info);
  for (std::size_t r = 0; r < plane.height(); ++r) png_write_row(png, &pixels[r * plane.width()]);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return sc;
}

}  // namespace lidarwx
