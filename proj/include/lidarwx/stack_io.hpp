#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "lidarwx/detail/bytes.hpp"
#include "lidarwx/error.hpp"
#include "lidarwx/projection.hpp"

namespace lidarwx {

// Stack container, all fields little-endian:
//
//   char[4]  magic "LWXS"
//   u32      version (1)
//   u32      width, height
//   f32      fov_up_deg, fov_down_deg
//   u32      n_points        source points (0 for image-only files)
//   u32      n_channels
//   n_channels x { char[16] name (NUL padded), f32 scale }
//   n_channels x f32[height*width]   row-major planes, in header order
//   u32[height*width]                index plane, 0xFFFFFFFF = none
//   u32      n_shadow
//   n_shadow x { u32 point_index, u32 pixel }
//
// Core channels are named range, incidence, reflectance, intensity, mask
// (mask stored as 0.0 / 1.0). Any other name is an extra channel.

inline constexpr std::array<char, 4> kStackMagic{'L', 'W', 'X', 'S'};
inline constexpr std::uint32_t kStackVersion = 1;
inline constexpr std::size_t kChannelNameBytes = 16;

namespace detail {

inline void put_name(std::vector<std::byte>& out, std::string_view name) {
  if (name.empty() || name.size() >= kChannelNameBytes) {
    throw ContractError("channel name '" + std::string(name) + "' must have 1..15 characters");
  }
  for (std::size_t k = 0; k < kChannelNameBytes; ++k) {
    out.push_back(static_cast<std::byte>(k < name.size() ? name[k] : '\0'));
  }
}

inline std::string get_name(std::span<const std::byte> in, std::size_t off) {
  std::string s;
  for (std::size_t k = 0; k < kChannelNameBytes; ++k) {
    const char c = static_cast<char>(in[off + k]);
    if (c == '\0') break;
    s.push_back(c);
  }
  return s;
}

}  // namespace detail

struct StackChannelInfo {
  std::string name;
  float scale = 1.0f;
};

/// Serializes `s`. When `channels` is non-empty only those channel names
/// are written (core or extra), in the given order.
inline std::vector<std::byte> encode_stack(const RangeImageStack& s,
                                           const std::vector<std::string>& channels = {}) {
  const std::size_t hw = s.cfg.height * s.cfg.width;
  Grid<float> mask_f(s.cfg.height, s.cfg.width);
  for (std::size_t i = 0; i < hw; ++i) mask_f[i] = s.mask[i] ? 1.0f : 0.0f;

  struct Entry {
    std::string name;
    const Grid<float>* plane;
    float scale;
  };
  auto lookup = [&](const std::string& name) -> Entry {
    if (name == "range") return {name, &s.range, 1.0f};
    if (name == "incidence") return {name, &s.incidence, 1.0f};
    if (name == "reflectance") return {name, &s.reflectance, 1.0f};
    if (name == "intensity") return {name, &s.intensity, 1.0f};
    if (name == "mask") return {name, &mask_f, 1.0f};
    if (const auto* e = s.find_extra(name)) return {name, &e->plane, e->scale};
    throw ContractError("stack has no channel '" + name + "'");
  };

  std::vector<Entry> entries;
  if (channels.empty()) {
    for (const char* n : {"range", "incidence", "reflectance", "intensity", "mask"}) entries.push_back(lookup(n));
    for (const auto& e : s.extra) entries.push_back({e.name, &e.plane, e.scale});
  } else {
    for (const auto& n : channels) entries.push_back(lookup(n));
  }
  for (const auto& e : entries) {
    if (e.plane->size() != hw) throw ContractError("channel '" + e.name + "' has the wrong shape");
  }
  if (s.index_map.size() != hw) throw ContractError("index map has the wrong shape");

  std::vector<std::byte> out;
  out.reserve(40 + entries.size() * (20 + 4 * hw) + 4 * hw + 8 * s.shadow.size());
  for (char c : kStackMagic) out.push_back(static_cast<std::byte>(c));
  detail::put_u32(out, kStackVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(s.cfg.width));
  detail::put_u32(out, static_cast<std::uint32_t>(s.cfg.height));
  detail::put_f32(out, static_cast<float>(s.cfg.fov_up_deg));
  detail::put_f32(out, static_cast<float>(s.cfg.fov_down_deg));
  detail::put_u32(out, static_cast<std::uint32_t>(s.n_points()));
  detail::put_u32(out, static_cast<std::uint32_t>(entries.size()));
  for (const auto& e : entries) {
    detail::put_name(out, e.name);
    detail::put_f32(out, e.scale);
  }
  for (const auto& e : entries) {
    for (float v : e.plane->data()) detail::put_f32(out, v);
  }
  for (std::uint32_t v : s.index_map.data()) detail::put_u32(out, v);
  detail::put_u32(out, static_cast<std::uint32_t>(s.shadow.size()));
  for (std::uint32_t i : s.shadow) {
    detail::put_u32(out, i);
    detail::put_u32(out, s.point_pixel.at(i));
  }
  return out;
}

/// Inverse of encode_stack. Core channels absent from the file are left
/// zero-filled; `channels_read` reports what the file actually contained.
inline RangeImageStack decode_stack(std::span<const std::byte> in,
                                    std::vector<StackChannelInfo>* channels_read = nullptr) {
  auto need = [&](std::size_t off, std::size_t n) {
    if (off + n > in.size()) throw FormatError("stack container truncated at byte " + std::to_string(off));
  };
  need(0, 32);
  for (std::size_t k = 0; k < 4; ++k) {
    if (static_cast<char>(in[k]) != kStackMagic[k]) throw FormatError("bad stack magic");
  }
  const std::uint32_t version = detail::get_u32(in, 4);
  if (version != kStackVersion) throw FormatError("unsupported stack version " + std::to_string(version));

  RangeImageStack s;
  s.cfg.width = detail::get_u32(in, 8);
  s.cfg.height = detail::get_u32(in, 12);
  s.cfg.fov_up_deg = detail::get_f32(in, 16);
  s.cfg.fov_down_deg = detail::get_f32(in, 20);
  const std::uint32_t n_points = detail::get_u32(in, 24);
  const std::uint32_t n_channels = detail::get_u32(in, 28);
  try {
    s.cfg.validate();
  } catch (const ContractError& e) {
    throw FormatError(std::string("invalid stack geometry: ") + e.what());
  }
  const std::size_t h = s.cfg.height, w = s.cfg.width, hw = h * w;

  std::size_t off = 32;
  need(off, static_cast<std::size_t>(n_channels) * 20);
  std::vector<StackChannelInfo> infos(n_channels);
  for (auto& info : infos) {
    info.name = detail::get_name(in, off);
    info.scale = detail::get_f32(in, off + kChannelNameBytes);
    off += 20;
  }

  s.range = Grid<float>(h, w);
  s.incidence = Grid<float>(h, w);
  s.reflectance = Grid<float>(h, w);
  s.intensity = Grid<float>(h, w);
  s.mask = Grid<std::uint8_t>(h, w);
  need(off, static_cast<std::size_t>(n_channels) * 4 * hw + 4 * hw + 4);
  for (const auto& info : infos) {
    Grid<float> plane(h, w);
    for (std::size_t i = 0; i < hw; ++i, off += 4) plane[i] = detail::get_f32(in, off);
    if (info.name == "range") s.range = std::move(plane);
    else if (info.name == "incidence") s.incidence = std::move(plane);
    else if (info.name == "reflectance") s.reflectance = std::move(plane);
    else if (info.name == "intensity") s.intensity = std::move(plane);
    else if (info.name == "mask") {
      for (std::size_t i = 0; i < hw; ++i) s.mask[i] = plane[i] != 0.0f;
    } else {
      s.extra.push_back({info.name, std::move(plane), info.scale});
    }
  }

  s.index_map = Grid<std::uint32_t>(h, w);
  constexpr std::uint32_t unset = RangeImageStack::kNoIndex;
  s.point_pixel.assign(n_points, unset);
  for (std::size_t i = 0; i < hw; ++i, off += 4) {
    const std::uint32_t idx = detail::get_u32(in, off);
    s.index_map[i] = idx;
    if (idx == unset) continue;
    if (idx >= n_points || s.point_pixel[idx] != unset) {
      throw FormatError("index plane entry " + std::to_string(i) + " is out of range or duplicated");
    }
    s.point_pixel[idx] = static_cast<std::uint32_t>(i);
  }
  const std::uint32_t n_shadow = detail::get_u32(in, off);
  off += 4;
  need(off, static_cast<std::size_t>(n_shadow) * 8);
  for (std::uint32_t k = 0; k < n_shadow; ++k, off += 8) {
    const std::uint32_t idx = detail::get_u32(in, off);
    const std::uint32_t pix = detail::get_u32(in, off + 4);
    if (idx >= n_points || pix >= hw || s.point_pixel[idx] != unset) {
      throw FormatError("invalid shadow entry " + std::to_string(k));
    }
    s.point_pixel[idx] = pix;
    s.shadow.push_back(idx);
  }
  if (off != in.size()) throw FormatError("trailing bytes after stack container");
  for (std::uint32_t p : s.point_pixel) {
    if (p == unset) throw FormatError("stack does not place every source point");
  }
  if (channels_read) *channels_read = std::move(infos);
  return s;
}

inline void write_stack(const RangeImageStack& s, const std::filesystem::path& path,
                        const std::vector<std::string>& channels = {}) {
  detail::write_file(path, encode_stack(s, channels));
}

inline RangeImageStack read_stack(const std::filesystem::path& path,
                                  std::vector<StackChannelInfo>* channels_read = nullptr) {
  if (!std::filesystem::is_regular_file(path)) throw IoError("no such file: " + path.string());
  return decode_stack(detail::read_file(path), channels_read);
}

/// Looks up any float channel by name, core or extra.
inline const Grid<float>& stack_channel(const RangeImageStack& s, std::string_view name) {
  if (name == "range") return s.range;
  if (name == "incidence") return s.incidence;
  if (name == "reflectance") return s.reflectance;
  if (name == "intensity") return s.intensity;
  if (const auto* e = s.find_extra(name)) return e->plane;
  throw ContractError("stack has no channel '" + std::string(name) + "'");
}

}  // namespace lidarwx
