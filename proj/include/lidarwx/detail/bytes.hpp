#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "lidarwx/error.hpp"

namespace lidarwx::detail {

inline void put_u32(std::vector<std::byte>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) {
    out.push_back(static_cast<std::byte>((v >> shift) & 0xFFu));
  }
}

inline void put_f32(std::vector<std::byte>& out, float v) {
  put_u32(out, std::bit_cast<std::uint32_t>(v));
}

inline std::uint32_t get_u32(std::span<const std::byte> in, std::size_t offset) {
  std::uint32_t v = 0;
  for (int k = 3; k >= 0; --k) {
    v = (v << 8) | std::to_integer<std::uint32_t>(in[offset + static_cast<std::size_t>(k)]);
  }
  return v;
}

inline float get_f32(std::span<const std::byte> in, std::size_t offset) {
  return std::bit_cast<float>(get_u32(in, offset));
}

inline std::vector<std::byte> read_file(const std::filesystem::path& path) {
  std::ifstream fs(path, std::ios::binary | std::ios::ate);
  if (!fs) throw IoError("cannot open " + path.string());
  const auto size = static_cast<std::size_t>(fs.tellg());
  std::vector<std::byte> buf(size);
  fs.seekg(0);
  if (size > 0 && !fs.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(size))) {
    throw IoError("short read on " + path.string());
  }
  return buf;
}

inline void write_file(const std::filesystem::path& path, std::span<const std::byte> bytes) {
  std::ofstream fs(path, std::ios::binary | std::ios::trunc);
  if (!fs) throw IoError("cannot open " + path.string() + " for writing");
  fs.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!fs) throw IoError("write failed on " + path.string());
}

}  // namespace lidarwx::detail
