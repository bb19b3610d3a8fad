#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "lidarwx/detail/bytes.hpp"
#include "lidarwx/error.hpp"
#include "lidarwx/point_cloud.hpp"

namespace lidarwx {

// --------------------------------------------------------------------------
// Point cloud binaries
// --------------------------------------------------------------------------

/// kitti_bin:   4 x f32 LE (x, y, z, intensity)            16 bytes/record
/// labeled_bin: 4 x f32 LE + u32 LE label                    20 bytes/record
enum class CloudFormat { kitti_bin, labeled_bin };

constexpr std::size_t record_size(CloudFormat f) noexcept {
  return f == CloudFormat::kitti_bin ? 16 : 20;
}

inline CloudFormat parse_cloud_format(std::string_view name) {
  if (name == "kitti_bin" || name == "kitti") return CloudFormat::kitti_bin;
  if (name == "labeled_bin" || name == "labeled") return CloudFormat::labeled_bin;
  throw ContractError("unknown cloud format '" + std::string(name) + "'");
}

inline std::string_view to_string(CloudFormat f) noexcept {
  return f == CloudFormat::kitti_bin ? "kitti_bin" : "labeled_bin";
}

struct ReadReport {
  std::size_t n_clamped = 0;  ///< records whose intensity was outside [0,1]
};

inline PointCloud decode_pointcloud(std::span<const std::byte> bytes, CloudFormat fmt,
                                    ReadReport* report = nullptr) {
  const std::size_t rec = record_size(fmt);
  if (bytes.size() % rec != 0) {
    throw FormatError("byte length " + std::to_string(bytes.size()) +
                      " is not a multiple of the " + std::to_string(rec) + "-byte " +
                      std::string(to_string(fmt)) + " record");
  }
  const std::size_t n = bytes.size() / rec;
  PointCloud pc;
  pc.points.resize(n);
  std::vector<std::size_t> bad;
  std::size_t clamped = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t off = i * rec;
    Point& p = pc.points[i];
    p.x = detail::get_f32(bytes, off);
    p.y = detail::get_f32(bytes, off + 4);
    p.z = detail::get_f32(bytes, off + 8);
    p.intensity = detail::get_f32(bytes, off + 12);
    if (fmt == CloudFormat::labeled_bin) p.label = detail::get_u32(bytes, off + 16);
    if (!p.finite() || std::isnan(p.intensity)) {
      bad.push_back(i);
      continue;
    }
    if (p.intensity < 0.0 || p.intensity > 1.0) {
      p.intensity = std::clamp(p.intensity, 0.0, 1.0);
      ++clamped;
    }
  }
  if (!bad.empty()) {
    std::ostringstream msg;
    msg << bad.size() << " record(s) with non-finite values, first at index " << bad.front();
    throw RecordError(msg.str(), std::move(bad));
  }
  if (report) report->n_clamped = clamped;
  return pc;
}

inline std::vector<std::byte> encode_pointcloud(const PointCloud& pc, CloudFormat fmt) {
  std::vector<std::size_t> bad;
  for (std::size_t i = 0; i < pc.size(); ++i) {
    const Point& p = pc[i];
    if (!p.finite() || !(p.intensity >= 0.0 && p.intensity <= 1.0)) bad.push_back(i);
  }
  if (!bad.empty()) {
    throw RecordError("cannot encode " + std::to_string(bad.size()) +
                          " point(s) violating finiteness or intensity range",
                      std::move(bad));
  }
  std::vector<std::byte> out;
  out.reserve(pc.size() * record_size(fmt));
  for (const Point& p : pc.points) {
    detail::put_f32(out, static_cast<float>(p.x));
    detail::put_f32(out, static_cast<float>(p.y));
    detail::put_f32(out, static_cast<float>(p.z));
    detail::put_f32(out, static_cast<float>(p.intensity));
    if (fmt == CloudFormat::labeled_bin) detail::put_u32(out, p.label);
  }
  return out;
}

inline PointCloud read_pointcloud(const std::filesystem::path& path, CloudFormat fmt,
                                  ReadReport* report = nullptr) {
  if (!std::filesystem::is_regular_file(path)) throw IoError("no such file: " + path.string());
  PointCloud pc = decode_pointcloud(detail::read_file(path), fmt, report);
  pc.frame_id = path.stem().string();
  return pc;
}

inline void write_pointcloud(const PointCloud& pc, const std::filesystem::path& path,
                             CloudFormat fmt) {
  detail::write_file(path, encode_pointcloud(pc, fmt));
}

// --------------------------------------------------------------------------
// Material tables
// --------------------------------------------------------------------------

struct Material {
  std::string name;
  double reflectance = 0.0;
};

/// Semantic label -> reflectance at the sensor wavelength. Immutable once
/// built; unknown labels resolve to the declared default.
class MaterialTable {
 public:
  static constexpr double kDefaultReflectance = 0.5;

  MaterialTable() = default;
  explicit MaterialTable(std::map<std::uint32_t, Material> entries,
                         double default_reflectance = kDefaultReflectance)
      : entries_(std::move(entries)), default_(default_reflectance) {
    if (!(default_ >= 0.0 && default_ <= 1.0)) {
      throw ContractError("default reflectance must lie in [0,1]");
    }
  }

  double reflectance(std::uint32_t label) const {
    auto it = entries_.find(label);
    return it == entries_.end() ? default_ : it->second.reflectance;
  }
  bool contains(std::uint32_t label) const { return entries_.count(label) != 0; }
  double default_reflectance() const noexcept { return default_; }
  const std::map<std::uint32_t, Material>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::map<std::uint32_t, Material> entries_;
  double default_ = kDefaultReflectance;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Parses "label_id,material_name,reflectance" lines. '#' starts a comment.
/// Duplicate ids keep the last entry and append a warning.
inline MaterialTable parse_material_table(std::istream& in,
                                          double default_reflectance = MaterialTable::kDefaultReflectance,
                                          std::vector<std::string>* warnings = nullptr) {
  std::map<std::uint32_t, Material> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = line;
    if (auto hash = sv.find('#'); hash != std::string_view::npos) sv = sv.substr(0, hash);
    sv = detail::trim(sv);
    if (sv.empty()) continue;

    const auto c1 = sv.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : sv.find(',', c1 + 1);
    if (c2 == std::string_view::npos) throw ParseError("expected label_id,material_name,reflectance", lineno);
    const auto id_sv = detail::trim(sv.substr(0, c1));
    const auto name_sv = detail::trim(sv.substr(c1 + 1, c2 - c1 - 1));
    const auto rho_sv = detail::trim(sv.substr(c2 + 1));

    std::uint32_t id = 0;
    auto [pid, eid] = std::from_chars(id_sv.data(), id_sv.data() + id_sv.size(), id);
    if (eid != std::errc{} || pid != id_sv.data() + id_sv.size()) {
      throw ParseError("invalid label id '" + std::string(id_sv) + "'", lineno);
    }
    double rho = 0.0;
    auto [pr, er] = std::from_chars(rho_sv.data(), rho_sv.data() + rho_sv.size(), rho);
    if (er != std::errc{} || pr != rho_sv.data() + rho_sv.size()) {
      throw ParseError("invalid reflectance '" + std::string(rho_sv) + "'", lineno);
    }
    if (!(rho >= 0.0 && rho <= 1.0)) {
      throw ParseError("reflectance " + std::string(rho_sv) + " outside [0,1]", lineno);
    }
    if (entries.count(id) && warnings) {
      warnings->push_back("line " + std::to_string(lineno) + ": duplicate label " +
                          std::to_string(id) + ", keeping the later entry");
    }
    entries[id] = Material{std::string(name_sv), rho};
  }
  return MaterialTable(std::move(entries), default_reflectance);
}

inline MaterialTable load_material_table(const std::filesystem::path& path,
                                         double default_reflectance = MaterialTable::kDefaultReflectance,
                                         std::vector<std::string>* warnings = nullptr) {
  std::ifstream fs(path);
  if (!fs) throw IoError("cannot open material table " + path.string());
  return parse_material_table(fs, default_reflectance, warnings);
}

/// Shipped default table, identical to data/materials_default.csv.
///
/// Labels follow the SemanticKITTI taxonomy. Reflectances are approximate
/// near-infrared (905 nm) values picked by hand from ECOSTRESS spectra of
/// representative materials; they are not published per-class values.
inline constexpr std::string_view kDefaultMaterialCsv =
    "# label_id,material_name,reflectance  (approximate 905 nm values)\n"
    "10,car_paint_metal,0.30\n"
    "11,bicycle_metal,0.25\n"
    "18,truck_paint_metal,0.30\n"
    "30,person_skin_cloth,0.40\n"
    "40,road_asphalt,0.17\n"
    "44,parking_asphalt,0.17\n"
    "48,sidewalk_concrete,0.35\n"
    "49,other_ground_soil,0.25\n"
    "50,building_brick,0.42\n"
    "51,fence_wood,0.40\n"
    "70,vegetation,0.45\n"
    "71,trunk_bark,0.38\n"
    "72,terrain_dry_grass_soil,0.30\n"
    "80,pole_galvanized_steel,0.30\n"
    "81,traffic_sign_retroreflective,0.80\n";

inline MaterialTable default_material_table() {
  std::istringstream in{std::string(kDefaultMaterialCsv)};
  return parse_material_table(in);
}

}  // namespace lidarwx
