#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "lidarwx/io.hpp"

using namespace lidarwx;
namespace fs = std::filesystem;

namespace {

fs::path temp_path(const std::string& name) {
  auto dir = fs::temp_directory_path() / "lidarwx_test_io";
  fs::create_directories(dir);
  return dir / name;
}

void write_raw(const fs::path& p, const std::vector<unsigned char>& bytes) {
  std::ofstream f(p, std::ios::binary);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::vector<unsigned char> le_f32(float v) {
  std::uint32_t u;
  std::memcpy(&u, &v, 4);
  return {static_cast<unsigned char>(u), static_cast<unsigned char>(u >> 8), static_cast<unsigned char>(u >> 16),
          static_cast<unsigned char>(u >> 24)};
}

}  // namespace

TEST(PointCloudIo, SingleKittiRecord) {
  std::vector<unsigned char> bytes;
  for (float v : {1.0f, 0.0f, 0.0f, 0.5f}) {
    auto b = le_f32(v);
    bytes.insert(bytes.end(), b.begin(), b.end());
  }
  const auto path = temp_path("single.bin");
  write_raw(path, bytes);
  const auto pc = read_pointcloud(path, CloudFormat::kitti_bin);
  ASSERT_EQ(pc.size(), 1u);
  EXPECT_EQ(pc[0].x, 1.0);
  EXPECT_EQ(pc[0].y, 0.0);
  EXPECT_EQ(pc[0].z, 0.0);
  EXPECT_EQ(pc[0].intensity, 0.5);
  EXPECT_EQ(pc[0].label, 0u);
}

TEST(PointCloudIo, EmptyFileGivesEmptyCloud) {
  const auto path = temp_path("empty.bin");
  write_raw(path, {});
  EXPECT_TRUE(read_pointcloud(path, CloudFormat::kitti_bin).empty());
  EXPECT_TRUE(read_pointcloud(path, CloudFormat::labeled_bin).empty());
}

TEST(PointCloudIo, WritingNothingGivesZeroBytes) {
  const auto path = temp_path("nothing.bin");
  write_pointcloud(PointCloud{}, path, CloudFormat::labeled_bin);
  EXPECT_EQ(fs::file_size(path), 0u);
}

TEST(PointCloudIo, ThreeRecordRoundTripIsBitwise) {
  PointCloud pc;
  pc.points = {{1.5, -2.25, 3.0, 0.1f, 0}, {-0.001f, 1e-7f, 42.0, 1.0, 0}, {7.0, 8.0, -9.5, 0.0, 0}};
  const auto path = temp_path("three.bin");
  write_pointcloud(pc, path, CloudFormat::kitti_bin);
  EXPECT_EQ(fs::file_size(path), 48u);
  const auto back = read_pointcloud(path, CloudFormat::kitti_bin);
  EXPECT_EQ(back, pc);
  const auto bytes = detail::read_file(path);
  EXPECT_EQ(encode_pointcloud(back, CloudFormat::kitti_bin), bytes);
}

TEST(PointCloudIo, LabeledRecordByteLayout) {
  PointCloud pc;
  pc.points = {{1.0, 2.0, 3.0, 0.25, 7}};
  const auto path = temp_path("labeled.bin");
  write_pointcloud(pc, path, CloudFormat::labeled_bin);
  const auto raw = detail::read_file(path);
  ASSERT_EQ(raw.size(), 20u);
  // manual decode: four little-endian IEEE-754 floats then a u32
  auto f32_at = [&](std::size_t off) {
    std::uint32_t u = 0;
    for (int k = 3; k >= 0; --k) u = (u << 8) | std::to_integer<std::uint32_t>(raw[off + static_cast<std::size_t>(k)]);
    float f;
    std::memcpy(&f, &u, 4);
    return f;
  };
  EXPECT_EQ(f32_at(0), 1.0f);
  EXPECT_EQ(f32_at(4), 2.0f);
  EXPECT_EQ(f32_at(8), 3.0f);
  EXPECT_EQ(f32_at(12), 0.25f);
  EXPECT_EQ(std::to_integer<int>(raw[16]), 7);
  EXPECT_EQ(std::to_integer<int>(raw[17]), 0);
  EXPECT_EQ(std::to_integer<int>(raw[18]), 0);
  EXPECT_EQ(std::to_integer<int>(raw[19]), 0);
  // 1.0f = 0x3F800000 little-endian
  EXPECT_EQ(std::to_integer<int>(raw[3]), 0x3F);
  EXPECT_EQ(std::to_integer<int>(raw[2]), 0x80);
}

TEST(PointCloudIo, MalformedLengthNamesByteCount) {
  const auto path = temp_path("bad.bin");
  write_raw(path, std::vector<unsigned char>(17, 0));
  try {
    read_pointcloud(path, CloudFormat::kitti_bin);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("17"), std::string::npos);
  }
  write_raw(path, std::vector<unsigned char>(32, 0));
  EXPECT_THROW(read_pointcloud(path, CloudFormat::labeled_bin), FormatError);
}

TEST(PointCloudIo, NonFiniteRecordsListed) {
  std::vector<unsigned char> bytes;
  for (float v : {1.0f, 1.0f, 1.0f, 0.5f, NAN, 0.0f, 0.0f, 0.5f, 2.0f, INFINITY, 0.0f, 0.5f}) {
    auto b = le_f32(v);
    bytes.insert(bytes.end(), b.begin(), b.end());
  }
  const auto path = temp_path("nan.bin");
  write_raw(path, bytes);
  try {
    read_pointcloud(path, CloudFormat::kitti_bin);
    FAIL() << "expected RecordError";
  } catch (const RecordError& e) {
    EXPECT_EQ(e.indices(), (std::vector<std::size_t>{1, 2}));
  }
}

TEST(PointCloudIo, OutOfRangeIntensitiesAreClampedAndCounted) {
  std::vector<unsigned char> bytes;
  for (float v : {1.0f, 0.0f, 0.0f, 255.0f, 0.0f, 1.0f, 0.0f, -0.5f, 0.0f, 0.0f, 1.0f, 0.3f}) {
    auto b = le_f32(v);
    bytes.insert(bytes.end(), b.begin(), b.end());
  }
  const auto path = temp_path("clamp.bin");
  write_raw(path, bytes);
  ReadReport rep;
  const auto pc = read_pointcloud(path, CloudFormat::kitti_bin, &rep);
  EXPECT_EQ(rep.n_clamped, 2u);
  EXPECT_EQ(pc[0].intensity, 1.0);
  EXPECT_EQ(pc[1].intensity, 0.0);
  EXPECT_EQ(pc[2].intensity, 0.3f);
}

TEST(PointCloudIo, MissingFileIsIoError) {
  EXPECT_THROW(read_pointcloud(temp_path("does_not_exist.bin"), CloudFormat::kitti_bin), IoError);
  EXPECT_THROW(write_pointcloud(PointCloud{}, "/nonexistent_dir/x.bin", CloudFormat::kitti_bin), IoError);
}

TEST(PointCloudIo, EncodeRejectsInvalidPoints) {
  PointCloud pc;
  pc.points = {{0, 0, 1, 1.5, 0}};
  EXPECT_THROW(encode_pointcloud(pc, CloudFormat::kitti_bin), RecordError);
}

// Property: read(write(pc)) == pc and the bytes re-encode identically.
TEST(PointCloudIo, RandomRoundTripProperty) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const std::size_t n = (seed * 397) % 10000;
    for (auto fmt : {CloudFormat::kitti_bin, CloudFormat::labeled_bin}) {
      const auto pc = fixture::random_cloud(n, seed, fmt == CloudFormat::labeled_bin);
      const auto bytes = encode_pointcloud(pc, fmt);
      ASSERT_EQ(bytes.size(), n * record_size(fmt));
      const auto back = decode_pointcloud(bytes, fmt);
      ASSERT_EQ(back, pc) << "seed " << seed;
      ASSERT_EQ(encode_pointcloud(back, fmt), bytes);
    }
  }
}

TEST(MaterialTableIo, SingleEntry) {
  std::istringstream in("0,unlabeled,0.10\n");
  const auto t = parse_material_table(in);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_DOUBLE_EQ(t.reflectance(0), 0.10);
  EXPECT_EQ(t.entries().at(0).name, "unlabeled");
}

TEST(MaterialTableIo, TwoEntriesAndComments) {
  std::istringstream in("# header\n40,road_asphalt,0.17\n\n70,vegetation,0.45  # trailing\n");
  const auto t = parse_material_table(in);
  EXPECT_EQ(t.size(), 2u);
  EXPECT_DOUBLE_EQ(t.reflectance(40), 0.17);
  EXPECT_DOUBLE_EQ(t.reflectance(70), 0.45);
}

TEST(MaterialTableIo, AbsentLabelUsesDefault) {
  std::istringstream in("40,road_asphalt,0.17\n");
  EXPECT_DOUBLE_EQ(parse_material_table(in).reflectance(99), 0.5);
  std::istringstream in2("40,road_asphalt,0.17\n");
  EXPECT_DOUBLE_EQ(parse_material_table(in2, 0.2).reflectance(99), 0.2);
}

TEST(MaterialTableIo, DuplicateKeepsLastWithWarning) {
  std::istringstream in("40,a,0.1\n40,b,0.3\n");
  std::vector<std::string> warnings;
  const auto t = parse_material_table(in, 0.5, &warnings);
  EXPECT_DOUBLE_EQ(t.reflectance(40), 0.3);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("line 2"), std::string::npos);
}

TEST(MaterialTableIo, OutOfRangeReflectanceReportsLine) {
  std::istringstream in("# c\n40,road,0.17\n50,building,1.2\n");
  try {
    parse_material_table(in);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  std::istringstream bad("x,road,0.1\n");
  EXPECT_THROW(parse_material_table(bad), ParseError);
  std::istringstream short_line("40,road\n");
  EXPECT_THROW(parse_material_table(short_line), ParseError);
}

TEST(MaterialTableIo, ShippedTableMatchesBuiltin) {
  const auto file = load_material_table(fs::path(LIDARWX_DATA_DIR) / "materials_default.csv");
  const auto builtin = default_material_table();
  ASSERT_EQ(file.size(), builtin.size());
  for (const auto& [id, m] : builtin.entries()) EXPECT_DOUBLE_EQ(file.reflectance(id), m.reflectance);
  EXPECT_DOUBLE_EQ(builtin.reflectance(40), 0.17);
  EXPECT_DOUBLE_EQ(builtin.reflectance(70), 0.45);
  EXPECT_FALSE(builtin.contains(0));
}
