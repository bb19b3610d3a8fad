#include <gtest/gtest.h>

#include <filesystem>

#include "fixtures.hpp"
#include "lidarwx/detail/bytes.hpp"
#include "lidarwx/stack_io.hpp"

using namespace lidarwx;

namespace {

RangeImageStack small_stack() {
  const auto pc = fixture::random_cloud(800, 8);
  std::vector<double> inc(pc.size()), rho(pc.size());
  for (std::size_t i = 0; i < pc.size(); ++i) {
    inc[i] = 0.001 * static_cast<double>(i % 1000);
    rho[i] = 0.1 + 0.0005 * static_cast<double>(i % 800);
  }
  return project(pc, inc, rho, ProjectionConfig{64, 16, 3.0, -25.0});
}

}  // namespace

TEST(StackIo, HeaderLayout) {
  const auto s = small_stack();
  const auto bytes = encode_stack(s);
  ASSERT_GE(bytes.size(), 32u);
  EXPECT_EQ(static_cast<char>(bytes[0]), 'L');
  EXPECT_EQ(static_cast<char>(bytes[3]), 'S');
  EXPECT_EQ(detail::get_u32(bytes, 4), 1u);
  EXPECT_EQ(detail::get_u32(bytes, 8), 64u);
  EXPECT_EQ(detail::get_u32(bytes, 12), 16u);
  EXPECT_EQ(detail::get_f32(bytes, 16), 3.0f);
  EXPECT_EQ(detail::get_f32(bytes, 20), -25.0f);
  EXPECT_EQ(detail::get_u32(bytes, 24), 800u);
  EXPECT_EQ(detail::get_u32(bytes, 28), 5u);
  const std::size_t hw = 64 * 16;
  EXPECT_EQ(bytes.size(), 32 + 5 * 20 + 5 * 4 * hw + 4 * hw + 4 + 8 * s.shadow.size());
  // first channel name
  EXPECT_EQ(static_cast<char>(bytes[32]), 'r');
  EXPECT_EQ(static_cast<char>(bytes[37]), '\0');
}

TEST(StackIo, RoundTrip) {
  auto s = small_stack();
  Grid<float> extra(16, 64, 0.25f);
  s.set_extra("physics_aw", extra, 0.0123f);
  const auto bytes = encode_stack(s);
  std::vector<StackChannelInfo> read;
  const auto back = decode_stack(bytes, &read);
  EXPECT_EQ(back, s);
  ASSERT_EQ(read.size(), 6u);
  EXPECT_EQ(read[5].name, "physics_aw");
  EXPECT_EQ(read[5].scale, 0.0123f);
  EXPECT_EQ(encode_stack(back), bytes);
}

TEST(StackIo, FileRoundTrip) {
  const auto s = small_stack();
  const auto path = std::filesystem::temp_directory_path() / "lidarwx_stack_rt.lwxs";
  write_stack(s, path);
  EXPECT_EQ(read_stack(path), s);
  EXPECT_THROW(read_stack(path.string() + ".missing"), IoError);
}

TEST(StackIo, ChannelSubset) {
  const auto s = small_stack();
  const auto bytes = encode_stack(s, {"intensity"});
  std::vector<StackChannelInfo> read;
  const auto back = decode_stack(bytes, &read);
  ASSERT_EQ(read.size(), 1u);
  EXPECT_EQ(back.intensity, s.intensity);
  EXPECT_EQ(back.index_map, s.index_map);
  EXPECT_EQ(back.point_pixel, s.point_pixel);
  EXPECT_EQ(back.range, Grid<float>(16, 64));
  EXPECT_THROW(encode_stack(s, {"nope"}), ContractError);
}

TEST(StackIo, StackChannelLookup) {
  auto s = small_stack();
  s.set_extra("gen", Grid<float>(16, 64, 0.5f));
  EXPECT_EQ(&stack_channel(s, "range"), &s.range);
  EXPECT_EQ(stack_channel(s, "gen")(0, 0), 0.5f);
  EXPECT_THROW(stack_channel(s, "mask"), ContractError);
  s.set_extra("gen", Grid<float>(16, 64, 0.75f));
  EXPECT_EQ(s.extra.size(), 1u);
  EXPECT_EQ(stack_channel(s, "gen")(0, 0), 0.75f);
}

TEST(StackIo, CorruptInputs) {
  const auto s = small_stack();
  const auto good = encode_stack(s);
  auto bad = good;
  bad[0] = std::byte{'X'};
  EXPECT_THROW(decode_stack(bad), FormatError);
  bad = good;
  bad[4] = std::byte{2};
  EXPECT_THROW(decode_stack(bad), FormatError);
  bad = good;
  bad.pop_back();
  EXPECT_THROW(decode_stack(bad), FormatError);
  bad = good;
  bad.push_back(std::byte{0});
  EXPECT_THROW(decode_stack(bad), FormatError);
  EXPECT_THROW(decode_stack(std::span<const std::byte>(good.data(), 10)), FormatError);
  // index entry pointing past n_points
  bad = good;
  const std::size_t hw = 64 * 16, index_off = 32 + 5 * 20 + 5 * 4 * hw;
  for (int k = 0; k < 4; ++k) bad[index_off + k] = std::byte{0x7F};
  EXPECT_THROW(decode_stack(bad), FormatError);
}
