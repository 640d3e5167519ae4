#include <gtest/gtest.h>

#include <fstream>

#include "crowdcount/error.hpp"
#include "crowdcount/image.hpp"
#include "test_support.hpp"

using namespace crowdcount;
using crowdcount::testing::TempDir;

TEST(GrayFrame, RejectsNonPositiveDimensions) {
  EXPECT_THROW(GrayFrame(0, 3), std::invalid_argument);
  EXPECT_THROW(GrayFrame(3, 2, std::vector<std::uint8_t>(5)), std::invalid_argument);
  GrayFrame f(4, 3, 7);
  EXPECT_EQ(f.size(), 12u);
  EXPECT_EQ(f.clamped(-5, 10), 7);
}

TEST(Pgm, RoundTripsBytes) {
  TempDir dir("pgm");
  std::mt19937_64 rng(1);
  const auto f = crowdcount::testing::random_frame(rng, 13, 7);
  write_pgm(dir.path() / "a.pgm", f);
  EXPECT_EQ(read_pgm(dir.path() / "a.pgm"), f);
  EXPECT_EQ(read_image(dir.path() / "a.pgm"), f);
}

TEST(Pgm, RejectsAsciiAndTruncated) {
  TempDir dir("pgmbad");
  std::ofstream(dir.path() / "ascii.pgm") << "P2\n2 2\n255\n1 2 3 4\n";
  EXPECT_THROW(read_pgm(dir.path() / "ascii.pgm"), DataError);
  std::ofstream(dir.path() / "short.pgm", std::ios::binary) << "P5\n4 4\n255\n" << std::string(3, 'x');
  EXPECT_THROW(read_pgm(dir.path() / "short.pgm"), DataError);
  EXPECT_THROW(read_image(dir.path() / "missing.bmp"), DataError);
}

TEST(Frames, ListedInNumericOrderAndEmptyDirRejected) {
  TempDir dir("frames");
  EXPECT_THROW(read_frames(dir.path()), DataError);
  for (int i : {2, 0, 10, 1}) {
    char name[16];
    std::snprintf(name, sizeof(name), "%05d.pgm", i);
    write_pgm(dir.path() / name, GrayFrame(2, 2, static_cast<std::uint8_t>(i)));
  }
  std::ofstream(dir.path() / "notes.txt") << "ignored";
  const auto frames = read_frames(dir.path());
  ASSERT_EQ(frames.size(), 4u);
  EXPECT_EQ(frames[0].at(0, 0), 0);
  EXPECT_EQ(frames[2].at(0, 0), 2);
  EXPECT_EQ(frames[3].at(0, 0), 10);
}

TEST(Luminance, WeightsChannels) {
  EXPECT_EQ(luminance(255, 255, 255), 255);
  EXPECT_EQ(luminance(0, 0, 0), 0);
  EXPECT_EQ(luminance(100, 100, 100), 100);
  EXPECT_EQ(luminance(255, 0, 0), 76);
}

// Halving a window samples exactly between 2x2 source pixels, so bilinear
// resampling must equal the block average.
TEST(Resample, HalvingEqualsBlockAverage) {
  std::mt19937_64 rng(3);
  const auto f = crowdcount::testing::random_frame(rng, 30, 30);
  const auto v = resample_window(f, 5, 7, 18, 9);
  ASSERT_EQ(v.size(), 81u);
  for (int j = 0; j < 9; ++j) {
    for (int i = 0; i < 9; ++i) {
      const int x = 5 + 2 * i, y = 7 + 2 * j;
      const double avg = (f.at(x, y) + f.at(x + 1, y) + f.at(x, y + 1) + f.at(x + 1, y + 1)) / 4.0;
      EXPECT_NEAR(v[j * 9 + i], avg, 1e-12);
    }
  }
}

TEST(Resample, IdentityAtSameSizeAndBoundsChecked) {
  std::mt19937_64 rng(4);
  const auto f = crowdcount::testing::random_frame(rng, 12, 12);
  const auto c = crop_resized(f, 2, 1, 9, 9);
  for (int y = 0; y < 9; ++y) {
    for (int x = 0; x < 9; ++x) EXPECT_EQ(c.at(x, y), f.at(x + 2, y + 1));
  }
  EXPECT_THROW(resample_window(f, 5, 5, 9, 9), std::out_of_range);
}
