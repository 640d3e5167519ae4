#include <gtest/gtest.h>

#include <cmath>

#include "crowdcount/integral_image.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace crowdcount;
using crowdcount::testing::random_frame;

TEST(IntegralImage, AllOnes) {
  GrayFrame f(3, 3, 1);
  const IntegralImage ii(f);
  EXPECT_EQ(ii.rect_sum(0, 0, 3, 3), 9);
  EXPECT_EQ(ii.rect_sum(1, 1, 2, 2), 4);
  EXPECT_EQ(ii.rect_sum(2, 0, 0, 3), 0);
}

TEST(IntegralImage, SinglePixel) {
  GrayFrame f(1, 1, 201);
  const IntegralImage ii(f);
  EXPECT_EQ(ii.rect_sum(0, 0, 1, 1), 201);
  EXPECT_EQ(ii.at(1, 1), 201);
  EXPECT_EQ(ii.rect_sq_sum(0, 0, 1, 1), 201 * 201);
}

TEST(IntegralImage, RandomRectanglesMatchNaive) {
  std::mt19937_64 rng(1);
  for (int img = 0; img < 20; ++img) {
    const int w = 1 + static_cast<int>(rng() % 24), h = 1 + static_cast<int>(rng() % 24);
    const auto f = random_frame(rng, w, h);
    const IntegralImage ii(f);
    for (int k = 0; k < 200; ++k) {
      const int x = static_cast<int>(rng() % w), y = static_cast<int>(rng() % h);
      const int rw = static_cast<int>(rng() % (w - x + 1)), rh = static_cast<int>(rng() % (h - y + 1));
      ASSERT_EQ(ii.rect_sum(x, y, rw, rh), oracle::naive_rect_sum(f, x, y, rw, rh));
    }
  }
}

TEST(IntegralImage, SquaredSumsAndStddev) {
  std::mt19937_64 rng(2);
  const auto f = random_frame(rng, 16, 12);
  const IntegralImage ii(f);
  for (int y = 0; y + 5 <= 12; ++y) {
    for (int x = 0; x + 5 <= 16; ++x) {
      long long sq = 0;
      double mean = 0;
      for (int j = y; j < y + 5; ++j) {
        for (int i = x; i < x + 5; ++i) {
          sq += static_cast<long long>(f.at(i, j)) * f.at(i, j);
          mean += f.at(i, j) / 25.0;
        }
      }
      EXPECT_EQ(ii.rect_sq_sum(x, y, 5, 5), sq);
      double var = 0;
      for (int j = y; j < y + 5; ++j) {
        for (int i = x; i < x + 5; ++i) var += (f.at(i, j) - mean) * (f.at(i, j) - mean) / 25.0;
      }
      EXPECT_NEAR(ii.window_stddev(x, y, 5), std::sqrt(var), 1e-9);
    }
  }
}

TEST(IntegralImage, FlatWindowHasZeroStddev) {
  const IntegralImage ii(GrayFrame(9, 9, 77));
  EXPECT_EQ(ii.window_stddev(0, 0, 9), 0.0);
}

TEST(IntegralImage, TiltedSumsMatchNaive) {
  std::mt19937_64 rng(3);
  for (int img = 0; img < 10; ++img) {
    const int w = 4 + static_cast<int>(rng() % 16), h = 4 + static_cast<int>(rng() % 16);
    const auto f = random_frame(rng, w, h);
    const IntegralImage ii(f);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        for (int tw = 1; tw <= 4; ++tw) {
          for (int th = 1; th <= 4; ++th) {
            if (x - th + 1 < 0 || x + tw > w || y + tw + th > h) continue;
            ASSERT_EQ(ii.tilted_sum(x, y, tw, th), oracle::naive_tilted_sum(f, x, y, tw, th))
                << x << ',' << y << ' ' << tw << 'x' << th;
          }
        }
      }
    }
  }
}

TEST(IntegralImage, TiltedAreaIsTwoWH) {
  const IntegralImage ii(GrayFrame(20, 20, 1));
  EXPECT_EQ(ii.tilted_sum(5, 0, 3, 2), 12);
  EXPECT_EQ(ii.tilted_sum(5, 2, 1, 1), 2);
}

TEST(IntegralImage, OutOfRangeThrows) {
  const IntegralImage ii(GrayFrame(8, 8, 1));
  EXPECT_THROW(ii.rect_sum(5, 5, 4, 1), std::out_of_range);
  EXPECT_THROW(ii.rect_sum(-1, 0, 1, 1), std::out_of_range);
  EXPECT_THROW(ii.tilted_sum(0, 0, 2, 2), std::out_of_range);
  EXPECT_THROW(ii.tilted_sum(4, 4, 3, 3), std::out_of_range);
}
