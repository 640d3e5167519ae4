#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

#include "crowdcount/error.hpp"
#include "crowdcount/raw_pixel_classifier.hpp"
#include "test_support.hpp"

using namespace crowdcount;
using crowdcount::testing::random_frame;
using crowdcount::testing::TempDir;

namespace {

double kernel(const RawPixelSample& a, const RawPixelSample& b, double sigma) {
  double d = 0;
  for (int i = 0; i < kRawDims; ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
  return std::exp(-d / (2 * sigma * sigma));
}

RawPixelSample point(double a, double b) {
  RawPixelSample x{};
  x[0] = a;
  x[1] = b;
  return x;
}

}  // namespace

TEST(RawFeatures, ConstantWindowIsZero) {
  const GrayFrame f(20, 20, 99);
  const auto x = extract_raw_features(f, {3, 4, 13});
  for (double v : x) EXPECT_EQ(v, 0.0);
}

TEST(RawFeatures, ZeroMeanUnitVariance) {
  std::mt19937_64 rng(20);
  const auto f = random_frame(rng, 30, 30);
  const auto x = extract_raw_features(f, {2, 5, 17});
  double mean = 0, sq = 0;
  for (double v : x) mean += v / kRawDims;
  for (double v : x) sq += (v - mean) * (v - mean) / kRawDims;
  EXPECT_NEAR(mean, 0, 1e-12);
  EXPECT_NEAR(sq, 1, 1e-12);
}

TEST(RawFeatures, AffineIntensityInvariance) {
  std::mt19937_64 rng(21);
  const auto f = random_frame(rng, 25, 25, 0, 100);
  GrayFrame g = f;
  for (auto& p : g.pixels()) p = static_cast<std::uint8_t>(2 * p + 13);
  for (int size = 9; size <= 25; size += 4) {
    const auto a = extract_raw_features(f, {0, 0, size});
    const auto b = extract_raw_features(g, {0, 0, size});
    for (int i = 0; i < kRawDims; ++i) ASSERT_NEAR(a[i], b[i], 1e-9);
  }
}

TEST(RawFeatures, EighteenPixelWindowIsTwoByTwoMean) {
  // Pixel-centre samples of an 18 -> 9 reduction fall on 2x2 block centres.
  std::mt19937_64 rng(22);
  const auto f = random_frame(rng, 24, 24);
  const auto x = extract_raw_features(f, {4, 3, 18});
  std::vector<double> down;
  for (int j = 0; j < 9; ++j) {
    for (int i = 0; i < 9; ++i) {
      const int px = 4 + 2 * i, py = 3 + 2 * j;
      down.push_back((f.at(px, py) + f.at(px + 1, py) + f.at(px, py + 1) + f.at(px + 1, py + 1)) / 4.0);
    }
  }
  double mean = 0, var = 0;
  for (double v : down) mean += v / 81;
  for (double v : down) var += (v - mean) * (v - mean) / 81;
  for (int i = 0; i < kRawDims; ++i) EXPECT_NEAR(x[i], (down[i] - mean) / std::sqrt(var), 1e-9);
}

TEST(RawFeatures, NineByNineIsIdentityResample) {
  std::mt19937_64 rng(23);
  const auto f = random_frame(rng, 9, 9);
  const auto x = extract_raw_features(f, {0, 0, 9});
  std::vector<double> raw(f.pixels().begin(), f.pixels().end());
  const auto y = normalise_raw(raw);
  for (int i = 0; i < kRawDims; ++i) EXPECT_DOUBLE_EQ(x[i], y[i]);
}

TEST(RawFeatures, WindowOutsideFrameThrows) {
  const GrayFrame f(10, 10);
  EXPECT_THROW(extract_raw_features(f, {5, 5, 9}), std::out_of_range);
  EXPECT_THROW(normalise_raw(std::vector<double>(80, 1.0)), std::invalid_argument);
}

TEST(Smo, XorMatchesKernelSystemSolve) {
  // Symmetric XOR: every point is a margin support vector and rho = 0, so the
  // dual coefficients solve K c = y.
  const std::vector<LabelledSample> data{
      {point(1, 1), 1}, {point(-1, -1), 1}, {point(1, -1), -1}, {point(-1, 1), -1}};
  SmoConfig cfg;
  cfg.sigma = 1.0;
  cfg.penalty = 1e3;
  cfg.tolerance = 1e-6;
  const auto result = train_reference_classifier(data, cfg);
  EXPECT_TRUE(result.converged);

  Eigen::Matrix4d k;
  Eigen::Vector4d y;
  for (int i = 0; i < 4; ++i) {
    y(i) = data[i].label;
    for (int j = 0; j < 4; ++j) k(i, j) = kernel(data[i].x, data[j].x, cfg.sigma);
  }
  const Eigen::Vector4d c = k.ldlt().solve(y);
  for (int i = 0; i < 4; ++i) {
    double oracle = 0;
    for (int j = 0; j < 4; ++j) oracle += c(j) * kernel(data[j].x, data[i].x, cfg.sigma);
    EXPECT_NEAR(oracle, y(i), 1e-12);
    EXPECT_EQ(result.classifier.decide(data[i].x), data[i].label);
    EXPECT_NEAR(result.classifier.decision(data[i].x), y(i), 1e-3);
  }
  EXPECT_NEAR(result.classifier.rho(), 0, 1e-3);
}

TEST(Smo, SeparatedBlobsAgreeWithNearestCentroid) {
  std::mt19937_64 rng(24);
  std::normal_distribution<double> noise(0, 0.3);
  std::vector<LabelledSample> data;
  RawPixelSample ca{}, cb{};
  for (int i = 0; i < kRawDims; ++i) {
    ca[i] = i % 2 ? 1.0 : -1.0;
    cb[i] = -ca[i];
  }
  for (int n = 0; n < 60; ++n) {
    LabelledSample s;
    s.label = n % 2 ? 1 : -1;
    for (int i = 0; i < kRawDims; ++i) s.x[i] = (s.label > 0 ? ca[i] : cb[i]) + noise(rng);
    data.push_back(s);
  }
  SmoConfig cfg;
  cfg.sigma = 6.0;
  const auto result = train_reference_classifier(data, cfg);
  for (const auto& s : data) {
    double da = 0, db = 0;
    for (int i = 0; i < kRawDims; ++i) {
      da += (s.x[i] - ca[i]) * (s.x[i] - ca[i]);
      db += (s.x[i] - cb[i]) * (s.x[i] - cb[i]);
    }
    const int nearest = da < db ? 1 : -1;
    EXPECT_EQ(nearest, s.label);
    EXPECT_EQ(result.classifier.decide(s.x), nearest);
  }
}

TEST(Smo, DuplicatedPointsPerClass) {
  const std::vector<LabelledSample> data{{point(2, 0), 1}, {point(2, 0), 1}, {point(-2, 0), -1}, {point(-2, 0), -1}};
  const auto result = train_reference_classifier(data, SmoConfig{});
  EXPECT_EQ(result.classifier.decide(point(2, 0)), 1);
  EXPECT_EQ(result.classifier.decide(point(-2, 0)), -1);
}

TEST(Smo, NeedsBothClasses) {
  const std::vector<LabelledSample> data{{point(1, 0), 1}, {point(0, 1), 1}};
  EXPECT_THROW(train_reference_classifier(data, SmoConfig{}), DataError);
  SmoConfig bad;
  bad.sigma = 0;
  EXPECT_THROW(train_reference_classifier(data, bad), std::invalid_argument);
}

TEST(Smo, IterationCapReturnsBestSoFar) {
  std::mt19937_64 rng(25);
  std::normal_distribution<double> noise(0, 1);
  std::vector<LabelledSample> data;
  for (int n = 0; n < 40; ++n) {
    LabelledSample s;
    s.label = n % 2 ? 1 : -1;
    for (int i = 0; i < kRawDims; ++i) s.x[i] = noise(rng);
    data.push_back(s);
  }
  SmoConfig cfg;
  cfg.max_iterations = 2;
  const auto result = train_reference_classifier(data, cfg);
  EXPECT_FALSE(result.converged);
  EXPECT_EQ(result.iterations, 2);
}

TEST(ClassifierIo, RoundTrip) {
  const std::vector<LabelledSample> data{
      {point(1, 1), 1}, {point(-1, -1), 1}, {point(1, -1), -1}, {point(-1, 1), -1}};
  const auto c = train_reference_classifier(data, SmoConfig{}).classifier;
  TempDir dir("rbf");
  save_classifier(dir.path() / "c.txt", c);
  const auto back = load_classifier(dir.path() / "c.txt");
  EXPECT_EQ(back.sigma(), c.sigma());
  EXPECT_EQ(back.rho(), c.rho());
  ASSERT_EQ(back.support().size(), c.support().size());
  for (const auto& s : data) EXPECT_DOUBLE_EQ(back.decision(s.x), c.decision(s.x));
}

TEST(ClassifierIo, MalformedThrows) {
  auto parse = [](const std::string& t) {
    std::istringstream in(t);
    return read_classifier(in);
  };
  EXPECT_THROW(parse("svm 1 0 0"), DataError);
  EXPECT_THROW(parse("rbf 1 0 1\n0.5 1 2 3"), DataError);
  EXPECT_THROW(load_classifier("/nonexistent/raw.txt"), DataError);
}
