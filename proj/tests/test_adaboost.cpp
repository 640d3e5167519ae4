#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "crowdcount/adaboost.hpp"
#include "crowdcount/error.hpp"
#include "test_support.hpp"

using namespace crowdcount;
using crowdcount::testing::centre_patches;
using crowdcount::testing::random_frame;
using crowdcount::testing::TempDir;

namespace {

std::vector<IntegralImage> integrate(const std::vector<GrayFrame>& frames) {
  return {frames.begin(), frames.end()};
}

// Lowest weighted error of any stump, trying every cut between two sample
// values (and both ends) with both polarities.
double best_stump_error(const FeatureMatrix& m, const std::vector<int>& labels, const std::vector<double>& w) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < m.feature_count(); ++f) {
    std::vector<double> cuts{-1e9, 1e9};
    for (std::size_t a = 0; a < m.sample_count(); ++a) {
      for (std::size_t b = 0; b < m.sample_count(); ++b) {
        if (m.value(f, a) < m.value(f, b)) cuts.push_back(0.5 * (double(m.value(f, a)) + m.value(f, b)));
      }
    }
    for (double t : cuts) {
      for (int pol : {1, -1}) {
        double err = 0;
        for (std::size_t i = 0; i < m.sample_count(); ++i) {
          const int h = pol * (m.value(f, i) - t) > 0 ? 1 : 0;
          if (h != labels[i]) err += w[i];
        }
        best = std::min(best, err);
      }
    }
  }
  return best;
}

std::vector<GrayFrame> mixed_windows(std::mt19937_64& rng, int n) {
  std::vector<GrayFrame> out;
  for (int i = 0; i < n; ++i) out.push_back(random_frame(rng, 9, 9));
  auto dark = centre_patches(rng, n, false, 60);
  out.insert(out.end(), dark.begin(), dark.end());
  return out;
}

}  // namespace

TEST(WeakLearner, VoteFollowsPolarity) {
  WeakLearner l{{}, 2.0, 1, 1.0};
  EXPECT_EQ(l.vote(3.0), 1);
  EXPECT_EQ(l.vote(2.0), 0);
  l.polarity = -1;
  EXPECT_EQ(l.vote(1.0), 1);
  EXPECT_EQ(l.vote(3.0), 0);
}

TEST(AdaBoost, StumpSearchMatchesExhaustiveOracle) {
  std::mt19937_64 rng(7);
  std::vector<GrayFrame> frames;
  std::vector<int> labels;
  for (int i = 0; i < 10; ++i) {
    frames.push_back(random_frame(rng, 9, 9));
    labels.push_back(i % 3 == 0 ? 1 : 0);
  }
  const auto ii = integrate(frames);
  const FeatureMatrix m(enumerate_features(9, 3), ii, 9);
  AdaBoostTrainer trainer(m, labels);
  // Replay the weight updates independently.
  std::vector<double> w(labels.size());
  const double pos = std::count(labels.begin(), labels.end(), 1), neg = labels.size() - pos;
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = labels[i] ? 0.5 / pos : 0.5 / neg;
  for (int round = 0; round < 4; ++round) {
    double total = 0;
    for (double v : w) total += v;
    for (double& v : w) v /= total;
    const double oracle = best_stump_error(m, labels, w);
    const auto& r = trainer.step();
    ASSERT_NEAR(r.weighted_error, oracle, 1e-12) << round;
    EXPECT_LT(r.weighted_error, 0.5);
    EXPECT_GE(r.learner.alpha, 0);
    // The reported error is that of the chosen stump.
    std::size_t f = 0;
    while (!(m.feature(f) == r.learner.feature)) ++f;
    double err = 0;
    for (std::size_t i = 0; i < w.size(); ++i) err += r.learner.vote(m.value(f, i)) != labels[i] ? w[i] : 0;
    EXPECT_NEAR(err, r.weighted_error, 1e-12);
    const double beta = std::max(r.weighted_error, 1e-10) / (1 - std::max(r.weighted_error, 1e-10));
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (r.learner.vote(m.value(f, i)) == labels[i]) w[i] *= beta;
    }
  }
}

TEST(AdaBoost, SeparableToyReachesZeroError) {
  std::mt19937_64 rng(8);
  auto frames = centre_patches(rng, 100, true);
  const auto neg = centre_patches(rng, 100, false);
  frames.insert(frames.end(), neg.begin(), neg.end());
  std::vector<int> labels(100, 1);
  labels.resize(200, 0);
  const auto ii = integrate(frames);
  const FeatureMatrix m(enumerate_features(9, 1), ii, 9);
  AdaBoostTrainer trainer(m, labels);
  bool solved = false;
  for (int round = 0; round < 50 && !solved; ++round) {
    const auto& r = trainer.step();
    EXPECT_LT(r.weighted_error, 0.5);
    solved = r.training_error == 0.0;
  }
  EXPECT_TRUE(solved);
}

TEST(AdaBoost, DuplicatedPairIsSeparatedByOneStump) {
  std::mt19937_64 rng(9);
  const auto pos = centre_patches(rng, 1, true)[0];
  const auto neg = centre_patches(rng, 1, false)[0];
  const std::vector<GrayFrame> frames{pos, pos, neg, neg};
  const auto ii = integrate(frames);
  const FeatureMatrix m(enumerate_features(9, 2), ii, 9);
  AdaBoostTrainer trainer(m, {1, 1, 0, 0});
  const auto& r = trainer.step();
  EXPECT_GT(r.learner.alpha, 0);
  EXPECT_EQ(r.weighted_error, 0.0);
  EXPECT_EQ(r.training_error, 0.0);
}

TEST(AdaBoost, DegenerateDataThrows) {
  const std::vector<GrayFrame> frames(4, GrayFrame(9, 9, 50));
  const auto ii = integrate(frames);
  const FeatureMatrix m(enumerate_features(9, 3), ii, 9);
  AdaBoostTrainer trainer(m, {1, 0, 1, 0});
  EXPECT_THROW(trainer.step(), DataError);
  EXPECT_THROW(AdaBoostTrainer(m, {1, 1, 1, 1}), DataError);
  EXPECT_THROW(AdaBoostTrainer(m, {1, 0}), std::invalid_argument);
}

TEST(Cascade, EmptyAcceptsAndImpossibleStageRejects) {
  const IntegralImage ii(GrayFrame(9, 9, 10));
  Cascade c;
  EXPECT_TRUE(classify_window_cascade(c, ii, {0, 0, 9}));
  c.stages.push_back({{WeakLearner{{}, 0, 1, 1.0}}, 2.0, 0.4});
  EXPECT_FALSE(classify_window_cascade(c, ii, {0, 0, 9}));
  EXPECT_FALSE(ScaledCascade(c, 9).accepts(ii, 0, 0));
  EXPECT_TRUE(ScaledCascade(Cascade{}, 9).accepts(ii, 0, 0));
}

TEST(Cascade, StageTargetsMetOnTrainingNegatives) {
  std::mt19937_64 rng(10);
  const auto pos = centre_patches(rng, 150, true, 50);
  const auto neg = mixed_windows(rng, 100);
  for (double target : {0.4, 0.45}) {
    CascadeTrainingConfig cfg;
    cfg.stage_false_alarm = target;
    cfg.max_stages = 3;
    cfg.feature_stride = 2;
    const auto result = train_adaboost(pos, neg, cfg);
    ASSERT_FALSE(result.stages.empty());
    for (const auto& s : result.stages) {
      EXPECT_TRUE(s.met_target);
      EXPECT_LE(s.false_alarm, target);
      EXPECT_GE(s.detection_rate, cfg.min_detection_rate);
    }
    // Direct evaluation: the first k stages pass at most target^k of the negatives
    // and at least the product of the stage detection rates of the positives.
    Cascade partial;
    partial.base_size = 9;
    double det = 1;
    for (std::size_t k = 0; k < result.cascade.stages.size(); ++k) {
      partial.stages.push_back(result.cascade.stages[k]);
      det *= result.stages[k].detection_rate;
      std::size_t fa = 0, hits = 0;
      for (const auto& f : neg) fa += classify_window_cascade(partial, IntegralImage(f), {0, 0, 9});
      for (const auto& f : pos) hits += classify_window_cascade(partial, IntegralImage(f), {0, 0, 9});
      EXPECT_LE(static_cast<double>(fa) / neg.size(), std::pow(target, k + 1) + 1e-12);
      EXPECT_GE(static_cast<double>(hits) / pos.size(), det - 1e-9);
    }
  }
}

TEST(Cascade, AppendingAStageNeverGrowsTheAcceptedSet) {
  std::mt19937_64 rng(11);
  const auto pos = centre_patches(rng, 80, true, 50);
  const auto neg = mixed_windows(rng, 60);
  CascadeTrainingConfig cfg;
  cfg.max_stages = 3;
  cfg.feature_stride = 2;
  const auto result = train_adaboost(pos, neg, cfg);
  const auto probe = random_frame(rng, 40, 40);
  const IntegralImage ii(probe);
  Cascade shorter{9, {}};
  for (const auto& stage : result.cascade.stages) {
    Cascade longer = shorter;
    longer.stages.push_back(stage);
    for (int size : {9, 14, 20}) {
      const ScaledCascade a(shorter, size), b(longer, size);
      for (int y = 0; y + size <= 40; y += 3) {
        for (int x = 0; x + size <= 40; x += 3) {
          if (b.accepts(ii, x, y)) {
            EXPECT_TRUE(a.accepts(ii, x, y));
          }
          EXPECT_EQ(b.accepts(ii, x, y), classify_window_cascade(longer, ii, {x, y, size}));
        }
      }
    }
    shorter = longer;
  }
}

TEST(Cascade, BootstrapRefillsFromNegativeImages) {
  std::mt19937_64 rng(12);
  const auto pos = centre_patches(rng, 60, true, 40);
  const auto neg = mixed_windows(rng, 30);
  std::vector<GrayFrame> scenes;
  for (int i = 0; i < 3; ++i) scenes.push_back(random_frame(rng, 48, 48));
  CascadeTrainingConfig cfg;
  cfg.max_stages = 2;
  cfg.feature_stride = 2;
  const auto result = train_adaboost(pos, neg, cfg, scenes);
  ASSERT_EQ(result.stages.size(), 2u);
  EXPECT_EQ(result.stages[1].negatives, neg.size());
}

TEST(Cascade, RejectsBadInputs) {
  std::mt19937_64 rng(13);
  const auto pos = centre_patches(rng, 5, true);
  const auto neg = centre_patches(rng, 5, false);
  CascadeTrainingConfig cfg;
  EXPECT_THROW(train_adaboost({}, neg, cfg), DataError);
  const std::vector<GrayFrame> odd{GrayFrame(10, 9)};
  EXPECT_THROW(train_adaboost(pos, odd, cfg), DataError);
  cfg.stage_false_alarm = 1.0;
  EXPECT_THROW(train_adaboost(pos, neg, cfg), std::invalid_argument);
}

TEST(CascadeIo, RoundTrip) {
  std::mt19937_64 rng(14);
  CascadeTrainingConfig cfg;
  cfg.max_stages = 2;
  cfg.feature_stride = 2;
  const auto c = train_adaboost(centre_patches(rng, 40, true, 50), mixed_windows(rng, 20), cfg).cascade;
  TempDir dir("cascade");
  save_cascade(dir.path() / "c.txt", c);
  const auto back = load_cascade(dir.path() / "c.txt");
  ASSERT_EQ(back.stages.size(), c.stages.size());
  EXPECT_EQ(back.base_size, 9);
  for (std::size_t s = 0; s < c.stages.size(); ++s) {
    EXPECT_EQ(back.stages[s].threshold, c.stages[s].threshold);
    ASSERT_EQ(back.stages[s].learners.size(), c.stages[s].learners.size());
    for (std::size_t k = 0; k < c.stages[s].learners.size(); ++k) {
      const auto& a = c.stages[s].learners[k];
      const auto& b = back.stages[s].learners[k];
      EXPECT_EQ(a.feature, b.feature);
      EXPECT_EQ(a.threshold, b.threshold);
      EXPECT_EQ(a.polarity, b.polarity);
      EXPECT_EQ(a.alpha, b.alpha);
    }
  }
}

TEST(CascadeIo, MalformedFilesThrow) {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return read_cascade(in);
  };
  EXPECT_THROW(parse("cascad 9 0"), DataError);
  EXPECT_THROW(parse("cascade 9 1\nstage 1 0.4\n1 0 0 1 1 0.5 1\n"), DataError);
  EXPECT_THROW(parse("cascade 9 1\nstage 1 0.4\n15 0 0 1 1 0.5 1 1\nthreshold 0\n"), DataError);
  EXPECT_THROW(parse("cascade 9 1\nstage 1 0.4\n1 0 0 5 9 0.5 1 1\nthreshold 0\n"), DataError);
  EXPECT_THROW(parse("cascade 9 1\nstage 1 0.4\n1 0 0 1 1 0.5 0 1\nthreshold 0\n"), DataError);
  EXPECT_THROW(parse("cascade 9 1\nstage 1 0.4\n1 0 0 1 1 0.5 1 -1\nthreshold 0\n"), DataError);
  EXPECT_THROW(load_cascade("/nonexistent/cascade.txt"), DataError);
  EXPECT_EQ(parse("cascade 9 0").stages.size(), 0u);
}
