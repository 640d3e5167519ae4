#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "crowdcount/haar_features.hpp"
#include "crowdcount/image.hpp"
#include "crowdcount/integral_image.hpp"

namespace crowdcount {

// Decision stump on a variance-normalised Haar response:
// votes 1 when polarity * (response - threshold) > 0.
struct WeakLearner {
  HaarFeature feature;
  double threshold = 0;
  int polarity = 1;
  double alpha = 0;

  int vote(double response) const { return polarity * (response - threshold) > 0 ? 1 : 0; }
};

struct CascadeStage {
  std::vector<WeakLearner> learners;
  double threshold = 0;       // accept when sum(alpha * vote) >= threshold
  double max_false_alarm = 1;  // target used during training
};

struct Cascade {
  int base_size = kBaseWindow;
  std::vector<CascadeStage> stages;
};

// Response of every feature on a window, divided by the window's intensity
// standard deviation (1 for flat windows).
double normalised_response(const HaarFeature& scaled, const IntegralImage& ii, int ox, int oy, double stddev);

double stage_score(const CascadeStage& stage, const IntegralImage& ii, const Window& window, int base);

// Sequential evaluation with early reject; an empty cascade accepts.
bool classify_window_cascade(const Cascade& cascade, const IntegralImage& ii, const Window& window);

// Cascade with features pre-scaled to one window size, for repeated use.
class ScaledCascade {
 public:
  ScaledCascade(const Cascade& cascade, int size);
  int size() const { return size_; }
  bool accepts(const IntegralImage& ii, int ox, int oy) const;

 private:
  Cascade cascade_;
  int size_;
  std::vector<std::vector<HaarFeature>> features_;
};

// Responses of a feature pool over a labelled sample set, feature-major.
class FeatureMatrix {
 public:
  FeatureMatrix(std::vector<HaarFeature> features, std::span<const IntegralImage> samples, int size);

  std::size_t feature_count() const { return features_.size(); }
  std::size_t sample_count() const { return samples_; }
  const HaarFeature& feature(std::size_t f) const { return features_[f]; }
  float value(std::size_t f, std::size_t s) const { return values_[f * samples_ + s]; }
  // Sample indices of feature f in ascending response order.
  std::span<const std::uint32_t> order(std::size_t f) const {
    return {order_.data() + f * samples_, samples_};
  }

 private:
  std::vector<HaarFeature> features_;
  std::size_t samples_;
  std::vector<float> values_;
  std::vector<std::uint32_t> order_;
};

struct BoostRound {
  WeakLearner learner;
  double weighted_error = 0;
  double training_error = 0;  // of the strong classifier after this round
};

// Discrete AdaBoost over decision stumps. Labels are 1 (positive) or 0.
// The strong classifier votes positive when sum(alpha * h) >= 0.5 sum(alpha).
class AdaBoostTrainer {
 public:
  AdaBoostTrainer(const FeatureMatrix& matrix, std::vector<int> labels);

  // Adds one learner. Throws DataError when no stump beats weighted error 0.5.
  const BoostRound& step();

  const std::vector<BoostRound>& rounds() const { return rounds_; }
  const std::vector<double>& scores() const { return scores_; }
  double alpha_sum() const { return alpha_sum_; }

 private:
  const FeatureMatrix& matrix_;
  std::vector<int> labels_;
  std::vector<double> weights_;
  std::vector<double> scores_;
  double alpha_sum_ = 0;
  std::vector<BoostRound> rounds_;
};

struct CascadeTrainingConfig {
  double stage_false_alarm = 0.4;
  double min_detection_rate = 0.995;
  int max_stages = 10;
  int max_learners_per_stage = 100;
  int feature_stride = 1;
  std::uint64_t seed = 42;
  int bootstrap_attempts = 20000;
  int bootstrap_max_window = 27;  // bootstrap crops span base..this many pixels
};

struct StageStats {
  int learners = 0;
  double detection_rate = 0;
  double false_alarm = 0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  bool met_target = false;
};

struct CascadeTrainingResult {
  Cascade cascade;
  std::vector<StageStats> stages;
  bool negatives_exhausted = false;
};

// Windows must all be base x base. `negative_images` are larger frames that
// refill the negative set between stages with windows that still pass.
CascadeTrainingResult train_adaboost(std::span<const GrayFrame> positives, std::span<const GrayFrame> negatives,
                                     const CascadeTrainingConfig& cfg,
                                     std::span<const GrayFrame> negative_images = {});

// Text format:
//   cascade <base_size> <stage_count>
//   stage <learner_count> <max_false_alarm>
//   <prototype> <x> <y> <w> <h> <threshold> <polarity> <alpha>   (per learner)
//   threshold <stage_threshold>
void write_cascade(std::ostream& out, const Cascade& cascade);
Cascade read_cascade(std::istream& in);
void save_cascade(const std::filesystem::path& path, const Cascade& cascade);
Cascade load_cascade(const std::filesystem::path& path);

}  // namespace crowdcount
