#include "crowdcount/adaboost.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "crowdcount/error.hpp"

namespace crowdcount {

double normalised_response(const HaarFeature& scaled, const IntegralImage& ii, int ox, int oy, double stddev) {
  const double r = eval_haar_at(scaled, ii, ox, oy);
  return stddev > 1e-9 ? r / stddev : r;
}

double stage_score(const CascadeStage& stage, const IntegralImage& ii, const Window& window, int base) {
  const double sd = ii.window_stddev(window.x, window.y, window.size);
  double score = 0;
  for (const auto& l : stage.learners) {
    const HaarFeature f = scale_feature(l.feature, base, window.size);
    score += l.alpha * l.vote(normalised_response(f, ii, window.x, window.y, sd));
  }
  return score;
}

bool classify_window_cascade(const Cascade& cascade, const IntegralImage& ii, const Window& window) {
  for (const auto& stage : cascade.stages) {
    if (stage_score(stage, ii, window, cascade.base_size) < stage.threshold) return false;
  }
  return true;
}

ScaledCascade::ScaledCascade(const Cascade& cascade, int size) : cascade_(cascade), size_(size) {
  for (const auto& stage : cascade_.stages) {
    auto& fs = features_.emplace_back();
    for (const auto& l : stage.learners) fs.push_back(scale_feature(l.feature, cascade_.base_size, size));
  }
}

bool ScaledCascade::accepts(const IntegralImage& ii, int ox, int oy) const {
  if (cascade_.stages.empty()) return true;
  const double sd = ii.window_stddev(ox, oy, size_);
  for (std::size_t s = 0; s < cascade_.stages.size(); ++s) {
    const auto& stage = cascade_.stages[s];
    double score = 0;
    for (std::size_t k = 0; k < stage.learners.size(); ++k) {
      const auto& l = stage.learners[k];
      score += l.alpha * l.vote(normalised_response(features_[s][k], ii, ox, oy, sd));
    }
    if (score < stage.threshold) return false;
  }
  return true;
}

FeatureMatrix::FeatureMatrix(std::vector<HaarFeature> features, std::span<const IntegralImage> samples, int size)
    : features_(std::move(features)), samples_(samples.size()) {
  values_.resize(features_.size() * samples_);
  order_.resize(values_.size());
  std::vector<double> sd(samples_);
  for (std::size_t s = 0; s < samples_; ++s) sd[s] = samples[s].window_stddev(0, 0, size);
  for (std::size_t f = 0; f < features_.size(); ++f) {
    float* row = values_.data() + f * samples_;
    for (std::size_t s = 0; s < samples_; ++s) {
      row[s] = static_cast<float>(normalised_response(features_[f], samples[s], 0, 0, sd[s]));
    }
    std::uint32_t* ord = order_.data() + f * samples_;
    std::iota(ord, ord + samples_, 0u);
    std::stable_sort(ord, ord + samples_, [row](std::uint32_t a, std::uint32_t b) { return row[a] < row[b]; });
  }
}

AdaBoostTrainer::AdaBoostTrainer(const FeatureMatrix& matrix, std::vector<int> labels)
    : matrix_(matrix), labels_(std::move(labels)) {
  if (labels_.size() != matrix_.sample_count()) throw std::invalid_argument("AdaBoostTrainer: label count mismatch");
  const auto pos = std::count(labels_.begin(), labels_.end(), 1);
  const auto neg = static_cast<std::ptrdiff_t>(labels_.size()) - pos;
  if (pos == 0 || neg == 0) throw DataError("AdaBoost needs both positive and negative samples");
  // Each class starts with half of the total weight.
  weights_.resize(labels_.size());
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    weights_[i] = labels_[i] == 1 ? 0.5 / pos : 0.5 / neg;
  }
  scores_.assign(labels_.size(), 0.0);
}

const BoostRound& AdaBoostTrainer::step() {
  const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  for (auto& w : weights_) w /= total;
  double tp = 0, tn = 0;
  for (std::size_t i = 0; i < labels_.size(); ++i) (labels_[i] == 1 ? tp : tn) += weights_[i];

  const std::size_t n = matrix_.sample_count();
  double best_err = std::numeric_limits<double>::infinity();
  std::size_t best_f = 0;
  double best_thr = 0;
  int best_pol = 1;
  for (std::size_t f = 0; f < matrix_.feature_count(); ++f) {
    const auto ord = matrix_.order(f);
    double sp = 0, sn = 0;  // weight of positives / negatives below the cut
    for (std::size_t k = 0; k <= n; ++k) {
      if (k > 0) {
        const auto i = ord[k - 1];
        (labels_[i] == 1 ? sp : sn) += weights_[i];
        if (k < n && matrix_.value(f, ord[k]) == matrix_.value(f, i)) continue;
      }
      double thr;
      if (k == 0) {
        thr = matrix_.value(f, ord[0]) - 1.0;
      } else if (k == n) {
        thr = matrix_.value(f, ord[n - 1]) + 1.0;
      } else {
        thr = 0.5 * (static_cast<double>(matrix_.value(f, ord[k - 1])) + matrix_.value(f, ord[k]));
      }
      const double err_above = sp + (tn - sn);  // polarity +1: positive above the cut
      const double err_below = sn + (tp - sp);  // polarity -1
      if (err_above < best_err) {
        best_err = err_above, best_f = f, best_thr = thr, best_pol = 1;
      }
      if (err_below < best_err) {
        best_err = err_below, best_f = f, best_thr = thr, best_pol = -1;
      }
    }
  }
  if (!(best_err < 0.5 - 1e-12)) {
    throw DataError("AdaBoost: no weak learner beats weighted error 0.5 (degenerate training data)");
  }

  const double eps = std::max(best_err, 1e-10);
  const double beta = eps / (1.0 - eps);
  BoostRound round;
  round.learner = WeakLearner{matrix_.feature(best_f), best_thr, best_pol, std::log(1.0 / beta)};
  round.weighted_error = best_err;

  alpha_sum_ += round.learner.alpha;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const int h = round.learner.vote(matrix_.value(best_f, i));
    if (h == labels_[i]) weights_[i] *= beta;
    scores_[i] += round.learner.alpha * h;
    const int strong = scores_[i] >= 0.5 * alpha_sum_ ? 1 : 0;
    wrong += strong != labels_[i] ? 1 : 0;
  }
  round.training_error = static_cast<double>(wrong) / n;
  rounds_.push_back(round);
  return rounds_.back();
}

namespace {

std::vector<IntegralImage> integrate_all(std::span<const GrayFrame> frames, int base) {
  std::vector<IntegralImage> out;
  out.reserve(frames.size());
  for (const auto& f : frames) {
    if (f.width() != base || f.height() != base) {
      throw DataError("training windows must all be " + std::to_string(base) + "x" + std::to_string(base));
    }
    out.emplace_back(f);
  }
  return out;
}

}  // namespace

CascadeTrainingResult train_adaboost(std::span<const GrayFrame> positives, std::span<const GrayFrame> negatives,
                                     const CascadeTrainingConfig& cfg, std::span<const GrayFrame> negative_images) {
  if (positives.empty() || negatives.empty()) throw DataError("cascade training needs positives and negatives");
  if (!(cfg.stage_false_alarm > 0 && cfg.stage_false_alarm < 1)) {
    throw std::invalid_argument("stage false-alarm target must lie in (0, 1)");
  }
  if (!(cfg.min_detection_rate > 0 && cfg.min_detection_rate <= 1)) {
    throw std::invalid_argument("minimum detection rate must lie in (0, 1]");
  }
  const int base = positives.front().width();
  if (positives.front().height() != base) throw DataError("training windows must be square");

  std::vector<IntegralImage> pos = integrate_all(positives, base);
  std::vector<IntegralImage> neg = integrate_all(negatives, base);
  const std::size_t neg_quota = neg.size();
  const auto features = enumerate_features(base, cfg.feature_stride);
  std::mt19937_64 rng(cfg.seed);

  CascadeTrainingResult result;
  result.cascade.base_size = base;
  for (int s = 0; s < cfg.max_stages; ++s) {
    if (neg.empty()) {
      result.negatives_exhausted = true;
      break;
    }
    std::vector<IntegralImage> samples = pos;
    samples.insert(samples.end(), neg.begin(), neg.end());
    std::vector<int> labels(pos.size(), 1);
    labels.resize(samples.size(), 0);
    const FeatureMatrix matrix(features, samples, base);
    AdaBoostTrainer trainer(matrix, labels);

    CascadeStage stage;
    stage.max_false_alarm = cfg.stage_false_alarm;
    StageStats stats;
    stats.positives = pos.size();
    stats.negatives = neg.size();
    std::vector<double> pos_scores(pos.size());
    while (static_cast<int>(stage.learners.size()) < cfg.max_learners_per_stage) {
      try {
        stage.learners.push_back(trainer.step().learner);
      } catch (const DataError&) {
        if (stage.learners.empty()) throw;
        break;
      }
      const auto& scores = trainer.scores();
      std::copy(scores.begin(), scores.begin() + pos.size(), pos_scores.begin());
      std::sort(pos_scores.begin(), pos_scores.end(), std::greater<>());
      const auto keep = static_cast<std::size_t>(std::ceil(cfg.min_detection_rate * pos.size() - 1e-9));
      const std::size_t idx = std::clamp<std::size_t>(keep, 1, pos.size()) - 1;
      stage.threshold = pos_scores[idx] - 1e-9 * trainer.alpha_sum();

      std::size_t tp = 0, fp = 0;
      for (std::size_t i = 0; i < samples.size(); ++i) {
        if (scores[i] >= stage.threshold) (labels[i] == 1 ? tp : fp)++;
      }
      stats.detection_rate = static_cast<double>(tp) / pos.size();
      stats.false_alarm = static_cast<double>(fp) / neg.size();
      if (stats.false_alarm <= cfg.stage_false_alarm) break;
    }
    stats.learners = static_cast<int>(stage.learners.size());
    stats.met_target = stats.false_alarm <= cfg.stage_false_alarm;
    result.cascade.stages.push_back(stage);
    result.stages.push_back(stats);

    const Window win{0, 0, base};
    auto survives = [&](const IntegralImage& ii) {
      return stage_score(result.cascade.stages.back(), ii, win, base) >= result.cascade.stages.back().threshold;
    };
    std::erase_if(pos, [&](const IntegralImage& ii) { return !survives(ii); });
    std::erase_if(neg, [&](const IntegralImage& ii) { return !survives(ii); });
    if (pos.empty()) break;

    // Refill with windows from the large negative images that the cascade
    // so far still accepts.
    for (int attempt = 0; attempt < cfg.bootstrap_attempts && neg.size() < neg_quota && !negative_images.empty();
         ++attempt) {
      const auto& img = negative_images[rng() % negative_images.size()];
      const int max_size = std::min({img.width(), img.height(), std::max(base, cfg.bootstrap_max_window)});
      if (max_size < base) continue;
      const int size = base + static_cast<int>(rng() % static_cast<unsigned>(max_size - base + 1));
      const int x = static_cast<int>(rng() % static_cast<unsigned>(img.width() - size + 1));
      const int y = static_cast<int>(rng() % static_cast<unsigned>(img.height() - size + 1));
      IntegralImage ii(crop_resized(img, x, y, size, base));
      if (classify_window_cascade(result.cascade, ii, win)) neg.push_back(std::move(ii));
    }
  }
  if (neg.empty()) result.negatives_exhausted = true;
  return result;
}

void write_cascade(std::ostream& out, const Cascade& cascade) {
  out << std::setprecision(17);
  out << "cascade " << cascade.base_size << ' ' << cascade.stages.size() << '\n';
  for (const auto& stage : cascade.stages) {
    out << "stage " << stage.learners.size() << ' ' << stage.max_false_alarm << '\n';
    for (const auto& l : stage.learners) {
      const auto& f = l.feature;
      out << static_cast<int>(f.prototype) << ' ' << f.x << ' ' << f.y << ' ' << f.w << ' ' << f.h << ' '
          << l.threshold << ' ' << l.polarity << ' ' << l.alpha << '\n';
    }
    out << "threshold " << stage.threshold << '\n';
  }
}

Cascade read_cascade(std::istream& in) {
  auto fail = [](const std::string& what) -> DataError { return DataError("cascade file: " + what); };
  std::string tag;
  std::size_t stage_count = 0;
  Cascade c;
  if (!(in >> tag >> c.base_size >> stage_count) || tag != "cascade") throw fail("missing 'cascade' header");
  if (c.base_size < 1) throw fail("bad base size");
  for (std::size_t s = 0; s < stage_count; ++s) {
    CascadeStage stage;
    std::size_t n = 0;
    if (!(in >> tag >> n >> stage.max_false_alarm) || tag != "stage") throw fail("missing 'stage' line");
    for (std::size_t k = 0; k < n; ++k) {
      WeakLearner l;
      int proto = 0;
      if (!(in >> proto >> l.feature.x >> l.feature.y >> l.feature.w >> l.feature.h >> l.threshold >> l.polarity >>
            l.alpha)) {
        throw fail("truncated weak learner");
      }
      if (proto < 1 || proto > kHaarPrototypeCount) throw fail("prototype id out of range");
      l.feature.prototype = static_cast<HaarPrototype>(proto);
      if (!fits_window(l.feature, c.base_size)) throw fail("feature does not fit the base window");
      if (l.polarity != 1 && l.polarity != -1) throw fail("polarity must be +1 or -1");
      if (!(l.alpha >= 0)) throw fail("negative vote weight");
      stage.learners.push_back(l);
    }
    if (!(in >> tag >> stage.threshold) || tag != "threshold") throw fail("missing stage threshold");
    c.stages.push_back(std::move(stage));
  }
  return c;
}

void save_cascade(const std::filesystem::path& path, const Cascade& cascade) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_cascade(out, cascade);
}

Cascade load_cascade(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("model missing: " + path.string());
  return read_cascade(in);
}

}  // namespace crowdcount
