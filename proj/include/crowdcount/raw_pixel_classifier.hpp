#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "crowdcount/haar_features.hpp"
#include "crowdcount/image.hpp"

namespace crowdcount {

inline constexpr int kRawSide = 9;
inline constexpr int kRawDims = kRawSide * kRawSide;

using RawPixelSample = std::array<double, kRawDims>;

// Bilinear resample of the window to 9x9, then zero mean / unit variance.
// Flat windows map to the zero vector.
RawPixelSample extract_raw_features(const GrayFrame& frame, const Window& window);
RawPixelSample normalise_raw(std::span<const double> values);

struct LabelledSample {
  RawPixelSample x;
  int label = 1;  // +1 or -1
};

// Anything that labels a raw-pixel sample.
class BinaryClassifier {
 public:
  virtual ~BinaryClassifier() = default;
  // Signed confidence; positive means "head".
  virtual double decision(const RawPixelSample& x) const = 0;
  int decide(const RawPixelSample& x) const { return decision(x) > 0 ? 1 : -1; }
};

// Gaussian-kernel classifier K(a, b) = exp(-|a - b|^2 / (2 sigma^2)).
class RbfClassifier : public BinaryClassifier {
 public:
  RbfClassifier() = default;
  RbfClassifier(double sigma, double rho, std::vector<RawPixelSample> support, std::vector<double> coef);

  double decision(const RawPixelSample& x) const override;

  double sigma() const { return sigma_; }
  double rho() const { return rho_; }
  const std::vector<RawPixelSample>& support() const { return support_; }
  const std::vector<double>& coefficients() const { return coef_; }

 private:
  double sigma_ = 1;
  double rho_ = 0;
  std::vector<RawPixelSample> support_;
  std::vector<double> coef_;  // alpha_i * y_i
};

struct SmoConfig {
  double sigma = 3.0;
  double penalty = 10.0;
  double tolerance = 1e-3;
  long max_iterations = 200000;
};

struct SmoResult {
  RbfClassifier classifier;
  long iterations = 0;
  bool converged = true;
};

// Dual coordinate ascent with pairwise (SMO) updates and second-order
// working-set selection. Throws DataError unless both labels are present.
SmoResult train_reference_classifier(std::span<const LabelledSample> samples, const SmoConfig& cfg);

// Text format:
//   rbf <sigma> <rho> <support_count>
//   <coef> <81 values>   (per support vector)
void write_classifier(std::ostream& out, const RbfClassifier& c);
RbfClassifier read_classifier(std::istream& in);
void save_classifier(const std::filesystem::path& path, const RbfClassifier& c);
RbfClassifier load_classifier(const std::filesystem::path& path);

}  // namespace crowdcount
