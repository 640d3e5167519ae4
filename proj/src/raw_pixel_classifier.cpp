#include "crowdcount/raw_pixel_classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "crowdcount/error.hpp"

namespace crowdcount {

RawPixelSample normalise_raw(std::span<const double> values) {
  if (values.size() != kRawDims) throw std::invalid_argument("normalise_raw: expected 81 values");
  double mean = 0;
  for (double v : values) mean += v;
  mean /= kRawDims;
  double var = 0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= kRawDims;
  RawPixelSample out{};
  if (var <= 1e-12) return out;
  const double sd = std::sqrt(var);
  for (int i = 0; i < kRawDims; ++i) out[i] = (values[i] - mean) / sd;
  return out;
}

RawPixelSample extract_raw_features(const GrayFrame& frame, const Window& window) {
  return normalise_raw(resample_window(frame, window.x, window.y, window.size, kRawSide));
}

namespace {

double squared_distance(const RawPixelSample& a, const RawPixelSample& b) {
  double d = 0;
  for (int i = 0; i < kRawDims; ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
  return d;
}

}  // namespace

RbfClassifier::RbfClassifier(double sigma, double rho, std::vector<RawPixelSample> support, std::vector<double> coef)
    : sigma_(sigma), rho_(rho), support_(std::move(support)), coef_(std::move(coef)) {
  if (!(sigma_ > 0)) throw std::invalid_argument("RbfClassifier: sigma must be positive");
  if (support_.size() != coef_.size()) throw std::invalid_argument("RbfClassifier: coefficient count mismatch");
}

double RbfClassifier::decision(const RawPixelSample& x) const {
  const double gamma = 1.0 / (2.0 * sigma_ * sigma_);
  double sum = 0;
  for (std::size_t i = 0; i < support_.size(); ++i) sum += coef_[i] * std::exp(-gamma * squared_distance(support_[i], x));
  return sum - rho_;
}

SmoResult train_reference_classifier(std::span<const LabelledSample> samples, const SmoConfig& cfg) {
  if (!(cfg.sigma > 0) || !(cfg.penalty > 0)) throw std::invalid_argument("SMO: sigma and penalty must be positive");
  const std::size_t n = samples.size();
  bool has_pos = false, has_neg = false;
  for (const auto& s : samples) {
    if (s.label == 1) has_pos = true;
    else if (s.label == -1) has_neg = true;
    else throw DataError("SMO: labels must be +1 or -1");
  }
  if (!has_pos || !has_neg) throw DataError("SMO: both classes must be present");

  const double gamma = 1.0 / (2.0 * cfg.sigma * cfg.sigma);
  const double C = cfg.penalty;
  constexpr double kTau = 1e-12;
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = samples[i].label;

  // Full kernel matrix for desk-scale problems, rows on demand beyond that.
  const bool cache_all = n <= 3000;
  std::vector<double> kmat;
  if (cache_all) {
    kmat.resize(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      kmat[i * n + i] = 1.0;
      for (std::size_t j = i + 1; j < n; ++j) {
        kmat[i * n + j] = kmat[j * n + i] = std::exp(-gamma * squared_distance(samples[i].x, samples[j].x));
      }
    }
  }
  std::vector<double> row_i(n), row_j(n);
  auto kernel_row = [&](std::size_t i, std::vector<double>& row) {
    if (cache_all) {
      std::copy(kmat.begin() + i * n, kmat.begin() + (i + 1) * n, row.begin());
    } else {
      for (std::size_t t = 0; t < n; ++t) row[t] = std::exp(-gamma * squared_distance(samples[i].x, samples[t].x));
    }
  };

  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);  // gradient of 0.5 a'Qa - e'a, Q_ij = y_i y_j K_ij
  auto upper = [&](std::size_t t) { return alpha[t] >= C; };
  auto lower = [&](std::size_t t) { return alpha[t] <= 0; };

  SmoResult result;
  result.converged = false;
  long it = 0;
  for (; it < cfg.max_iterations; ++it) {
    double gmax = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t i = -1;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] > 0 ? !upper(t) : !lower(t)) {
        const double v = -y[t] * grad[t];
        if (v >= gmax) gmax = v, i = static_cast<std::ptrdiff_t>(t);
      }
    }
    if (i < 0) {
      result.converged = true;
      break;
    }
    kernel_row(static_cast<std::size_t>(i), row_i);
    double gmax2 = -std::numeric_limits<double>::infinity();
    double best_obj = std::numeric_limits<double>::infinity();
    std::ptrdiff_t j = -1;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] > 0 ? lower(t) : upper(t)) continue;
      const double v = y[t] * grad[t];
      gmax2 = std::max(gmax2, v);
      const double diff = gmax + v;
      if (diff > 0) {
        double quad = 1.0 + 1.0 - 2.0 * row_i[t];
        if (quad <= 0) quad = kTau;
        const double obj = -(diff * diff) / quad;
        if (obj <= best_obj) best_obj = obj, j = static_cast<std::ptrdiff_t>(t);
      }
    }
    if (gmax + gmax2 < cfg.tolerance || j < 0) {
      result.converged = true;
      break;
    }
    const auto ui = static_cast<std::size_t>(i);
    const auto uj = static_cast<std::size_t>(j);
    kernel_row(uj, row_j);
    const double old_ai = alpha[ui];
    const double old_aj = alpha[uj];
    double quad = 2.0 - 2.0 * row_i[uj];
    if (quad <= 0) quad = kTau;
    if (y[ui] != y[uj]) {
      const double delta = (-grad[ui] - grad[uj]) / quad;
      const double diff = alpha[ui] - alpha[uj];
      alpha[ui] += delta;
      alpha[uj] += delta;
      if (diff > 0) {
        if (alpha[uj] < 0) alpha[uj] = 0, alpha[ui] = diff;
      } else {
        if (alpha[ui] < 0) alpha[ui] = 0, alpha[uj] = -diff;
      }
      if (diff > 0) {
        if (alpha[ui] > C) alpha[ui] = C, alpha[uj] = C - diff;
      } else {
        if (alpha[uj] > C) alpha[uj] = C, alpha[ui] = C + diff;
      }
    } else {
      const double delta = (grad[ui] - grad[uj]) / quad;
      const double sum = alpha[ui] + alpha[uj];
      alpha[ui] -= delta;
      alpha[uj] += delta;
      if (sum > C) {
        if (alpha[ui] > C) alpha[ui] = C, alpha[uj] = sum - C;
      } else {
        if (alpha[uj] < 0) alpha[uj] = 0, alpha[ui] = sum;
      }
      if (sum > C) {
        if (alpha[uj] > C) alpha[uj] = C, alpha[ui] = sum - C;
      } else {
        if (alpha[ui] < 0) alpha[ui] = 0, alpha[uj] = sum;
      }
    }
    const double dai = alpha[ui] - old_ai;
    const double daj = alpha[uj] - old_aj;
    for (std::size_t t = 0; t < n; ++t) {
      grad[t] += y[t] * (y[ui] * row_i[t] * dai + y[uj] * row_j[t] * daj);
    }
  }
  result.iterations = it;

  // rho: mean of y_i G_i over free vectors, else the midpoint of the bounds.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0;
  int free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (upper(t)) {
      if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (lower(t)) {
      if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++free;
      sum_free += yg;
    }
  }
  const double rho = free > 0 ? sum_free / free : 0.5 * (ub + lb);

  std::vector<RawPixelSample> support;
  std::vector<double> coef;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0) {
      support.push_back(samples[t].x);
      coef.push_back(alpha[t] * y[t]);
    }
  }
  result.classifier = RbfClassifier(cfg.sigma, rho, std::move(support), std::move(coef));
  return result;
}

void write_classifier(std::ostream& out, const RbfClassifier& c) {
  out << std::setprecision(17);
  out << "rbf " << c.sigma() << ' ' << c.rho() << ' ' << c.support().size() << '\n';
  for (std::size_t i = 0; i < c.support().size(); ++i) {
    out << c.coefficients()[i];
    for (double v : c.support()[i]) out << ' ' << v;
    out << '\n';
  }
}

RbfClassifier read_classifier(std::istream& in) {
  std::string tag;
  double sigma = 0, rho = 0;
  std::size_t n = 0;
  if (!(in >> tag >> sigma >> rho >> n) || tag != "rbf") throw DataError("classifier file: missing 'rbf' header");
  if (!(sigma > 0)) throw DataError("classifier file: sigma must be positive");
  std::vector<RawPixelSample> support(n);
  std::vector<double> coef(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(in >> coef[i])) throw DataError("classifier file: truncated support vector");
    for (auto& v : support[i]) {
      if (!(in >> v)) throw DataError("classifier file: truncated support vector");
    }
  }
  return RbfClassifier(sigma, rho, std::move(support), std::move(coef));
}

void save_classifier(const std::filesystem::path& path, const RbfClassifier& c) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_classifier(out, c);
}

RbfClassifier load_classifier(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("model missing: " + path.string());
  return read_classifier(in);
}

}  // namespace crowdcount
