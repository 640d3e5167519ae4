#include "crowdcount/counting_fusion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "crowdcount/csv.hpp"
#include "crowdcount/error.hpp"

namespace crowdcount {

double FrameObservation::total() const { return std::accumulate(tallies.begin(), tallies.end(), 0.0) + overflow; }

FrameObservation accumulate_observation(std::span<const GroundPoint> corners, const RegionMap& regions,
                                        const RegionWeights& weights, int frame, int view_id) {
  if (weights.weights.size() != static_cast<std::size_t>(regions.region_count)) {
    throw std::invalid_argument("accumulate_observation: weight count does not match region count");
  }
  FrameObservation obs;
  obs.frame = frame;
  obs.view_id = view_id;
  obs.tallies.assign(regions.region_count, 0.0);
  for (const auto& g : corners) {
    if (const auto r = regions.region_of(g)) {
      obs.tallies[*r] += weights.weights[*r];
    } else {
      obs.overflow += weights.weights.back();
      ++obs.flagged;
    }
  }
  return obs;
}

AcppModel calibrate_acpp(std::span<const FrameObservation> observations, std::span<const double> gt) {
  if (observations.size() != gt.size()) throw std::invalid_argument("calibrate_acpp: one ground truth per frame");
  AcppModel m;
  double sum = 0;
  for (std::size_t i = 0; i < observations.size(); ++i) {
    if (!(gt[i] > 0)) {
      ++m.frames_excluded;
      continue;
    }
    sum += observations[i].total() / gt[i];
    ++m.frames_used;
    const int v = observations[i].view_id;
    if (std::find(m.views.begin(), m.views.end(), v) == m.views.end()) m.views.push_back(v);
  }
  if (m.frames_used == 0) throw DataError("ACPP calibration: no training frame with a nonzero ground truth");
  m.acpp = sum / static_cast<double>(m.frames_used);
  if (!(m.acpp > 0)) throw DataError("ACPP calibration: no corner points in the training frames");
  return m;
}

double estimate_single_view(const FrameObservation& obs, const AcppModel& model) {
  if (!(model.acpp > 0)) throw std::invalid_argument("ACPP must be positive");
  return obs.total() / model.acpp;
}

double fuse_weighted_total(std::span<const FrameObservation> views, FusionRule rule) {
  if (views.empty()) throw std::invalid_argument("fusion needs at least one view");
  const std::size_t regions = views.front().tallies.size();
  for (const auto& v : views) {
    if (v.tallies.size() != regions) throw std::invalid_argument("fusion: views must share the region structure");
  }
  auto combine = [&](auto get) {
    double acc = get(views.front());
    for (const auto& v : views.subspan(1)) {
      const double x = get(v);
      switch (rule) {
        case FusionRule::kMaximum: acc = std::max(acc, x); break;
        case FusionRule::kMinimum: acc = std::min(acc, x); break;
        case FusionRule::kAverage: acc += x; break;
      }
    }
    return rule == FusionRule::kAverage ? acc / static_cast<double>(views.size()) : acc;
  };
  double total = 0;
  for (std::size_t r = 0; r < regions; ++r) total += combine([r](const FrameObservation& o) { return o.tallies[r]; });
  total += combine([](const FrameObservation& o) { return o.overflow; });
  return total;
}

double fuse_corner_counts(std::span<const FrameObservation> views, FusionRule rule, const AcppModel& model) {
  if (!(model.acpp > 0)) throw std::invalid_argument("ACPP must be positive");
  return fuse_weighted_total(views, rule) / model.acpp;
}

AcppModel calibrate_scene_acpp(std::span<const AcppModel> per_view, std::span<const std::vector<FrameObservation>> per_frame,
                               std::span<const double> gt, SceneAcppMode mode, FusionRule rule) {
  AcppModel m;
  if (mode == SceneAcppMode::kMeanOfViews) {
    if (per_view.empty()) throw std::invalid_argument("scene ACPP: no per-view models");
    double sum = 0;
    for (const auto& v : per_view) {
      sum += v.acpp;
      m.views.insert(m.views.end(), v.views.begin(), v.views.end());
      m.frames_used = std::max(m.frames_used, v.frames_used);
      m.frames_excluded = std::max(m.frames_excluded, v.frames_excluded);
    }
    m.acpp = sum / static_cast<double>(per_view.size());
    return m;
  }
  if (per_frame.size() != gt.size()) throw std::invalid_argument("scene ACPP: one ground truth per frame");
  std::vector<FrameObservation> fused;
  for (const auto& views : per_frame) {
    FrameObservation f;
    f.tallies.assign(1, fuse_weighted_total(views, rule));
    fused.push_back(std::move(f));
  }
  m = calibrate_acpp(fused, gt);
  m.views.clear();
  if (!per_frame.empty()) {
    for (const auto& o : per_frame.front()) m.views.push_back(o.view_id);
  }
  return m;
}

bool point_in_polygon(const Polygon& poly, double x, double y) {
  bool inside = false;
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const auto& a = poly[i];
    const auto& b = poly[j];
    if ((a.y() > y) != (b.y() > y) && x < (b.x() - a.x()) * (y - a.y()) / (b.y() - a.y()) + a.x()) inside = !inside;
  }
  return inside;
}

std::vector<HeadPoint> correspond_heads(std::span<const HeadPoint> points, std::span<const Polygon> single_view_zones,
                                        const CorrespondenceConfig& cfg) {
  if (cfg.max_mask < 1) throw std::invalid_argument("correspondence mask must be >= 1 plane pixel");
  if (!(cfg.plane.mm_per_pixel > 0)) throw std::invalid_argument("plane resolution must be positive");
  struct Item {
    HeadPoint p;
    long px, py;
  };
  const double c = cfg.plane.size / 2.0;
  std::vector<Item> items;
  items.reserve(points.size());
  for (const auto& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw std::invalid_argument("head point is not finite");
    items.push_back({p, std::lround(c + p.x / cfg.plane.mm_per_pixel), std::lround(c + p.y / cfg.plane.mm_per_pixel)});
  }
  std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    if (a.p.view_id != b.p.view_id) return a.p.view_id < b.p.view_id;
    if (a.py != b.py) return a.py < b.py;
    return a.px < b.px;
  });

  std::vector<int> views;
  for (const auto& it : items) {
    if (views.empty() || views.back() != it.p.view_id) views.push_back(it.p.view_id);
  }

  std::vector<int> masks;
  for (int m = 3; m <= cfg.max_mask; m += 2) masks.push_back(m);
  if (masks.empty()) masks.push_back(cfg.max_mask);

  std::vector<bool> used(items.size(), false);
  std::vector<HeadPoint> out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (used[i]) continue;
    std::vector<std::size_t> group{i};
    for (int v : views) {
      if (v == items[i].p.view_id) continue;
      bool found = false;
      for (std::size_t mi = 0; mi < masks.size() && !found; ++mi) {
        const long half = masks[mi] / 2;
        for (std::size_t j = 0; j < items.size(); ++j) {
          if (used[j] || items[j].p.view_id != v) continue;
          if (std::labs(items[j].px - items[i].px) <= half && std::labs(items[j].py - items[i].py) <= half) {
            group.push_back(j);
            found = true;
            break;
          }
        }
      }
      if (found) used[group.back()] = true;
    }
    used[i] = true;
    if (group.size() >= 2) {
      HeadPoint mean{0, 0, items[i].p.view_id, items[i].p.frame};
      for (auto k : group) {
        mean.x += items[k].p.x;
        mean.y += items[k].p.y;
      }
      mean.x /= static_cast<double>(group.size());
      mean.y /= static_cast<double>(group.size());
      out.push_back(mean);
    } else {
      const auto& p = items[i].p;
      const bool zone = std::any_of(single_view_zones.begin(), single_view_zones.end(),
                                    [&](const Polygon& z) { return point_in_polygon(z, p.x, p.y); });
      if (zone) out.push_back(p);
    }
  }
  return out;
}

std::size_t count_heads(std::span<const HeadPoint> fused) { return fused.size(); }

double aepf(std::span<const double> estimates, std::span<const double> gt, bool signed_error) {
  if (estimates.empty()) throw std::invalid_argument("aepf: no frames");
  if (estimates.size() != gt.size()) throw std::invalid_argument("aepf: estimate and ground-truth lengths differ");
  double sum = 0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const double d = estimates[i] - gt[i];
    sum += signed_error ? d : std::abs(d);
  }
  return sum / static_cast<double>(estimates.size());
}

std::vector<double> CountReport::fused() const {
  std::vector<double> v;
  for (const auto& r : rows) v.push_back(r.fused);
  return v;
}

std::vector<double> CountReport::ground_truth() const {
  std::vector<double> v;
  for (const auto& r : rows) v.push_back(r.gt);
  return v;
}

std::vector<double> CountReport::view_column(std::size_t idx) const {
  std::vector<double> v;
  for (const auto& r : rows) v.push_back(r.view_estimates.at(idx));
  return v;
}

double CountReport::aepf(bool signed_error) const {
  return crowdcount::aepf(fused(), ground_truth(), signed_error);
}

void write_count_report(std::ostream& out, const CountReport& report) {
  out << "frame";
  for (int v : report.view_ids) out << ",view" << v << "_est";
  out << ",fused_est,gt,abs_err\n" << std::fixed << std::setprecision(4);
  for (const auto& r : report.rows) {
    out << r.frame;
    for (double e : r.view_estimates) out << ',' << e;
    out << ',' << r.fused << ',' << r.gt << ',' << std::abs(r.fused - r.gt) << '\n';
  }
  if (!report.rows.empty()) out << "# AepF=" << report.aepf() << '\n';
  out << std::defaultfloat;
}

std::vector<std::pair<int, double>> load_ground_truth(const std::filesystem::path& path) {
  std::vector<std::pair<int, double>> gt;
  for (const auto& row : read_csv(path)) {
    if (row.size() != 2) throw DataError(path.string() + ": expected frame,count");
    const double count = csv_double(row[1], path.string());
    if (count < 0) throw DataError(path.string() + ": negative count");
    gt.emplace_back(static_cast<int>(csv_long(row[0], path.string())), count);
  }
  return gt;
}

void save_ground_truth(const std::filesystem::path& path, std::span<const std::pair<int, double>> gt) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "frame,count\n";
  for (const auto& [f, c] : gt) out << f << ',' << c << '\n';
}

}  // namespace crowdcount
