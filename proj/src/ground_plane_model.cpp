#include "crowdcount/ground_plane_model.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>
#include <string>

#include "crowdcount/csv.hpp"
#include "crowdcount/error.hpp"

namespace crowdcount {

double RegionMap::distance(double x, double y) const { return std::hypot(x - camera.x, y - camera.y); }

std::optional<int> RegionMap::region_of(double x, double y) const {
  const double idx = std::floor(distance(x, y) / region_width);
  if (!(idx >= 0) || idx >= region_count) return std::nullopt;
  return static_cast<int>(idx);
}

RegionMap build_regions(const GroundPoint& camera_pos, double region_width, int count) {
  if (!(region_width > 0)) throw std::invalid_argument("region width must be positive");
  if (count < 1) throw std::invalid_argument("region count must be >= 1");
  return RegionMap{camera_pos, region_width, count};
}

std::size_t HeightProfile::observed() const {
  std::size_t n = 0;
  for (const auto& h : heights) n += h.has_value() ? 1 : 0;
  return n;
}

HeightProfile interpolate_profile(const HeightProfile& profile) {
  if (profile.observed() < 2) throw std::invalid_argument("interpolate_profile: need >= 2 observed regions");
  const auto& h = profile.heights;
  const int n = static_cast<int>(h.size());
  HeightProfile out = profile;
  int prev = -1;
  for (int i = 0; i < n; ++i) {
    if (!h[i]) continue;
    if (prev < 0) {
      for (int j = 0; j < i; ++j) out.heights[j] = h[i];
    } else {
      for (int j = prev + 1; j < i; ++j) {
        const double t = static_cast<double>(j - prev) / (i - prev);
        out.heights[j] = (1.0 - t) * *h[prev] + t * *h[i];
      }
    }
    prev = i;
  }
  for (int j = prev + 1; j < n; ++j) out.heights[j] = h[prev];
  return out;
}

WeightCalibration calibrate_weights(const ExemplarTrack& track, const TsaiCamera& cam,
                                    const RegionMap& regions) {
  if (track.samples.empty()) throw DataError("weight calibration: exemplar track is empty");
  const auto origin = regions.region_of(0.0, 0.0);
  if (!origin) throw DataError("weight calibration: world origin lies outside every region");

  std::vector<double> sums(regions.region_count, 0.0);
  std::vector<int> counts(regions.region_count, 0);
  for (const auto& s : track.samples) {
    if (!(s.height_px > 0)) throw DataError("weight calibration: exemplar heights must be positive");
    GroundPoint foot;
    try {
      foot = image_to_ground(cam, s.foot_pixel);
    } catch (const GeometryError&) {
      continue;
    }
    if (const auto r = regions.region_of(foot)) {
      sums[*r] += s.height_px;
      ++counts[*r];
    }
  }

  WeightCalibration calib;
  calib.origin_region = *origin;
  calib.observed.heights.resize(regions.region_count);
  for (int r = 0; r < regions.region_count; ++r) {
    if (counts[r] > 0) calib.observed.heights[r] = sums[r] / counts[r];
  }
  if (!calib.observed.heights[*origin]) {
    throw DataError("weight calibration: the exemplar never visits the origin region (region " +
                    std::to_string(*origin) + "); refusing to extrapolate");
  }
  if (calib.observed.observed() >= 2) {
    calib.filled = interpolate_profile(calib.observed);
  } else {
    calib.filled.heights.assign(regions.region_count, calib.observed.heights[*origin]);
  }
  const double reference = *calib.filled.heights[*origin];
  calib.weights.weights.resize(regions.region_count);
  for (int r = 0; r < regions.region_count; ++r) {
    calib.weights.weights[r] = reference / *calib.filled.heights[r];
  }
  return calib;
}

CorrectedPoint correct_corner_projection(const GroundPoint& g, const RegionMap& regions,
                                         std::span<const double> person_height_mm) {
  const auto region = regions.region_of(g);
  if (!region) return {g, true};
  if (person_height_mm.empty()) throw std::invalid_argument("correct_corner_projection: empty height profile");
  const double h = person_height_mm.size() == 1 ? person_height_mm[0]
                                                : person_height_mm[std::min<std::size_t>(
                                                      *region, person_height_mm.size() - 1)];
  if (h < 0) throw std::invalid_argument("correct_corner_projection: negative person height");
  const double dist = regions.distance(g.x, g.y);
  if (dist == 0.0 || h == 0.0) return {g, false};
  const double inner = *region * regions.region_width;
  const double move = std::min(h / 2.0, dist - inner);
  double scale = (dist - move) / dist;
  CorrectedPoint out{g, false};
  for (int guard = 0; guard < 64; ++guard) {
    out.point.x = regions.camera.x + (g.x - regions.camera.x) * scale;
    out.point.y = regions.camera.y + (g.y - regions.camera.y) * scale;
    const auto now = regions.region_of(out.point);
    if (now && *now >= *region) break;
    scale = std::nextafter(scale, 2.0);
  }
  return out;
}

GroundPoint correct_head_projection(const GroundPoint& g, const GroundPoint& camera_pos, double camera_height,
                                    double person_height, HeadCorrection mode) {
  if (!(person_height >= 0.0) || !(person_height < camera_height)) {
    throw GeometryError("head correction requires 0 <= person height < camera height");
  }
  const double dx = camera_pos.x - g.x;
  const double dy = camera_pos.y - g.y;
  const double dist = std::hypot(dx, dy);
  if (dist == 0.0) return g;
  double d = 0.0;
  if (mode == HeadCorrection::kSimilarTriangles) {
    d = dist * person_height / camera_height;
  } else {
    if (!(person_height > 0.0)) throw GeometryError("inverse-ratio head correction divides by person height");
    d = dist * camera_height / person_height;
  }
  GroundPoint out = g;
  out.x = g.x + dx / dist * d;
  out.y = g.y + dy / dist * d;
  return out;
}

void save_weights(const std::filesystem::path& path, const WeightCalibration& calib) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "region_index,avg_height_px,weight\n" << std::setprecision(10);
  for (std::size_t r = 0; r < calib.weights.weights.size(); ++r) {
    out << r << ',' << calib.filled.heights[r].value_or(0.0) << ',' << calib.weights.weights[r] << '\n';
  }
}

RegionWeights load_weights(const std::filesystem::path& path) {
  RegionWeights w;
  for (const auto& row : read_csv(path)) {
    if (row.size() != 3) throw DataError(path.string() + ": expected region_index,avg_height_px,weight");
    const auto idx = csv_long(row[0], path.string());
    if (idx != static_cast<long>(w.weights.size())) {
      throw DataError(path.string() + ": region indices must be consecutive from 0");
    }
    const double weight = csv_double(row[2], path.string());
    if (!(weight > 0)) throw DataError(path.string() + ": weights must be positive");
    w.weights.push_back(weight);
  }
  if (w.weights.empty()) throw DataError(path.string() + ": no weights");
  return w;
}

ExemplarTrack load_exemplar(const std::filesystem::path& path) {
  ExemplarTrack track;
  for (const auto& row : read_csv(path)) {
    if (row.size() != 4) throw DataError(path.string() + ": expected frame,foot_x,foot_y,height_px");
    ExemplarSample s;
    s.frame = static_cast<int>(csv_long(row[0], path.string()));
    s.foot_pixel = {csv_double(row[1], path.string()), csv_double(row[2], path.string())};
    s.height_px = csv_double(row[3], path.string());
    track.samples.push_back(s);
  }
  return track;
}

void save_exemplar(const std::filesystem::path& path, const ExemplarTrack& track) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "frame,foot_x,foot_y,height_px\n" << std::setprecision(10);
  for (const auto& s : track.samples) {
    out << s.frame << ',' << s.foot_pixel.x() << ',' << s.foot_pixel.y() << ',' << s.height_px << '\n';
  }
}

}  // namespace crowdcount
