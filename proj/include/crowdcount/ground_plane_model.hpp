#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "crowdcount/camera_geometry.hpp"

namespace crowdcount {

// Concentric distance bands around a camera's ground position.
// Region index = floor(distance / region_width), valid while < region_count.
struct RegionMap {
  GroundPoint camera;
  double region_width = 1000.0;
  int region_count = 37;

  double distance(double x, double y) const;
  std::optional<int> region_of(double x, double y) const;
  std::optional<int> region_of(const GroundPoint& g) const { return region_of(g.x, g.y); }
};

RegionMap build_regions(const GroundPoint& camera_pos, double region_width, int count);

// Average person height in pixels per region; nullopt where unobserved.
struct HeightProfile {
  std::vector<std::optional<double>> heights;

  std::size_t observed() const;
};

struct RegionWeights {
  std::vector<double> weights;
};

struct ExemplarSample {
  int frame = 0;
  Eigen::Vector2d foot_pixel;
  double height_px = 0;
};

// One unoccluded person followed through the scene.
struct ExemplarTrack {
  std::vector<ExemplarSample> samples;
};

struct WeightCalibration {
  HeightProfile observed;  // raw per-region means
  HeightProfile filled;    // every region populated (interpolated/clamped)
  RegionWeights weights;   // filled[origin] / filled[r]
  int origin_region = 0;
};

// Maps feet to the ground, averages the pixel height per region and assigns
// weight(r) = height(origin region) / height(r). Throws DataError when the
// region containing the world origin has no observation.
WeightCalibration calibrate_weights(const ExemplarTrack& track, const TsaiCamera& cam,
                                    const RegionMap& regions);

// Linear interpolation over region index between observed regions, clamped
// to the nearest observation outside them. Requires >= 2 observed regions.
HeightProfile interpolate_profile(const HeightProfile& profile);

struct CorrectedPoint {
  GroundPoint point;
  bool flagged = false;  // input lay outside every region; returned unmodified
};

// Slides g toward the camera ground position by min(h/2, distance to the
// inner edge of g's region), h being that region's person height in mm.
CorrectedPoint correct_corner_projection(const GroundPoint& g, const RegionMap& regions,
                                         std::span<const double> person_height_mm);

enum class HeadCorrection {
  kSimilarTriangles,  // d = D hP / hC
  kInverseRatio,      // d = D hC / hP
};

// Moves a projected head point toward the camera ground position by d.
// Throws GeometryError unless 0 <= hP < hC (0 < hP for kInverseRatio).
GroundPoint correct_head_projection(const GroundPoint& g, const GroundPoint& camera_pos, double camera_height,
                                    double person_height,
                                    HeadCorrection mode = HeadCorrection::kSimilarTriangles);

// CSV `region_index,avg_height_px,weight` with a header line.
void save_weights(const std::filesystem::path& path, const WeightCalibration& calib);
RegionWeights load_weights(const std::filesystem::path& path);

// Exemplar CSV `frame,foot_x,foot_y,height_px` with a header line.
ExemplarTrack load_exemplar(const std::filesystem::path& path);
void save_exemplar(const std::filesystem::path& path, const ExemplarTrack& track);

}  // namespace crowdcount
