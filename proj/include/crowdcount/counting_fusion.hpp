#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "crowdcount/camera_geometry.hpp"
#include "crowdcount/ground_plane_model.hpp"

namespace crowdcount {

// Weighted corner tallies of one view in one frame.
struct FrameObservation {
  int frame = 0;
  int view_id = 0;
  std::vector<double> tallies;  // w_R * corner count, per region
  double overflow = 0;          // points beyond the last region, at the outermost weight
  std::size_t flagged = 0;      // how many points landed in the overflow bucket

  double total() const;
};

FrameObservation accumulate_observation(std::span<const GroundPoint> corners, const RegionMap& regions,
                                        const RegionWeights& weights, int frame = 0, int view_id = 0);

struct AcppModel {
  double acpp = 1;
  std::vector<int> views;
  std::size_t frames_used = 0;
  std::size_t frames_excluded = 0;  // frames with zero ground truth
};

// ACPP = mean over frames of total / gt. Frames with gt <= 0 are skipped and
// counted in frames_excluded. Throws DataError if nothing remains or the
// result is not positive.
AcppModel calibrate_acpp(std::span<const FrameObservation> observations, std::span<const double> gt);

double estimate_single_view(const FrameObservation& obs, const AcppModel& model);

enum class FusionRule { kMaximum, kMinimum, kAverage };

// Combines views region by region (overflow counts as one more region), sums
// and divides by ACPP. Throws std::invalid_argument for no views or
// mismatched region counts.
double fuse_weighted_total(std::span<const FrameObservation> views, FusionRule rule);
double fuse_corner_counts(std::span<const FrameObservation> views, FusionRule rule, const AcppModel& model);

enum class SceneAcppMode {
  kMeanOfViews,  // average of the per-view ACPPs
  kFused,        // calibrated on the fused totals themselves
};

// per_frame[i] holds every view's observation of training frame i.
AcppModel calibrate_scene_acpp(std::span<const AcppModel> per_view, std::span<const std::vector<FrameObservation>> per_frame,
                               std::span<const double> gt, SceneAcppMode mode, FusionRule rule);

struct HeadPoint {
  double x = 0;
  double y = 0;
  int view_id = 0;
  int frame = 0;
};

using Polygon = std::vector<Eigen::Vector2d>;

// Even-odd ray casting; points on an edge may fall either way.
bool point_in_polygon(const Polygon& poly, double x, double y);

struct CorrespondenceConfig {
  int max_mask = 9;  // plane pixels; masks grow 3, 5, ... up to this
  GroundPlaneSpec plane;
};

// Greedy cross-view matching on the ground plane. Points are visited by view
// id, then plane row, then plane column. Each unmatched point looks in every
// other view for the first unmatched point inside a growing square mask and
// takes at most one partner per view; a matched group becomes its mean.
// Lone points survive only inside a single-view zone.
std::vector<HeadPoint> correspond_heads(std::span<const HeadPoint> points, std::span<const Polygon> single_view_zones,
                                        const CorrespondenceConfig& cfg = {});

std::size_t count_heads(std::span<const HeadPoint> fused);

// Mean |estimate - gt| per frame, or the mean signed difference.
// Throws std::invalid_argument for empty or mismatched inputs.
double aepf(std::span<const double> estimates, std::span<const double> gt, bool signed_error = false);

struct CountRow {
  int frame = 0;
  std::vector<double> view_estimates;
  double fused = 0;
  double gt = 0;
};

struct CountReport {
  std::vector<int> view_ids;
  std::vector<CountRow> rows;

  std::vector<double> fused() const;
  std::vector<double> ground_truth() const;
  std::vector<double> view_column(std::size_t v) const;
  double aepf(bool signed_error = false) const;
};

// CSV `frame,view<id>_est,...,fused_est,gt,abs_err` and a trailing
// `# AepF=<value>` line.
void write_count_report(std::ostream& out, const CountReport& report);

// Ground truth CSV `frame,count`.
std::vector<std::pair<int, double>> load_ground_truth(const std::filesystem::path& path);
void save_ground_truth(const std::filesystem::path& path, std::span<const std::pair<int, double>> gt);

}  // namespace crowdcount
