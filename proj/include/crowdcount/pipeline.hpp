#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "crowdcount/camera_geometry.hpp"
#include "crowdcount/corner_detection.hpp"
#include "crowdcount/counting_fusion.hpp"
#include "crowdcount/ground_plane_model.hpp"
#include "crowdcount/head_detection.hpp"
#include "crowdcount/motion_segmentation.hpp"

namespace crowdcount {

namespace fs = std::filesystem;

// Paths of one camera. Empty paths are unset.
struct ViewConfig {
  int id = 0;
  fs::path calibration;
  fs::path frames;        // test sequence
  fs::path train_frames;  // disjoint sequence for ACPP calibration
  fs::path background;    // directory of empty frames, or a saved .pgm model
  fs::path gt;            // per-view ground truth, frame,count
  fs::path train_gt;
  fs::path exemplar;      // frame,foot_x,foot_y,height_px
  fs::path weights;       // region_index,avg_height_px,weight
};

struct PipelineConfig {
  fs::path out_dir = "out";
  std::uint64_t seed = 42;
  std::vector<ViewConfig> views;
  fs::path scene_gt;
  fs::path scene_train_gt;

  MotionConfig motion;
  double background_tolerance = 25;
  CornerConfig corners;

  int region_count = 37;
  double region_width = 1000;
  double person_height = 1750;
  bool weighting = true;   // false: every region weight is 1
  bool correction = true;  // false: projected points are used as-is

  FusionRule fusion = FusionRule::kAverage;
  SceneAcppMode scene_acpp = SceneAcppMode::kMeanOfViews;
  fs::path acpp_file;
  bool signed_aepf = false;

  GroundPlaneSpec plane;
  int head_mask = 9;
  HeadCorrection head_correction = HeadCorrection::kSimilarTriangles;
  std::string head_classifier = "cascade";  // or "raw"
  fs::path head_model;
  fs::path head_corpus;  // heads/, non_heads/, negatives/
  double stage_false_alarm = 0.4;
  double min_detection_rate = 0.995;
  int max_stages = 8;
  int feature_stride = 1;
  double raw_sigma = 3.0;
  double raw_penalty = 10.0;
  int scan_min = 9;
  int scan_max = 25;
};

// Relative paths resolve against `base_dir`. Throws ConfigError for unknown
// keys, out-of-range values, or referenced input files that do not exist.
PipelineConfig parse_pipeline_config(const std::string& text, const fs::path& base_dir,
                                     const std::string& origin = "<config>");
PipelineConfig load_pipeline_config(const fs::path& path);
// Range checks only.
void validate_pipeline_config(const PipelineConfig& cfg);

FusionRule parse_fusion_rule(const std::string& name);
std::string fusion_rule_name(FusionRule rule);
std::string mask_shape_name(MaskShape shape);

struct ViewContext {
  ViewConfig cfg;
  TsaiCamera camera;
  GroundPoint ground;  // camera position on z = 0
  double height = 0;   // camera height above the plane
  RegionMap regions;
};

ViewContext prepare_view(const PipelineConfig& cfg, const ViewConfig& view);
std::vector<ViewContext> prepare_views(const PipelineConfig& cfg);

BackgroundModel load_view_background(const PipelineConfig& cfg, const ViewConfig& view);

// Motion regions of every frame. The first frame is differenced against the
// second (there is no earlier frame).
std::vector<MotionResult> segment_sequence(std::span<const GrayFrame> frames, const BackgroundModel& background,
                                           const MotionConfig& motion);

// Region weights: unit weights when weighting is off, else the weights file
// if it exists, else calibrated from the exemplar. Throws DataError when
// neither is available.
RegionWeights resolve_weights(const PipelineConfig& cfg, const ViewContext& view);
WeightCalibration calibrate_view_weights(const PipelineConfig& cfg, const ViewContext& view);

// Corners -> ground -> correction -> weighted region tallies.
FrameObservation observe_corners(const PipelineConfig& cfg, const ViewContext& view, const RegionWeights& weights,
                                 std::span<const CornerPoint> corners, int frame);

enum class Sequence { kTest, kTrain };

// observations[setting][view][frame] for each corner configuration, from
// one segmentation pass. Throws DataError when views differ in length.
std::vector<std::vector<std::vector<FrameObservation>>> run_indirect(const PipelineConfig& cfg,
                                                                     std::span<const ViewContext> views,
                                                                     std::span<const RegionWeights> weights,
                                                                     Sequence seq,
                                                                     std::span<const CornerConfig> settings);

struct AcppSet {
  std::vector<AcppModel> per_view;
  AcppModel scene;
};

// Per-frame ground truth aligned to `frames` frames. Prefers the view file,
// falls back to the scene file.
std::vector<double> ground_truth_for(const fs::path& view_gt, const fs::path& scene_gt, std::size_t frames);

AcppSet calibrate_acpp_set(const PipelineConfig& cfg, std::span<const ViewContext> views,
                           const std::vector<std::vector<FrameObservation>>& train_obs);

void save_acpp(const fs::path& path, const AcppSet& acpp, std::span<const ViewContext> views);
AcppSet load_acpp(const fs::path& path, std::span<const ViewContext> views);

CountReport build_count_report(std::span<const ViewContext> views,
                               const std::vector<std::vector<FrameObservation>>& obs, const AcppSet& acpp,
                               std::span<const double> gt, FusionRule rule);

// Head points of one view and frame: detection centres cast onto z = 0 and
// corrected toward the camera by the head-height rule.
std::vector<HeadPoint> project_heads(const PipelineConfig& cfg, const ViewContext& view,
                                     std::span<const DetectionBox> boxes, int frame);

}  // namespace crowdcount
