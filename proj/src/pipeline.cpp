#include "crowdcount/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "crowdcount/error.hpp"
#include "crowdcount/key_value.hpp"

namespace crowdcount {

namespace {

const std::set<std::string> kTopKeys = {
    "out",          "seed",         "diff_threshold",     "hysteresis_low",     "hysteresis_high",
    "min_blob_area", "background_tolerance", "th_d",      "th_g",               "mask_size",
    "mask_shape",   "region_count", "region_width_mm",    "person_height_mm",   "weighting",
    "correction",   "fusion",       "scene_acpp",         "acpp_file",          "aepf",
    "plane_size",   "plane_mm_per_pixel", "head_mask",    "head_correction",    "head_classifier",
    "head_model",   "head_corpus",  "stage_false_alarm",  "min_detection_rate", "max_stages",
    "feature_stride", "raw_sigma",  "raw_penalty",        "scan_min",           "scan_max",
};
const std::set<std::string> kSceneKeys = {"gt", "train_gt"};
const std::set<std::string> kViewKeys = {"calibration", "frames", "train_frames", "background",
                                         "gt",          "train_gt", "exemplar",   "weights"};

void require_exists(const fs::path& p, const std::string& what, const std::string& origin) {
  if (!p.empty() && !fs::exists(p)) throw ConfigError(origin + ": " + what + " does not exist: " + p.string());
}

}  // namespace

FusionRule parse_fusion_rule(const std::string& name) {
  if (name == "max") return FusionRule::kMaximum;
  if (name == "min") return FusionRule::kMinimum;
  if (name == "avg") return FusionRule::kAverage;
  throw ConfigError("fusion rule must be max, min or avg, got '" + name + "'");
}

std::string fusion_rule_name(FusionRule rule) {
  switch (rule) {
    case FusionRule::kMaximum: return "max";
    case FusionRule::kMinimum: return "min";
    case FusionRule::kAverage: return "avg";
  }
  return "?";
}

std::string mask_shape_name(MaskShape shape) { return shape == MaskShape::kSquare ? "square" : "circular"; }

void validate_pipeline_config(const PipelineConfig& cfg) {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  try {
    cfg.corners.validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  if (!(cfg.person_height >= 1000 && cfg.person_height <= 2500)) fail("person_height_mm must lie in [1000, 2500]");
  if (cfg.region_count < 1) fail("region_count must be >= 1");
  if (!(cfg.region_width > 0)) fail("region_width_mm must be positive");
  if (cfg.motion.hysteresis_low < 0 || cfg.motion.hysteresis_high > 255 ||
      cfg.motion.hysteresis_low > cfg.motion.hysteresis_high) {
    fail("hysteresis thresholds must satisfy 0 <= low <= high <= 255");
  }
  if (!(cfg.motion.diff_threshold >= 0)) fail("diff_threshold must be >= 0");
  if (!(cfg.background_tolerance >= 0)) fail("background_tolerance must be >= 0");
  if (cfg.plane.size < 1 || !(cfg.plane.mm_per_pixel > 0)) fail("ground plane size and resolution must be positive");
  if (cfg.head_mask < 1 || cfg.head_mask % 2 == 0) fail("head_mask must be a positive odd number of plane pixels");
  if (cfg.head_classifier != "cascade" && cfg.head_classifier != "raw") fail("head_classifier must be cascade or raw");
  if (!(cfg.stage_false_alarm > 0 && cfg.stage_false_alarm < 1)) fail("stage_false_alarm must lie in (0, 1)");
  if (!(cfg.min_detection_rate > 0 && cfg.min_detection_rate <= 1)) fail("min_detection_rate must lie in (0, 1]");
  if (cfg.max_stages < 1) fail("max_stages must be >= 1");
  if (cfg.feature_stride < 1) fail("feature_stride must be >= 1");
  if (!(cfg.raw_sigma > 0) || !(cfg.raw_penalty > 0)) fail("raw_sigma and raw_penalty must be positive");
  if (cfg.scan_min < 1 || cfg.scan_max < cfg.scan_min || cfg.scan_min % 2 == 0 || cfg.scan_max % 2 == 0) {
    fail("scan_min/scan_max must be odd with scan_min <= scan_max");
  }
  std::set<int> ids;
  for (const auto& v : cfg.views) {
    if (!ids.insert(v.id).second) fail("duplicate view id " + std::to_string(v.id));
  }
}

PipelineConfig parse_pipeline_config(const std::string& text, const fs::path& base_dir, const std::string& origin) {
  const auto kv = KeyValueFile::parse(text, origin);
  PipelineConfig cfg;
  auto path = [&](const std::string& v) { return fs::path(v).is_absolute() ? fs::path(v) : base_dir / v; };
  auto num = [&](const std::string& key, const std::string& v) { return parse_double(v, origin + ": " + key); };
  auto integer = [&](const std::string& key, const std::string& v) {
    return static_cast<int>(parse_long(v, origin + ": " + key));
  };

  for (const auto& section : kv.sections()) {
    const auto& entries = kv.entries(section);
    if (section.empty()) {
      for (const auto& [key, values] : entries) {
        if (!kTopKeys.contains(key)) throw ConfigError(origin + ": unknown key '" + key + "'");
        const std::string& v = values.back();
        if (key == "out") cfg.out_dir = path(v);
        else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_long(v, origin + ": seed"));
        else if (key == "diff_threshold") cfg.motion.diff_threshold = num(key, v);
        else if (key == "hysteresis_low") cfg.motion.hysteresis_low = integer(key, v);
        else if (key == "hysteresis_high") cfg.motion.hysteresis_high = integer(key, v);
        else if (key == "min_blob_area") cfg.motion.min_area = static_cast<std::size_t>(std::max(0, integer(key, v)));
        else if (key == "background_tolerance") cfg.background_tolerance = num(key, v);
        else if (key == "th_d") cfg.corners.th_d = num(key, v);
        else if (key == "th_g") cfg.corners.th_g = num(key, v);
        else if (key == "mask_size") cfg.corners.mask_size = integer(key, v);
        else if (key == "mask_shape") {
          if (v == "square") cfg.corners.mask_shape = MaskShape::kSquare;
          else if (v == "circular") cfg.corners.mask_shape = MaskShape::kCircular;
          else throw ConfigError(origin + ": mask_shape must be square or circular");
        } else if (key == "region_count") cfg.region_count = integer(key, v);
        else if (key == "region_width_mm") cfg.region_width = num(key, v);
        else if (key == "person_height_mm") cfg.person_height = num(key, v);
        else if (key == "weighting") cfg.weighting = parse_bool(v, origin + ": weighting");
        else if (key == "correction") cfg.correction = parse_bool(v, origin + ": correction");
        else if (key == "fusion") cfg.fusion = parse_fusion_rule(v);
        else if (key == "scene_acpp") {
          if (v == "mean") cfg.scene_acpp = SceneAcppMode::kMeanOfViews;
          else if (v == "fused") cfg.scene_acpp = SceneAcppMode::kFused;
          else throw ConfigError(origin + ": scene_acpp must be mean or fused");
        } else if (key == "acpp_file") cfg.acpp_file = path(v);
        else if (key == "aepf") {
          if (v == "absolute") cfg.signed_aepf = false;
          else if (v == "signed") cfg.signed_aepf = true;
          else throw ConfigError(origin + ": aepf must be absolute or signed");
        } else if (key == "plane_size") cfg.plane.size = integer(key, v);
        else if (key == "plane_mm_per_pixel") cfg.plane.mm_per_pixel = num(key, v);
        else if (key == "head_mask") cfg.head_mask = integer(key, v);
        else if (key == "head_correction") {
          if (v == "similar_triangles") cfg.head_correction = HeadCorrection::kSimilarTriangles;
          else if (v == "inverse_ratio") cfg.head_correction = HeadCorrection::kInverseRatio;
          else throw ConfigError(origin + ": head_correction must be similar_triangles or inverse_ratio");
        } else if (key == "head_classifier") cfg.head_classifier = v;
        else if (key == "head_model") cfg.head_model = path(v);
        else if (key == "head_corpus") cfg.head_corpus = path(v);
        else if (key == "stage_false_alarm") cfg.stage_false_alarm = num(key, v);
        else if (key == "min_detection_rate") cfg.min_detection_rate = num(key, v);
        else if (key == "max_stages") cfg.max_stages = integer(key, v);
        else if (key == "feature_stride") cfg.feature_stride = integer(key, v);
        else if (key == "raw_sigma") cfg.raw_sigma = num(key, v);
        else if (key == "raw_penalty") cfg.raw_penalty = num(key, v);
        else if (key == "scan_min") cfg.scan_min = integer(key, v);
        else if (key == "scan_max") cfg.scan_max = integer(key, v);
      }
    } else if (section == "scene") {
      for (const auto& [key, values] : entries) {
        if (!kSceneKeys.contains(key)) throw ConfigError(origin + ": unknown key '" + key + "' in [scene]");
        (key == "gt" ? cfg.scene_gt : cfg.scene_train_gt) = path(values.back());
      }
    } else if (section.rfind("view.", 0) == 0) {
      ViewConfig view;
      view.id = static_cast<int>(parse_long(section.substr(5), origin + ": view id in [" + section + "]"));
      for (const auto& [key, values] : entries) {
        if (!kViewKeys.contains(key)) throw ConfigError(origin + ": unknown key '" + key + "' in [" + section + "]");
        const fs::path p = path(values.back());
        if (key == "calibration") view.calibration = p;
        else if (key == "frames") view.frames = p;
        else if (key == "train_frames") view.train_frames = p;
        else if (key == "background") view.background = p;
        else if (key == "gt") view.gt = p;
        else if (key == "train_gt") view.train_gt = p;
        else if (key == "exemplar") view.exemplar = p;
        else if (key == "weights") view.weights = p;
      }
      if (view.calibration.empty()) throw ConfigError(origin + ": [" + section + "] needs a calibration path");
      cfg.views.push_back(view);
    } else {
      throw ConfigError(origin + ": unknown section [" + section + "]");
    }
  }
  std::sort(cfg.views.begin(), cfg.views.end(), [](const ViewConfig& a, const ViewConfig& b) { return a.id < b.id; });
  validate_pipeline_config(cfg);

  for (const auto& v : cfg.views) {
    const std::string where = "view " + std::to_string(v.id);
    require_exists(v.calibration, where + " calibration", origin);
    require_exists(v.frames, where + " frames", origin);
    require_exists(v.train_frames, where + " train_frames", origin);
    require_exists(v.background, where + " background", origin);
    require_exists(v.gt, where + " gt", origin);
    require_exists(v.train_gt, where + " train_gt", origin);
    require_exists(v.exemplar, where + " exemplar", origin);
  }
  require_exists(cfg.scene_gt, "scene gt", origin);
  require_exists(cfg.scene_train_gt, "scene train_gt", origin);
  require_exists(cfg.acpp_file, "acpp_file", origin);
  require_exists(cfg.head_corpus, "head_corpus", origin);
  return cfg;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_pipeline_config(ss.str(), path.parent_path(), path.string());
}

ViewContext prepare_view(const PipelineConfig& cfg, const ViewConfig& view) {
  ViewContext ctx;
  ctx.cfg = view;
  ctx.camera = load_calibration(view.calibration);
  try {
    ctx.camera.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(view.calibration.string() + ": " + e.what());
  }
  try {
    std::tie(ctx.ground, ctx.height) = camera_ground_position(ctx.camera);
  } catch (const GeometryError& e) {
    throw ConfigError(view.calibration.string() + ": " + e.what());
  }
  ctx.ground.view_id = view.id;
  ctx.regions = build_regions(ctx.ground, cfg.region_width, cfg.region_count);
  return ctx;
}

std::vector<ViewContext> prepare_views(const PipelineConfig& cfg) {
  if (cfg.views.empty()) throw ConfigError("config defines no [view.N] sections");
  std::vector<ViewContext> out;
  for (const auto& v : cfg.views) out.push_back(prepare_view(cfg, v));
  return out;
}

BackgroundModel load_view_background(const PipelineConfig& cfg, const ViewConfig& view) {
  if (view.background.empty()) throw ConfigError("view " + std::to_string(view.id) + " has no background");
  if (fs::is_directory(view.background)) {
    const auto frames = read_frames(view.background);
    return build_background(frames, cfg.background_tolerance);
  }
  return load_background(view.background);
}

std::vector<MotionResult> segment_sequence(std::span<const GrayFrame> frames, const BackgroundModel& background,
                                           const MotionConfig& motion) {
  std::vector<MotionResult> out;
  out.reserve(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const GrayFrame& prev = i > 0 ? frames[i - 1] : frames[std::min<std::size_t>(1, frames.size() - 1)];
    if (!frames[i].same_shape(background.mean) || !frames[i].same_shape(prev)) {
      throw DataError("frame " + std::to_string(i) + " does not match the background size");
    }
    out.push_back(detect_motion_regions(frames[i], prev, background, motion));
  }
  return out;
}

WeightCalibration calibrate_view_weights(const PipelineConfig&, const ViewContext& view) {
  if (view.cfg.exemplar.empty()) {
    throw DataError("view " + std::to_string(view.cfg.id) + ": no exemplar track configured for weight calibration");
  }
  return calibrate_weights(load_exemplar(view.cfg.exemplar), view.camera, view.regions);
}

RegionWeights resolve_weights(const PipelineConfig& cfg, const ViewContext& view) {
  if (!cfg.weighting) return RegionWeights{std::vector<double>(cfg.region_count, 1.0)};
  RegionWeights w;
  if (!view.cfg.weights.empty() && fs::exists(view.cfg.weights)) {
    w = load_weights(view.cfg.weights);
  } else if (!view.cfg.exemplar.empty()) {
    w = calibrate_view_weights(cfg, view).weights;
  } else {
    throw DataError("missing calibration: view " + std::to_string(view.cfg.id) + " has neither weights nor exemplar");
  }
  if (static_cast<int>(w.weights.size()) != cfg.region_count) {
    throw DataError("view " + std::to_string(view.cfg.id) + ": weights cover " + std::to_string(w.weights.size()) +
                    " regions, config expects " + std::to_string(cfg.region_count));
  }
  return w;
}

FrameObservation observe_corners(const PipelineConfig& cfg, const ViewContext& view, const RegionWeights& weights,
                                 std::span<const CornerPoint> corners, int frame) {
  std::vector<GroundPoint> ground;
  ground.reserve(corners.size());
  const double h = cfg.person_height;
  for (const auto& c : corners) {
    GroundPoint g;
    try {
      g = image_to_ground(view.camera, {static_cast<double>(c.x), static_cast<double>(c.y)});
    } catch (const GeometryError&) {
      continue;  // above the horizon
    }
    g.view_id = view.cfg.id;
    if (cfg.correction) g = correct_corner_projection(g, view.regions, std::span<const double>(&h, 1)).point;
    ground.push_back(g);
  }
  return accumulate_observation(ground, view.regions, weights, frame, view.cfg.id);
}

std::vector<std::vector<std::vector<FrameObservation>>> run_indirect(const PipelineConfig& cfg,
                                                                     std::span<const ViewContext> views,
                                                                     std::span<const RegionWeights> weights,
                                                                     Sequence seq,
                                                                     std::span<const CornerConfig> settings) {
  std::vector<std::vector<std::vector<FrameObservation>>> out(settings.size(),
                                                              std::vector<std::vector<FrameObservation>>(views.size()));
  std::optional<std::size_t> length;
  for (std::size_t v = 0; v < views.size(); ++v) {
    const auto& view = views[v];
    const fs::path dir = seq == Sequence::kTest ? view.cfg.frames : view.cfg.train_frames;
    if (dir.empty()) {
      throw ConfigError("view " + std::to_string(view.cfg.id) + " has no " +
                        (seq == Sequence::kTest ? "frames" : "train_frames") + " directory");
    }
    const auto frames = read_frames(dir);
    if (length && *length != frames.size()) {
      throw DataError("views are not synchronised: " + std::to_string(*length) + " vs " +
                      std::to_string(frames.size()) + " frames");
    }
    length = frames.size();
    const auto background = load_view_background(cfg, view.cfg);
    const auto motion = segment_sequence(frames, background, cfg.motion);
    for (std::size_t f = 0; f < frames.size(); ++f) {
      const GradientField grads = sobel_gradients(frames[f]);
      const ScoreMap scores = corner_discriminant(structure_tensor(grads));
      for (std::size_t s = 0; s < settings.size(); ++s) {
        const auto corners = select_corners(scores, grads, motion[f].blobs, settings[s], view.cfg.id);
        out[s][v].push_back(observe_corners(cfg, view, weights[v], corners, static_cast<int>(f)));
      }
    }
  }
  return out;
}

std::vector<double> ground_truth_for(const fs::path& view_gt, const fs::path& scene_gt, std::size_t frames) {
  const fs::path& p = !view_gt.empty() ? view_gt : scene_gt;
  if (p.empty()) throw ConfigError("no ground truth configured");
  std::map<int, double> by_frame;
  for (const auto& [f, c] : load_ground_truth(p)) by_frame[f] = c;
  std::vector<double> gt(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    const auto it = by_frame.find(static_cast<int>(i));
    if (it == by_frame.end()) throw DataError(p.string() + ": no ground truth for frame " + std::to_string(i));
    gt[i] = it->second;
  }
  return gt;
}

AcppSet calibrate_acpp_set(const PipelineConfig& cfg, std::span<const ViewContext> views,
                           const std::vector<std::vector<FrameObservation>>& train_obs) {
  AcppSet set;
  const std::size_t frames = train_obs.empty() ? 0 : train_obs.front().size();
  for (std::size_t v = 0; v < views.size(); ++v) {
    const auto gt = ground_truth_for(views[v].cfg.train_gt, cfg.scene_train_gt, frames);
    set.per_view.push_back(calibrate_acpp(train_obs[v], gt));
  }
  std::vector<std::vector<FrameObservation>> per_frame(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    for (const auto& view_obs : train_obs) per_frame[f].push_back(view_obs[f]);
  }
  std::vector<double> scene_gt;
  if (cfg.scene_acpp == SceneAcppMode::kFused) scene_gt = ground_truth_for({}, cfg.scene_train_gt, frames);
  set.scene = calibrate_scene_acpp(set.per_view, per_frame, scene_gt, cfg.scene_acpp, cfg.fusion);
  return set;
}

void save_acpp(const fs::path& path, const AcppSet& acpp, std::span<const ViewContext> views) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << std::setprecision(17);
  for (std::size_t v = 0; v < views.size(); ++v) {
    out << "view." << views[v].cfg.id << " = " << acpp.per_view[v].acpp << '\n';
  }
  out << "scene = " << acpp.scene.acpp << '\n';
}

AcppSet load_acpp(const fs::path& path, std::span<const ViewContext> views) {
  const auto kv = KeyValueFile::load(path);
  AcppSet set;
  auto positive = [&](const std::string& key) {
    const double v = kv.require_double("", key);
    if (!(v > 0)) throw DataError(path.string() + ": " + key + " must be positive");
    return v;
  };
  for (const auto& view : views) {
    AcppModel m;
    m.acpp = positive("view." + std::to_string(view.cfg.id));
    m.views = {view.cfg.id};
    set.per_view.push_back(m);
  }
  set.scene.acpp = positive("scene");
  return set;
}

CountReport build_count_report(std::span<const ViewContext> views,
                               const std::vector<std::vector<FrameObservation>>& obs, const AcppSet& acpp,
                               std::span<const double> gt, FusionRule rule) {
  CountReport report;
  for (const auto& v : views) report.view_ids.push_back(v.cfg.id);
  const std::size_t frames = obs.empty() ? 0 : obs.front().size();
  if (gt.size() != frames) throw DataError("ground truth length does not match the frame count");
  for (std::size_t f = 0; f < frames; ++f) {
    CountRow row;
    row.frame = static_cast<int>(f);
    std::vector<FrameObservation> frame_obs;
    for (std::size_t v = 0; v < views.size(); ++v) {
      row.view_estimates.push_back(estimate_single_view(obs[v][f], acpp.per_view[v]));
      frame_obs.push_back(obs[v][f]);
    }
    // A single view is its own fusion; use its ACPP so both columns agree.
    row.fused = views.size() == 1 ? row.view_estimates.front() : fuse_corner_counts(frame_obs, rule, acpp.scene);
    row.gt = gt[f];
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::vector<HeadPoint> project_heads(const PipelineConfig& cfg, const ViewContext& view,
                                     std::span<const DetectionBox> boxes, int frame) {
  std::vector<HeadPoint> out;
  for (const auto& b : boxes) {
    GroundPoint g;
    try {
      g = image_to_ground(view.camera, {b.cx, b.cy});
    } catch (const GeometryError&) {
      continue;
    }
    g = correct_head_projection(g, view.ground, view.height, cfg.person_height, cfg.head_correction);
    out.push_back({g.x, g.y, view.cfg.id, frame});
  }
  return out;
}

}  // namespace crowdcount
