#include "cli_commands.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <ostream>
#include <random>
#include <sstream>

#include "crowdcount/adaboost.hpp"
#include "crowdcount/error.hpp"
#include "crowdcount/head_detection.hpp"
#include "crowdcount/pipeline.hpp"
#include "crowdcount/raw_pixel_classifier.hpp"
#include "crowdcount/synth_scene.hpp"

namespace crowdcount::cli {

namespace {

struct GlobalOptions {
  std::string config;
  std::uint64_t seed = 42;
  bool seed_set = false;
  std::string out;
  std::string fusion;
};

struct SynthOptions {
  int agents = 15;
  int frames = 100;
  int train_agents = 12;
  int train_frames = 100;
  int head_corpus = 0;
};

struct EvalOptions {
  std::string estimates;
  std::string gt;
  bool signed_error = false;
};

std::string frame_name(std::size_t i, const char* ext = ".pgm") {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%05zu%s", i, ext);
  return buf;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw DataError("cannot write " + p.string());
  return out;
}

void make_dirs(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec || !fs::is_directory(p)) throw DataError("cannot create directory " + p.string());
}

PipelineConfig load_config(const GlobalOptions& g) {
  if (g.config.empty()) throw ConfigError("--config is required for this command");
  PipelineConfig cfg = load_pipeline_config(g.config);
  if (!g.out.empty()) cfg.out_dir = g.out;
  if (!g.fusion.empty()) cfg.fusion = parse_fusion_rule(g.fusion);
  if (g.seed_set) cfg.seed = g.seed;
  return cfg;
}

std::vector<RegionWeights> all_weights(const PipelineConfig& cfg, std::span<const ViewContext> views) {
  std::vector<RegionWeights> w;
  for (const auto& v : views) w.push_back(resolve_weights(cfg, v));
  return w;
}

GrayFrame overlay_blobs(const GrayFrame& frame, std::span<const Blob> blobs) {
  GrayFrame out = frame;
  for (const auto& b : blobs) {
    for (int x = b.x; x < b.x + b.w; ++x) {
      out.at(x, b.y) = 255;
      out.at(x, b.y + b.h - 1) = 255;
    }
    for (int y = b.y; y < b.y + b.h; ++y) {
      out.at(b.x, y) = 255;
      out.at(b.x + b.w - 1, y) = 255;
    }
  }
  return out;
}

int cmd_segment(const GlobalOptions& g, std::ostream& out) {
  const auto cfg = load_config(g);
  for (const auto& view : cfg.views) {
    if (view.frames.empty()) throw ConfigError("view " + std::to_string(view.id) + " has no frames directory");
    const auto frames = read_frames(view.frames);
    const auto motion = segment_sequence(frames, load_view_background(cfg, view), cfg.motion);
    const fs::path dir = cfg.out_dir / "segment" / ("view" + std::to_string(view.id));
    make_dirs(dir);
    auto csv = open_out(dir / "blobs.csv");
    csv << "frame,blob,x,y,w,h,area\n";
    std::size_t total = 0;
    for (std::size_t f = 0; f < frames.size(); ++f) {
      write_pgm(dir / ("mask_" + frame_name(f)), motion[f].mask.to_frame());
      write_pgm(dir / ("overlay_" + frame_name(f)), overlay_blobs(frames[f], motion[f].blobs));
      for (std::size_t b = 0; b < motion[f].blobs.size(); ++b) {
        const auto& bl = motion[f].blobs[b];
        csv << f << ',' << b << ',' << bl.x << ',' << bl.y << ',' << bl.w << ',' << bl.h << ',' << bl.area << '\n';
      }
      total += motion[f].blobs.size();
    }
    out << "view " << view.id << ": " << frames.size() << " frames, " << total << " blobs -> " << dir.string() << '\n';
  }
  return kOk;
}

int cmd_corners(const GlobalOptions& g, std::ostream& out) {
  const auto cfg = load_config(g);
  make_dirs(cfg.out_dir / "corners");
  for (const auto& view : cfg.views) {
    if (view.frames.empty()) throw ConfigError("view " + std::to_string(view.id) + " has no frames directory");
    const auto frames = read_frames(view.frames);
    const auto motion = segment_sequence(frames, load_view_background(cfg, view), cfg.motion);
    const fs::path path = cfg.out_dir / "corners" / ("view" + std::to_string(view.id) + ".csv");
    auto csv = open_out(path);
    csv << "frame,view,x,y,score\n";
    std::size_t total = 0;
    for (std::size_t f = 0; f < frames.size(); ++f) {
      const auto corners = detect_corners(frames[f], motion[f].blobs, cfg.corners, view.id);
      write_corners_csv(csv, static_cast<int>(f), corners);
      total += corners.size();
    }
    out << "view " << view.id << ": " << total << " corners -> " << path.string() << '\n';
  }
  return kOk;
}

int cmd_calibrate_weights(const GlobalOptions& g, std::ostream& out) {
  const auto cfg = load_config(g);
  make_dirs(cfg.out_dir);
  for (const auto& view : prepare_views(cfg)) {
    const auto calib = calibrate_view_weights(cfg, view);
    const fs::path path = !view.cfg.weights.empty()
                              ? view.cfg.weights
                              : cfg.out_dir / ("weights_view" + std::to_string(view.cfg.id) + ".csv");
    save_weights(path, calib);
    out << "view " << view.cfg.id << ": " << calib.observed.observed() << " of " << cfg.region_count
        << " regions observed, origin region " << calib.origin_region << " -> " << path.string() << '\n';
  }
  return kOk;
}

AcppSet acpp_from_training(const PipelineConfig& cfg, std::span<const ViewContext> views,
                           std::span<const RegionWeights> weights, std::ostream& out) {
  const CornerConfig setting = cfg.corners;
  const auto obs = run_indirect(cfg, views, weights, Sequence::kTrain, std::span(&setting, 1));
  const auto acpp = calibrate_acpp_set(cfg, views, obs.front());
  for (std::size_t v = 0; v < views.size(); ++v) {
    if (acpp.per_view[v].frames_excluded > 0) {
      out << "warning: view " << views[v].cfg.id << ": " << acpp.per_view[v].frames_excluded
          << " training frames with zero ground truth were skipped\n";
    }
  }
  return acpp;
}

AcppSet resolve_acpp(const PipelineConfig& cfg, std::span<const ViewContext> views,
                     std::span<const RegionWeights> weights, std::ostream& out) {
  if (!cfg.acpp_file.empty()) return load_acpp(cfg.acpp_file, views);
  const bool has_training =
      std::all_of(views.begin(), views.end(), [](const ViewContext& v) { return !v.cfg.train_frames.empty(); });
  if (!has_training) throw DataError("missing calibration: set acpp_file or train_frames for every view");
  return acpp_from_training(cfg, views, weights, out);
}

int cmd_calibrate_acpp(const GlobalOptions& g, std::ostream& out) {
  const auto cfg = load_config(g);
  const auto views = prepare_views(cfg);
  const auto weights = all_weights(cfg, views);
  const auto acpp = acpp_from_training(cfg, views, weights, out);
  make_dirs(cfg.out_dir);
  const fs::path path = cfg.out_dir / "acpp.txt";
  save_acpp(path, acpp, views);
  for (std::size_t v = 0; v < views.size(); ++v) {
    out << "view " << views[v].cfg.id << ": ACPP " << acpp.per_view[v].acpp << " over "
        << acpp.per_view[v].frames_used << " frames\n";
  }
  out << "scene: ACPP " << acpp.scene.acpp << " -> " << path.string() << '\n';
  return kOk;
}

std::vector<double> test_ground_truth(const PipelineConfig& cfg, std::size_t frames) {
  return ground_truth_for({}, cfg.scene_gt.empty() && cfg.views.size() == 1 ? cfg.views[0].gt : cfg.scene_gt,
                          frames);
}

int cmd_count(const GlobalOptions& g, bool sweep, std::ostream& out) {
  const auto cfg = load_config(g);
  const auto views = prepare_views(cfg);
  const auto weights = all_weights(cfg, views);
  make_dirs(cfg.out_dir);

  if (sweep) {
    std::vector<CornerConfig> settings;
    for (MaskShape shape : {MaskShape::kSquare, MaskShape::kCircular}) {
      for (int size : {3, 5, 7}) {
        CornerConfig c = cfg.corners;
        c.mask_size = size;
        c.mask_shape = shape;
        settings.push_back(c);
      }
    }
    const auto train = run_indirect(cfg, views, weights, Sequence::kTrain, settings);
    const auto test = run_indirect(cfg, views, weights, Sequence::kTest, settings);
    const auto gt = test_ground_truth(cfg, test.front().front().size());
    const fs::path path = cfg.out_dir / "sweep.csv";
    auto csv = open_out(path);
    csv << "mask_size,mask_shape,fusion,aepf\n" << std::fixed << std::setprecision(4);
    for (std::size_t s = 0; s < settings.size(); ++s) {
      const auto acpp = calibrate_acpp_set(cfg, views, train[s]);
      const auto report = build_count_report(views, test[s], acpp, gt, cfg.fusion);
      const double e = report.aepf(cfg.signed_aepf);
      csv << settings[s].mask_size << ',' << mask_shape_name(settings[s].mask_shape) << ','
          << fusion_rule_name(cfg.fusion) << ',' << e << '\n';
      out << settings[s].mask_size << 'x' << settings[s].mask_size << ' ' << mask_shape_name(settings[s].mask_shape)
          << ": AepF " << std::fixed << std::setprecision(4) << e << '\n';
    }
    out << "sweep -> " << path.string() << '\n';
    return kOk;
  }

  const auto acpp = resolve_acpp(cfg, views, weights, out);
  const CornerConfig setting = cfg.corners;
  const auto obs = run_indirect(cfg, views, weights, Sequence::kTest, std::span(&setting, 1)).front();
  const auto gt = test_ground_truth(cfg, obs.front().size());
  const auto report = build_count_report(views, obs, acpp, gt, cfg.fusion);
  const fs::path path = cfg.out_dir / ("count_" + fusion_rule_name(cfg.fusion) + ".csv");
  auto csv = open_out(path);
  write_count_report(csv, report);

  out << std::fixed << std::setprecision(4);
  for (std::size_t v = 0; v < views.size(); ++v) {
    out << "view " << views[v].cfg.id << ": AepF " << aepf(report.view_column(v), gt, cfg.signed_aepf) << '\n';
  }
  for (FusionRule rule : {FusionRule::kMaximum, FusionRule::kMinimum, FusionRule::kAverage}) {
    const auto r = build_count_report(views, obs, acpp, gt, rule);
    out << "fused " << fusion_rule_name(rule) << ": AepF " << r.aepf(cfg.signed_aepf)
        << (rule == cfg.fusion ? "  (reported)" : "") << '\n';
  }
  out << "report -> " << path.string() << '\n';
  return kOk;
}

std::vector<GrayFrame> read_corpus_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) return {};
  return read_frames(dir);
}

int cmd_train_heads(const GlobalOptions& g, std::ostream& out) {
  const auto cfg = load_config(g);
  if (cfg.head_corpus.empty()) throw ConfigError("head_corpus is not set");
  const auto heads = read_corpus_dir(cfg.head_corpus / "heads");
  const auto non_heads = read_corpus_dir(cfg.head_corpus / "non_heads");
  const auto negatives = read_corpus_dir(cfg.head_corpus / "negatives");
  constexpr std::size_t kMinPerClass = 50;
  if (heads.size() < kMinPerClass || non_heads.size() < kMinPerClass) {
    throw DataError("head corpus too small: " + std::to_string(heads.size()) + " heads and " +
                    std::to_string(non_heads.size()) + " non-heads; need at least " + std::to_string(kMinPerClass) +
                    " of each");
  }
  make_dirs(cfg.out_dir);
  if (cfg.head_classifier == "raw") {
    std::vector<LabelledSample> samples;
    for (const auto& h : heads) samples.push_back({extract_raw_features(h, {0, 0, std::min(h.width(), h.height())}), 1});
    for (const auto& n : non_heads) samples.push_back({extract_raw_features(n, {0, 0, std::min(n.width(), n.height())}), -1});
    SmoConfig smo;
    smo.sigma = cfg.raw_sigma;
    smo.penalty = cfg.raw_penalty;
    const auto result = train_reference_classifier(samples, smo);
    if (!result.converged) out << "warning: SMO stopped at the iteration cap; keeping the best iterate\n";
    const fs::path path = !cfg.head_model.empty() ? cfg.head_model : cfg.out_dir / "raw_classifier.txt";
    save_classifier(path, result.classifier);
    out << "raw-pixel classifier: " << result.classifier.support().size() << " support vectors, "
        << result.iterations << " iterations -> " << path.string() << '\n';
    return kOk;
  }

  CascadeTrainingConfig tc;
  tc.stage_false_alarm = cfg.stage_false_alarm;
  tc.min_detection_rate = cfg.min_detection_rate;
  tc.max_stages = cfg.max_stages;
  tc.feature_stride = cfg.feature_stride;
  tc.seed = cfg.seed;
  const auto result = train_adaboost(heads, non_heads, tc, negatives);
  const fs::path path = !cfg.head_model.empty() ? cfg.head_model : cfg.out_dir / "cascade.txt";
  save_cascade(path, result.cascade);
  out << std::fixed << std::setprecision(4);
  for (std::size_t s = 0; s < result.stages.size(); ++s) {
    const auto& st = result.stages[s];
    out << "stage " << s << ": " << st.learners << " learners, detection " << st.detection_rate << ", false alarm "
        << st.false_alarm << (st.met_target ? "" : "  (target missed)") << '\n';
  }
  if (result.negatives_exhausted) out << "negatives exhausted; training stopped early\n";
  out << "cascade -> " << path.string() << '\n';
  return kOk;
}

std::unique_ptr<WindowClassifier> load_head_classifier(const PipelineConfig& cfg) {
  fs::path path = cfg.head_model;
  if (path.empty()) path = cfg.out_dir / (cfg.head_classifier == "raw" ? "raw_classifier.txt" : "cascade.txt");
  if (!fs::exists(path)) throw DataError("model missing: " + path.string() + " (run train-heads first)");
  if (cfg.head_classifier == "raw") {
    return std::make_unique<RawPixelWindowClassifier>(std::make_shared<RbfClassifier>(load_classifier(path)));
  }
  return std::make_unique<CascadeWindowClassifier>(load_cascade(path), cfg.scan_min, cfg.scan_max);
}

int cmd_count_heads(const GlobalOptions& g, std::ostream& out) {
  const auto cfg = load_config(g);
  const auto classifier = load_head_classifier(cfg);
  const auto views = prepare_views(cfg);
  std::vector<TsaiCamera> cameras;
  for (const auto& v : views) cameras.push_back(v.camera);
  std::vector<Polygon> zones;
  for (std::size_t v = 0; v < views.size(); ++v) {
    for (auto& z : single_view_zones(cameras, static_cast<int>(v))) zones.push_back(std::move(z));
  }

  ScanConfig scan;
  scan.min_size = cfg.scan_min;
  scan.max_size = cfg.scan_max;
  std::vector<std::vector<std::vector<HeadPoint>>> points(views.size());  // [view][frame]
  std::optional<std::size_t> length;
  for (std::size_t v = 0; v < views.size(); ++v) {
    const auto& view = views[v];
    if (view.cfg.frames.empty()) throw ConfigError("view " + std::to_string(view.cfg.id) + " has no frames directory");
    const auto frames = read_frames(view.cfg.frames);
    if (length && *length != frames.size()) throw DataError("views are not synchronised");
    length = frames.size();
    const auto motion = segment_sequence(frames, load_view_background(cfg, view.cfg), cfg.motion);
    for (std::size_t f = 0; f < frames.size(); ++f) {
      const auto boxes = sliding_window_detect(frames[f], motion[f].blobs, *classifier, scan, view.cfg.id);
      points[v].push_back(project_heads(cfg, view, boxes, static_cast<int>(f)));
    }
  }
  const std::size_t frames = length.value_or(0);
  const auto gt = test_ground_truth(cfg, frames);
  CountReport report;
  for (const auto& v : views) report.view_ids.push_back(v.cfg.id);
  CorrespondenceConfig cc;
  cc.max_mask = cfg.head_mask;
  cc.plane = cfg.plane;
  for (std::size_t f = 0; f < frames; ++f) {
    CountRow row;
    row.frame = static_cast<int>(f);
    std::vector<HeadPoint> all;
    for (std::size_t v = 0; v < views.size(); ++v) {
      row.view_estimates.push_back(static_cast<double>(points[v][f].size()));
      all.insert(all.end(), points[v][f].begin(), points[v][f].end());
    }
    row.fused = static_cast<double>(count_heads(correspond_heads(all, zones, cc)));
    row.gt = gt[f];
    report.rows.push_back(std::move(row));
  }
  make_dirs(cfg.out_dir);
  const fs::path path = cfg.out_dir / "count_heads.csv";
  auto csv = open_out(path);
  write_count_report(csv, report);
  out << std::fixed << std::setprecision(4) << "heads: AepF " << report.aepf(cfg.signed_aepf) << " -> "
      << path.string() << '\n';
  return kOk;
}

void write_gt(const fs::path& path, const std::vector<FrameTruth>& truth, int view) {
  std::vector<std::pair<int, double>> gt;
  for (const auto& t : truth) {
    gt.emplace_back(t.frame, view < 0 ? t.scene_count : t.view_counts[view]);
  }
  save_ground_truth(path, gt);
}

void write_truth_table(const fs::path& path, const std::vector<FrameTruth>& truth) {
  auto csv = open_out(path);
  csv << "frame,agent,view,head_u,head_v,foot_x,foot_y,visible,occluded\n" << std::setprecision(10);
  for (const auto& t : truth) {
    for (std::size_t v = 0; v < t.views.size(); ++v) {
      for (std::size_t a = 0; a < t.views[v].size(); ++a) {
        const auto& at = t.views[v][a];
        csv << t.frame << ',' << a << ',' << v + 1 << ',' << at.head_px.x() << ',' << at.head_px.y() << ','
            << t.feet[a].x() << ',' << t.feet[a].y() << ',' << at.visible << ',' << at.occluded << '\n';
      }
    }
  }
}

int cmd_synth(const GlobalOptions& g, const SynthOptions& s, std::ostream& out) {
  if (s.agents < 0 || s.frames < 2 || s.train_agents < 1 || s.train_frames < 2 || s.head_corpus < 0) {
    throw ConfigError("synth needs agents >= 0, train-agents >= 1, frames >= 2 and train-frames >= 2");
  }
  const fs::path root = g.out.empty() ? fs::path("synth") : fs::path(g.out);
  make_dirs(root);
  const auto test_scene = make_default_scene(s.agents, s.frames, g.seed);
  const auto train_scene = with_new_agents(test_scene, s.train_agents, s.train_frames, g.seed * 7919 + 17);
  const auto test = render_sequence(test_scene);
  const auto train = render_sequence(train_scene);

  std::ostringstream cfg;
  cfg << "# synthetic two-view scene, seed " << g.seed << "\n"
      << "out = out\nregion_count = 37\nregion_width_mm = 1000\nperson_height_mm = 1750\n"
      << "mask_size = 5\nmask_shape = square\nfusion = avg\n"
      << "# opposing cameras: person-height error separates a head's two projections by up to ~700 mm\n"
      << "head_mask = 25\n";
  if (s.head_corpus > 0) cfg << "head_corpus = heads\n";
  cfg << "\n[scene]\ngt = gt_test.csv\ntrain_gt = gt_train.csv\n";

  for (std::size_t v = 0; v < test_scene.cameras.size(); ++v) {
    const std::string name = "view" + std::to_string(v + 1);
    const fs::path dir = root / name;
    for (const char* sub : {"test", "train", "background"}) make_dirs(dir / sub);
    save_calibration(dir / "calibration.txt", test_scene.cameras[v]);
    for (std::size_t f = 0; f < test.frames[v].size(); ++f) write_pgm(dir / "test" / frame_name(f), test.frames[v][f]);
    for (std::size_t f = 0; f < train.frames[v].size(); ++f) {
      write_pgm(dir / "train" / frame_name(f), train.frames[v][f]);
    }
    const auto empty = render_empty_frames(test_scene, static_cast<int>(v), 10);
    for (std::size_t f = 0; f < empty.size(); ++f) write_pgm(dir / "background" / frame_name(f), empty[f]);
    save_exemplar(dir / "exemplar.csv", exemplar_walk(test_scene.cameras[v], test_scene.walkway, 1750, 200));
    write_gt(dir / "gt_test.csv", test.truth, static_cast<int>(v));
    write_gt(dir / "gt_train.csv", train.truth, static_cast<int>(v));
    cfg << "\n[view." << v + 1 << "]\ncalibration = " << name << "/calibration.txt\nframes = " << name
        << "/test\ntrain_frames = " << name << "/train\nbackground = " << name << "/background\ngt = " << name
        << "/gt_test.csv\ntrain_gt = " << name << "/gt_train.csv\nexemplar = " << name << "/exemplar.csv\n";
  }
  write_gt(root / "gt_test.csv", test.truth, -1);
  write_gt(root / "gt_train.csv", train.truth, -1);
  write_truth_table(root / "truth_test.csv", test.truth);

  if (s.head_corpus > 0) {
    const auto corpus = make_head_corpus(train_scene, train, s.head_corpus, g.seed);
    const fs::path dir = root / "heads";
    for (const char* sub : {"heads", "non_heads", "negatives"}) make_dirs(dir / sub);
    for (std::size_t i = 0; i < corpus.heads.size(); ++i) write_pgm(dir / "heads" / frame_name(i), corpus.heads[i]);
    for (std::size_t i = 0; i < corpus.non_heads.size(); ++i) {
      write_pgm(dir / "non_heads" / frame_name(i), corpus.non_heads[i]);
    }
    for (std::size_t i = 0; i < corpus.negatives.size(); ++i) {
      write_pgm(dir / "negatives" / frame_name(i), corpus.negatives[i]);
    }
    out << "head corpus: " << corpus.heads.size() << " heads, " << corpus.non_heads.size() << " non-heads\n";
  }

  auto cfg_out = open_out(root / "scene.cfg");
  cfg_out << cfg.str();
  out << "synth: " << test_scene.cameras.size() << " views, " << s.agents << " agents x " << s.frames
      << " test frames, " << s.train_agents << " agents x " << s.train_frames << " training frames -> "
      << (root / "scene.cfg").string() << '\n';
  return kOk;
}

int cmd_eval(const EvalOptions& e, std::ostream& out) {
  if (e.estimates.empty() || e.gt.empty()) throw ConfigError("eval needs --estimates and --gt");
  std::map<int, double> gt;
  for (const auto& [f, c] : load_ground_truth(e.gt)) gt[f] = c;
  std::vector<double> est, ref;
  for (const auto& [f, c] : load_ground_truth(e.estimates)) {
    const auto it = gt.find(f);
    if (it == gt.end()) throw DataError("frame " + std::to_string(f) + " has no ground truth");
    est.push_back(c);
    ref.push_back(it->second);
  }
  if (est.size() != gt.size()) throw DataError("estimates and ground truth cover different frames");
  out << std::fixed << std::setprecision(4) << "AepF " << aepf(est, ref, e.signed_error) << " over " << est.size()
      << " frames\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-view people counting toolkit", "crowdcount"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions g;
  app.add_option("--config", g.config, "Pipeline config file");
  auto* seed_opt = app.add_option("--seed", g.seed, "Seed for every random choice")->capture_default_str();
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--fusion", g.fusion, "Fusion rule")->check(CLI::IsMember({"max", "min", "avg"}));

  auto* segment = app.add_subcommand("segment", "Motion masks and blobs per frame");
  auto* corners = app.add_subcommand("corners", "Corner points inside motion blobs");
  auto* weights = app.add_subcommand("calibrate-weights", "Region weights from each view's exemplar track");
  auto* acpp = app.add_subcommand("calibrate-acpp", "Corner points per person from the training sequence");
  auto* count = app.add_subcommand("count", "Indirect count on the test sequence");
  bool sweep = false;
  count->add_flag("--sweep", sweep, "Evaluate mask sizes 3/5/7 x square/circular");
  auto* train_heads = app.add_subcommand("train-heads", "Train the head detector");
  auto* count_heads = app.add_subcommand("count-heads", "Direct count by head detection");
  auto* synth = app.add_subcommand("synth", "Write a synthetic two-view dataset");
  SynthOptions so;
  synth->add_option("--agents", so.agents, "People in the test sequence")->capture_default_str();
  synth->add_option("--frames", so.frames, "Test frames")->capture_default_str();
  synth->add_option("--train-agents", so.train_agents, "People in the training sequence")->capture_default_str();
  synth->add_option("--train-frames", so.train_frames, "Training frames")->capture_default_str();
  synth->add_option("--head-corpus", so.head_corpus, "Head/non-head crops per class (0: none)")
      ->capture_default_str();
  auto* eval = app.add_subcommand("eval", "AepF of a frame,count estimate file");
  EvalOptions eo;
  eval->add_option("--estimates", eo.estimates, "frame,count CSV");
  eval->add_option("--gt", eo.gt, "frame,count CSV");
  eval->add_flag("--signed", eo.signed_error, "Signed differences (over- and under-counts cancel)");

  std::vector<std::string> argv_storage = args;
  std::vector<char*> argv;
  std::string prog = "crowdcount";
  argv.push_back(prog.data());
  for (auto& a : argv_storage) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
  g.seed_set = seed_opt->count() > 0;

  try {
    if (segment->parsed()) return cmd_segment(g, out);
    if (corners->parsed()) return cmd_corners(g, out);
    if (weights->parsed()) return cmd_calibrate_weights(g, out);
    if (acpp->parsed()) return cmd_calibrate_acpp(g, out);
    if (count->parsed()) return cmd_count(g, sweep, out);
    if (train_heads->parsed()) return cmd_train_heads(g, out);
    if (count_heads->parsed()) return cmd_count_heads(g, out);
    if (synth->parsed()) return cmd_synth(g, so, out);
    if (eval->parsed()) return cmd_eval(eo, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kConfigError;
}

}  // namespace crowdcount::cli
