#include "crowdcount/synth_scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "crowdcount/error.hpp"

namespace crowdcount {

namespace {

constexpr double kHeadRadiusRatio = 0.065;  // head radius / body height
constexpr double kStripeWidthMm = 110.0;

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  // splitmix64 step over a ^ rotated b
  std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::vector<Agent> make_agents(int count, int frames, const Walkway& w, std::uint64_t seed) {
  if (count < 0) throw std::invalid_argument("agent count must be >= 0");
  if (frames < 0) throw std::invalid_argument("frame count must be >= 0");
  std::mt19937_64 rng(mix(seed, 0xa9e47));
  std::vector<Agent> agents;
  constexpr double margin = 300;
  for (int i = 0; i < count; ++i) {
    Agent a;
    a.id = i;
    a.height = uniform(rng, 1600, 1850);
    a.width = uniform(rng, 400, 500);
    a.texture_seed = static_cast<std::uint32_t>(rng());
    Eigen::Vector2d p(uniform(rng, w.x0 + margin, w.x1 - margin), uniform(rng, w.y0 + margin, w.y1 - margin));
    const double heading = uniform(rng, 0, 2 * std::numbers::pi);
    Eigen::Vector2d dir(std::cos(heading), std::sin(heading));
    const double speed = uniform(rng, 40, 60);  // mm per frame
    for (int f = 0; f < frames; ++f) {
      a.trajectory.push_back(p);
      p += dir * speed * (1.0 + uniform(rng, -0.1, 0.1));
      if (p.x() < w.x0 + margin || p.x() > w.x1 - margin) {
        dir.x() = -dir.x();
        p.x() = std::clamp(p.x(), w.x0 + margin, w.x1 - margin);
      }
      if (p.y() < w.y0 + margin || p.y() > w.y1 - margin) {
        dir.y() = -dir.y();
        p.y() = std::clamp(p.y(), w.y0 + margin, w.y1 - margin);
      }
    }
    agents.push_back(std::move(a));
  }
  return agents;
}

struct Appearance {
  int lo, hi, head;
};

Appearance appearance(std::uint32_t seed) {
  std::mt19937_64 rng(mix(seed, 0x5eed));
  Appearance a;
  a.lo = static_cast<int>(uniform(rng, 30, 80));
  a.hi = static_cast<int>(uniform(rng, 150, 210));
  a.head = static_cast<int>(uniform(rng, 20, 45));
  return a;
}

struct Projected {
  std::size_t agent;
  double depth;
  Eigen::Vector2d foot, head;
};

void add_noise(GrayFrame& img, const SyntheticScene& scene, int view, int frame) {
  if (scene.noise_amplitude <= 0) return;
  std::mt19937 rng(static_cast<std::uint32_t>(mix(mix(scene.background_seed, view + 1), frame + 7)));
  const int span = 2 * scene.noise_amplitude + 1;
  for (auto& p : img.pixels()) {
    const int v = p + static_cast<int>(rng() % span) - scene.noise_amplitude;
    p = static_cast<std::uint8_t>(std::clamp(v, 0, 255));
  }
}

double signed_area(const Polygon& p) {
  double a = 0;
  for (std::size_t i = 0, j = p.size() - 1; i < p.size(); j = i++) a += p[j].x() * p[i].y() - p[i].x() * p[j].y();
  return 0.5 * a;
}

// Keeps the part of `poly` with cross(b - a, p - a) <= 0 (right of a->b).
Polygon clip_right_of(const Polygon& poly, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  Polygon out;
  const Eigen::Vector2d e = b - a;
  auto side = [&](const Eigen::Vector2d& p) { return e.x() * (p.y() - a.y()) - e.y() * (p.x() - a.x()); };
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % poly.size()];
    const double sp = side(p), sq = side(q);
    if (sp <= 0) out.push_back(p);
    if ((sp < 0 && sq > 0) || (sp > 0 && sq < 0)) out.push_back(p + (q - p) * (sp / (sp - sq)));
  }
  return out;
}

}  // namespace

GrayFrame render_background(const SyntheticScene& scene, int view) {
  const auto& cam = scene.cameras.at(view);
  std::mt19937_64 rng(mix(scene.background_seed, 0xb9 + view));
  const double p1 = uniform(rng, 0, 6.28), p2 = uniform(rng, 0, 6.28), p3 = uniform(rng, 0, 6.28);
  GrayFrame bg(cam.width, cam.height);
  for (int v = 0; v < cam.height; ++v) {
    for (int u = 0; u < cam.width; ++u) {
      const double val = 120 + 12 * std::sin(0.045 * u + p1) * std::sin(0.06 * v + p2) + 8 * std::sin(0.023 * (u + v) + p3);
      bg.at(u, v) = static_cast<std::uint8_t>(std::lround(val));
    }
  }
  return bg;
}

RenderedFrame render_frame(const SyntheticScene& scene, int view, int frame) {
  const auto& cam = scene.cameras.at(view);
  RenderedFrame out;
  out.image = render_background(scene, view);
  add_noise(out.image, scene, view, frame);
  const std::size_t npx = static_cast<std::size_t>(cam.width) * cam.height;
  out.owner.assign(npx, -1);
  out.head.assign(npx, 0);
  out.agents.resize(scene.agents.size());

  const Eigen::Matrix3d r = cam.rotation();
  std::vector<Projected> order;
  for (std::size_t i = 0; i < scene.agents.size(); ++i) {
    const auto& a = scene.agents[i];
    const Eigen::Vector2d foot = a.trajectory.at(frame);
    const Eigen::Vector3d fw(foot.x(), foot.y(), 0.0);
    const double depth = (r * fw + cam.translation()).z();
    try {
      Projected p{i, depth, world_to_image(cam, fw), world_to_image(cam, fw + Eigen::Vector3d(0, 0, a.height))};
      auto& t = out.agents[i];
      t.foot_px = p.foot;
      t.head_px = p.head;
      t.head_radius_px = kHeadRadiusRatio * (p.head - p.foot).norm();
      t.visible = p.head.x() >= 0 && p.head.y() >= 0 && p.head.x() < cam.width && p.head.y() < cam.height;
      order.push_back(p);
    } catch (const GeometryError&) {
      // behind the camera or past the distortion fold
    }
  }
  std::stable_sort(order.begin(), order.end(), [](const Projected& a, const Projected& b) { return a.depth > b.depth; });

  for (const auto& p : order) {
    const auto& a = scene.agents[p.agent];
    auto& t = out.agents[p.agent];
    const Eigen::Vector2d axis = p.head - p.foot;
    const double len = axis.norm();
    if (len < 1.0) continue;
    const Eigen::Vector2d dir = axis / len;
    const Eigen::Vector2d perp(-dir.y(), dir.x());
    const double scale = len / a.height;  // px per mm near the agent
    const double rh = t.head_radius_px;
    const double body_len = len - 0.8 * rh;
    const Eigen::Vector2d centre = p.foot + dir * (body_len / 2);
    const double semi_a = body_len / 2;
    const double semi_b = a.width * scale / 2;
    const Appearance look = appearance(a.texture_seed);

    auto paint = [&](int x, int y, int value, bool is_head) {
      const std::size_t idx = static_cast<std::size_t>(y) * cam.width + x;
      out.image.at(x, y) = static_cast<std::uint8_t>(std::clamp(value, 0, 255));
      out.owner[idx] = static_cast<int>(p.agent);
      out.head[idx] = is_head ? 1 : 0;
    };

    const double reach = semi_a + semi_b + rh + 2;
    const Eigen::Vector2d mid = (p.foot + p.head) / 2;
    const int x0 = std::max(0, static_cast<int>(std::floor(mid.x() - reach)));
    const int x1 = std::min(cam.width - 1, static_cast<int>(std::ceil(mid.x() + reach)));
    const int y0 = std::max(0, static_cast<int>(std::floor(mid.y() - reach)));
    const int y1 = std::min(cam.height - 1, static_cast<int>(std::ceil(mid.y() + reach)));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const Eigen::Vector2d px(x, y);
        const double dh = (px - p.head).norm();
        if (dh <= rh) {
          paint(x, y, look.head + static_cast<int>(12 * dh / std::max(rh, 1e-9)), true);
          ++t.drawn_pixels;
          continue;
        }
        const Eigen::Vector2d d = px - centre;
        const double s = d.dot(dir) / semi_a;
        const double q = d.dot(perp) / std::max(semi_b, 1e-9);
        if (s * s + q * q > 1.0) continue;
        const int band = static_cast<int>(std::floor((s + 1.0) * 3.0));
        const int stripe = static_cast<int>(std::floor(d.dot(perp) / scale / kStripeWidthMm + 100.0));
        paint(x, y, ((band + stripe) & 1) ? look.hi : look.lo, false);
        ++t.drawn_pixels;
      }
    }
  }
  for (std::size_t i = 0; i < npx; ++i) {
    if (out.owner[i] >= 0) ++out.agents[out.owner[i]].visible_pixels;
  }
  for (auto& t : out.agents) t.occluded = t.visible_pixels < t.drawn_pixels;
  return out;
}

RenderedSequence render_sequence(const SyntheticScene& scene, bool keep_masks) {
  if (scene.cameras.empty()) throw std::invalid_argument("scene has no cameras");
  for (const auto& c : scene.cameras) c.validate();
  for (const auto& a : scene.agents) {
    if (static_cast<int>(a.trajectory.size()) < scene.frames) throw std::invalid_argument("agent trajectory too short");
  }
  const std::size_t nv = scene.cameras.size();
  RenderedSequence seq;
  seq.frames.resize(nv);
  if (keep_masks) seq.agent_masks.resize(nv);
  for (int f = 0; f < scene.frames; ++f) {
    FrameTruth truth;
    truth.frame = f;
    truth.view_counts.assign(nv, 0);
    truth.scene_count = static_cast<int>(scene.agents.size());
    for (const auto& a : scene.agents) truth.feet.push_back(a.trajectory[f]);
    truth.flagged.assign(scene.agents.size(), true);
    for (std::size_t v = 0; v < nv; ++v) {
      RenderedFrame rf = render_frame(scene, static_cast<int>(v), f);
      for (std::size_t i = 0; i < rf.agents.size(); ++i) {
        if (rf.agents[i].visible) {
          ++truth.view_counts[v];
          truth.flagged[i] = false;
        }
      }
      if (keep_masks) {
        const auto& cam = scene.cameras[v];
        BinaryMask m(cam.width, cam.height);
        for (int y = 0; y < cam.height; ++y) {
          for (int x = 0; x < cam.width; ++x) {
            if (rf.owner[static_cast<std::size_t>(y) * cam.width + x] >= 0) m.set(x, y);
          }
        }
        seq.agent_masks[v].push_back(std::move(m));
      }
      truth.views.push_back(std::move(rf.agents));
      seq.frames[v].push_back(std::move(rf.image));
    }
    seq.truth.push_back(std::move(truth));
  }
  return seq;
}

std::vector<GrayFrame> render_empty_frames(const SyntheticScene& scene, int view, int count, int first_frame) {
  std::vector<GrayFrame> out;
  for (int i = 0; i < count; ++i) {
    GrayFrame g = render_background(scene, view);
    // Offset keeps the noise independent of the sequence frames.
    add_noise(g, scene, view, 1000000 + first_frame + i);
    out.push_back(std::move(g));
  }
  return out;
}

SyntheticScene make_default_scene(int agent_count, int frames, std::uint64_t seed) {
  std::mt19937_64 rng(mix(seed, 0xca3e7a));
  SyntheticScene scene;
  scene.frames = frames;
  scene.background_seed = static_cast<std::uint32_t>(rng());

  const Eigen::Vector2d ground[2] = {{-9000, -8500}, {9000, 8500}};
  for (int v = 0; v < 2; ++v) {
    TsaiCamera cam;
    cam.width = 384;
    cam.height = 288;
    cam.ncx = cam.nfx = 384;
    cam.dx = cam.dy = cam.dpx = cam.dpy = 0.01;
    cam.f = 5.5;
    cam.k = uniform(rng, -0.003, 0.003);
    cam.cx = 192 + uniform(rng, -2, 2);
    cam.cy = 144 + uniform(rng, -2, 2);
    cam.sx = 1.0;
    const Eigen::Vector3d centre(ground[v].x() + uniform(rng, -500, 500), ground[v].y() + uniform(rng, -500, 500),
                                 uniform(rng, 5000, 7000));
    const Eigen::Vector3d target(uniform(rng, -300, 300), uniform(rng, -300, 300), 0);
    look_at(cam, centre, target);
    scene.cameras.push_back(cam);
  }
  scene.agents = make_agents(agent_count, frames, scene.walkway, seed);
  return scene;
}

SyntheticScene with_new_agents(const SyntheticScene& scene, int agent_count, int frames, std::uint64_t seed) {
  SyntheticScene s = scene;
  s.frames = frames;
  s.agents = make_agents(agent_count, frames, scene.walkway, seed);
  return s;
}

ExemplarTrack exemplar_walk(const TsaiCamera& cam, const Walkway& w, double person_height, int samples) {
  if (samples < 2) throw std::invalid_argument("exemplar walk needs >= 2 samples");
  // Five lanes across the walkway; the middle one passes through the origin.
  constexpr int kLanes = 5;
  const double lane_h = (w.y1 - w.y0) / kLanes;
  const int per_lane = std::max(2, samples / kLanes);
  ExemplarTrack track;
  int frame = 0;
  for (int lane = 0; lane < kLanes; ++lane) {
    const double y = w.y0 + (lane + 0.5) * lane_h;
    for (int i = 0; i < per_lane; ++i) {
      const double t = static_cast<double>(i) / (per_lane - 1);
      const double x = (lane % 2 == 0) ? w.x0 + t * (w.x1 - w.x0) : w.x1 - t * (w.x1 - w.x0);
      try {
        const Eigen::Vector2d foot = world_to_image(cam, {x, y, 0});
        const Eigen::Vector2d head = world_to_image(cam, {x, y, person_height});
        const bool inside = foot.x() >= 0 && foot.y() >= 0 && foot.x() < cam.width && foot.y() < cam.height;
        if (inside) track.samples.push_back({frame, foot, (head - foot).norm()});
      } catch (const GeometryError&) {
      }
      ++frame;
    }
  }
  return track;
}

Polygon coverage_polygon(const TsaiCamera& cam) {
  constexpr double kMaxRange = 100000;  // mm
  const auto [cam_ground, hc] = camera_ground_position(cam);
  auto cast = [&](double u, double v0, double dv) -> std::optional<Eigen::Vector2d> {
    for (double v = v0; v >= 0 && v <= cam.height - 1; v += dv) {
      try {
        const GroundPoint g = image_to_ground(cam, {u, v});
        if (std::hypot(g.x - cam_ground.x, g.y - cam_ground.y) <= kMaxRange) return g.xy();
      } catch (const GeometryError&) {
      }
    }
    return std::nullopt;
  };
  const double w = cam.width - 1, h = cam.height - 1;
  Polygon poly;
  for (const auto& c : {cast(0, 0, 1), cast(w, 0, 1), cast(w, h, -1), cast(0, h, -1)}) {
    if (c) poly.push_back(*c);
  }
  if (poly.size() >= 3 && signed_area(poly) < 0) std::reverse(poly.begin(), poly.end());
  return poly;
}

std::vector<Polygon> single_view_zones(std::span<const TsaiCamera> cameras, int view) {
  std::vector<Polygon> zones{coverage_polygon(cameras[view])};
  for (std::size_t j = 0; j < cameras.size(); ++j) {
    if (static_cast<int>(j) == view) continue;
    const Polygon other = coverage_polygon(cameras[j]);
    if (other.size() < 3) continue;
    std::vector<Polygon> next;
    for (const auto& piece : zones) {
      // piece minus a convex polygon = union of the piece's parts outside each edge
      for (std::size_t e = 0; e < other.size(); ++e) {
        Polygon part = clip_right_of(piece, other[e], other[(e + 1) % other.size()]);
        if (part.size() >= 3 && std::abs(signed_area(part)) > 1.0) next.push_back(std::move(part));
      }
    }
    zones = std::move(next);
  }
  return zones;
}

int head_window_size(double head_radius_px) {
  int s = static_cast<int>(std::lround(2.4 * head_radius_px));
  if (s % 2 == 0) ++s;
  return std::clamp(s, 9, 25);
}

HeadCorpus make_head_corpus(const SyntheticScene& scene, const RenderedSequence& seq, int per_class,
                            std::uint64_t seed, int base) {
  if (per_class < 1) throw std::invalid_argument("head corpus size must be >= 1");
  std::mt19937_64 rng(mix(seed, 0x4ead));
  HeadCorpus corpus;
  std::vector<GrayFrame> heads;
  for (std::size_t v = 0; v < seq.frames.size(); ++v) {
    for (std::size_t f = 0; f < seq.frames[v].size(); ++f) {
      const auto& img = seq.frames[v][f];
      for (const auto& t : seq.truth[f].views[v]) {
        if (!t.visible || t.occluded) continue;
        const int size = head_window_size(t.head_radius_px);
        const int x = static_cast<int>(std::lround(t.head_px.x())) - size / 2;
        const int y = static_cast<int>(std::lround(t.head_px.y())) - size / 2;
        if (x < 0 || y < 0 || x + size > img.width() || y + size > img.height()) continue;
        heads.push_back(crop_resized(img, x, y, size, base));
      }
    }
  }
  std::shuffle(heads.begin(), heads.end(), rng);
  if (heads.size() > static_cast<std::size_t>(per_class)) heads.resize(per_class);
  corpus.heads = std::move(heads);

  const std::size_t nv = seq.frames.size();
  auto near_head = [&](std::size_t v, std::size_t f, const Eigen::Vector2d& c, int size) {
    for (const auto& t : seq.truth[f].views[v]) {
      if ((t.head_px - c).norm() < std::max(size, head_window_size(t.head_radius_px))) return true;
    }
    return false;
  };
  // Half random crops, half crops centred on bodies below the head.
  for (int attempt = 0; attempt < per_class * 100 && static_cast<int>(corpus.non_heads.size()) < per_class;
       ++attempt) {
    if (nv == 0 || seq.frames[0].empty()) break;
    const std::size_t v = rng() % nv;
    const std::size_t f = rng() % seq.frames[v].size();
    const auto& img = seq.frames[v][f];
    const auto& agents = seq.truth[f].views[v];
    int size = 9 + 2 * static_cast<int>(rng() % 9);
    Eigen::Vector2d c(0, 0);
    if (attempt % 2 == 1 && !agents.empty()) {
      const auto& t = agents[rng() % agents.size()];
      if (!t.visible) continue;
      size = head_window_size(t.head_radius_px);
      c = t.head_px + uniform(rng, 0.2, 1.0) * (t.foot_px - t.head_px);
      c.x() += uniform(rng, -t.head_radius_px, t.head_radius_px);
    } else {
      c = Eigen::Vector2d(rng() % static_cast<unsigned>(img.width()), rng() % static_cast<unsigned>(img.height()));
    }
    const int x = static_cast<int>(std::lround(c.x())) - size / 2;
    const int y = static_cast<int>(std::lround(c.y())) - size / 2;
    if (x < 0 || y < 0 || x + size > img.width() || y + size > img.height()) continue;
    if (!near_head(v, f, Eigen::Vector2d(x + size / 2, y + size / 2), size)) {
      corpus.non_heads.push_back(crop_resized(img, x, y, size, base));
    }
  }

  // Bootstrap images: empty frames, and populated frames with every head
  // disc painted over by the background.
  for (std::size_t v = 0; v < scene.cameras.size(); ++v) {
    auto empty = render_empty_frames(scene, static_cast<int>(v), 5, 5000);
    for (auto& e : empty) corpus.negatives.push_back(std::move(e));
    if (v >= nv || seq.frames[v].empty()) continue;
    const GrayFrame bg = render_background(scene, static_cast<int>(v));
    const std::size_t n = seq.frames[v].size();
    for (std::size_t k = 0; k < 10; ++k) {
      const std::size_t f = k * n / 10;
      GrayFrame img = seq.frames[v][f];
      for (const auto& t : seq.truth[f].views[v]) {
        const double r = t.head_radius_px + 2.0;
        for (int y = std::max(0, static_cast<int>(t.head_px.y() - r)); y <= std::min(img.height() - 1, static_cast<int>(t.head_px.y() + r)); ++y) {
          for (int x = std::max(0, static_cast<int>(t.head_px.x() - r)); x <= std::min(img.width() - 1, static_cast<int>(t.head_px.x() + r)); ++x) {
            if (std::hypot(x - t.head_px.x(), y - t.head_px.y()) <= r) img.at(x, y) = bg.at(x, y);
          }
        }
      }
      corpus.negatives.push_back(std::move(img));
    }
  }
  return corpus;
}

}  // namespace crowdcount
