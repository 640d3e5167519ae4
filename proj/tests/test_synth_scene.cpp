#include <gtest/gtest.h>

#include <chrono>
#include <algorithm>
#include <cmath>

#include "crowdcount/synth_scene.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace crowdcount;

namespace {

Agent static_agent(int id, const Eigen::Vector2d& foot, int frames, double height = 1750) {
  Agent a;
  a.id = id;
  a.height = height;
  a.trajectory.assign(frames, foot);
  a.texture_seed = 100 + id;
  return a;
}

Eigen::Vector2d camera_ground(const TsaiCamera& cam) {
  const auto c = oracle::camera_centre(cam);
  return {c.x(), c.y()};
}

bool same(const GrayFrame& a, const GrayFrame& b) {
  return std::equal(a.pixels().begin(), a.pixels().end(), b.pixels().begin(), b.pixels().end());
}

}  // namespace

TEST(Synth, SameSeedIsBitIdentical) {
  const auto a = make_default_scene(6, 12, 99);
  const auto b = make_default_scene(6, 12, 99);
  ASSERT_EQ(a.agents.size(), b.agents.size());
  for (std::size_t i = 0; i < a.agents.size(); ++i) {
    EXPECT_EQ(a.agents[i].trajectory, b.agents[i].trajectory);
    EXPECT_EQ(a.agents[i].height, b.agents[i].height);
  }
  EXPECT_EQ(format_calibration(a.cameras[0]), format_calibration(b.cameras[0]));
  const auto ra = render_sequence(a), rb = render_sequence(b);
  for (std::size_t v = 0; v < ra.frames.size(); ++v) {
    for (std::size_t f = 0; f < ra.frames[v].size(); ++f) {
      ASSERT_TRUE(same(ra.frames[v][f], rb.frames[v][f]));
    }
  }
  const auto c = make_default_scene(6, 12, 100);
  EXPECT_NE(c.agents[0].trajectory, a.agents[0].trajectory);
}

TEST(Synth, DefaultSceneGeometry) {
  const auto s = make_default_scene(20, 50, 3);
  ASSERT_EQ(s.cameras.size(), 2u);
  for (const auto& cam : s.cameras) {
    const auto c = oracle::camera_centre(cam);
    EXPECT_GE(c.z(), 5000 - 1e-6);
    EXPECT_LE(c.z(), 7000 + 1e-6);
  }
  for (const auto& a : s.agents) {
    EXPECT_GE(a.height, 1500);
    EXPECT_LE(a.height, 2000);
    ASSERT_EQ(a.trajectory.size(), 50u);
    for (std::size_t f = 0; f < a.trajectory.size(); ++f) {
      EXPECT_GE(a.trajectory[f].x(), s.walkway.x0);
      EXPECT_LE(a.trajectory[f].x(), s.walkway.x1);
      EXPECT_GE(a.trajectory[f].y(), s.walkway.y0);
      EXPECT_LE(a.trajectory[f].y(), s.walkway.y1);
      if (f > 0) {
        EXPECT_LE((a.trajectory[f] - a.trajectory[f - 1]).norm(), 2000);
      }
    }
  }
  // The views overlap: the walkway centre lies in both footprints.
  for (const auto& cam : s.cameras) EXPECT_TRUE(point_in_polygon(coverage_polygon(cam), 0, 0));
}

TEST(Synth, ZeroAgentsGiveBackground) {
  auto s = make_default_scene(0, 3, 5);
  s.noise_amplitude = 0;
  const auto seq = render_sequence(s);
  for (std::size_t v = 0; v < 2; ++v) {
    const auto bg = render_background(s, static_cast<int>(v));
    for (const auto& f : seq.frames[v]) EXPECT_TRUE(same(f, bg));
  }
  for (const auto& t : seq.truth) {
    EXPECT_EQ(t.scene_count, 0);
    EXPECT_EQ(t.view_counts, (std::vector<int>{0, 0}));
  }
}

TEST(Synth, NoiseStaysWithinAmplitude) {
  const auto s = make_default_scene(0, 2, 6);
  const auto bg = render_background(s, 1);
  const auto f = render_frame(s, 1, 1);
  for (std::size_t i = 0; i < bg.pixels().size(); ++i) {
    EXPECT_LE(std::abs(f.image.pixels()[i] - bg.pixels()[i]), s.noise_amplitude);
  }
  const auto empty = render_empty_frames(s, 1, 3);
  EXPECT_EQ(empty.size(), 3u);
  EXPECT_FALSE(same(empty[0], empty[1]));
}

TEST(Synth, StaticAgentProjectsAnalytically) {
  auto s = make_default_scene(0, 1, 7);
  for (auto& cam : s.cameras) cam.k = 0;  // so the pinhole oracle applies
  s.agents.push_back(static_agent(0, {300, -200}, 1, 1700));
  const auto seq = render_sequence(s);
  EXPECT_EQ(seq.truth[0].scene_count, 1);
  EXPECT_EQ(seq.truth[0].view_counts, (std::vector<int>{1, 1}));
  for (std::size_t v = 0; v < 2; ++v) {
    const auto& t = seq.truth[0].views[v][0];
    const auto head = oracle::pinhole_project(s.cameras[v], {300, -200, 1700});
    const auto foot = oracle::pinhole_project(s.cameras[v], {300, -200, 0});
    EXPECT_LT((t.head_px - head).norm(), 1e-6);
    EXPECT_LT((t.foot_px - foot).norm(), 1e-6);
    EXPECT_FALSE(t.occluded);
  }
}

TEST(Synth, HeadDiscCentredOnProjection) {
  const auto s = make_default_scene(12, 6, 8);
  for (int v = 0; v < 2; ++v) {
    for (int f = 0; f < 6; ++f) {
      const auto rf = render_frame(s, v, f);
      const int w = s.cameras[v].width;
      for (std::size_t i = 0; i < rf.agents.size(); ++i) {
        const auto& t = rf.agents[i];
        const double r = t.head_radius_px;
        const bool inside = t.head_px.x() - r > 0 && t.head_px.y() - r > 0 && t.head_px.x() + r < w - 1 &&
                            t.head_px.y() + r < s.cameras[v].height - 1;
        if (!t.visible || t.occluded || !inside) continue;
        double sx = 0, sy = 0, n = 0;
        for (std::size_t p = 0; p < rf.owner.size(); ++p) {
          if (rf.owner[p] == static_cast<int>(i) && rf.head[p]) {
            sx += static_cast<double>(p % w);
            sy += static_cast<double>(p / w);
            ++n;
          }
        }
        ASSERT_GT(n, 0);
        EXPECT_LT(std::hypot(sx / n - t.head_px.x(), sy / n - t.head_px.y()), 0.5);
        const Eigen::Vector2d expect = world_to_image(
            s.cameras[v], {s.agents[i].trajectory[f].x(), s.agents[i].trajectory[f].y(), s.agents[i].height});
        EXPECT_LT((t.head_px - expect).norm(), 1e-9);
      }
    }
  }
}

TEST(Synth, NearerAgentOccludesFarther) {
  auto s = make_default_scene(0, 1, 9);
  const Eigen::Vector2d c = camera_ground(s.cameras[0]);
  const Eigen::Vector2d dir = (Eigen::Vector2d(0, 0) - c).normalized();
  const Eigen::Vector2d near_foot(0, 0), far_foot = near_foot + 1200 * dir;
  auto only_near = s, only_far = s, both = s;
  only_near.agents = {static_agent(0, near_foot, 1)};
  only_far.agents = {static_agent(0, far_foot, 1)};
  both.agents = {static_agent(0, far_foot, 1), static_agent(1, near_foot, 1)};
  const auto a = render_frame(only_near, 0, 0), b = render_frame(only_far, 0, 0), ab = render_frame(both, 0, 0);
  // z-order oracle: the nearer agent wins wherever it is drawn.
  std::size_t overlap = 0;
  for (std::size_t p = 0; p < ab.owner.size(); ++p) {
    const int expect = a.owner[p] >= 0 ? 1 : (b.owner[p] >= 0 ? 0 : -1);
    ASSERT_EQ(ab.owner[p], expect);
    overlap += a.owner[p] >= 0 && b.owner[p] >= 0;
  }
  EXPECT_GT(overlap, 0u);
  EXPECT_TRUE(ab.agents[0].occluded);
  EXPECT_FALSE(ab.agents[1].occluded);
  const auto seq = render_sequence(both);
  EXPECT_EQ(seq.truth[0].scene_count, 2);
}

TEST(Synth, SceneCountIsUnionOfViews) {
  auto s = make_default_scene(10, 20, 10);
  // Push two agents out of both views.
  for (int i = 0; i < 2; ++i) s.agents[i].trajectory.assign(20, Eigen::Vector2d(80000.0 + 5000 * i, -90000));
  const auto seq = render_sequence(s);
  for (const auto& t : seq.truth) {
    int union_count = 0, flagged = 0;
    for (std::size_t i = 0; i < s.agents.size(); ++i) {
      bool any = false;
      for (const auto& view : t.views) any = any || view[i].visible;
      union_count += any;
      flagged += t.flagged[i];
      EXPECT_EQ(t.flagged[i], !any);
    }
    EXPECT_EQ(union_count + flagged, t.scene_count);
    EXPECT_EQ(flagged, 2);
    for (int vc : t.view_counts) EXPECT_LE(vc, union_count);
  }
}

TEST(Synth, SingleViewZonesAvoidOtherViews) {
  const auto s = make_default_scene(0, 1, 11);
  const auto other = coverage_polygon(s.cameras[1]);
  const auto mine = coverage_polygon(s.cameras[0]);
  const auto zones = single_view_zones(s.cameras, 0);
  ASSERT_FALSE(zones.empty());
  std::mt19937_64 rng(1);
  int inside = 0;
  for (int i = 0; i < 20000; ++i) {
    const double x = crowdcount::testing::uniform(rng, -40000, 40000);
    const double y = crowdcount::testing::uniform(rng, -40000, 40000);
    bool in_zone = false;
    for (const auto& z : zones) in_zone = in_zone || point_in_polygon(z, x, y);
    if (!in_zone) continue;
    ++inside;
    EXPECT_FALSE(point_in_polygon(other, x, y));
    EXPECT_TRUE(point_in_polygon(mine, x, y));
  }
  EXPECT_GT(inside, 0);
}

TEST(Synth, ExemplarWalkCrossesOrigin) {
  const auto s = make_default_scene(0, 1, 12);
  const auto track = exemplar_walk(s.cameras[0], s.walkway, 1750, 200);
  ASSERT_GT(track.samples.size(), 100u);
  double nearest = 1e18;
  for (const auto& smp : track.samples) {
    EXPECT_GT(smp.height_px, 0);
    const auto g = image_to_ground(s.cameras[0], smp.foot_pixel);
    nearest = std::min(nearest, std::hypot(g.x, g.y));
  }
  EXPECT_LT(nearest, 500);
  EXPECT_THROW(exemplar_walk(s.cameras[0], s.walkway, 1750, 1), std::invalid_argument);
}

TEST(Synth, HeadWindowSizeOddAndClamped) {
  for (double r = 0; r < 20; r += 0.3) {
    const int w = head_window_size(r);
    EXPECT_EQ(w % 2, 1);
    EXPECT_GE(w, 9);
    EXPECT_LE(w, 25);
  }
  EXPECT_EQ(head_window_size(5), 13);
}

TEST(Synth, HeadCorpusShapes) {
  const auto s = make_default_scene(10, 20, 13);
  const auto seq = render_sequence(s);
  const auto corpus = make_head_corpus(s, seq, 60, 1);
  EXPECT_EQ(corpus.heads.size(), 60u);
  EXPECT_EQ(corpus.non_heads.size(), 60u);
  EXPECT_EQ(corpus.negatives.size(), 2u * (5 + 10));
  for (const auto& h : corpus.heads) EXPECT_EQ(h.width(), 9);
  for (const auto& h : corpus.non_heads) EXPECT_EQ(h.height(), 9);
}

TEST(Synth, TwentyAgentsHundredFramesQuickly) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto s = make_default_scene(20, 100, 14);
  const auto seq = render_sequence(s);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_EQ(seq.frames[0].size(), 100u);
  EXPECT_LT(secs, 10.0);
}

TEST(Synth, RejectsBadInput) {
  EXPECT_THROW(make_default_scene(-1, 10, 1), std::invalid_argument);
  SyntheticScene empty;
  EXPECT_THROW(render_sequence(empty), std::invalid_argument);
  auto s = make_default_scene(1, 5, 1);
  s.frames = 10;
  EXPECT_THROW(render_sequence(s), std::invalid_argument);
}
