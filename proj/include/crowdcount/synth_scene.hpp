#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

#include "crowdcount/camera_geometry.hpp"
#include "crowdcount/counting_fusion.hpp"
#include "crowdcount/ground_plane_model.hpp"
#include "crowdcount/image.hpp"

namespace crowdcount {

struct Agent {
  int id = 0;
  std::vector<Eigen::Vector2d> trajectory;  // foot position per frame, mm
  double height = 1750;                     // mm
  double width = 450;                       // mm
  std::uint32_t texture_seed = 0;
};

// Axis-aligned ground rectangle the agents walk in.
struct Walkway {
  double x0 = -4000, y0 = -2500, x1 = 4000, y1 = 2500;
};

struct SyntheticScene {
  std::vector<TsaiCamera> cameras;
  std::vector<Agent> agents;
  int frames = 0;
  std::uint32_t background_seed = 0;
  int noise_amplitude = 2;  // uniform per-pixel noise in [-a, a]
  Walkway walkway;
};

struct ViewAgentTruth {
  Eigen::Vector2d head_px{0, 0};  // world_to_image(foot + height z)
  Eigen::Vector2d foot_px{0, 0};
  double head_radius_px = 0;
  bool visible = false;   // head centre projects inside the image
  bool occluded = false;  // some of its pixels are covered by a nearer agent
  std::size_t drawn_pixels = 0;
  std::size_t visible_pixels = 0;
};

struct FrameTruth {
  int frame = 0;
  std::vector<int> view_counts;
  int scene_count = 0;
  std::vector<Eigen::Vector2d> feet;              // per agent
  std::vector<std::vector<ViewAgentTruth>> views;  // [view][agent]
  std::vector<bool> flagged;                       // agent visible in no view
};

struct RenderedFrame {
  GrayFrame image;
  std::vector<int> owner;  // agent index per pixel, -1 for background
  std::vector<std::uint8_t> head;  // 1 where the owner's head disc was drawn
  std::vector<ViewAgentTruth> agents;
};

// Static background of a view without noise.
GrayFrame render_background(const SyntheticScene& scene, int view);

// Background plus per-frame noise, agents drawn far to near.
RenderedFrame render_frame(const SyntheticScene& scene, int view, int frame);

struct RenderedSequence {
  std::vector<std::vector<GrayFrame>> frames;  // [view][frame]
  std::vector<std::vector<BinaryMask>> agent_masks;
  std::vector<FrameTruth> truth;
};

RenderedSequence render_sequence(const SyntheticScene& scene, bool keep_masks = false);

// Empty frames with the same noise process, for background modelling.
std::vector<GrayFrame> render_empty_frames(const SyntheticScene& scene, int view, int count, int first_frame = 0);

// Two look-at cameras 5-7 m high on opposite sides of the walkway, agents
// bouncing along straight paths inside it. Deterministic in the seed.
SyntheticScene make_default_scene(int agent_count, int frames, std::uint64_t seed);

// The scene's cameras with a fresh set of agents.
SyntheticScene with_new_agents(const SyntheticScene& scene, int agent_count, int frames, std::uint64_t seed);

// One agent walking a straight line through the world origin, sampled
// analytically in a view: foot pixel and head-to-foot pixel height.
ExemplarTrack exemplar_walk(const TsaiCamera& cam, const Walkway& walkway, double person_height, int samples);

// Ground footprint of a view (image corners cast onto z = 0).
Polygon coverage_polygon(const TsaiCamera& cam);

// Convex pieces of coverage[view] that no other view covers.
std::vector<Polygon> single_view_zones(std::span<const TsaiCamera> cameras, int view);

struct HeadCorpus {
  std::vector<GrayFrame> heads;      // base-size crops centred on unoccluded heads
  std::vector<GrayFrame> non_heads;  // base-size crops elsewhere
  std::vector<GrayFrame> negatives;  // full empty frames
};

HeadCorpus make_head_corpus(const SyntheticScene& scene, const RenderedSequence& seq, int per_class,
                            std::uint64_t seed, int base = 9);

// Odd window size that frames a head of the given radius, clamped to 9..25.
int head_window_size(double head_radius_px);

}  // namespace crowdcount
