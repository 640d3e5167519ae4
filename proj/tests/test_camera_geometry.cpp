#include <gtest/gtest.h>

#include "crowdcount/camera_geometry.hpp"
#include "crowdcount/error.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace crowdcount;
using crowdcount::testing::uniform;

namespace {

const std::filesystem::path kData = CROWDCOUNT_TEST_DATA;

TsaiCamera nadir_camera(double h) {
  TsaiCamera cam;
  cam.width = 200;
  cam.height = 100;
  cam.dpx = cam.dpy = 0.01;
  cam.f = 4;
  cam.cx = 100;
  cam.cy = 50;
  cam.rx = M_PI;  // optical axis along -z
  cam.tz = h;
  return cam;
}

// Ground points whose projection lands inside the image.
std::vector<Eigen::Vector3d> visible_ground_points(const TsaiCamera& cam, std::mt19937_64& rng, int n) {
  std::vector<Eigen::Vector3d> out;
  for (int attempt = 0; attempt < 100000 && static_cast<int>(out.size()) < n; ++attempt) {
    const Eigen::Vector3d p(uniform(rng, -15000, 15000), uniform(rng, -15000, 15000), 0);
    try {
      const auto px = world_to_image(cam, p);
      if (px.x() >= 0 && px.y() >= 0 && px.x() < cam.width && px.y() < cam.height) out.push_back(p);
    } catch (const GeometryError&) {
    }
  }
  return out;
}

}  // namespace

TEST(Rotation, AnglesRoundTrip) {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector3d a(uniform(rng, -3, 3), uniform(rng, -1.5, 1.5), uniform(rng, -3, 3));
    const auto r = rotation_from_angles(a.x(), a.y(), a.z());
    const Eigen::Matrix3d expect = (Eigen::AngleAxisd(a.z(), Eigen::Vector3d::UnitZ()) *
                                    Eigen::AngleAxisd(a.y(), Eigen::Vector3d::UnitY()) *
                                    Eigen::AngleAxisd(a.x(), Eigen::Vector3d::UnitX()))
                                       .toRotationMatrix();
    EXPECT_TRUE(r.isApprox(expect, 1e-12));
    const auto back = angles_from_rotation(r);
    EXPECT_TRUE(rotation_from_angles(back.x(), back.y(), back.z()).isApprox(r, 1e-12));
  }
}

TEST(WorldToImage, OnAxisPointHitsPrincipalPoint) {
  const auto cam = nadir_camera(5000);
  const auto px = world_to_image(cam, {0, 0, 0});
  EXPECT_NEAR(px.x(), 100, 1e-12);
  EXPECT_NEAR(px.y(), 50, 1e-12);
  EXPECT_THROW(world_to_image(cam, {0, 0, 6000}), GeometryError);
}

TEST(ImageToGround, PrincipalPointOfNadirCameraIsBelowIt) {
  const auto g = image_to_ground(nadir_camera(5000), {100, 50});
  EXPECT_NEAR(g.x, 0, 1e-9);
  EXPECT_NEAR(g.y, 0, 1e-9);
}

TEST(ImageToGround, MatchesRayPlaneIntersectionForPinhole) {
  std::mt19937_64 rng(32);
  for (int i = 0; i < 50; ++i) {
    const auto cam = oracle::random_camera(rng, 0.0);
    for (int j = 0; j < 20; ++j) {
      const Eigen::Vector2d px(uniform(rng, 0, 384), uniform(rng, 150, 288));
      Eigen::Vector3d expect;
      try {
        expect = oracle::pinhole_ray_plane(cam, px, 0);
      } catch (...) {
        continue;
      }
      const auto g = image_to_ground(cam, px);
      const double scale = std::max(1.0, expect.head<2>().norm());
      EXPECT_NEAR(g.x, expect.x(), 1e-9 * scale);
      EXPECT_NEAR(g.y, expect.y(), 1e-9 * scale);
      const auto p3 = image_to_plane(cam, px, 1750);
      const auto e3 = oracle::pinhole_ray_plane(cam, px, 1750);
      EXPECT_NEAR((p3 - e3).norm(), 0, 1e-9 * scale);
    }
    const Eigen::Vector3d w(uniform(rng, -2000, 2000), uniform(rng, -2000, 2000), uniform(rng, 0, 1800));
    EXPECT_NEAR((world_to_image(cam, w) - oracle::pinhole_project(cam, w)).norm(), 0, 1e-9);
  }
}

TEST(ImageToGround, RoundTripWithDistortion) {
  std::mt19937_64 rng(33);
  for (int i = 0; i < 50; ++i) {
    const auto cam = oracle::random_camera(rng, 0.05);
    for (const auto& p : visible_ground_points(cam, rng, 20)) {
      const auto g = image_to_ground(cam, world_to_image(cam, p));
      EXPECT_LT(std::hypot(g.x - p.x(), g.y - p.y()), 1.0);
    }
  }
}

TEST(Distortion, SensorMapsInvert) {
  std::mt19937_64 rng(34);
  for (int i = 0; i < 200; ++i) {
    const double k = uniform(rng, -0.05, 0.05);
    const Eigen::Vector2d u(uniform(rng, -1.5, 1.5), uniform(rng, -1.5, 1.5));
    EXPECT_NEAR((undistort_sensor(k, distort_sensor(k, u)) - u).norm(), 0, 1e-9);
  }
  EXPECT_EQ(distort_sensor(0, {1, 2}), Eigen::Vector2d(1, 2));
  EXPECT_THROW(distort_sensor(-0.5, {10, 0}), GeometryError);
}

TEST(CameraPosition, CentreAndHeight) {
  TsaiCamera id = nadir_camera(0);
  id.rx = 0;
  id.tz = -5000;
  EXPECT_NEAR(camera_ground_position(id).second, 5000, 1e-12);
  const auto [g, h] = camera_ground_position(nadir_camera(5000));
  EXPECT_NEAR(g.x, 0, 1e-12);
  EXPECT_NEAR(g.y, 0, 1e-12);
  EXPECT_NEAR(h, 5000, 1e-9);

  std::mt19937_64 rng(35);
  for (int i = 0; i < 50; ++i) {
    const auto cam = oracle::random_camera(rng, 0.01);
    const auto [c, ch] = camera_ground_position(cam);
    const Eigen::Vector3d centre(c.x, c.y, ch);
    EXPECT_NEAR((cam.rotation() * centre + cam.translation()).norm(), 0, 1e-9 * centre.norm());
  }
}

TEST(Calibration, PetsViewsParseAndProject) {
  for (const char* name : {"pets_view001.txt", "pets_view002.txt"}) {
    const auto cam = load_calibration(kData / name);
    EXPECT_EQ(cam.width, 768);
    const auto [g, h] = camera_ground_position(cam);
    // Mounted at roughly 5 to 7 m; View-001 computes to ~7.07 m.
    EXPECT_GT(h, 5000);
    EXPECT_LT(h, 7100);
    // The image centre sees the floor, and projects back onto itself.
    const auto floor = image_to_ground(cam, {384, 400});
    const auto px = world_to_image(cam, {floor.x, floor.y, 0});
    EXPECT_TRUE(std::isfinite(px.x()) && std::isfinite(px.y()));
    EXPECT_NEAR(px.x(), 384, 1e-3);
    EXPECT_NEAR(px.y(), 400, 1e-3);
  }
  EXPECT_NEAR(load_calibration(kData / "pets_view001.txt").f, 5.5549183034, 1e-12);
}

TEST(Calibration, FormatRoundTripAndRejectsBadFiles) {
  std::mt19937_64 rng(36);
  const auto cam = oracle::random_camera(rng, 0.02);
  const auto back = parse_calibration(format_calibration(cam));
  EXPECT_EQ(back.f, cam.f);
  EXPECT_EQ(back.k, cam.k);
  EXPECT_EQ(back.rz, cam.rz);
  EXPECT_EQ(back.tx, cam.tx);
  std::string text = format_calibration(cam);
  EXPECT_THROW(parse_calibration(text + "zoom = 2\n"), ConfigError);
  EXPECT_THROW(parse_calibration(text.substr(text.find('\n') + 1)), ConfigError);
  EXPECT_THROW(load_calibration(kData / "missing.txt"), ConfigError);
  TsaiCamera bad = cam;
  bad.f = 0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Homography, IdentityTranslationInverse) {
  const std::vector<Eigen::Vector2d> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  const auto id = estimate_homography(sq, sq);
  EXPECT_TRUE(id.h.matrix().isApprox(Eigen::Matrix3d::Identity(), 1e-12));
  EXPECT_EQ(apply_homography(Homography(), {3, 4}), Eigen::Vector2d(3, 4));
  Eigen::Matrix3d t = Eigen::Matrix3d::Identity();
  t(0, 2) = 5;
  t(1, 2) = -2;
  EXPECT_TRUE(apply_homography(Homography(t), {1, 1}).isApprox(Eigen::Vector2d(6, -1)));

  std::mt19937_64 rng(37);
  for (int i = 0; i < 50; ++i) {
    Eigen::Matrix3d m = Eigen::Matrix3d::Identity() + 0.3 * Eigen::Matrix3d::Random();
    m(2, 0) *= 0.01;
    m(2, 1) *= 0.01;
    const Homography h(m);
    const Eigen::Vector2d p(uniform(rng, -5, 5), uniform(rng, -5, 5));
    EXPECT_NEAR((apply_homography(h.inverse(), apply_homography(h, p)) - p).norm(), 0, 1e-9);
  }
  EXPECT_THROW(Homography(Eigen::Matrix3d::Zero()), GeometryError);
}

TEST(Homography, RecoversKnownMatrix) {
  std::mt19937_64 rng(38);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::Matrix3d m = Eigen::Matrix3d::Identity() + 0.3 * Eigen::Matrix3d::Random();
    m(2, 0) *= 0.02;
    m(2, 1) *= 0.02;
    m /= m(2, 2);
    std::vector<Eigen::Vector2d> src, dst;
    for (int i = 0; i < 5; ++i) {
      src.emplace_back(uniform(rng, -10, 10), uniform(rng, -10, 10));
      dst.push_back((m * src.back().homogeneous()).hnormalized());
    }
    const auto est = estimate_homography(std::span(src).first(4), std::span(dst).first(4));
    EXPECT_TRUE(est.h.matrix().isApprox(m, 1e-8));
    const auto p = apply_homography(est.h, src[4]);
    EXPECT_LT((p - dst[4]).norm(), 1e-6 * dst[4].norm());
  }
}

TEST(Homography, UnitSquareToQuadrilateral) {
  const std::vector<Eigen::Vector2d> src{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  const std::vector<Eigen::Vector2d> dst{{2, 1}, {7, 2}, {6, 9}, {1, 5}};
  const auto est = estimate_homography(src, dst);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR((apply_homography(est.h, src[i]) - dst[i]).norm(), 0, 1e-9);
  EXPECT_LT(est.rms_residual, 1e-9);
}

TEST(Homography, DegenerateInputsRejected) {
  const std::vector<Eigen::Vector2d> three{{0, 0}, {1, 0}, {0, 1}};
  EXPECT_THROW(estimate_homography(three, three), GeometryError);
  const std::vector<Eigen::Vector2d> line{{0, 0}, {1, 1}, {2, 2}, {3, 3}};
  EXPECT_THROW(estimate_homography(line, line), GeometryError);
}

TEST(Homography, ExactForPlanarPinholeScene) {
  std::mt19937_64 rng(39);
  for (int i = 0; i < 50; ++i) {
    const auto cam = oracle::random_camera(rng, 0.0);
    const auto pts = visible_ground_points(cam, rng, 26);
    ASSERT_EQ(pts.size(), 26u);
    std::vector<Eigen::Vector2d> ground, image;
    for (const auto& p : pts) {
      ground.push_back(p.head<2>());
      image.push_back(world_to_image(cam, p));
    }
    const auto est = estimate_homography(std::span(ground).first(6), std::span(image).first(6));
    for (std::size_t j = 6; j < pts.size(); ++j) EXPECT_LT((apply_homography(est.h, ground[j]) - image[j]).norm(), 0.01);
    const auto gh = ground_homography(cam);
    for (std::size_t j = 0; j < pts.size(); ++j) EXPECT_LT((apply_homography(gh, image[j]) - ground[j]).norm(), 1e-3);
  }
}

TEST(Homography, ScaleCovariantAndLinePreserving) {
  std::mt19937_64 rng(40);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Eigen::Vector2d> src, dst, scaled;
    for (int i = 0; i < 6; ++i) {
      src.emplace_back(uniform(rng, 0, 100), uniform(rng, 0, 100));
      dst.emplace_back(uniform(rng, 0, 100), uniform(rng, 0, 100));
      scaled.push_back(3.5 * dst.back());
    }
    const auto h1 = estimate_homography(src, dst).h;
    const auto h2 = estimate_homography(src, scaled).h;
    const Eigen::Vector2d a(uniform(rng, 0, 100), uniform(rng, 0, 100));
    const Eigen::Vector2d b(uniform(rng, 0, 100), uniform(rng, 0, 100));
    EXPECT_NEAR((apply_homography(h2, a) - 3.5 * apply_homography(h1, a)).norm(), 0, 1e-6 * apply_homography(h2, a).norm());
    const Eigen::Vector2d c = a + 0.37 * (b - a);
    const auto pa = apply_homography(h1, a), pb = apply_homography(h1, b), pc = apply_homography(h1, c);
    const Eigen::Vector2d u = pb - pa, v = pc - pa;
    EXPECT_NEAR(u.x() * v.y() - u.y() * v.x(), 0, 1e-6 * u.norm() * v.norm());
  }
}

TEST(PlaneImage, CentredRaster) {
  const GroundPlaneSpec spec;
  EXPECT_EQ(ground_to_plane_image(spec, {0, 0}), (PlanePixel{300, 300}));
  EXPECT_EQ(ground_to_plane_image(spec, {spec.mm_per_pixel, 0}), (PlanePixel{301, 300}));
  EXPECT_FALSE(ground_to_plane_image(spec, {20000, 0}).has_value());
  // The synthetic walkway (8 m x 5 m) fits with room to spare.
  EXPECT_TRUE(ground_to_plane_image(spec, {-4000, -2500}).has_value());
  EXPECT_TRUE(ground_to_plane_image(spec, {4000, 2500}).has_value());
}
