#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>

#include <Eigen/Core>

namespace crowdcount {

// Tsai camera: sensor geometry, intrinsics with a single radial coefficient,
// and rigid world-to-camera extrinsics. Lengths in mm, angles in radians.
//
// Image formation, for a world point P:
//   Pc = R P + t                     R = Rz(rz) Ry(ry) Rx(rx)
//   (Xu, Yu) = f (xc, yc) / zc       undistorted sensor coordinates
//   Xu = Xd (1 + k r^2), Yu = Yd (1 + k r^2), r^2 = Xd^2 + Yd^2
//   u = sx Xd / dpx + cx,  v = Yd / dpy + cy
struct TsaiCamera {
  // geometry
  int width = 0;
  int height = 0;
  double ncx = 0;
  double nfx = 0;
  double dx = 0;
  double dy = 0;
  double dpx = 0;
  double dpy = 0;
  // intrinsics
  double f = 0;
  double k = 0;
  double cx = 0;
  double cy = 0;
  double sx = 1;
  // extrinsics
  double tx = 0;
  double ty = 0;
  double tz = 0;
  double rx = 0;
  double ry = 0;
  double rz = 0;

  // Throws std::invalid_argument if f, width, height, dpx, dpy, sx are not positive.
  void validate() const;

  Eigen::Matrix3d rotation() const;
  Eigen::Vector3d translation() const { return {tx, ty, tz}; }
};

Eigen::Matrix3d rotation_from_angles(double rx, double ry, double rz);
// Inverse of rotation_from_angles for proper rotations (rx, ry, rz).
Eigen::Vector3d angles_from_rotation(const Eigen::Matrix3d& r);

// Sets rx, ry, rz, tx, ty, tz so the camera sits at `center` looking at
// `target`, with image rows running downward relative to world +z.
void look_at(TsaiCamera& cam, const Eigen::Vector3d& center, const Eigen::Vector3d& target);

// Calibration file: `key = value` lines with exactly the keys
// width height ncx nfx dx dy dpx dpy f k cx cy sx tx ty tz rx ry rz.
TsaiCamera parse_calibration(const std::string& text, const std::string& origin = "<string>");
TsaiCamera load_calibration(const std::filesystem::path& path);
std::string format_calibration(const TsaiCamera& cam);
void save_calibration(const std::filesystem::path& path, const TsaiCamera& cam);

enum class PointSource { kCorner, kHead, kFoot };

// A point on the z = 0 world plane.
struct GroundPoint {
  double x = 0;
  double y = 0;
  double weight = 1.0;
  PointSource source = PointSource::kCorner;
  int view_id = 0;

  Eigen::Vector2d xy() const { return {x, y}; }
};

// Full Tsai chain. Throws GeometryError when the point is at or behind the
// camera plane or the distortion cannot be inverted.
Eigen::Vector2d world_to_image(const TsaiCamera& cam, const Eigen::Vector3d& world);

// Back-projects a pixel and intersects the viewing ray with z = 0.
GroundPoint image_to_ground(const TsaiCamera& cam, const Eigen::Vector2d& pixel);

// Back-projects a pixel and intersects the viewing ray with z = plane_z.
Eigen::Vector3d image_to_plane(const TsaiCamera& cam, const Eigen::Vector2d& pixel, double plane_z);

// Camera centre (-R^T t) as a ground point plus its height above the plane.
// Throws GeometryError when the height is not positive.
std::pair<GroundPoint, double> camera_ground_position(const TsaiCamera& cam);

// Undistorted-sensor -> distorted-sensor coordinates (the iterative direction).
Eigen::Vector2d distort_sensor(double k, const Eigen::Vector2d& undistorted);
Eigen::Vector2d undistort_sensor(double k, const Eigen::Vector2d& distorted);

class Homography {
 public:
  Homography() : m_(Eigen::Matrix3d::Identity()) {}
  // Normalises so h33 = 1 when h33 != 0; throws GeometryError if singular.
  explicit Homography(const Eigen::Matrix3d& m);

  const Eigen::Matrix3d& matrix() const { return m_; }
  Homography inverse() const;

 private:
  Eigen::Matrix3d m_;
};

struct HomographyEstimate {
  Homography h;
  // RMS forward transfer error over the input correspondences.
  double rms_residual = 0;
};

// Normalised DLT over >= 4 correspondences (src -> dst).
// Throws GeometryError for fewer than 4 pairs or rank < 8.
HomographyEstimate estimate_homography(std::span<const Eigen::Vector2d> src,
                                       std::span<const Eigen::Vector2d> dst);

// Throws GeometryError when the point maps to infinity.
Eigen::Vector2d apply_homography(const Homography& h, const Eigen::Vector2d& p);

// Image -> ground homography fitted to a 5x5 grid of pixels mapped through
// image_to_ground. Exact when k = 0; a least-squares fit otherwise.
Homography ground_homography(const TsaiCamera& cam);

// Raster of the shared ground plane: world origin at the centre pixel.
struct GroundPlaneSpec {
  int size = 600;
  double mm_per_pixel = 50.0;

  Eigen::Vector2d world_extent_mm() const { return {size * mm_per_pixel, size * mm_per_pixel}; }
};

struct PlanePixel {
  int x = 0;
  int y = 0;
  friend bool operator==(const PlanePixel&, const PlanePixel&) = default;
};

// Rounded plane pixel, or nullopt when it falls outside the raster.
std::optional<PlanePixel> ground_to_plane_image(const GroundPlaneSpec& spec, const GroundPoint& g);

}  // namespace crowdcount
