#include "crowdcount/camera_geometry.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "crowdcount/error.hpp"
#include "crowdcount/key_value.hpp"

namespace crowdcount {

namespace {

constexpr int kMaxDistortionIterations = 20;
constexpr double kDistortionTolMm = 1e-6;

const char* const kCalibrationKeys[] = {"width", "height", "ncx", "nfx", "dx", "dy", "dpx",
                                        "dpy",   "f",      "k",   "cx",  "cy", "sx", "tx",
                                        "ty",    "tz",     "rx",  "ry",  "rz"};

}  // namespace

void TsaiCamera::validate() const {
  if (!(f > 0)) throw std::invalid_argument("camera focal length must be positive");
  if (width <= 0 || height <= 0) throw std::invalid_argument("camera image size must be positive");
  if (!(dpx > 0) || !(dpy > 0)) throw std::invalid_argument("camera pixel pitch must be positive");
  if (!(sx > 0)) throw std::invalid_argument("camera scale factor must be positive");
}

Eigen::Matrix3d rotation_from_angles(double rx, double ry, double rz) {
  const Eigen::Matrix3d r_x = Eigen::AngleAxisd(rx, Eigen::Vector3d::UnitX()).toRotationMatrix();
  const Eigen::Matrix3d r_y = Eigen::AngleAxisd(ry, Eigen::Vector3d::UnitY()).toRotationMatrix();
  const Eigen::Matrix3d r_z = Eigen::AngleAxisd(rz, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  return r_z * r_y * r_x;
}

Eigen::Vector3d angles_from_rotation(const Eigen::Matrix3d& r) {
  const double ry = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  const double rx = std::atan2(r(2, 1), r(2, 2));
  const double rz = std::atan2(r(1, 0), r(0, 0));
  return {rx, ry, rz};
}

Eigen::Matrix3d TsaiCamera::rotation() const { return rotation_from_angles(rx, ry, rz); }

void look_at(TsaiCamera& cam, const Eigen::Vector3d& center, const Eigen::Vector3d& target) {
  const Eigen::Vector3d z = (target - center).normalized();
  Eigen::Vector3d x = z.cross(Eigen::Vector3d::UnitZ());
  if (x.norm() < 1e-9) x = Eigen::Vector3d::UnitX();  // nadir view
  x.normalize();
  const Eigen::Vector3d y = z.cross(x);
  Eigen::Matrix3d r;
  r.row(0) = x.transpose();
  r.row(1) = y.transpose();
  r.row(2) = z.transpose();
  const Eigen::Vector3d angles = angles_from_rotation(r);
  cam.rx = angles.x();
  cam.ry = angles.y();
  cam.rz = angles.z();
  const Eigen::Vector3d t = -cam.rotation() * center;
  cam.tx = t.x();
  cam.ty = t.y();
  cam.tz = t.z();
}

TsaiCamera parse_calibration(const std::string& text, const std::string& origin) {
  const auto kv = KeyValueFile::parse(text, origin);
  const std::set<std::string> known(std::begin(kCalibrationKeys), std::end(kCalibrationKeys));
  for (const auto& [key, values] : kv.entries("")) {
    if (!known.contains(key)) throw ConfigError(origin + ": unknown calibration key '" + key + "'");
  }
  if (kv.sections().size() > 1) throw ConfigError(origin + ": calibration files have no sections");
  TsaiCamera cam;
  auto num = [&](const char* key) { return kv.require_double("", key); };
  cam.width = static_cast<int>(num("width"));
  cam.height = static_cast<int>(num("height"));
  cam.ncx = num("ncx");
  cam.nfx = num("nfx");
  cam.dx = num("dx");
  cam.dy = num("dy");
  cam.dpx = num("dpx");
  cam.dpy = num("dpy");
  cam.f = num("f");
  cam.k = num("k");
  cam.cx = num("cx");
  cam.cy = num("cy");
  cam.sx = num("sx");
  cam.tx = num("tx");
  cam.ty = num("ty");
  cam.tz = num("tz");
  cam.rx = num("rx");
  cam.ry = num("ry");
  cam.rz = num("rz");
  try {
    cam.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return cam;
}

TsaiCamera load_calibration(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open calibration " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_calibration(buffer.str(), path.string());
}

std::string format_calibration(const TsaiCamera& cam) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "width = " << cam.width << "\nheight = " << cam.height << "\nncx = " << cam.ncx
      << "\nnfx = " << cam.nfx << "\ndx = " << cam.dx << "\ndy = " << cam.dy << "\ndpx = " << cam.dpx
      << "\ndpy = " << cam.dpy << "\nf = " << cam.f << "\nk = " << cam.k << "\ncx = " << cam.cx
      << "\ncy = " << cam.cy << "\nsx = " << cam.sx << "\ntx = " << cam.tx << "\nty = " << cam.ty
      << "\ntz = " << cam.tz << "\nrx = " << cam.rx << "\nry = " << cam.ry << "\nrz = " << cam.rz << "\n";
  return out.str();
}

void save_calibration(const std::filesystem::path& path, const TsaiCamera& cam) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << format_calibration(cam);
}

Eigen::Vector2d distort_sensor(double k, const Eigen::Vector2d& undistorted) {
  const double ru = undistorted.norm();
  if (k == 0.0 || ru == 0.0) return undistorted;
  // Solve rd + k rd^3 = ru on the monotone branch.
  double rd = ru;
  for (int i = 0; i < kMaxDistortionIterations; ++i) {
    const double g = rd + k * rd * rd * rd - ru;
    const double dg = 1.0 + 3.0 * k * rd * rd;
    if (dg <= 0.0) break;
    const double step = g / dg;
    rd -= step;
    if (std::abs(step) < 1e-15 * std::max(1.0, ru)) break;
  }
  const double residual = rd + k * rd * rd * rd - ru;
  if (!(rd > 0.0) || 1.0 + 3.0 * k * rd * rd <= 0.0 || std::abs(residual) > kDistortionTolMm) {
    throw GeometryError("radial distortion did not converge (point beyond the lens model's fold)");
  }
  return undistorted * (rd / ru);
}

Eigen::Vector2d undistort_sensor(double k, const Eigen::Vector2d& distorted) {
  return distorted * (1.0 + k * distorted.squaredNorm());
}

Eigen::Vector2d world_to_image(const TsaiCamera& cam, const Eigen::Vector3d& world) {
  const Eigen::Vector3d pc = cam.rotation() * world + cam.translation();
  if (!(pc.z() > 1e-9)) throw GeometryError("point is at or behind the camera plane");
  const Eigen::Vector2d undistorted(cam.f * pc.x() / pc.z(), cam.f * pc.y() / pc.z());
  const Eigen::Vector2d d = distort_sensor(cam.k, undistorted);
  return {cam.sx * d.x() / cam.dpx + cam.cx, d.y() / cam.dpy + cam.cy};
}

Eigen::Vector3d image_to_plane(const TsaiCamera& cam, const Eigen::Vector2d& pixel, double plane_z) {
  const Eigen::Vector2d distorted((pixel.x() - cam.cx) * cam.dpx / cam.sx, (pixel.y() - cam.cy) * cam.dpy);
  const Eigen::Vector2d u = undistort_sensor(cam.k, distorted);
  const Eigen::Matrix3d rt = cam.rotation().transpose();
  const Eigen::Vector3d dir = rt * Eigen::Vector3d(u.x(), u.y(), cam.f);
  const Eigen::Vector3d center = -rt * cam.translation();
  if (std::abs(dir.z()) < 1e-12 * dir.norm()) throw GeometryError("viewing ray is parallel to the plane");
  const double s = (plane_z - center.z()) / dir.z();
  if (!(s > 0.0)) throw GeometryError("plane lies behind the camera along this ray");
  return center + s * dir;
}

GroundPoint image_to_ground(const TsaiCamera& cam, const Eigen::Vector2d& pixel) {
  const Eigen::Vector3d p = image_to_plane(cam, pixel, 0.0);
  GroundPoint g;
  g.x = p.x();
  g.y = p.y();
  return g;
}

std::pair<GroundPoint, double> camera_ground_position(const TsaiCamera& cam) {
  const Eigen::Vector3d c = -cam.rotation().transpose() * cam.translation();
  if (!(c.z() > 0.0)) throw GeometryError("camera centre is not above the ground plane");
  GroundPoint g;
  g.x = c.x();
  g.y = c.y();
  return {g, c.z()};
}

Homography::Homography(const Eigen::Matrix3d& m) : m_(m) {
  if (m_(2, 2) != 0.0) {
    m_ /= m_(2, 2);
  } else {
    m_ /= m_.norm();
  }
  const double scale = m_.norm();
  if (!std::isfinite(scale) || std::abs(m_.determinant()) <= 1e-12 * scale * scale * scale) {
    throw GeometryError("homography is singular");
  }
}

Homography Homography::inverse() const { return Homography(m_.inverse()); }

namespace {

// Similarity taking the points to centroid 0 and mean distance sqrt(2).
Eigen::Matrix3d normalizing_transform(std::span<const Eigen::Vector2d> pts) {
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());
  double mean_dist = 0;
  for (const auto& p : pts) mean_dist += (p - centroid).norm();
  mean_dist /= static_cast<double>(pts.size());
  const double s = mean_dist > 0 ? std::sqrt(2.0) / mean_dist : 1.0;
  Eigen::Matrix3d t;
  t << s, 0, -s * centroid.x(), 0, s, -s * centroid.y(), 0, 0, 1;
  return t;
}

}  // namespace

HomographyEstimate estimate_homography(std::span<const Eigen::Vector2d> src,
                                       std::span<const Eigen::Vector2d> dst) {
  if (src.size() != dst.size()) throw std::invalid_argument("estimate_homography: size mismatch");
  if (src.size() < 4) throw GeometryError("estimate_homography: need at least 4 correspondences");
  const Eigen::Matrix3d ts = normalizing_transform(src);
  const Eigen::Matrix3d td = normalizing_transform(dst);
  const auto n = static_cast<Eigen::Index>(src.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(std::max<Eigen::Index>(2 * n, 9), 9);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector3d p = ts * src[i].homogeneous();
    const Eigen::Vector3d q = td * dst[i].homogeneous();
    const double x = p.x() / p.z(), y = p.y() / p.z();
    const double u = q.x() / q.z(), v = q.y() / q.z();
    a.row(2 * i) << -x, -y, -1, 0, 0, 0, u * x, u * y, u;
    a.row(2 * i + 1) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv(7) <= 1e-10 * sv(0)) throw GeometryError("estimate_homography: degenerate configuration");
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  HomographyEstimate est{Homography(td.inverse() * hn * ts), 0.0};
  double sq = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    sq += (apply_homography(est.h, src[i]) - dst[i]).squaredNorm();
  }
  est.rms_residual = std::sqrt(sq / static_cast<double>(n));
  return est;
}

Eigen::Vector2d apply_homography(const Homography& h, const Eigen::Vector2d& p) {
  const Eigen::Vector3d q = h.matrix() * p.homogeneous();
  if (std::abs(q.z()) < 1e-15 * q.head<2>().norm() || q.z() == 0.0) {
    throw GeometryError("apply_homography: point maps to infinity");
  }
  return q.hnormalized();
}

Homography ground_homography(const TsaiCamera& cam) {
  std::vector<Eigen::Vector2d> src;
  std::vector<Eigen::Vector2d> dst;
  for (int j = 0; j <= 4; ++j) {
    for (int i = 0; i <= 4; ++i) {
      const Eigen::Vector2d px(cam.width * (0.1 + 0.2 * i), cam.height * (0.1 + 0.2 * j));
      try {
        const GroundPoint g = image_to_ground(cam, px);
        src.push_back(px);
        dst.push_back(g.xy());
      } catch (const GeometryError&) {
        // above the horizon
      }
    }
  }
  return estimate_homography(src, dst).h;
}

std::optional<PlanePixel> ground_to_plane_image(const GroundPlaneSpec& spec, const GroundPoint& g) {
  const double c = spec.size / 2.0;
  const long px = std::lround(c + g.x / spec.mm_per_pixel);
  const long py = std::lround(c + g.y / spec.mm_per_pixel);
  if (px < 0 || py < 0 || px >= spec.size || py >= spec.size) return std::nullopt;
  return PlanePixel{static_cast<int>(px), static_cast<int>(py)};
}

}  // namespace crowdcount
