// Geometry and data primitives shared by every pipeline stage:
// quaternions, camera poses, intrinsics, luminance images, IMU samples
// and capture streams.

#ifndef ROOMSFM_CORE_HPP
#define ROOMSFM_CORE_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace roomsfm {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// ---------------------------------------------------------------------------
// Errors

enum class ErrorKind {
  InvalidArgument,
  InsufficientData,
  DegenerateGeometry,
  LowParallax,
  NegativeDepth,
  ReconstructionFailed,
  DegenerateInput,
  ConfigError,
  IoError,
};

inline const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::InsufficientData: return "insufficient-data";
    case ErrorKind::DegenerateGeometry: return "degenerate-geometry";
    case ErrorKind::LowParallax: return "low-parallax";
    case ErrorKind::NegativeDepth: return "negative-depth";
    case ErrorKind::ReconstructionFailed: return "reconstruction-failed";
    case ErrorKind::DegenerateInput: return "degenerate-input";
    case ErrorKind::ConfigError: return "config-error";
    case ErrorKind::IoError: return "io-error";
  }
  return "unknown";
}

/// Exception carrying a machine-parsable error kind alongside the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + msg),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }
  const char* kind_name() const { return error_kind_name(kind_); }

 private:
  ErrorKind kind_;
};

// ---------------------------------------------------------------------------
// Quaternion

/// Unit quaternion representing a rotation. q and -q encode the same
/// rotation (double cover).
struct Quaternion {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  static Quaternion identity() { return {1.0, 0.0, 0.0, 0.0}; }

  static Quaternion from_axis_angle(const Vec3& axis, double angle) {
    const double n = axis.norm();
    if (n < 1e-300) return identity();
    const double h = 0.5 * angle;
    const double s = std::sin(h) / n;
    return Quaternion{std::cos(h), axis.x() * s, axis.y() * s, axis.z() * s};
  }

  /// Rotation-vector exponential: |v| is the angle, v/|v| the axis.
  static Quaternion exp(const Vec3& v) {
    const double n = v.norm();
    return n < 1e-300 ? identity() : from_axis_angle(v, n);
  }

  /// Quaternion from a proper rotation matrix (Shepperd's method).
  static Quaternion from_matrix(const Mat3& m) {
    Quaternion q;
    const double tr = m(0, 0) + m(1, 1) + m(2, 2);
    if (tr > 0.0) {
      double s = std::sqrt(tr + 1.0) * 2.0;
      q.w = 0.25 * s;
      q.x = (m(2, 1) - m(1, 2)) / s;
      q.y = (m(0, 2) - m(2, 0)) / s;
      q.z = (m(1, 0) - m(0, 1)) / s;
    } else if (m(0, 0) > m(1, 1) && m(0, 0) > m(2, 2)) {
      double s = std::sqrt(1.0 + m(0, 0) - m(1, 1) - m(2, 2)) * 2.0;
      q.w = (m(2, 1) - m(1, 2)) / s;
      q.x = 0.25 * s;
      q.y = (m(0, 1) + m(1, 0)) / s;
      q.z = (m(0, 2) + m(2, 0)) / s;
    } else if (m(1, 1) > m(2, 2)) {
      double s = std::sqrt(1.0 + m(1, 1) - m(0, 0) - m(2, 2)) * 2.0;
      q.w = (m(0, 2) - m(2, 0)) / s;
      q.x = (m(0, 1) + m(1, 0)) / s;
      q.y = 0.25 * s;
      q.z = (m(1, 2) + m(2, 1)) / s;
    } else {
      double s = std::sqrt(1.0 + m(2, 2) - m(0, 0) - m(1, 1)) * 2.0;
      q.w = (m(1, 0) - m(0, 1)) / s;
      q.x = (m(0, 2) + m(2, 0)) / s;
      q.y = (m(1, 2) + m(2, 1)) / s;
      q.z = 0.25 * s;
    }
    return q.normalized();
  }

  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

  double dot(const Quaternion& o) const {
    return w * o.w + x * o.x + y * o.y + z * o.z;
  }

  bool is_unit(double tol = 1e-6) const { return std::abs(norm() - 1.0) <= tol; }

  Quaternion normalized() const {
    const double n = norm();
    if (n < 1e-300)
      throw Error(ErrorKind::InvalidArgument, "cannot normalize zero quaternion");
    return {w / n, x / n, y / n, z / n};
  }

  Quaternion conjugate() const { return {w, -x, -y, -z}; }

  /// Hamilton product, renormalized to keep the unit invariant under
  /// long composition chains.
  Quaternion operator*(const Quaternion& o) const {
    Quaternion r{w * o.w - x * o.x - y * o.y - z * o.z,
                 w * o.x + x * o.w + y * o.z - z * o.y,
                 w * o.y - x * o.z + y * o.w + z * o.x,
                 w * o.z + x * o.y - y * o.x + z * o.w};
    return r.normalized();
  }

  Mat3 to_matrix() const {
    Mat3 m;
    const double ww = w * w, xx = x * x, yy = y * y, zz = z * z;
    m(0, 0) = ww + xx - yy - zz;
    m(0, 1) = 2.0 * (x * y - w * z);
    m(0, 2) = 2.0 * (x * z + w * y);
    m(1, 0) = 2.0 * (x * y + w * z);
    m(1, 1) = ww - xx + yy - zz;
    m(1, 2) = 2.0 * (y * z - w * x);
    m(2, 0) = 2.0 * (x * z - w * y);
    m(2, 1) = 2.0 * (y * z + w * x);
    m(2, 2) = ww - xx - yy + zz;
    return m;
  }

  /// Rotation-vector logarithm (inverse of exp); result angle in [0, pi].
  Vec3 log() const {
    Quaternion q = w < 0 ? Quaternion{-w, -x, -y, -z} : *this;
    const Vec3 v(q.x, q.y, q.z);
    const double vn = v.norm();
    if (vn < 1e-14) return Vec3::Zero();
    const double angle = 2.0 * std::atan2(vn, q.w);
    return v * (angle / vn);
  }
};

inline Quaternion slerp(const Quaternion& a, const Quaternion& b, double t) {
  double d = a.dot(b);
  Quaternion bb = b;
  if (d < 0) {  // shortest path across the double cover
    d = -d;
    bb = {-b.w, -b.x, -b.y, -b.z};
  }
  if (d > 1.0 - 1e-12) {
    Quaternion r{a.w + t * (bb.w - a.w), a.x + t * (bb.x - a.x),
                 a.y + t * (bb.y - a.y), a.z + t * (bb.z - a.z)};
    return r.normalized();
  }
  const double th = std::acos(std::min(1.0, d));
  const double sa = std::sin((1.0 - t) * th) / std::sin(th);
  const double sb = std::sin(t * th) / std::sin(th);
  Quaternion r{sa * a.w + sb * bb.w, sa * a.x + sb * bb.x,
               sa * a.y + sb * bb.y, sa * a.z + sb * bb.z};
  return r.normalized();
}

namespace detail {
inline void require_unit(const Quaternion& q, const char* who) {
  if (!q.is_unit())
    throw Error(ErrorKind::InvalidArgument,
                std::string(who) + ": quaternion is not unit norm");
}
}  // namespace detail

/// Angle in [0, pi] between two rotations; the absolute dot product folds
/// the q/-q double cover.
inline double quat_angular_distance(const Quaternion& a, const Quaternion& b) {
  detail::require_unit(a, "quat_angular_distance");
  detail::require_unit(b, "quat_angular_distance");
  const double d = std::min(1.0, std::abs(a.dot(b)));
  return 2.0 * std::acos(d);
}

inline Vec3 quat_rotate(const Quaternion& q, const Vec3& v) {
  detail::require_unit(q, "quat_rotate");
  const Vec3 u(q.x, q.y, q.z);
  const Vec3 uv = u.cross(v);
  return v + 2.0 * (q.w * uv + u.cross(uv));
}

// ---------------------------------------------------------------------------
// Sensors and images

/// One inertial sample. Orientation is device-to-world; acceleration is the
/// specific force in the device frame (includes gravity).
struct ImuSample {
  std::int64_t t_us = 0;
  Quaternion orient = Quaternion::identity();
  Vec3 accel = Vec3::Zero();
  std::optional<double> lux;
};

/// 8-bit luminance raster, row major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  GrayImage() = default;
  GrayImage(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {
    if (w <= 0 || h <= 0)
      throw Error(ErrorKind::InvalidArgument, "image dimensions must be positive");
  }

  std::uint8_t at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
  std::uint8_t& at(int x, int y) {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
  bool empty() const { return width <= 0 || height <= 0 || pixels.empty(); }
  std::size_t size() const { return pixels.size(); }
};

struct CameraIntrinsics {
  double fx = 0, fy = 0, cx = 0, cy = 0;
  int width = 0, height = 0;

  void validate() const {
    if (fx <= 0 || fy <= 0)
      throw Error(ErrorKind::InvalidArgument, "focal lengths must be positive");
    if (width <= 0 || height <= 0)
      throw Error(ErrorKind::InvalidArgument, "image size must be positive");
    if (cx < 0 || cx >= width || cy < 0 || cy >= height)
      throw Error(ErrorKind::InvalidArgument, "principal point outside image");
  }

  Mat3 matrix() const {
    Mat3 k = Mat3::Identity();
    k(0, 0) = fx;
    k(1, 1) = fy;
    k(0, 2) = cx;
    k(1, 2) = cy;
    return k;
  }
};

/// World-to-camera transform: x_cam = R * x_world + t.
struct Pose {
  Quaternion rotation = Quaternion::identity();
  Vec3 translation = Vec3::Zero();

  static Pose identity() { return {}; }

  Vec3 transform(const Vec3& x_world) const {
    return quat_rotate(rotation, x_world) + translation;
  }

  /// Camera center in world coordinates.
  Vec3 center() const { return -quat_rotate(rotation.conjugate(), translation); }
};

struct Frame {
  std::int64_t id = 0;
  std::int64_t t_us = 0;
  GrayImage image;
  ImuSample imu;
};

struct CaptureStream {
  CameraIntrinsics intrinsics;
  std::vector<Frame> frames;

  void validate() const {
    intrinsics.validate();
    for (std::size_t i = 1; i < frames.size(); ++i) {
      if (frames[i].t_us <= frames[i - 1].t_us)
        throw Error(ErrorKind::InvalidArgument, "frames not strictly time ordered");
      if (frames[i].id <= frames[i - 1].id)
        throw Error(ErrorKind::InvalidArgument, "frame ids not strictly increasing");
    }
  }
};

// ---------------------------------------------------------------------------
// Pinhole projection

/// Projects a world point; nullopt when the point is at or behind the
/// camera plane (z_cam <= 0).
inline std::optional<Vec2> project(const Pose& pose, const CameraIntrinsics& k,
                                   const Vec3& x_world) {
  const Vec3 xc = pose.transform(x_world);
  if (xc.z() <= 0.0) return std::nullopt;
  return Vec2(k.fx * xc.x() / xc.z() + k.cx, k.fy * xc.y() / xc.z() + k.cy);
}

/// Back-projects pixel (u, v) at camera depth z into world coordinates.
inline Vec3 unproject(const Pose& pose, const CameraIntrinsics& k, double u,
                      double v, double z) {
  const Vec3 xc((u - k.cx) / k.fx * z, (v - k.cy) / k.fy * z, z);
  return quat_rotate(pose.rotation.conjugate(), xc - pose.translation);
}

}  // namespace roomsfm

#endif  // ROOMSFM_CORE_HPP
