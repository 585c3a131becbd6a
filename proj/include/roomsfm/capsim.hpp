// Deterministic synthetic capture generator: a textured box room, a
// handheld-jitter camera trajectory, a ray-cast renderer with blur and
// exposure degradation, and IMU trace synthesis.

#ifndef ROOMSFM_CAPSIM_HPP
#define ROOMSFM_CAPSIM_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "roomsfm/core.hpp"

namespace roomsfm {

inline constexpr double kGravity = 9.80665;  // m/s^2

namespace detail {

// splitmix64: cheap stream splitting so that toggling one randomized
// concern (texture, trajectory, degradation) does not perturb the others.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + stream * 0x9E3779B97F4A7C15ull + 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Scene

/// Axis-aligned box room centered at the origin. Wall luminance is a
/// procedural checkerboard overlaid with seeded high-contrast dots; dot
/// density is the knob for emulating feature-poor plain surfaces.
class RoomScene {
 public:
  Vec3 half_extents = Vec3(2.5, 2.0, 1.25);
  std::uint64_t texture_seed = 1234;
  double checker_period_m = 0.25;
  double dot_density_per_m2 = 3.0;
  std::uint8_t checker_lo = 60;
  std::uint8_t checker_hi = 195;
  /// Anti-aliasing rays per pixel axis used by render(); 1 = single ray
  /// through the pixel center.
  int supersample = 2;

  struct Dot {
    double u, v, r;
    std::uint8_t value;
  };

  RoomScene() = default;

  void validate() const {
    if (!(half_extents.array() > 0.0).all())
      throw Error(ErrorKind::InvalidArgument, "half_extents must be positive");
    if (checker_period_m <= 0.0)
      throw Error(ErrorKind::InvalidArgument, "checker period must be positive");
    if (dot_density_per_m2 < 0.0)
      throw Error(ErrorKind::InvalidArgument, "dot density must be nonnegative");
    if (supersample < 1)
      throw Error(ErrorKind::InvalidArgument, "supersample must be >= 1");
  }

  /// Wall index: 0..5 for +x,-x,+y,-y,+z,-z.
  /// Wall-plane coordinates (u, v) are the two non-axis world coordinates
  /// shifted to the [0, size] range.
  Vec2 wall_size(int wall) const {
    const int axis = wall / 2;
    const int a = (axis == 0) ? 1 : 0;
    const int b = (axis == 2) ? 1 : 2;
    return Vec2(2.0 * half_extents[a], 2.0 * half_extents[b]);
  }

  Vec2 wall_uv(int wall, const Vec3& p) const {
    const int axis = wall / 2;
    const int a = (axis == 0) ? 1 : 0;
    const int b = (axis == 2) ? 1 : 2;
    return Vec2(p[a] + half_extents[a], p[b] + half_extents[b]);
  }

  Vec3 wall_point(int wall, double u, double v) const {
    const int axis = wall / 2;
    const int a = (axis == 0) ? 1 : 0;
    const int b = (axis == 2) ? 1 : 2;
    Vec3 p;
    p[axis] = (wall % 2 == 0) ? half_extents[axis] : -half_extents[axis];
    p[a] = u - half_extents[a];
    p[b] = v - half_extents[b];
    return p;
  }

  /// Procedural luminance at wall coordinates (u, v); deterministic in
  /// (wall, u, v, texture_seed).
  double texture(int wall, double u, double v) const {
    ensure_dots();
    const double base =
        (static_cast<long long>(std::floor(u / checker_period_m)) +
         static_cast<long long>(std::floor(v / checker_period_m))) % 2 == 0
            ? static_cast<double>(checker_lo)
            : static_cast<double>(checker_hi);
    // dot lookup through the per-wall spatial grid
    const WallDots& wd = dots_[wall];
    if (wd.cells_u > 0) {
      const int cu = std::clamp(static_cast<int>(u / wd.cell), 0, wd.cells_u - 1);
      const int cv = std::clamp(static_cast<int>(v / wd.cell), 0, wd.cells_v - 1);
      for (int dv = -1; dv <= 1; ++dv)
        for (int du = -1; du <= 1; ++du) {
          const int gu = cu + du, gv = cv + dv;
          if (gu < 0 || gu >= wd.cells_u || gv < 0 || gv >= wd.cells_v) continue;
          for (int idx : wd.grid[static_cast<std::size_t>(gv) * wd.cells_u + gu]) {
            const Dot& d = wd.dots[idx];
            const double dx = u - d.u, dy = v - d.v;
            if (dx * dx + dy * dy <= d.r * d.r) return d.value;
          }
        }
    }
    return base;
  }

  const std::vector<Dot>& wall_dots(int wall) const {
    ensure_dots();
    return dots_[wall].dots;
  }

  /// Ground-truth landmark positions: interior checkerboard corners plus
  /// dot centers on every wall.
  std::vector<Vec3> landmarks() const {
    std::vector<Vec3> out;
    for (int wall = 0; wall < 6; ++wall) {
      const Vec2 size = wall_size(wall);
      const int nu = static_cast<int>(std::floor(size.x() / checker_period_m - 1e-9));
      const int nv = static_cast<int>(std::floor(size.y() / checker_period_m - 1e-9));
      for (int i = 1; i <= nu; ++i)
        for (int j = 1; j <= nv; ++j) {
          const double u = i * checker_period_m, v = j * checker_period_m;
          if (u >= size.x() - 1e-9 || v >= size.y() - 1e-9) continue;
          out.push_back(wall_point(wall, u, v));
        }
      for (const Dot& d : wall_dots(wall)) out.push_back(wall_point(wall, d.u, d.v));
    }
    return out;
  }

  double diagonal() const { return 2.0 * half_extents.norm(); }

 private:
  struct WallDots {
    std::vector<Dot> dots;
    std::vector<std::vector<int>> grid;
    int cells_u = 0, cells_v = 0;
    double cell = 0.0;
  };

  void ensure_dots() const {
    if (dots_ready_) return;
    constexpr double kRadiusLo = 0.015, kRadiusHi = 0.045;
    for (int wall = 0; wall < 6; ++wall) {
      WallDots& wd = dots_[wall];
      const Vec2 size = wall_size(wall);
      const double area = size.x() * size.y();
      const int count = static_cast<int>(std::llround(dot_density_per_m2 * area));
      std::mt19937_64 rng(detail::mix_seed(texture_seed, 100 + wall));
      std::uniform_real_distribution<double> u01(0.0, 1.0);
      wd.dots.reserve(count);
      for (int i = 0; i < count; ++i) {
        Dot d;
        d.u = u01(rng) * size.x();
        d.v = u01(rng) * size.y();
        d.r = kRadiusLo + u01(rng) * (kRadiusHi - kRadiusLo);
        d.value = u01(rng) < 0.5 ? 5 : 250;
        wd.dots.push_back(d);
      }
      wd.cell = 2.0 * kRadiusHi;
      wd.cells_u = std::max(1, static_cast<int>(std::ceil(size.x() / wd.cell)));
      wd.cells_v = std::max(1, static_cast<int>(std::ceil(size.y() / wd.cell)));
      wd.grid.assign(static_cast<std::size_t>(wd.cells_u) * wd.cells_v, {});
      for (int i = 0; i < static_cast<int>(wd.dots.size()); ++i) {
        const Dot& d = wd.dots[i];
        const int u_lo = std::clamp(static_cast<int>((d.u - d.r) / wd.cell), 0, wd.cells_u - 1);
        const int u_hi = std::clamp(static_cast<int>((d.u + d.r) / wd.cell), 0, wd.cells_u - 1);
        const int v_lo = std::clamp(static_cast<int>((d.v - d.r) / wd.cell), 0, wd.cells_v - 1);
        const int v_hi = std::clamp(static_cast<int>((d.v + d.r) / wd.cell), 0, wd.cells_v - 1);
        for (int gv = v_lo; gv <= v_hi; ++gv)
          for (int gu = u_lo; gu <= u_hi; ++gu)
            wd.grid[static_cast<std::size_t>(gv) * wd.cells_u + gu].push_back(i);
      }
    }
    dots_ready_ = true;
  }

  mutable WallDots dots_[6];
  mutable bool dots_ready_ = false;
};

// ---------------------------------------------------------------------------
// Trajectory

struct TrajectoryConfig {
  double duration_s = 600.0;
  double rate_fps = 0.5;
  double pos_walk_sigma = 0.05;       // meters per step
  double orient_jitter_sigma = 0.035; // radians per step
  double dwell_fraction = 0.3;
  double blur_fraction = 0.3;
  double exposure_spread = 0.5;
  double imu_orient_noise_rad = 0.002;
  double imu_accel_noise = 0.05;

  void validate() const {
    if (duration_s <= 0 || rate_fps <= 0)
      throw Error(ErrorKind::InvalidArgument, "duration and rate must be positive");
    if (rate_fps * duration_s < 2.0)
      throw Error(ErrorKind::InvalidArgument, "trajectory must produce at least 2 frames");
    if (pos_walk_sigma < 0 || orient_jitter_sigma < 0)
      throw Error(ErrorKind::InvalidArgument, "walk sigmas must be nonnegative");
    if (dwell_fraction < 0 || dwell_fraction > 1 || blur_fraction < 0 ||
        blur_fraction > 1 || exposure_spread < 0 || exposure_spread > 1)
      throw Error(ErrorKind::InvalidArgument, "fractions must lie in [0,1]");
    if (imu_orient_noise_rad < 0 || imu_accel_noise < 0)
      throw Error(ErrorKind::InvalidArgument, "imu noise must be nonnegative");
  }
};

struct GroundTruth {
  std::vector<Pose> poses;     // per frame, world-to-camera
  std::vector<Vec3> landmarks; // texture corners and dot centers
  double room_diagonal = 0.0;
};

// ---------------------------------------------------------------------------
// Renderer

struct RenderDegrade {
  std::vector<Pose> blur_subposes;  // empty = no motion blur
  double exposure_gain = 1.0;
};

namespace detail {

// Nearest wall hit for a ray starting strictly inside the box (slab exit).
inline bool ray_box_exit(const Vec3& origin, const Vec3& dir, const Vec3& he,
                         int& wall, Vec3& hit) {
  double best_t = std::numeric_limits<double>::infinity();
  int best_wall = -1;
  for (int axis = 0; axis < 3; ++axis) {
    if (std::abs(dir[axis]) < 1e-15) continue;
    const double bound = dir[axis] > 0 ? he[axis] : -he[axis];
    const double t = (bound - origin[axis]) / dir[axis];
    if (t > 0 && t < best_t) {
      best_t = t;
      best_wall = axis * 2 + (dir[axis] > 0 ? 0 : 1);
    }
  }
  if (best_wall < 0) return false;
  wall = best_wall;
  hit = origin + best_t * dir;
  return true;
}

// Luminance along a single camera ray, before exposure scaling.
inline double sample_ray(const RoomScene& scene, const Pose& pose,
                         const CameraIntrinsics& k, double u, double v) {
  const Vec3 dir_cam((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0);
  const Vec3 origin = pose.center();
  const Vec3 dir = quat_rotate(pose.rotation.conjugate(), dir_cam);
  int wall;
  Vec3 hit;
  if (!ray_box_exit(origin, dir, scene.half_extents, wall, hit)) return 0.0;
  const Vec2 uv = scene.wall_uv(wall, hit);
  return scene.texture(wall, uv.x(), uv.y());
}

inline void require_inside(const RoomScene& scene, const Pose& pose) {
  const Vec3 c = pose.center();
  if (!((c.array().abs() < scene.half_extents.array()).all()))
    throw Error(ErrorKind::InvalidArgument, "camera center outside the room box");
}

}  // namespace detail

/// Ray-cast render of the box room. Motion blur is the mean over the
/// sub-pose renders; luminance is then scaled by exposure_gain and clamped
/// to [0,255]. Deterministic for fixed inputs.
inline GrayImage render(const RoomScene& scene, const Pose& pose,
                        const CameraIntrinsics& k,
                        const RenderDegrade& degrade = {}) {
  scene.validate();
  if (k.width <= 0 || k.height <= 0)
    throw Error(ErrorKind::InvalidArgument, "render target has zero size");
  k.validate();
  detail::require_inside(scene, pose);
  for (const Pose& sub : degrade.blur_subposes) detail::require_inside(scene, sub);

  const std::vector<Pose>* poses;
  std::vector<Pose> single{pose};
  poses = degrade.blur_subposes.empty() ? &single : &degrade.blur_subposes;

  const int ss = scene.supersample;
  const double ss_norm = 1.0 / (ss * ss);
  GrayImage img(k.width, k.height);
  std::vector<double> acc(img.size(), 0.0);
  for (const Pose& p : *poses) {
    std::size_t idx = 0;
    for (int y = 0; y < k.height; ++y)
      for (int x = 0; x < k.width; ++x, ++idx) {
        double s = 0.0;
        for (int sy = 0; sy < ss; ++sy)
          for (int sx = 0; sx < ss; ++sx)
            s += detail::sample_ray(scene, p, k, x + (sx + 0.5) / ss - 0.5,
                                    y + (sy + 0.5) / ss - 0.5);
        acc[idx] += s * ss_norm;
      }
  }
  const double inv_n = 1.0 / static_cast<double>(poses->size());
  for (std::size_t i = 0; i < acc.size(); ++i) {
    const double lum = acc[i] * inv_n * degrade.exposure_gain;
    img.pixels[i] = static_cast<std::uint8_t>(std::clamp(std::llround(lum), 0ll, 255ll));
  }
  return img;
}

// ---------------------------------------------------------------------------
// Capture simulation

namespace detail {

inline double reflect_into(double x, double lo, double hi) {
  while (x < lo || x > hi) {
    if (x < lo) x = 2.0 * lo - x;
    if (x > hi) x = 2.0 * hi - x;
  }
  return x;
}

}  // namespace detail

/// Simulates an opportunistic capture session: low-rate sampling along a
/// random-walk trajectory with dwell segments, per-frame blur/exposure
/// degradation and synthesized IMU samples. Deterministic in seed.
inline std::pair<CaptureStream, GroundTruth> simulate(const RoomScene& scene,
                                                      const TrajectoryConfig& traj,
                                                      const CameraIntrinsics& k,
                                                      std::uint64_t seed) {
  scene.validate();
  traj.validate();
  k.validate();

  const int n_frames = static_cast<int>(std::floor(traj.duration_s * traj.rate_fps));
  const double dt = 1.0 / traj.rate_fps;
  const double margin = std::min(0.25, 0.4 * scene.half_extents.minCoeff());

  std::mt19937_64 rng_traj(detail::mix_seed(seed, 1));
  std::mt19937_64 rng_deg(detail::mix_seed(seed, 2));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  // Dwell schedule: fixed-length segments, each dwelling with probability
  // dwell_fraction (a phone resting on the desk).
  constexpr int kDwellSegment = 5;
  std::vector<bool> dwell(n_frames, false);
  for (int s = 0; s * kDwellSegment < n_frames; ++s) {
    const bool d = u01(rng_traj) < traj.dwell_fraction;
    for (int i = s * kDwellSegment; i < std::min(n_frames, (s + 1) * kDwellSegment); ++i)
      dwell[i] = d;
  }

  // Random-walk trajectory with wall reflection; dwell segments hold pose.
  std::vector<Pose> poses(n_frames);
  Vec3 pos(0.0, 0.0, 0.0);
  Quaternion q_cam = Quaternion::from_matrix([] {
    Mat3 r;
    // camera z looks along world +x, camera y points to world -z (down)
    r.row(0) = Eigen::RowVector3d(0, -1, 0);
    r.row(1) = Eigen::RowVector3d(0, 0, -1);
    r.row(2) = Eigen::RowVector3d(1, 0, 0);
    return r;
  }());
  for (int i = 0; i < n_frames; ++i) {
    if (i > 0 && !dwell[i]) {
      for (int axis = 0; axis < 3; ++axis)
        pos[axis] = detail::reflect_into(
            pos[axis] + traj.pos_walk_sigma * gauss(rng_traj),
            -scene.half_extents[axis] + margin, scene.half_extents[axis] - margin);
      const Vec3 w(traj.orient_jitter_sigma * gauss(rng_traj),
                   traj.orient_jitter_sigma * gauss(rng_traj),
                   traj.orient_jitter_sigma * gauss(rng_traj));
      q_cam = Quaternion::exp(w) * q_cam;
    } else if (i > 0 && dwell[i]) {
      // burn the same number of draws so dwell toggling stays local
      for (int d = 0; d < 6; ++d) gauss(rng_traj);
    }
    poses[i].rotation = q_cam;
    poses[i].translation = -quat_rotate(q_cam, pos);
  }

  // Per-frame degradation decisions.
  struct Degrade {
    bool blur;
    double gain;
    double accel_kick;
  };
  std::vector<Degrade> deg(n_frames);
  for (int i = 0; i < n_frames; ++i) {
    deg[i].blur = u01(rng_deg) < traj.blur_fraction && i > 0 && !dwell[i];
    // exposure gain: log-style spread, [0.1, 3] at spread 1
    const double t = (2.0 * u01(rng_deg) - 1.0) * traj.exposure_spread;
    deg[i].gain = t >= 0 ? std::pow(3.0, t) : std::pow(0.1, -t);
    deg[i].accel_kick = deg[i].blur ? 1.0 + 5.0 * u01(rng_deg) : 0.0;
  }

  CaptureStream stream;
  stream.intrinsics = k;
  stream.frames.resize(n_frames);
  GroundTruth gt;
  gt.poses = poses;
  gt.landmarks = scene.landmarks();
  gt.room_diagonal = scene.diagonal();

  std::vector<Vec3> centers(n_frames);
  for (int i = 0; i < n_frames; ++i) centers[i] = poses[i].center();

  for (int i = 0; i < n_frames; ++i) {
    RenderDegrade rd;
    rd.exposure_gain = deg[i].gain;
    if (deg[i].blur) {
      // 8 sub-poses over the trailing half of the inter-frame motion
      constexpr int kBlurTaps = 8;
      constexpr double kExposureSpan = 0.5;
      for (int j = 0; j < kBlurTaps; ++j) {
        const double a = 1.0 - kExposureSpan + kExposureSpan * (j + 0.5) / kBlurTaps;
        Pose sub;
        sub.rotation = slerp(poses[i - 1].rotation, poses[i].rotation, a);
        const Vec3 c = centers[i - 1] + a * (centers[i] - centers[i - 1]);
        sub.translation = -quat_rotate(sub.rotation, c);
        rd.blur_subposes.push_back(sub);
      }
    }
    Frame& f = stream.frames[i];
    f.id = i;
    f.t_us = static_cast<std::int64_t>(std::llround(i * dt * 1e6));
    f.image = render(scene, poses[i], k, rd);

    // IMU: device frame == camera frame; orientation is device-to-world.
    Vec3 a_world = Vec3::Zero();
    if (i > 0 && i + 1 < n_frames)
      a_world = (centers[i + 1] - 2.0 * centers[i] + centers[i - 1]) / (dt * dt);
    if (deg[i].accel_kick > 0.0) {
      const Vec3 motion = centers[i] - centers[i - 1];
      const Vec3 dir = motion.norm() > 1e-12 ? motion.normalized() : Vec3(1, 0, 0);
      a_world += deg[i].accel_kick * dir;
    }
    ImuSample& imu = f.imu;
    imu.t_us = f.t_us;
    Quaternion orient = poses[i].rotation.conjugate();
    if (traj.imu_orient_noise_rad > 0.0) {
      const Vec3 w(traj.imu_orient_noise_rad * gauss(rng_traj),
                   traj.imu_orient_noise_rad * gauss(rng_traj),
                   traj.imu_orient_noise_rad * gauss(rng_traj));
      orient = orient * Quaternion::exp(w);
    }
    imu.orient = orient;
    Vec3 accel = quat_rotate(poses[i].rotation, a_world + Vec3(0, 0, kGravity));
    if (traj.imu_accel_noise > 0.0)
      accel += Vec3(traj.imu_accel_noise * gauss(rng_traj),
                    traj.imu_accel_noise * gauss(rng_traj),
                    traj.imu_accel_noise * gauss(rng_traj));
    imu.accel = accel;
    imu.lux = 250.0 * deg[i].gain;
  }

  return {std::move(stream), std::move(gt)};
}

}  // namespace roomsfm

#endif  // ROOMSFM_CAPSIM_HPP
