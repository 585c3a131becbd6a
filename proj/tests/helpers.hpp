// Shared fixtures for the test suites: deterministic RNG helpers, synthetic
// two-view instances, procedural test images.

#ifndef ROOMSFM_TESTS_HELPERS_HPP
#define ROOMSFM_TESTS_HELPERS_HPP

#include <random>
#include <vector>

#include "roomsfm/core.hpp"

namespace testutil {

using roomsfm::CameraIntrinsics;
using roomsfm::GrayImage;
using roomsfm::Pose;
using roomsfm::Quaternion;
using roomsfm::Vec2;
using roomsfm::Vec3;

inline Quaternion random_unit_quat(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Quaternion q{n(rng), n(rng), n(rng), n(rng)};
  return q.normalized();
}

inline Vec3 random_vec3(std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return Vec3(u(rng), u(rng), u(rng));
}

/// A synthetic calibrated two-view setup with exact pixel correspondences.
struct TwoViewInstance {
  CameraIntrinsics k;
  Pose pose_a;  // identity
  Pose pose_b;  // ground-truth relative pose, |t| = 1
  std::vector<Vec3> points;
  std::vector<std::pair<Vec2, Vec2>> corrs;
};

/// Random well-conditioned two-view geometry: points in a frustum box in
/// front of both half-unit-baseline cameras.
inline TwoViewInstance make_two_view(std::mt19937_64& rng, int n_points = 20) {
  TwoViewInstance inst;
  inst.k = CameraIntrinsics{400.0, 400.0, 320.0, 240.0, 640, 480};
  inst.pose_a = Pose::identity();

  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (;;) {
    // modest rotation, unit baseline with a dominant x component
    Vec3 axis = random_vec3(rng).normalized();
    double angle = 0.05 + 0.25 * u01(rng);
    Vec3 t_dir = (Vec3(1, 0, 0) + 0.4 * random_vec3(rng)).normalized();
    inst.pose_b.rotation = Quaternion::from_axis_angle(axis, angle);
    inst.pose_b.translation = t_dir;

    inst.points.clear();
    inst.corrs.clear();
    int tries = 0;
    while (static_cast<int>(inst.points.size()) < n_points && tries < 4000) {
      ++tries;
      Vec3 x(-2.0 + 4.0 * u01(rng), -1.5 + 3.0 * u01(rng), 3.0 + 4.0 * u01(rng));
      auto pa = roomsfm::project(inst.pose_a, inst.k, x);
      auto pb = roomsfm::project(inst.pose_b, inst.k, x);
      if (!pa || !pb) continue;
      if (pa->x() < 0 || pa->x() >= inst.k.width || pa->y() < 0 ||
          pa->y() >= inst.k.height)
        continue;
      if (pb->x() < 0 || pb->x() >= inst.k.width || pb->y() < 0 ||
          pb->y() >= inst.k.height)
        continue;
      inst.points.push_back(x);
      inst.corrs.emplace_back(*pa, *pb);
    }
    if (static_cast<int>(inst.points.size()) == n_points) return inst;
  }
}

/// Axis-aligned checkerboard; period in pixels.
inline GrayImage checkerboard(int w, int h, int period, std::uint8_t lo = 55,
                              std::uint8_t hi = 200) {
  GrayImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      img.at(x, y) = ((x / period + y / period) % 2 == 0) ? lo : hi;
  return img;
}

/// Separable Gaussian blur with reflected borders (test-only oracle helper).
inline GrayImage gaussian_blur(const GrayImage& src, double sigma) {
  if (sigma <= 0.0) return src;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += kernel[i + radius];
  }
  for (double& k : kernel) k /= sum;

  auto reflect = [](int i, int n) {
    while (i < 0 || i >= n) {
      if (i < 0) i = -i - 1;
      if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
  };

  const int w = src.width, h = src.height;
  std::vector<double> tmp(static_cast<std::size_t>(w) * h, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i)
        acc += kernel[i + radius] * src.at(reflect(x + i, w), y);
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  GrayImage dst(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i)
        acc += kernel[i + radius] * tmp[static_cast<std::size_t>(reflect(y + i, h)) * w + x];
      dst.at(x, y) = static_cast<std::uint8_t>(
          std::clamp(std::llround(acc), 0ll, 255ll));
    }
  return dst;
}

}  // namespace testutil

#endif
