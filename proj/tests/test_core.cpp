#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "helpers.hpp"
#include "roomsfm/core.hpp"

using namespace roomsfm;

namespace {
const double kSqrt2Half = std::sqrt(2.0) / 2.0;
}

TEST_CASE("quat_angular_distance basic values") {
  const Quaternion id = Quaternion::identity();
  CHECK(quat_angular_distance(id, id) == 0.0);

  // 90 degrees about z by half-angle construction
  const Quaternion qz{kSqrt2Half, 0.0, 0.0, kSqrt2Half};
  CHECK_THAT(quat_angular_distance(id, qz),
             Catch::Matchers::WithinAbs(M_PI / 2.0, 1e-12));

  // double cover: q and -q are the same rotation (exactly representable q)
  const Quaternion qy{0.0, 0.0, 1.0, 0.0};
  const Quaternion nqy{0.0, 0.0, -1.0, 0.0};
  CHECK(quat_angular_distance(qy, nqy) == 0.0);
  std::mt19937_64 rng(7);
  const Quaternion q = testutil::random_unit_quat(rng);
  const Quaternion nq{-q.w, -q.x, -q.y, -q.z};
  CHECK(quat_angular_distance(q, nq) < 1e-7);
}

TEST_CASE("quat_angular_distance rejects non-unit input") {
  const Quaternion bad{1.0, 0.5, 0.0, 0.0};
  CHECK_THROWS_AS(quat_angular_distance(bad, Quaternion::identity()), Error);
  CHECK_THROWS_AS(quat_rotate(bad, Vec3(1, 0, 0)), Error);
}

TEST_CASE("quat_angular_distance is a pseudometric") {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 300; ++i) {
    const Quaternion a = testutil::random_unit_quat(rng);
    const Quaternion b = testutil::random_unit_quat(rng);
    const Quaternion c = testutil::random_unit_quat(rng);
    const double dab = quat_angular_distance(a, b);
    const double dba = quat_angular_distance(b, a);
    const double dac = quat_angular_distance(a, c);
    const double dcb = quat_angular_distance(c, b);
    CHECK(dab == dba);
    CHECK(dab >= 0.0);
    CHECK(dab <= M_PI + 1e-12);
    // self distance: acos amplifies the ~1 ulp norm error of a random
    // normalized quaternion to ~1e-8
    CHECK(quat_angular_distance(a, a) < 1e-7);
    CHECK(dab <= dac + dcb + 1e-9);
  }
}

TEST_CASE("quat_rotate basic rotations") {
  const Quaternion id = Quaternion::identity();
  CHECK(quat_rotate(id, Vec3(1, 2, 3)).isApprox(Vec3(1, 2, 3), 1e-15));

  const Quaternion qz = Quaternion::from_axis_angle(Vec3(0, 0, 1), M_PI / 2);
  CHECK((quat_rotate(qz, Vec3(1, 0, 0)) - Vec3(0, 1, 0)).norm() < 1e-12);

  const Quaternion qx = Quaternion::from_axis_angle(Vec3(1, 0, 0), M_PI / 2);
  CHECK((quat_rotate(qx, Vec3(0, 1, 0)) - Vec3(0, 0, 1)).norm() < 1e-12);
}

TEST_CASE("quat_rotate preserves norms and dot products") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const Quaternion q = testutil::random_unit_quat(rng);
    const Vec3 a = testutil::random_vec3(rng, 10.0);
    const Vec3 b = testutil::random_vec3(rng, 10.0);
    const Vec3 ra = quat_rotate(q, a);
    const Vec3 rb = quat_rotate(q, b);
    CHECK_THAT(ra.norm(), Catch::Matchers::WithinRel(a.norm(), 1e-12));
    CHECK_THAT(ra.dot(rb), Catch::Matchers::WithinAbs(a.dot(b), 1e-9 * (1.0 + std::abs(a.dot(b)))));
  }
}

TEST_CASE("quaternion matrix round trip and composition") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    const Quaternion q = testutil::random_unit_quat(rng);
    const Quaternion q2 = Quaternion::from_matrix(q.to_matrix());
    CHECK(quat_angular_distance(q, q2) < 1e-7);

    const Quaternion r = testutil::random_unit_quat(rng);
    const Vec3 v = testutil::random_vec3(rng);
    const Vec3 lhs = quat_rotate(q * r, v);
    const Vec3 rhs = quat_rotate(q, quat_rotate(r, v));
    CHECK((lhs - rhs).norm() < 1e-10);
  }
}

TEST_CASE("project basic cases") {
  CameraIntrinsics k{100.0, 100.0, 50.0, 50.0, 100, 100};
  const Pose id = Pose::identity();

  auto p = project(id, k, Vec3(0, 0, 2));
  REQUIRE(p.has_value());
  CHECK(p->x() == 50.0);
  CHECK(p->y() == 50.0);

  p = project(id, k, Vec3(1, 0, 2));
  REQUIRE(p.has_value());
  CHECK(p->x() == 100.0);
  CHECK(p->y() == 50.0);

  CHECK_FALSE(project(id, k, Vec3(0, 0, -1)).has_value());
  CHECK_FALSE(project(id, k, Vec3(0, 0, 0)).has_value());
}

TEST_CASE("project/unproject round trip") {
  CameraIntrinsics k{260.0, 255.0, 160.0, 120.0, 320, 240};
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> ux(0.0, 319.0), uy(0.0, 239.0),
      uz(0.1, 50.0);
  for (int i = 0; i < 300; ++i) {
    Pose pose{testutil::random_unit_quat(rng), testutil::random_vec3(rng, 2.0)};
    const double u = ux(rng), v = uy(rng), z = uz(rng);
    const Vec3 x = unproject(pose, k, u, v, z);
    auto p = project(pose, k, x);
    REQUIRE(p.has_value());
    CHECK_THAT(p->x(), Catch::Matchers::WithinAbs(u, 1e-9));
    CHECK_THAT(p->y(), Catch::Matchers::WithinAbs(v, 1e-9));
  }
}

TEST_CASE("pose center is consistent with transform") {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 50; ++i) {
    Pose pose{testutil::random_unit_quat(rng), testutil::random_vec3(rng, 3.0)};
    CHECK(pose.transform(pose.center()).norm() < 1e-12);
  }
}

TEST_CASE("capture stream validation") {
  CaptureStream s;
  s.intrinsics = CameraIntrinsics{100, 100, 50, 50, 100, 100};
  Frame f0;
  f0.id = 0;
  f0.t_us = 0;
  Frame f1;
  f1.id = 1;
  f1.t_us = 2000000;
  s.frames = {f0, f1};
  CHECK_NOTHROW(s.validate());

  s.frames[1].t_us = 0;
  CHECK_THROWS_AS(s.validate(), Error);
}

TEST_CASE("intrinsics validation") {
  CHECK_THROWS_AS((CameraIntrinsics{0, 100, 50, 50, 100, 100}).validate(), Error);
  CHECK_THROWS_AS((CameraIntrinsics{100, 100, 120, 50, 100, 100}).validate(), Error);
  CHECK_NOTHROW((CameraIntrinsics{100, 100, 50, 50, 100, 100}).validate());
}
