#include <catch2/catch_amalgamated.hpp>

#include "nlos/types.hpp"

using namespace nlos;

TEST_CASE("Point2 arithmetic and norms") {
  const Point2 a{3.0, 4.0};
  const Point2 b{1.0, -2.0};
  CHECK((a + b).x == 4.0);
  CHECK((a - b).y == 6.0);
  CHECK((a * 2.0).x == 6.0);
  CHECK(a.norm() == 5.0);
  CHECK(dot(a, b) == -5.0);
  CHECK(distance(a, b) == Catch::Approx(std::hypot(2.0, 6.0)));
  CHECK(a == Point2{3.0, 4.0});
}

TEST_CASE("Point2 rejects non-finite coordinates") {
  CHECK_THROWS_AS(Point2(std::numeric_limits<double>::quiet_NaN(), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(Point2(0.0, std::numeric_limits<double>::infinity()), std::invalid_argument);
}

TEST_CASE("LineSeg validates and measures") {
  const LineSeg seg{{0.0, 0.0}, {3.0, 4.0}};
  CHECK(seg.length() == 5.0);
  CHECK(seg.direction().x == Catch::Approx(0.6));
  CHECK_THROWS_AS(LineSeg({1.0, 1.0}, {1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("AlignedBox extents, containment, distance") {
  const AlignedBox box{{2.0, 3.0}, 2.0, 4.0};
  CHECK(box.x_min() == 1.0);
  CHECK(box.x_max() == 3.0);
  CHECK(box.y_min() == 1.0);
  CHECK(box.y_max() == 5.0);
  CHECK(box.contains({2.0, 3.0}));
  CHECK(box.contains({1.0, 1.0}));
  CHECK_FALSE(box.contains({0.99, 3.0}));
  CHECK(box.distance_to({2.0, 3.0}) == 0.0);
  CHECK(box.distance_to({0.0, 3.0}) == 1.0);
  CHECK(box.distance_to({0.0, 0.0}) == Catch::Approx(std::hypot(1.0, 1.0)));
  CHECK_THROWS_AS(AlignedBox({0, 0}, -1.0, 2.0), std::invalid_argument);
}

TEST_CASE("box_edges order and orientation") {
  const AlignedBox box{{1.0, 2.0}, 2.0, 4.0};
  const auto edges = box_edges(box);
  CHECK(edges[0].a == Point2{0.0, 0.0});  // x_min face, ascending y
  CHECK(edges[0].b == Point2{0.0, 4.0});
  CHECK(edges[1].a == Point2{2.0, 0.0});  // x_max face
  CHECK(edges[1].b == Point2{2.0, 4.0});
  CHECK(edges[2].a == Point2{0.0, 0.0});  // y_min face, ascending x
  CHECK(edges[2].b == Point2{2.0, 0.0});
  CHECK(edges[3].a == Point2{0.0, 4.0});  // y_max face
  CHECK(edges[3].b == Point2{2.0, 4.0});
}

TEST_CASE("RadarFrame splits by motion tag") {
  RadarFrame frame;
  frame.points = {{{1, 1}, Motion::Static, 0},
                  {{2, 2}, Motion::Dynamic, 1},
                  {{3, 3}, Motion::Static, 2}};
  CHECK(frame.static_points().size() == 2);
  CHECK(frame.dynamic_points().size() == 1);
  CHECK(frame.dynamic_points()[0] == Point2{2, 2});
}

TEST_CASE("RigidTransform round trips and composes") {
  const RigidTransform yaw = RigidTransform::from_yaw(0.7);
  const Point3 p{1.0, 2.0, 3.0};
  const Point3 q = yaw.apply(p);
  const Point3 back = yaw.inverse().apply(q);
  CHECK(back.x == Catch::Approx(p.x).margin(1e-12));
  CHECK(back.y == Catch::Approx(p.y).margin(1e-12));
  CHECK(back.z == Catch::Approx(p.z).margin(1e-12));

  const RigidTransform both = yaw.compose(yaw.inverse());
  const Point3 same = both.apply(p);
  CHECK(same.x == Catch::Approx(p.x).margin(1e-12));
  CHECK(same.y == Catch::Approx(p.y).margin(1e-12));
  CHECK(same.z == Catch::Approx(p.z).margin(1e-12));
  CHECK(yaw.is_rigid());
}

TEST_CASE("front camera pose maps ego axes to camera axes") {
  const RigidTransform pose = front_camera_pose({0.0, 0.0, 1.3});
  // A point straight ahead of the camera sits on the optical axis.
  const Point3 ahead = pose.apply({5.0, 0.0, 1.3});
  CHECK(ahead.x == Catch::Approx(0.0).margin(1e-12));
  CHECK(ahead.y == Catch::Approx(0.0).margin(1e-12));
  CHECK(ahead.z == Catch::Approx(5.0).margin(1e-12));
  // Left of the ego (+y) appears on the camera's negative x side.
  const Point3 left = pose.apply({5.0, 1.0, 1.3});
  CHECK(left.x == Catch::Approx(-1.0).margin(1e-12));
  // Above the camera appears on negative y (image up).
  const Point3 up = pose.apply({5.0, 0.0, 2.3});
  CHECK(up.y == Catch::Approx(-1.0).margin(1e-12));
}

TEST_CASE("ego and camera frame conversions invert each other") {
  const RigidTransform pose = front_camera_pose({0.2, -0.1, 1.5}, 0.3);
  const Point2 ground{4.0, 2.0};
  const Point3 cam = ego_to_camera(ground, pose);
  const Point3 back = camera_to_ego(cam, pose);
  CHECK(back.x == Catch::Approx(4.0).margin(1e-12));
  CHECK(back.y == Catch::Approx(2.0).margin(1e-12));
  CHECK(back.z == Catch::Approx(0.0).margin(1e-12));
}
