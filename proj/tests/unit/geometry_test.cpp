#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "support.hpp"
#include "travkit/errors.hpp"
#include "travkit/geometry.hpp"

namespace travkit {
namespace {

using testing::uniform;

Pose at(double t, double x, double y, double z) {
  Pose p;
  p.timestamp = t;
  p.position = {x, y, z};
  return p;
}

Trajectory timeline(const std::vector<double>& stamps) {
  std::vector<Pose> poses;
  for (double t : stamps) poses.push_back(at(t, t, 0, 1.36));
  return Trajectory(poses);
}

CameraModel test_camera() {
  CameraModel c;
  c.fx = 500;
  c.fy = 480;
  c.cx = 320;
  c.cy = 240;
  c.width = 640;
  c.height = 480;
  return c;
}

Pose random_pose(std::mt19937_64& rng) {
  const Eigen::Quaterniond q(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1));
  return Pose::from_quaternion(0.0, {uniform(rng, -5, 5), uniform(rng, -5, 5), uniform(rng, 0, 3)}, q.normalized());
}

TEST(Footsteps, SubtractsCameraHeight) {
  const Trajectory traj({at(0, 0, 0, 1.36)});
  const auto f = extract_footsteps(traj, 1.36);
  ASSERT_EQ(f.points_world.size(), 1u);
  EXPECT_EQ(f.points_world[0], Eigen::Vector3d(0, 0, 0));

  const Trajectory two({at(0, 1, 2, 3), at(1, 4, 5, 6)});
  const auto g = extract_footsteps(two, 1.0);
  EXPECT_EQ(g.points_world[0], Eigen::Vector3d(1, 2, 2));
  EXPECT_EQ(g.points_world[1], Eigen::Vector3d(4, 5, 5));
}

TEST(Footsteps, ZeroHeightIsIdentityNegativeThrows) {
  std::mt19937_64 rng(3);
  std::vector<Pose> poses;
  for (int i = 0; i < 20; ++i) {
    Pose p = random_pose(rng);
    p.timestamp = i;
    poses.push_back(p);
  }
  const Trajectory traj(poses);
  const auto f = extract_footsteps(traj, 0.0);
  for (std::size_t i = 0; i < poses.size(); ++i) EXPECT_EQ(f.points_world[i], poses[i].position);
  EXPECT_THROW(extract_footsteps(traj, -0.1), InvalidParameter);
}

TEST(Footsteps, RotationIgnoredAndCommutesWithHorizontalTranslation) {
  std::mt19937_64 rng(5);
  std::vector<Pose> poses, moved;
  for (int i = 0; i < 30; ++i) {
    Pose p = random_pose(rng);
    p.timestamp = i * 0.1;
    poses.push_back(p);
    p.position += Eigen::Vector3d(2.5, -7.0, 0.0);
    moved.push_back(p);
  }
  const auto a = extract_footsteps(Trajectory(poses), 1.36);
  const auto b = extract_footsteps(Trajectory(moved), 1.36);
  for (std::size_t i = 0; i < poses.size(); ++i) {
    EXPECT_NEAR((b.points_world[i] - a.points_world[i] - Eigen::Vector3d(2.5, -7.0, 0)).norm(), 0, 1e-12);
    EXPECT_DOUBLE_EQ(a.points_world[i].z(), poses[i].position.z() - 1.36);
  }
}

TEST(Window, InclusiveHorizon) {
  const Trajectory traj = timeline({0, 1, 2, 3, 4, 5});
  EXPECT_EQ(select_window(traj, 0, 3.0), (IndexRange{0, 3}));
  EXPECT_EQ(select_window(traj, 5, 3.0), (IndexRange{5, 5}));
  EXPECT_THROW(select_window(traj, 6, 3.0), IndexError);
  EXPECT_THROW(select_window(traj, 0, 0.0), InvalidParameter);
}

TEST(Window, HalfSecondSpacingMatchesScan) {
  std::vector<double> stamps;
  for (int i = 0; i <= 10; ++i) stamps.push_back(0.5 * i);
  const Trajectory traj = timeline(stamps);
  const IndexRange w = select_window(traj, 2, 3.0);
  EXPECT_EQ(w.first, 2u);
  EXPECT_EQ(w.count(), 7u);
}

TEST(Window, PropertyContiguousAndBounded) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> stamps;
    double t = uniform(rng, 0, 2);
    const int n = testing::uniform_int(rng, 1, 40);
    for (int i = 0; i < n; ++i) {
      stamps.push_back(t);
      t += uniform(rng, 0.01, 1.0);
    }
    const Trajectory traj = timeline(stamps);
    const std::size_t frame = testing::uniform_int(rng, 0, n - 1);
    const double horizon = uniform(rng, 0.05, 5.0);
    const IndexRange w = select_window(traj, frame, horizon);
    std::size_t expected = 0;
    for (int j = 0; j < n; ++j) {
      const bool in = stamps[j] >= stamps[frame] && stamps[j] <= stamps[frame] + horizon;
      if (in) {
        EXPECT_GE(static_cast<std::size_t>(j), w.first);
        EXPECT_LE(static_cast<std::size_t>(j), w.last);
        ++expected;
      }
    }
    EXPECT_EQ(w.first, frame);
    EXPECT_EQ(w.count(), expected);
  }
}

TEST(Trajectory, RejectsBadInput) {
  EXPECT_THROW(Trajectory(std::vector<Pose>{}), InvalidParameter);
  EXPECT_THROW(Trajectory({at(1, 0, 0, 0), at(1, 0, 0, 0)}), InvalidParameter);
  Pose skew = at(0, 0, 0, 0);
  skew.rotation(0, 1) = 0.1;
  EXPECT_THROW(Trajectory({skew}), InvalidParameter);
}

TEST(Projection, PrincipalPoint) {
  const CameraModel cam = test_camera();
  const auto px = project_point({0, 0, 1}, Pose{}, cam);
  ASSERT_TRUE(px);
  EXPECT_DOUBLE_EQ(px->x(), cam.cx);
  EXPECT_DOUBLE_EQ(px->y(), cam.cy);
}

TEST(Projection, DropsPointsBehindOrOutside) {
  const CameraModel cam = test_camera();
  FootstepSet pts;
  pts.points_world = {{0, 0, -1}, {0, 0, 0.04}, {0, 0, 2}, {100, 0, 1}};
  const PixelPoints out = project_points(pts, Pose{}, cam, 7);
  ASSERT_EQ(out.points.size(), 1u);
  EXPECT_EQ(out.frame_index, 7u);
  EXPECT_EQ(out.points[0], Eigen::Vector2d(cam.cx, cam.cy));
}

TEST(Projection, MatchesHomogeneousOracle) {
  std::mt19937_64 rng(21);
  const CameraModel cam = test_camera();
  int visible = 0;
  for (int i = 0; i < 500; ++i) {
    const Pose pose = random_pose(rng);
    // Place the point in front of the camera most of the time.
    const Eigen::Vector3d pc(uniform(rng, -2, 2), uniform(rng, -2, 2), uniform(rng, -1, 8));
    const Eigen::Vector3d pw = pose.rotation * pc + pose.position;
    const auto expected = oracle::project(pw, pose, cam);
    const auto got = project_point(pw, pose, cam);
    ASSERT_EQ(got.has_value(), expected.depth > 0.05) << i;
    FootstepSet one;
    one.points_world = {pw};
    ASSERT_EQ(project_points(one, pose, cam).points.size(), oracle::visible(expected, cam) ? 1u : 0u) << i;
    if (got && oracle::visible(expected, cam)) {
      ++visible;
      EXPECT_LE((*got - expected.pixel).norm(), 1e-6);
      EXPECT_NEAR(camera_depth(pw, pose), expected.depth, 1e-9);
    }
  }
  EXPECT_GT(visible, 50);
}

TEST(Projection, UnprojectRoundTrip) {
  std::mt19937_64 rng(22);
  const CameraModel cam = test_camera();
  for (int i = 0; i < 500; ++i) {
    const Pose pose = random_pose(rng);
    const Eigen::Vector3d pw = pose.rotation * Eigen::Vector3d(uniform(rng, -1, 1), uniform(rng, -1, 1),
                                                               uniform(rng, 0.1, 20)) + pose.position;
    const auto px = project_point(pw, pose, cam);
    if (!px) continue;
    const Eigen::Vector3d back = unproject_pixel(px->x(), px->y(), camera_depth(pw, pose), pose, cam);
    EXPECT_LE((back - pw).norm(), 1e-6);
  }
}

TEST(Fps, CollinearExample) {
  PixelPoints pts;
  for (int u = 0; u <= 10; ++u) pts.points.emplace_back(u, 50);
  const PixelPoints out = farthest_point_sample(pts, 3);
  ASSERT_EQ(out.points.size(), 3u);
  EXPECT_EQ(out.points[0].x(), 0);
  EXPECT_EQ(out.points[1].x(), 10);
  EXPECT_EQ(out.points[2].x(), 5);
}

TEST(Fps, IdentityWhenFewPointsAndErrors) {
  PixelPoints pts;
  pts.points = {{3, 4}, {1, 9}};
  pts.frame_index = 4;
  const PixelPoints out = farthest_point_sample(pts, 3);
  EXPECT_EQ(out.points, pts.points);
  EXPECT_EQ(out.frame_index, 4u);
  EXPECT_THROW(farthest_point_sample(PixelPoints{}, 3), EmptyInput);
  EXPECT_THROW(farthest_point_sample(pts, 0), InvalidParameter);
}

TEST(Fps, SeedIsLowestPixel) {
  PixelPoints pts;
  pts.points = {{10, 5}, {3, 90}, {7, 90}, {50, 20}};
  EXPECT_EQ(farthest_point_sample(pts, 1).points[0], Eigen::Vector2d(3, 90));
}

TEST(Fps, MatchesBruteForceGreedy) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    PixelPoints pts;
    const int n = testing::uniform_int(rng, 1, 60);
    const bool grid = trial % 3 == 0;  // integer grid points produce ties
    for (int i = 0; i < n; ++i) {
      if (grid) {
        pts.points.emplace_back(testing::uniform_int(rng, 0, 6), testing::uniform_int(rng, 0, 6));
      } else {
        pts.points.emplace_back(uniform(rng, 0, 640), uniform(rng, 0, 480));
      }
    }
    const std::size_t k = testing::uniform_int(rng, 1, 8);
    const auto expected = oracle::fps_indices(pts.points, k);
    const auto got = farthest_point_sample(pts, k);
    ASSERT_EQ(got.points.size(), expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_EQ(got.points[i], pts.points[expected[i]]);
  }
}

TEST(Files, TrajectoryRoundTrip) {
  testing::TempDir dir;
  std::mt19937_64 rng(41);
  std::vector<Pose> poses;
  for (int i = 0; i < 5; ++i) {
    Pose p = random_pose(rng);
    p.timestamp = i * 0.25;
    poses.push_back(p);
  }
  save_tum_trajectory(dir / "t.txt", Trajectory(poses));
  const Trajectory back = load_tum_trajectory(dir / "t.txt");
  ASSERT_EQ(back.size(), poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i) {
    EXPECT_DOUBLE_EQ(back[i].timestamp, poses[i].timestamp);
    EXPECT_LE((back[i].position - poses[i].position).norm(), 1e-12);
    EXPECT_LE((back[i].rotation - poses[i].rotation).norm(), 1e-12);
  }
}

TEST(Files, TumQuaternionIsWLast) {
  testing::TempDir dir;
  // 90 deg about z: qz = sin(45), qw = cos(45).
  testing::write_file(dir / "t.txt", "# comment\n0.0 1 2 3 0 0 0.7071067811865476 0.7071067811865476\n");
  const Trajectory t = load_tum_trajectory(dir / "t.txt");
  EXPECT_NEAR((t[0].rotation * Eigen::Vector3d::UnitX() - Eigen::Vector3d::UnitY()).norm(), 0, 1e-12);
  EXPECT_EQ(t[0].position, Eigen::Vector3d(1, 2, 3));
  testing::write_file(dir / "bad.txt", "0.0 1 2 3\n");
  EXPECT_THROW(load_tum_trajectory(dir / "bad.txt"), InputError);
}

TEST(Files, CameraRoundTripAndValidation) {
  testing::TempDir dir;
  save_camera(dir / "c.json", test_camera());
  const CameraModel c = load_camera(dir / "c.json");
  EXPECT_EQ(c.fx, 500);
  EXPECT_EQ(c.width, 640);
  testing::write_file(dir / "bad.json", R"({"fx": 0, "fy": 1, "cx": 1, "cy": 1, "width": 4, "height": 4})");
  EXPECT_THROW(load_camera(dir / "bad.json"), Error);
}

}  // namespace
}  // namespace travkit
