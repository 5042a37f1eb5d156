#include <cmath>
#include <cstring>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "support.hpp"
#include "travkit/errors.hpp"
#include "travkit/gridmap.hpp"

namespace travkit {
namespace {

std::vector<LabeledPoint> random_points(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::vector<LabeledPoint> pts(n);
  for (auto& p : pts) {
    p.position = {testing::uniform(rng, lo, hi), testing::uniform(rng, lo, hi), testing::uniform(rng, -0.5, 0.5)};
    p.traversability = static_cast<float>(testing::uniform(rng, 0, 1));
  }
  return pts;
}

void expect_matches_binning(const TravGridMap& map, const std::vector<LabeledPoint>& pts,
                            const AccumulateStats& stats) {
  std::size_t dropped = 0;
  const auto cells = oracle::bin(pts, map.origin(), map.resolution(), map.cells_x(), map.cells_y(), dropped);
  EXPECT_EQ(stats.dropped, dropped);
  EXPECT_EQ(stats.binned + stats.dropped, pts.size());
  std::size_t with_data = 0;
  for (int iy = 0; iy < map.cells_y(); ++iy) {
    for (int ix = 0; ix < map.cells_x(); ++ix) {
      auto it = cells.find({ix, iy});
      if (it == cells.end()) {
        EXPECT_TRUE(std::isnan(map.height().at(ix, iy)));
        EXPECT_EQ(map.counts().at(ix, iy), 0u);
        continue;
      }
      ++with_data;
      EXPECT_EQ(map.height().at(ix, iy), it->second.height);
      EXPECT_EQ(map.semantic().at(ix, iy), it->second.semantic);
      EXPECT_EQ(map.counts().at(ix, iy), it->second.count);
    }
  }
  EXPECT_EQ(with_data, cells.size());
}

TEST(GridMap, DefaultGeometry) {
  const TravGridMap map;
  EXPECT_EQ(map.cells_x(), 400);
  EXPECT_EQ(map.cells_y(), 400);
  EXPECT_EQ(map.resolution(), 0.025);
  EXPECT_DOUBLE_EQ(map.size_x(), 10.0);
  EXPECT_TRUE(std::isnan(map.height().at(0, 0)));
  EXPECT_THROW(TravGridMap(10.0, 10.0, 0.03), InvalidParameter);
  EXPECT_THROW(TravGridMap(10.0, 10.0, 0.0), InvalidParameter);
}

TEST(GridMap, SinglePoint) {
  TravGridMap map(1.0, 1.0, 0.1, {-0.5, -0.5});
  const std::vector<LabeledPoint> pts{{{0.04, -0.26, 0.3}, 0.25f}};
  const auto stats = accumulate(map, pts);
  EXPECT_EQ(stats.binned, 1u);
  int set = 0;
  for (int iy = 0; iy < 10; ++iy)
    for (int ix = 0; ix < 10; ++ix) set += !std::isnan(map.height().at(ix, iy));
  EXPECT_EQ(set, 1);
  EXPECT_EQ(map.height().at(5, 2), 0.3f);
  EXPECT_EQ(map.semantic().at(5, 2), 0.25f);
}

TEST(GridMap, MatchesBruteForceBinning) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    TravGridMap map(2.0, 1.5, 0.05, {testing::uniform(rng, -1, 1), testing::uniform(rng, -1, 1)});
    auto pts = random_points(rng, 3000, -2.0, 3.0);
    // Equal heights in one cell: the later point must win.
    const Eigen::Vector2d c = map.cell_center(3, 3);
    pts.push_back({{c.x(), c.y(), 0.9}, 0.1f});
    pts.push_back({{c.x(), c.y(), 0.9}, 0.7f});
    const auto stats = accumulate(map, pts);
    expect_matches_binning(map, pts, stats);
    EXPECT_EQ(map.semantic().at(3, 3), 0.7f);
  }
}

TEST(GridMap, IdempotentForRepeatedBatch) {
  std::mt19937_64 rng(6);
  TravGridMap map(2.0, 2.0, 0.1, {0, 0});
  const auto pts = random_points(rng, 500, -0.5, 2.5);
  accumulate(map, pts);
  const Raster<float> h = map.height(), s = map.semantic();
  accumulate(map, pts);
  EXPECT_TRUE(h.same_shape(map.height()));
  for (std::size_t i = 0; i < h.size(); ++i) {
    const float a = h.data()[i], b = map.height().data()[i];
    EXPECT_TRUE((std::isnan(a) && std::isnan(b)) || a == b);
    const float c = s.data()[i], d = map.semantic().data()[i];
    EXPECT_TRUE((std::isnan(c) && std::isnan(d)) || c == d);
  }
}

TEST(GridMap, ShiftPreservesOverlap) {
  std::mt19937_64 rng(7);
  TravGridMap map(1.0, 1.0, 0.1, {0, 0});
  accumulate(map, random_points(rng, 400, 0, 1));
  const TravGridMap before = map;
  map.shift_cells(3, -2);
  EXPECT_NEAR((map.origin() - Eigen::Vector2d(0.3, -0.2)).norm(), 0, 1e-12);
  for (int iy = 0; iy < 10; ++iy) {
    for (int ix = 0; ix < 10; ++ix) {
      const int sx = ix + 3, sy = iy - 2;
      const float now = map.height().at(ix, iy);
      if (sx < 10 && sy >= 0) {
        const float was = before.height().at(sx, sy);
        EXPECT_TRUE((std::isnan(now) && std::isnan(was)) || now == was);
      } else {
        EXPECT_TRUE(std::isnan(now));
      }
    }
  }
  TravGridMap centred = TravGridMap::centered_at({5, 5}, 2.0, 0.1);
  EXPECT_NEAR((centred.origin() - Eigen::Vector2d(4, 4)).norm(), 0, 1e-12);
  centred.recenter({5.32, 4.88});
  EXPECT_NEAR((centred.origin() - Eigen::Vector2d(4.3, 3.9)).norm(), 0, 1e-9);
}

TEST(Geometric, FlatIsTraversable) {
  TravGridMap map(1.0, 1.0, 0.1);
  for (auto& h : map.height().pixels()) h = 0.2f;
  geometric_traversability(map);
  for (float g : map.geometric().pixels()) EXPECT_EQ(g, 1.0f);
}

TEST(Geometric, StepMarksAdjacentCells) {
  TravGridMap map(1.0, 1.0, 0.1);
  for (int iy = 0; iy < 10; ++iy)
    for (int ix = 0; ix < 10; ++ix) map.height().at(ix, iy) = ix < 5 ? 0.0f : 0.3f;
  geometric_traversability(map, 0.15, 10.0);  // slope limit out of the way
  for (int iy = 0; iy < 10; ++iy) {
    for (int ix = 0; ix < 10; ++ix) {
      EXPECT_EQ(map.geometric().at(ix, iy), (ix == 4 || ix == 5) ? 0.0f : 1.0f) << ix << "," << iy;
    }
  }
}

TEST(Geometric, NoDataAndIsolatedCells) {
  TravGridMap map(1.0, 1.0, 0.1);
  map.height().at(5, 5) = 2.0f;
  geometric_traversability(map);
  EXPECT_EQ(map.geometric().at(5, 5), 1.0f);
  EXPECT_TRUE(std::isnan(map.geometric().at(0, 0)));
}

TEST(Geometric, MatchesNeighbourOracleAndIgnoresSemantics) {
  std::mt19937_64 rng(8);
  TravGridMap map(1.2, 0.8, 0.04);
  for (auto& h : map.height().pixels()) h = rng() % 5 == 0 ? kNoData : static_cast<float>(testing::uniform(rng, 0, 0.2));
  for (auto& s : map.semantic().pixels()) s = 0.3f;
  geometric_traversability(map, 0.05, 0.9);
  const Raster<float> first = map.geometric();
  for (int iy = 0; iy < map.cells_y(); ++iy) {
    for (int ix = 0; ix < map.cells_x(); ++ix) {
      const float h = map.height().at(ix, iy);
      if (std::isnan(h)) {
        EXPECT_TRUE(std::isnan(first.at(ix, iy)));
        continue;
      }
      double step = 0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int jx = ix + dx, jy = iy + dy;
          if ((!dx && !dy) || jx < 0 || jy < 0 || jx >= map.cells_x() || jy >= map.cells_y()) continue;
          const float n = map.height().at(jx, jy);
          if (!std::isnan(n)) step = std::max(step, std::fabs(static_cast<double>(n) - h));
        }
      const bool ok = step <= 0.05 && std::atan(step / 0.04) <= 0.9;
      EXPECT_EQ(first.at(ix, iy), ok ? 1.0f : 0.0f);
    }
  }
  for (auto& s : map.semantic().pixels()) s = 0.9f;
  geometric_traversability(map, 0.05, 0.9);
  EXPECT_EQ(std::memcmp(first.data(), map.geometric().data(), first.size() * sizeof(float)), 0);
}

TEST(GridMap, UnprojectSkipsInvalidDepth) {
  CameraModel cam;
  cam.fx = cam.fy = 10;
  cam.cx = 2;
  cam.cy = 2;
  cam.width = cam.height = 4;
  DepthImage depth(4, 4, 0.0f);
  depth.at(2, 2) = 3.0f;
  depth.at(0, 0) = std::numeric_limits<float>::quiet_NaN();
  Raster<float> trav(4, 4, 0.25f);
  const auto pts = unproject(depth, trav, cam, Pose{});
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_NEAR((pts[0].position - Eigen::Vector3d(0, 0, 3)).norm(), 0, 1e-12);
  EXPECT_EQ(pts[0].traversability, 0.25f);
  EXPECT_THROW(unproject(depth, Raster<float>(3, 3), cam, Pose{}), ShapeError);
}

TEST(GridMap, FileRoundTrip) {
  testing::TempDir dir;
  std::mt19937_64 rng(9);
  TravGridMap map(1.0, 0.5, 0.05, {2.0, -1.0});
  accumulate(map, random_points(rng, 300, -1, 3));
  geometric_traversability(map);
  save_map(dir / "m.map", map);
  const TravGridMap back = load_map(dir / "m.map");
  EXPECT_EQ(back.cells_x(), map.cells_x());
  EXPECT_EQ(back.cells_y(), map.cells_y());
  EXPECT_EQ(back.origin(), map.origin());
  EXPECT_EQ(std::memcmp(back.height().data(), map.height().data(), map.height().size() * 4), 0);
  EXPECT_EQ(std::memcmp(back.geometric().data(), map.geometric().data(), map.height().size() * 4), 0);
  EXPECT_EQ(back.counts(), map.counts());
  const std::string bytes = testing::read_file(dir / "m.map");
  EXPECT_EQ(bytes.substr(0, 8), "TRAVMAP1");
  testing::write_file(dir / "bad.map", "TRAVMAP0junk");
  EXPECT_THROW(load_map(dir / "bad.map"), InputError);
}

TEST(GridMap, DepthFromMillimeters) {
  Raster<std::uint16_t> mm(2, 1);
  mm.at(0, 0) = 1500;
  const DepthImage d = depth_from_millimeters(mm);
  EXPECT_FLOAT_EQ(d.at(0, 0), 1.5f);
  EXPECT_FALSE(d.at(1, 0) > 0);
}

}  // namespace
}  // namespace travkit
