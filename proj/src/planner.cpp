#include "travkit/planner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include <nlohmann/json.hpp>

#include "travkit/errors.hpp"

namespace travkit {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double cell_cost_factor(const TravGridMap& map, int ix, int iy, const CostWeights& w) {
  if (ix < 0 || iy < 0 || ix >= map.cells_x() || iy >= map.cells_y()) return kInf;
  const float g = map.geometric().at(ix, iy);
  const double geo = has_data(g) ? static_cast<double>(g) : 1.0;
  if (geo < w.hard_geo_threshold) return kInf;
  const double sem = map.semantic_or_neutral(ix, iy);
  return 1.0 + w.w_geo * (1.0 - geo) + w.w_sem * (1.0 - sem);
}

double edge_cost(const TravGridMap& map, const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                 const CostWeights& weights) {
  const Eigen::Vector2d d = b - a;
  const double length = d.norm();
  if (length == 0.0) {
    int ix, iy;
    if (!map.cell_of(a, ix, iy)) return kInf;
    return std::isfinite(cell_cost_factor(map, ix, iy, weights)) ? 0.0 : kInf;
  }
  const auto samples = static_cast<std::size_t>(std::max(1.0, std::ceil(length / map.resolution())));
  const double ds = length / static_cast<double>(samples);
  double cost = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    const Eigen::Vector2d p = a + d * ((static_cast<double>(k) + 0.5) / static_cast<double>(samples));
    int ix, iy;
    if (!map.cell_of(p, ix, iy)) return kInf;
    const double f = cell_cost_factor(map, ix, iy, weights);
    if (!std::isfinite(f)) return kInf;
    cost += ds * f;
  }
  return cost;
}

double path_cost(const TravGridMap& map, const std::vector<Eigen::Vector2d>& waypoints,
                 const CostWeights& weights) {
  double total = 0.0;
  for (std::size_t i = 1; i < waypoints.size(); ++i) {
    total += edge_cost(map, waypoints[i - 1], waypoints[i], weights);
  }
  return total;
}

namespace {

struct Node {
  Eigen::Vector2d pos;
  int parent = -1;
  double cost = 0.0;       // from the root
  double edge = 0.0;       // from the parent
  std::vector<int> children;
};

// Uniform bucket grid over the map extent for nearest / radius queries.
class NodeIndex {
 public:
  NodeIndex(const TravGridMap& map, double bucket)
      : origin_(map.origin()),
        bucket_(bucket),
        nbx_(std::max(1, static_cast<int>(std::ceil(map.size_x() / bucket)))),
        nby_(std::max(1, static_cast<int>(std::ceil(map.size_y() / bucket)))),
        cells_(static_cast<std::size_t>(nbx_) * nby_) {}

  void insert(int id, const Eigen::Vector2d& p) {
    auto [bx, by] = bucket_of(p);
    cells_[static_cast<std::size_t>(by) * nbx_ + bx].push_back(id);
  }

  int nearest(const std::vector<Node>& nodes, const Eigen::Vector2d& p) const {
    auto [bx, by] = bucket_of(p);
    int best = -1;
    double best_d2 = kInf;
    const int max_ring = std::max(nbx_, nby_);
    for (int ring = 0; ring <= max_ring; ++ring) {
      for (int y = by - ring; y <= by + ring; ++y) {
        if (y < 0 || y >= nby_) continue;
        const bool edge_row = (y == by - ring || y == by + ring);
        for (int x = bx - ring; x <= bx + ring; x += (edge_row ? 1 : 2 * std::max(ring, 1))) {
          if (x < 0 || x >= nbx_) continue;
          for (int id : cells_[static_cast<std::size_t>(y) * nbx_ + x]) {
            const double d2 = (nodes[id].pos - p).squaredNorm();
            if (d2 < best_d2 || (d2 == best_d2 && id < best)) {
              best_d2 = d2;
              best = id;
            }
          }
        }
      }
      const double reach = ring * bucket_;
      if (best >= 0 && best_d2 <= reach * reach) break;
    }
    return best;
  }

  void within(const std::vector<Node>& nodes, const Eigen::Vector2d& p, double r,
              std::vector<int>& out) const {
    out.clear();
    auto [bx, by] = bucket_of(p);
    const int span = static_cast<int>(std::ceil(r / bucket_));
    const double r2 = r * r;
    for (int y = std::max(0, by - span); y <= std::min(nby_ - 1, by + span); ++y) {
      for (int x = std::max(0, bx - span); x <= std::min(nbx_ - 1, bx + span); ++x) {
        for (int id : cells_[static_cast<std::size_t>(y) * nbx_ + x]) {
          if ((nodes[id].pos - p).squaredNorm() <= r2) out.push_back(id);
        }
      }
    }
    std::sort(out.begin(), out.end());
  }

 private:
  std::pair<int, int> bucket_of(const Eigen::Vector2d& p) const {
    const int bx = std::clamp(static_cast<int>(std::floor((p.x() - origin_.x()) / bucket_)), 0, nbx_ - 1);
    const int by = std::clamp(static_cast<int>(std::floor((p.y() - origin_.y()) / bucket_)), 0, nby_ - 1);
    return {bx, by};
  }

  Eigen::Vector2d origin_;
  double bucket_;
  int nbx_, nby_;
  std::vector<std::vector<int>> cells_;
};

// Uniform double in [0, 1) from the top 53 bits; stable across standard libraries.
constexpr int kMaxSampleAttempts = 64;
constexpr double kPi = 3.14159265358979323846;

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

void propagate_cost(std::vector<Node>& nodes, int root) {
  std::vector<int> stack{root};
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    for (int c : nodes[id].children) {
      nodes[c].cost = nodes[id].cost + nodes[c].edge;
      stack.push_back(c);
    }
  }
}

bool point_allowed(const TravGridMap& map, const Eigen::Vector2d& p, const CostWeights& w) {
  int ix, iy;
  return map.cell_of(p, ix, iy) && std::isfinite(cell_cost_factor(map, ix, iy, w));
}

}  // namespace

PlanResult plan(const TravGridMap& map, const PlanQuery& query, std::size_t budget, std::uint64_t seed,
                const PlannerParams& params) {
  const CostWeights& w = query.weights;
  if (w.w_geo < 0 || w.w_sem < 0) throw InvalidParameter("cost weights must be non-negative");
  if (!(params.step_size > 0) || !(params.r_max > 0) || !(query.goal_tolerance > 0)) {
    throw InvalidParameter("planner step size, r_max and goal tolerance must be positive");
  }
  const Eigen::Vector2d start = query.start.xy(), goal = query.goal.xy();
  if (!point_allowed(map, start, w)) {
    throw InvalidParameter("plan start lies outside the map or in a rejected cell");
  }

  PlanResult result;
  if (!map.contains(goal)) {
    result.failure = "goal outside the map";
    return result;
  }
  if (!point_allowed(map, goal, w)) {
    result.failure = "goal lies in a rejected region";
    return result;
  }

  std::vector<Node> nodes;
  nodes.reserve(budget + 1);
  nodes.push_back(Node{start, -1, 0.0, 0.0, {}});
  NodeIndex index(map, 0.5);
  index.insert(0, start);

  std::mt19937_64 rng(seed);
  std::vector<int> near;
  const Eigen::Vector2d lo = map.origin();
  const Eigen::Vector2d extent(map.size_x(), map.size_y());
  const double c_min = (goal - start).norm();
  const Eigen::Vector2d centre = (start + goal) / 2.0;
  const Eigen::Vector2d axis = c_min > 1e-12 ? Eigen::Vector2d((goal - start) / c_min) : Eigen::Vector2d(1, 0);
  const double tol2 = query.goal_tolerance * query.goal_tolerance;
  std::vector<int> goal_nodes;
  double c_best = kInf;
  if (start == goal || (start - goal).squaredNorm() <= tol2) {
    goal_nodes.push_back(0);
    c_best = 0;
  }

  for (std::size_t it = 0; it < budget; ++it) {
    ++result.iterations;
    Eigen::Vector2d sample = goal;
    if (uniform01(rng) >= params.goal_bias) {
      // SampleFree by rejection; once a solution exists, draw from the
      // ellipse of points that could still improve it (cost >= length).
      const bool informed = params.informed_sampling && std::isfinite(c_best);
      for (int attempt = 0; attempt < kMaxSampleAttempts; ++attempt) {
        if (informed) {
          const double major = c_best + query.goal_tolerance;
          const double minor = std::sqrt(std::max(0.0, major * major - c_min * c_min));
          const double rho = std::sqrt(uniform01(rng)), theta = 2.0 * kPi * uniform01(rng);
          const Eigen::Vector2d unit(rho * std::cos(theta) * major / 2.0, rho * std::sin(theta) * minor / 2.0);
          sample = centre + axis * unit.x() + Eigen::Vector2d(-axis.y(), axis.x()) * unit.y();
        } else {
          const double sx = uniform01(rng), sy = uniform01(rng);
          sample = lo + Eigen::Vector2d(sx * extent.x(), sy * extent.y());
        }
        if (point_allowed(map, sample, w)) break;
      }
    }
    const int nearest = index.nearest(nodes, sample);
    const Eigen::Vector2d dir = sample - nodes[nearest].pos;
    const double dist = dir.norm();
    if (dist < 1e-12) continue;
    const Eigen::Vector2d pos =
        dist <= params.step_size ? sample : Eigen::Vector2d(nodes[nearest].pos + dir * (params.step_size / dist));
    if (!point_allowed(map, pos, w)) continue;

    const double n = static_cast<double>(nodes.size() + 1);
    const double radius = std::min(params.r_max, params.gamma * std::sqrt(std::log(n) / n));
    index.within(nodes, pos, radius, near);
    if (std::find(near.begin(), near.end(), nearest) == near.end()) near.push_back(nearest);

    int parent = -1;
    double parent_edge = kInf, best = kInf;
    for (int id : near) {
      const double e = edge_cost(map, nodes[id].pos, pos, w);
      if (!std::isfinite(e)) continue;
      const double c = nodes[id].cost + e;
      if (c < best) {
        best = c;
        parent = id;
        parent_edge = e;
      }
    }
    if (parent < 0) continue;

    const int id_new = static_cast<int>(nodes.size());
    nodes.push_back(Node{pos, parent, best, parent_edge, {}});
    nodes[parent].children.push_back(id_new);
    index.insert(id_new, pos);
    if ((pos - goal).squaredNorm() <= tol2) goal_nodes.push_back(id_new);

    for (int id : near) {
      if (id == parent) continue;
      const double e = edge_cost(map, pos, nodes[id].pos, w);
      if (!std::isfinite(e)) continue;
      const double c = nodes[id_new].cost + e;
      if (c < nodes[id].cost - 1e-12) {
        auto& siblings = nodes[nodes[id].parent].children;
        siblings.erase(std::find(siblings.begin(), siblings.end(), id));
        nodes[id].parent = id_new;
        nodes[id].edge = e;
        nodes[id].cost = c;
        nodes[id_new].children.push_back(id);
        propagate_cost(nodes, id);
      }
    }
    for (int g : goal_nodes) c_best = std::min(c_best, nodes[g].cost);
  }
  result.tree_size = nodes.size();

  int terminal = -1;
  for (int id = 0; id < static_cast<int>(nodes.size()); ++id) {
    if ((nodes[id].pos - goal).squaredNorm() > tol2) continue;
    if (terminal < 0 || nodes[id].cost < nodes[terminal].cost) terminal = id;
  }
  if (terminal < 0) {
    result.failure = "no tree node within goal tolerance after " + std::to_string(budget) + " iterations";
    return result;
  }

  std::vector<Eigen::Vector2d> branch;
  for (int id = terminal; id >= 0; id = nodes[id].parent) branch.push_back(nodes[id].pos);
  std::reverse(branch.begin(), branch.end());

  std::vector<Eigen::Vector2d> dense{branch.front()};
  for (std::size_t i = 1; i < branch.size(); ++i) {
    const Eigen::Vector2d a = branch[i - 1], b = branch[i];
    const auto pieces = static_cast<int>(std::ceil((b - a).norm() / params.step_size - 1e-12));
    for (int k = 1; k < pieces; ++k) dense.push_back(a + (b - a) * (static_cast<double>(k) / pieces));
    dense.push_back(b);
  }
  PlannedPath path;
  path.total_cost = path_cost(map, dense, w);
  path.waypoints = std::move(dense);
  if (!std::isfinite(path.total_cost)) {
    // Re-sampled pieces clipped a rejected cell the tree edge sampling missed.
    path.waypoints = branch;
    path.total_cost = path_cost(map, branch, w);
  }
  for (std::size_t i = 1; i < path.waypoints.size(); ++i) {
    path.length += (path.waypoints[i] - path.waypoints[i - 1]).norm();
  }
  path.goal_yaw = query.goal.yaw;
  result.path = std::move(path);
  return result;
}

Pose2 waypoint_ahead(const Pose& pose, double distance, double heading) {
  if (!(distance > 0.0)) throw InvalidParameter("waypoint distance must be positive");
  return Pose2{pose.position.x() + distance * std::cos(heading),
               pose.position.y() + distance * std::sin(heading), heading};
}

void save_path(const std::filesystem::path& file, const PlannedPath& path) {
  nlohmann::ordered_json j;
  j["waypoints"] = nlohmann::ordered_json::array();
  for (const auto& p : path.waypoints) j["waypoints"].push_back({p.x(), p.y()});
  j["cost"] = path.total_cost;
  j["length"] = path.length;
  j["goal_yaw"] = path.goal_yaw;
  std::ofstream out(file);
  if (!out) throw InputError("cannot write path " + file.string());
  out << j.dump(2) << '\n';
}

}  // namespace travkit
