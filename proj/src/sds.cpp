#include "streampipe/sds.hpp"

#include <algorithm>
#include <chrono>
#include <future>
#include <limits>
#include <stdexcept>

namespace streampipe {

namespace {

double checked_distance(const std::vector<double>& a, const std::vector<double>& b,
                        Metric metric) {
  return distance(std::span<const double>(a), std::span<const double>(b), metric);
}

// n choose k with saturation, for the brute-force guard.
double combinations(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (std::int64_t i = 1; i <= k; ++i) {
    c *= static_cast<double>(n - k + i) / static_cast<double>(i);
    if (c > 1e18) return c;
  }
  return c;
}

}  // namespace

double min_pairwise_distance(const std::vector<std::vector<double>>& points, Metric metric) {
  if (points.size() < 2)
    throw std::invalid_argument("min_pairwise_distance: need at least 2 points");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j)
      best = std::min(best, checked_distance(points[i], points[j], metric));
  return best;
}

SubsetSelection greedy_kcenter(const std::vector<std::vector<double>>& points, std::int64_t k_sel,
                               Metric metric) {
  if (k_sel < 0) throw std::invalid_argument("greedy_kcenter: k_sel must be >= 0");
  const auto start = std::chrono::steady_clock::now();
  SubsetSelection sel;
  const auto n = static_cast<std::int64_t>(points.size());
  const std::int64_t target = std::min(k_sel, n);
  if (target == 0) {
    sel.wall_time_s = 0.0;
    return sel;
  }

  // Seed: farthest from the dataset mean, ties to the lowest index.
  const std::size_t dim = points.front().size();
  std::vector<double> mean(dim, 0.0);
  for (const auto& p : points) {
    if (p.size() != dim) throw std::invalid_argument("greedy_kcenter: ragged point set");
    for (std::size_t d = 0; d < dim; ++d) mean[d] += p[d];
  }
  for (auto& m : mean) m /= static_cast<double>(n);

  std::int64_t seed = 0;
  double seed_dist = -1.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double d = checked_distance(points[i], mean, metric);
    ++sel.distance_evals;
    if (d > seed_dist) {
      seed_dist = d;
      seed = i;
    }
  }

  std::vector<std::int64_t> selected;
  selected.reserve(target);
  selected.push_back(seed);
  std::vector<bool> is_selected(n, false);
  is_selected[seed] = true;
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  double objective = std::numeric_limits<double>::infinity();

  while (static_cast<std::int64_t>(selected.size()) < target) {
    const auto& last = points[selected.back()];
    std::int64_t next = -1;
    double next_dist = -1.0;
    for (std::int64_t i = 0; i < n; ++i) {
      if (is_selected[i]) continue;
      const double d = checked_distance(points[i], last, metric);
      ++sel.distance_evals;
      if (d < nearest[i]) nearest[i] = d;
      if (nearest[i] > next_dist) {
        next_dist = nearest[i];
        next = i;
      }
    }
    if (next < 0) break;
    // The new point's distance to its nearest selected neighbor realizes a
    // pair, and every pair is realized at one of these insertions, so the
    // running min equals the subset's min pairwise distance.
    objective = std::min(objective, next_dist);
    is_selected[next] = true;
    selected.push_back(next);
  }

  sel.indices.assign(selected.begin(), selected.end());
  std::sort(sel.indices.begin(), sel.indices.end());
  if (sel.indices.size() >= 2) sel.objective = objective;
  sel.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return sel;
}

SubsetSelection brute_force_dispersion(const std::vector<std::vector<double>>& points,
                                       std::int64_t k_sel, Metric metric) {
  const auto n = static_cast<std::int64_t>(points.size());
  if (k_sel < 0) throw std::invalid_argument("brute_force_dispersion: k_sel must be >= 0");
  const std::int64_t target = std::min(k_sel, n);
  if (combinations(n, target) > 1e6)
    throw std::invalid_argument("brute_force_dispersion: C(n, k_sel) exceeds the 10^6 guard");

  SubsetSelection sel;
  if (target == 0) return sel;
  if (target == n || target == 1) {
    sel.indices.resize(target);
    for (std::int64_t i = 0; i < target; ++i) sel.indices[i] = static_cast<int>(i);
    if (target >= 2) sel.objective = min_pairwise_distance(points, metric);
    return sel;
  }

  // Pairwise distances once, then lexicographic enumeration of index sets;
  // strict improvement keeps the lexicographically smallest optimum.
  std::vector<double> dist(static_cast<std::size_t>(n) * n, 0.0);
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = i + 1; j < n; ++j) {
      const double d = checked_distance(points[i], points[j], metric);
      dist[i * n + j] = d;
      dist[j * n + i] = d;
    }

  std::vector<std::int64_t> combo(target);
  for (std::int64_t i = 0; i < target; ++i) combo[i] = i;
  double best_objective = -1.0;
  std::vector<std::int64_t> best;
  while (true) {
    double objective = std::numeric_limits<double>::infinity();
    for (std::int64_t a = 0; a < target && objective > best_objective; ++a)
      for (std::int64_t b = a + 1; b < target; ++b)
        objective = std::min(objective, dist[combo[a] * n + combo[b]]);
    if (objective > best_objective) {
      best_objective = objective;
      best = combo;
    }
    // Next combination in lexicographic order.
    std::int64_t pos = target - 1;
    while (pos >= 0 && combo[pos] == n - target + pos) --pos;
    if (pos < 0) break;
    ++combo[pos];
    for (std::int64_t i = pos + 1; i < target; ++i) combo[i] = combo[i - 1] + 1;
  }

  sel.indices.assign(best.begin(), best.end());
  sel.objective = best_objective;
  return sel;
}

SubsetSelection per_camera_sds(const std::vector<CropRecord>& records,
                               const std::vector<std::vector<double>>& features,
                               const std::vector<int>& candidate_indices,
                               const std::vector<std::int64_t>& budgets_per_camera, Metric metric,
                               bool parallel) {
  const auto start = std::chrono::steady_clock::now();
  const int num_cameras = static_cast<int>(budgets_per_camera.size());
  std::vector<std::vector<int>> by_camera(num_cameras);
  for (int idx : candidate_indices) {
    const int cam = records[static_cast<std::size_t>(idx)].camera_id;
    if (cam < 0 || cam >= num_cameras)
      throw std::invalid_argument("per_camera_sds: camera_id outside budget range");
    by_camera[cam].push_back(idx);
  }

  auto select_camera = [&](int cam) {
    PerCameraSelection out;
    out.camera = cam;
    out.budget = budgets_per_camera[cam];
    out.available = static_cast<std::int64_t>(by_camera[cam].size());
    std::vector<std::vector<double>> pts;
    pts.reserve(by_camera[cam].size());
    for (int idx : by_camera[cam]) pts.push_back(features[static_cast<std::size_t>(idx)]);
    SubsetSelection local = greedy_kcenter(pts, budgets_per_camera[cam], metric);
    out.objective = local.objective;
    out.indices.reserve(local.indices.size());
    for (int local_idx : local.indices) out.indices.push_back(by_camera[cam][local_idx]);
    std::sort(out.indices.begin(), out.indices.end());
    return std::make_pair(out, local.distance_evals);
  };

  SubsetSelection combined;
  combined.per_camera.resize(num_cameras);
  if (parallel) {
    std::vector<std::future<std::pair<PerCameraSelection, std::int64_t>>> futures;
    futures.reserve(num_cameras);
    for (int cam = 0; cam < num_cameras; ++cam)
      futures.push_back(std::async(std::launch::async, select_camera, cam));
    for (int cam = 0; cam < num_cameras; ++cam) {
      auto [out, evals] = futures[cam].get();
      combined.per_camera[cam] = std::move(out);
      combined.distance_evals += evals;
    }
  } else {
    for (int cam = 0; cam < num_cameras; ++cam) {
      auto [out, evals] = select_camera(cam);
      combined.per_camera[cam] = std::move(out);
      combined.distance_evals += evals;
    }
  }

  for (const auto& cam_sel : combined.per_camera)
    combined.indices.insert(combined.indices.end(), cam_sel.indices.begin(),
                            cam_sel.indices.end());
  std::sort(combined.indices.begin(), combined.indices.end());

  if (combined.indices.size() >= 2) {
    std::vector<std::vector<double>> pts;
    pts.reserve(combined.indices.size());
    for (int idx : combined.indices) pts.push_back(features[static_cast<std::size_t>(idx)]);
    combined.objective = min_pairwise_distance(pts, metric);
  }
  combined.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return combined;
}

}  // namespace streampipe
