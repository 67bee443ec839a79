#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "streampipe/metric.hpp"
#include "streampipe/stream.hpp"

namespace streampipe {

// Result of subset distribution selection over one point set (or the
// combined per-camera union).
struct PerCameraSelection {
  int camera = 0;
  std::vector<int> indices;  // ascending, into the caller's record set
  std::optional<double> objective;
  std::int64_t budget = 0;
  std::int64_t available = 0;
};

struct SubsetSelection {
  std::vector<int> indices;  // ascending, unique; |indices| = min(k_sel, n)
  std::optional<double> objective;  // min pairwise distance within the subset
  std::int64_t distance_evals = 0;
  double wall_time_s = 0.0;
  std::vector<PerCameraSelection> per_camera;
};

// Greedy farthest-first traversal: seed with the point farthest from the
// dataset mean, then repeatedly add the point whose distance to its nearest
// selected point is largest. Ties break to the lowest index; the result is
// deterministic. O(n * k_sel) distance evaluations, O(n) memory.
SubsetSelection greedy_kcenter(const std::vector<std::vector<double>>& points, std::int64_t k_sel,
                               Metric metric);

// Min over all unordered pairs. Throws on fewer than 2 points.
double min_pairwise_distance(const std::vector<std::vector<double>>& points, Metric metric);

// Exhaustive max-min dispersion: the test oracle for the NP-hard problem.
// Guarded to C(n, k_sel) <= 10^6 combinations; ties resolve to the
// lexicographically smallest index set.
SubsetSelection brute_force_dispersion(const std::vector<std::vector<double>>& points,
                                       std::int64_t k_sel, Metric metric);

// Runs greedy_kcenter independently per camera with that camera's budget and
// combines the results. candidate_indices index into `records`/`features`;
// budgets are indexed by camera id. Per-camera tasks may run in parallel;
// the combined result is identical either way.
SubsetSelection per_camera_sds(const std::vector<CropRecord>& records,
                               const std::vector<std::vector<double>>& features,
                               const std::vector<int>& candidate_indices,
                               const std::vector<std::int64_t>& budgets_per_camera, Metric metric,
                               bool parallel = true);

}  // namespace streampipe
