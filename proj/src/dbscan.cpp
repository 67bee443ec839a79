#include "streampipe/dbscan.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <stdexcept>

namespace streampipe {

ClusterLabels dbscan(const std::vector<std::vector<double>>& points, double eps, int min_pts,
                     Metric metric) {
  if (eps <= 0.0) throw std::invalid_argument("dbscan: eps must be > 0");
  if (min_pts < 1) throw std::invalid_argument("dbscan: min_pts must be >= 1");

  const auto n = points.size();
  ClusterLabels result;
  result.eps = eps;
  result.min_pts = min_pts;
  result.metric = metric;
  result.labels.assign(n, kNoiseLabel);
  if (n == 0) return result;

  // Adjacency once, each pair evaluated a single time. Squared comparison
  // avoids the sqrt on the euclidean path. Every point neighbors itself.
  std::vector<std::vector<int>> neighbors(n);
  for (std::size_t i = 0; i < n; ++i) neighbors[i].push_back(static_cast<int>(i));
  if (metric == Metric::euclidean) {
    const double eps_sq = eps * eps;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (squared_euclidean(points[i], points[j]) <= eps_sq) {
          neighbors[i].push_back(static_cast<int>(j));
          neighbors[j].push_back(static_cast<int>(i));
        }
      }
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (distance(points[i], points[j], metric) <= eps) {
          neighbors[i].push_back(static_cast<int>(j));
          neighbors[j].push_back(static_cast<int>(i));
        }
      }
    }
  }
  // Self-neighbor entry was appended first, so each list needs sorting to
  // keep index-ordered expansion.
  for (auto& list : neighbors) std::sort(list.begin(), list.end());

  constexpr int kUnvisited = -2;
  std::vector<int> labels(n, kUnvisited);
  int next_cluster = 0;
  for (std::size_t p = 0; p < n; ++p) {
    if (labels[p] != kUnvisited) continue;
    if (static_cast<int>(neighbors[p].size()) < min_pts) {
      labels[p] = kNoiseLabel;
      continue;
    }
    const int cluster = next_cluster++;
    labels[p] = cluster;
    std::deque<int> seeds(neighbors[p].begin(), neighbors[p].end());
    while (!seeds.empty()) {
      const int q = seeds.front();
      seeds.pop_front();
      if (labels[q] == kNoiseLabel) labels[q] = cluster;  // border point, first cluster claims it
      if (labels[q] != kUnvisited) continue;
      labels[q] = cluster;
      if (static_cast<int>(neighbors[q].size()) >= min_pts)
        seeds.insert(seeds.end(), neighbors[q].begin(), neighbors[q].end());
    }
  }

  result.labels.assign(labels.begin(), labels.end());
  result.num_clusters = next_cluster;
  return result;
}

double cluster_purity(const ClusterLabels& labels, const std::vector<int>& gt_identities) {
  if (labels.labels.size() != gt_identities.size())
    throw std::invalid_argument("cluster_purity: label/gt size mismatch");
  std::map<int, std::map<int, std::int64_t>> counts;  // cluster -> identity -> count
  std::int64_t non_noise = 0;
  for (std::size_t i = 0; i < labels.labels.size(); ++i) {
    if (labels.labels[i] == kNoiseLabel) continue;
    ++counts[labels.labels[i]][gt_identities[i]];
    ++non_noise;
  }
  if (non_noise == 0) throw std::invalid_argument("cluster_purity: no non-noise points");
  std::int64_t majority_sum = 0;
  for (const auto& [cluster, identities] : counts) {
    std::int64_t best = 0;
    for (const auto& [identity, count] : identities) best = std::max(best, count);
    majority_sum += best;
  }
  return static_cast<double>(majority_sum) / static_cast<double>(non_noise);
}

}  // namespace streampipe
