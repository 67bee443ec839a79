#include "streampipe/dbscan_reference.hpp"

#include <deque>
#include <map>
#include <stdexcept>

namespace streampipe {

namespace {

std::deque<int> range_query(const std::vector<std::vector<double>>& points, int center,
                            double eps, Metric metric) {
  std::deque<int> found;
  for (std::size_t i = 0; i < points.size(); ++i)
    if (distance(points[static_cast<std::size_t>(center)], points[i], metric) <= eps)
      found.push_back(static_cast<int>(i));
  return found;
}

}  // namespace

ClusterLabels dbscan_reference(const std::vector<std::vector<double>>& points, double eps,
                               int min_pts, Metric metric) {
  if (eps <= 0.0) throw std::invalid_argument("dbscan_reference: eps must be > 0");
  if (min_pts < 1) throw std::invalid_argument("dbscan_reference: min_pts must be >= 1");

  constexpr int kUnvisited = -2;
  const auto n = points.size();
  std::vector<int> labels(n, kUnvisited);
  int next_cluster = 0;
  for (std::size_t p = 0; p < n; ++p) {
    if (labels[p] != kUnvisited) continue;
    std::deque<int> seeds = range_query(points, static_cast<int>(p), eps, metric);
    if (static_cast<int>(seeds.size()) < min_pts) {
      labels[p] = kNoiseLabel;
      continue;
    }
    const int cluster = next_cluster++;
    labels[p] = cluster;
    while (!seeds.empty()) {
      const int q = seeds.front();
      seeds.pop_front();
      if (labels[q] == kNoiseLabel) labels[q] = cluster;
      if (labels[q] != kUnvisited) continue;
      labels[q] = cluster;
      auto more = range_query(points, q, eps, metric);
      if (static_cast<int>(more.size()) >= min_pts)
        seeds.insert(seeds.end(), more.begin(), more.end());
    }
  }

  ClusterLabels result;
  result.labels = std::move(labels);
  result.num_clusters = next_cluster;
  result.eps = eps;
  result.min_pts = min_pts;
  result.metric = metric;
  return result;
}

bool same_partition(const ClusterLabels& a, const ClusterLabels& b) {
  if (a.labels.size() != b.labels.size()) return false;
  std::map<int, int> a_to_b;
  std::map<int, int> b_to_a;
  for (std::size_t i = 0; i < a.labels.size(); ++i) {
    const int la = a.labels[i];
    const int lb = b.labels[i];
    if ((la == kNoiseLabel) != (lb == kNoiseLabel)) return false;
    if (la == kNoiseLabel) continue;
    auto [it_ab, fresh_ab] = a_to_b.try_emplace(la, lb);
    if (!fresh_ab && it_ab->second != lb) return false;
    auto [it_ba, fresh_ba] = b_to_a.try_emplace(lb, la);
    if (!fresh_ba && it_ba->second != la) return false;
  }
  return true;
}

}  // namespace streampipe
