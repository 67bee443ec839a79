#pragma once

#include <cstdint>
#include <vector>

#include "streampipe/metric.hpp"

namespace streampipe {

inline constexpr int kNoiseLabel = -1;

struct ClusterLabels {
  std::vector<int> labels;  // cluster id >= 0, or kNoiseLabel
  int num_clusters = 0;
  double eps = 0.0;
  int min_pts = 0;
  Metric metric = Metric::euclidean;
};

// Density-based clustering. A point is core iff it has >= min_pts neighbors
// within eps (inclusive, counting itself); clusters are maximal
// density-connected sets; border points join the first core cluster that
// reaches them in index order, so partitions are reproducible.
//
// Neighborhoods are precomputed pairwise (each pair evaluated once, squared
// distances for the euclidean metric), which is what makes this the fast
// path relative to the naive reference.
ClusterLabels dbscan(const std::vector<std::vector<double>>& points, double eps, int min_pts,
                     Metric metric);

// Sum over clusters of the majority identity count, divided by the number of
// non-noise points. 1.0 iff every cluster is single-identity. Throws when no
// point is clustered.
double cluster_purity(const ClusterLabels& labels, const std::vector<int>& gt_identities);

}  // namespace streampipe
