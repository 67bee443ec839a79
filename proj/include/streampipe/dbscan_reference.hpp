#pragma once

#include <vector>

#include "streampipe/dbscan.hpp"
#include "streampipe/metric.hpp"

namespace streampipe {

// Naive textbook DBSCAN used as the correctness oracle: on-demand O(n) range
// queries, full metric distance per pair, same index-ordered expansion rule.
// Kept algorithmically independent of the main implementation.
ClusterLabels dbscan_reference(const std::vector<std::vector<double>>& points, double eps,
                               int min_pts, Metric metric);

// True iff two labelings induce the same partition of non-noise points and
// agree on which points are noise (cluster ids may differ).
bool same_partition(const ClusterLabels& a, const ClusterLabels& b);

}  // namespace streampipe
