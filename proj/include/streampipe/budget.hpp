#pragma once

#include <cstdint>
#include <vector>

namespace streampipe {

// Matrix n[camera][segment] of filter-passing crop counts: the sole input to
// the budget computations.
struct CropCounts {
  int num_cameras = 0;
  int num_segments = 0;
  std::vector<std::int64_t> n;  // row-major [camera][segment]

  CropCounts() = default;
  CropCounts(int cameras, int segments)
      : num_cameras(cameras),
        num_segments(segments),
        n(static_cast<std::size_t>(cameras) * static_cast<std::size_t>(segments), 0) {}

  std::int64_t& at(int camera, int segment) {
    return n[static_cast<std::size_t>(camera) * num_segments + segment];
  }
  std::int64_t at(int camera, int segment) const {
    return n[static_cast<std::size_t>(camera) * num_segments + segment];
  }
  std::int64_t total() const;
};

enum class BudgetMode { standard, memory };

// Crop budgets b[camera][segment] plus the fractional solution they round.
struct BudgetMatrix {
  int num_cameras = 0;
  int num_segments = 0;
  BudgetMode mode = BudgetMode::standard;
  std::vector<std::int64_t> b;
  std::vector<double> fractional;

  std::int64_t at(int camera, int segment) const {
    return b[static_cast<std::size_t>(camera) * num_segments + segment];
  }
  double fractional_at(int camera, int segment) const {
    return fractional[static_cast<std::size_t>(camera) * num_segments + segment];
  }
  std::int64_t segment_total(int segment) const;
  std::vector<std::int64_t> segment_column(int segment) const;  // per camera
};

// k = K * num_identities (K = instances per identity).
std::int64_t subset_size(std::int64_t instances_per_identity, std::int64_t num_identities);

// Largest-remainder rounding of one group: result sums exactly to target,
// |b - f| < 1 elementwise, ties broken by lowest index. The fractional sum
// must already equal the target.
std::vector<std::int64_t> round_conserving(const std::vector<double>& fractional,
                                           std::int64_t target);

// Standard mode: b[i][t] rounds k * n[i][t] / N; the whole matrix sums to k.
BudgetMatrix budget_standard(const CropCounts& counts, std::int64_t k);

// Memory mode: b[i][t] is the size of the segment-t training subset drawn
// from the memory view, the running per-camera sum of the standard budgets;
// each camera row is non-decreasing and the final segment column sums to k.
//
// Two readings of the cumulative formula exist: summing b over ALL segments
// exceeds k whenever there is more than one segment, while the final
// segment's total equals k exactly. This implementation adopts the second
// reading (b[i][t] is a per-segment selection size, not a disjoint
// allocation), which is the one consistent with k crops being in play once
// the full stream has arrived.
BudgetMatrix budget_memory(const CropCounts& counts, std::int64_t k);

// Causal variants recompute proportions from data available at selection
// time only: each segment receives an equal share of k, split across cameras
// by that segment's counts. A live system can evaluate these at the segment
// boundary; the oracle variants above need the full-stream totals.
BudgetMatrix budget_standard_causal(const CropCounts& counts, std::int64_t k);
BudgetMatrix budget_memory_causal(const CropCounts& counts, std::int64_t k);

struct ClampResult {
  BudgetMatrix adjusted;
  std::vector<std::int64_t> shortfall;  // per cell, row-major
  std::int64_t shortfall_total = 0;
};

// b' = min(b, available) per cell. Shortfall is reported, not redistributed,
// unless `redistribute` spreads it proportionally over same-segment cameras
// with slack.
ClampResult clamp_to_available(const BudgetMatrix& budgets, const CropCounts& available,
                               bool redistribute = false);

}  // namespace streampipe
