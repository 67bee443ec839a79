#include "streampipe/budget.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace streampipe {

std::int64_t CropCounts::total() const {
  return std::accumulate(n.begin(), n.end(), std::int64_t{0});
}

std::int64_t BudgetMatrix::segment_total(int segment) const {
  std::int64_t sum = 0;
  for (int i = 0; i < num_cameras; ++i) sum += at(i, segment);
  return sum;
}

std::vector<std::int64_t> BudgetMatrix::segment_column(int segment) const {
  std::vector<std::int64_t> column(num_cameras);
  for (int i = 0; i < num_cameras; ++i) column[i] = at(i, segment);
  return column;
}

std::int64_t subset_size(std::int64_t instances_per_identity, std::int64_t num_identities) {
  if (instances_per_identity < 1) throw std::invalid_argument("K must be >= 1");
  if (num_identities < 1) throw std::invalid_argument("num_identities must be >= 1");
  return instances_per_identity * num_identities;
}

std::vector<std::int64_t> round_conserving(const std::vector<double>& fractional,
                                           std::int64_t target) {
  double sum = 0.0;
  for (double f : fractional) {
    if (f < 0.0) throw std::invalid_argument("round_conserving: negative fraction");
    sum += f;
  }
  if (std::abs(sum - static_cast<double>(target)) > 1e-6)
    throw std::invalid_argument("round_conserving: fractions do not sum to target");

  std::vector<std::int64_t> out(fractional.size());
  std::vector<std::pair<double, std::size_t>> remainders(fractional.size());
  std::int64_t floored = 0;
  for (std::size_t i = 0; i < fractional.size(); ++i) {
    out[i] = static_cast<std::int64_t>(std::floor(fractional[i]));
    floored += out[i];
    remainders[i] = {fractional[i] - static_cast<double>(out[i]), i};
  }
  std::int64_t deficit = target - floored;
  // Largest remainder first; equal remainders resolve to the lowest index.
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; deficit > 0 && r < remainders.size(); ++r) {
    ++out[remainders[r].second];
    --deficit;
  }
  if (deficit != 0) throw std::logic_error("round_conserving: rounding failed to converge");
  return out;
}

namespace {

BudgetMatrix standard_fractional(const CropCounts& counts, std::int64_t k) {
  if (counts.total() <= 0) throw std::invalid_argument("budget: total crop count N must be > 0");
  if (k < 0) throw std::invalid_argument("budget: k must be >= 0");
  BudgetMatrix m;
  m.num_cameras = counts.num_cameras;
  m.num_segments = counts.num_segments;
  m.mode = BudgetMode::standard;
  const double total = static_cast<double>(counts.total());
  m.fractional.resize(counts.n.size());
  for (std::size_t c = 0; c < counts.n.size(); ++c)
    m.fractional[c] = static_cast<double>(k) * static_cast<double>(counts.n[c]) / total;
  return m;
}

}  // namespace

BudgetMatrix budget_standard(const CropCounts& counts, std::int64_t k) {
  BudgetMatrix m = standard_fractional(counts, k);
  m.b = round_conserving(m.fractional, k);
  return m;
}

BudgetMatrix budget_memory(const CropCounts& counts, std::int64_t k) {
  BudgetMatrix standard = budget_standard(counts, k);
  BudgetMatrix m;
  m.num_cameras = counts.num_cameras;
  m.num_segments = counts.num_segments;
  m.mode = BudgetMode::memory;
  m.b.resize(counts.n.size());
  m.fractional.resize(counts.n.size());
  for (int i = 0; i < counts.num_cameras; ++i) {
    std::int64_t cum_b = 0;
    double cum_f = 0.0;
    for (int t = 0; t < counts.num_segments; ++t) {
      cum_b += standard.at(i, t);
      cum_f += standard.fractional_at(i, t);
      const auto cell = static_cast<std::size_t>(i) * counts.num_segments + t;
      m.b[cell] = cum_b;
      m.fractional[cell] = cum_f;
    }
  }
  return m;
}

BudgetMatrix budget_standard_causal(const CropCounts& counts, std::int64_t k) {
  if (counts.total() <= 0) throw std::invalid_argument("budget: total crop count N must be > 0");
  BudgetMatrix m;
  m.num_cameras = counts.num_cameras;
  m.num_segments = counts.num_segments;
  m.mode = BudgetMode::standard;
  m.b.assign(counts.n.size(), 0);
  m.fractional.assign(counts.n.size(), 0.0);

  // Equal per-segment share of k, then within each segment split across
  // cameras by that segment's own counts. Nothing here depends on future
  // segments.
  const int T = counts.num_segments;
  std::vector<double> share_frac(T, static_cast<double>(k) / T);
  const std::vector<std::int64_t> share = round_conserving(share_frac, k);

  for (int t = 0; t < T; ++t) {
    std::int64_t seg_count = 0;
    for (int i = 0; i < counts.num_cameras; ++i) seg_count += counts.at(i, t);
    if (seg_count == 0) continue;  // empty segment: its share is unfillable, reported as shortfall downstream
    std::vector<double> frac(counts.num_cameras);
    for (int i = 0; i < counts.num_cameras; ++i)
      frac[i] = static_cast<double>(share[t]) * static_cast<double>(counts.at(i, t)) /
                static_cast<double>(seg_count);
    const auto column = round_conserving(frac, share[t]);
    for (int i = 0; i < counts.num_cameras; ++i) {
      const auto cell = static_cast<std::size_t>(i) * T + t;
      m.b[cell] = column[i];
      m.fractional[cell] = frac[i];
    }
  }
  return m;
}

BudgetMatrix budget_memory_causal(const CropCounts& counts, std::int64_t k) {
  BudgetMatrix standard = budget_standard_causal(counts, k);
  BudgetMatrix m;
  m.num_cameras = counts.num_cameras;
  m.num_segments = counts.num_segments;
  m.mode = BudgetMode::memory;
  m.b.resize(counts.n.size());
  m.fractional.resize(counts.n.size());
  for (int i = 0; i < counts.num_cameras; ++i) {
    std::int64_t cum_b = 0;
    double cum_f = 0.0;
    for (int t = 0; t < counts.num_segments; ++t) {
      cum_b += standard.at(i, t);
      cum_f += standard.fractional_at(i, t);
      const auto cell = static_cast<std::size_t>(i) * counts.num_segments + t;
      m.b[cell] = cum_b;
      m.fractional[cell] = cum_f;
    }
  }
  return m;
}

ClampResult clamp_to_available(const BudgetMatrix& budgets, const CropCounts& available,
                               bool redistribute) {
  if (budgets.num_cameras != available.num_cameras ||
      budgets.num_segments != available.num_segments)
    throw std::invalid_argument("clamp_to_available: shape mismatch");

  ClampResult result;
  result.adjusted = budgets;
  result.shortfall.assign(budgets.b.size(), 0);

  for (int t = 0; t < budgets.num_segments; ++t) {
    std::vector<std::int64_t> original_short(budgets.num_cameras, 0);
    std::int64_t seg_shortfall = 0;
    for (int i = 0; i < budgets.num_cameras; ++i) {
      const auto cell = static_cast<std::size_t>(i) * budgets.num_segments + t;
      const std::int64_t avail = available.at(i, t);
      if (result.adjusted.b[cell] > avail) {
        original_short[i] = result.adjusted.b[cell] - avail;
        seg_shortfall += original_short[i];
        result.adjusted.b[cell] = avail;
      }
    }
    if (redistribute && seg_shortfall > 0) {
      // Spread the missing crops over same-segment cameras that still have
      // headroom, proportionally to their slack; iterate because a camera's
      // share can exceed its own slack.
      while (seg_shortfall > 0) {
        std::vector<double> slack(budgets.num_cameras, 0.0);
        double slack_total = 0.0;
        for (int i = 0; i < budgets.num_cameras; ++i) {
          const auto cell = static_cast<std::size_t>(i) * budgets.num_segments + t;
          slack[i] = static_cast<double>(available.at(i, t) - result.adjusted.b[cell]);
          slack_total += slack[i];
        }
        if (slack_total <= 0.0) break;
        const std::int64_t grant =
            std::min(seg_shortfall, static_cast<std::int64_t>(slack_total));
        std::vector<double> frac(budgets.num_cameras);
        for (int i = 0; i < budgets.num_cameras; ++i)
          frac[i] = static_cast<double>(grant) * slack[i] / slack_total;
        auto extra = round_conserving(frac, grant);
        std::int64_t placed = 0;
        for (int i = 0; i < budgets.num_cameras; ++i) {
          const auto cell = static_cast<std::size_t>(i) * budgets.num_segments + t;
          const std::int64_t take =
              std::min(extra[i], available.at(i, t) - result.adjusted.b[cell]);
          result.adjusted.b[cell] += take;
          placed += take;
        }
        seg_shortfall -= placed;
        if (placed == 0) break;
      }
    }
    // Remaining unmet demand, attributed to the originally over-budget cells
    // (all of it when redistribution is off, the unplaced remainder when on).
    if (seg_shortfall > 0) {
      std::int64_t orig_total = 0;
      for (auto s : original_short) orig_total += s;
      std::vector<double> frac(budgets.num_cameras, 0.0);
      for (int i = 0; i < budgets.num_cameras; ++i)
        frac[i] = static_cast<double>(seg_shortfall) * static_cast<double>(original_short[i]) /
                  static_cast<double>(orig_total);
      const auto attributed = round_conserving(frac, seg_shortfall);
      for (int i = 0; i < budgets.num_cameras; ++i) {
        const auto cell = static_cast<std::size_t>(i) * budgets.num_segments + t;
        result.shortfall[cell] = attributed[i];
      }
    }
  }
  result.shortfall_total = std::accumulate(result.shortfall.begin(), result.shortfall.end(),
                                           std::int64_t{0});
  return result;
}

}  // namespace streampipe
