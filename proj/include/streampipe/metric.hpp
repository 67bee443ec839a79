#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>

namespace streampipe {

// One metric is used everywhere downstream (selection, clustering, matching).
// Features are L2-normalized first, so euclidean distance is monotone in
// cosine distance; both are offered as a configuration choice.
enum class Metric { euclidean, cosine };

inline double squared_euclidean(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

inline double distance(std::span<const double> a, std::span<const double> b, Metric metric) {
  if (a.size() != b.size()) throw std::invalid_argument("distance: dimension mismatch");
  switch (metric) {
    case Metric::euclidean:
      return std::sqrt(squared_euclidean(a, b));
    case Metric::cosine: {
      double dot = 0.0, na = 0.0, nb = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
      }
      const double denom = std::sqrt(na) * std::sqrt(nb);
      if (denom <= 0.0) throw std::invalid_argument("cosine distance: zero-norm vector");
      return 1.0 - dot / denom;
    }
  }
  throw std::logic_error("unknown metric");
}

inline Metric metric_from_string(const std::string& name) {
  if (name == "euclidean") return Metric::euclidean;
  if (name == "cosine") return Metric::cosine;
  throw std::invalid_argument("unknown metric: " + name);
}

inline const char* to_string(Metric metric) {
  return metric == Metric::euclidean ? "euclidean" : "cosine";
}

}  // namespace streampipe
