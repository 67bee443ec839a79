#pragma once

#include <vector>

#include "streampipe/rng.hpp"
#include "streampipe/stream.hpp"

namespace streampipe::testutil {

// Random points with continuous coordinates; ties have measure zero, so the
// instances are in general position with probability one.
inline std::vector<std::vector<double>> random_points(Rng& rng, int n, int dim,
                                                      double scale = 10.0) {
  std::vector<std::vector<double>> pts(static_cast<std::size_t>(n));
  for (auto& p : pts) {
    p.resize(static_cast<std::size_t>(dim));
    for (auto& x : p) x = rng.uniform() * scale;
  }
  return pts;
}

inline CropRecord basic_record(int camera, std::int64_t frame, std::int64_t ts,
                               std::vector<double> feature) {
  CropRecord rec;
  rec.camera_id = camera;
  rec.frame_index = frame;
  rec.timestamp_ms = ts;
  rec.bbox = {0.0, 0.0, 50.0, 100.0};
  for (auto& kp : rec.keypoints) kp = {10.0, 10.0, 0.9};
  rec.feature = std::move(feature);
  return rec;
}

}  // namespace streampipe::testutil
