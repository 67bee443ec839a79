#pragma once

#include <vector>

#include "streampipe/stream.hpp"

namespace streampipe {

// Crop/feature selection on the local node: overlap rejection, pose-quality
// gating, and frame subsampling on the crop-collection path.
struct FilterConfig {
  double iou_reject_threshold = 0.3;
  int min_keypoints = 15;
  double min_kp_confidence = 0.5;
  int sample_every_n_frames = 60;
  // The ReID/matching path is never frame-sampled; whether it also gets the
  // overlap and pose gates is switchable.
  bool filter_reid_path = true;
  // Default rejection drops BOTH members of an overlapping pair (the crops
  // taint each other); this keeps the larger box instead.
  bool overlap_keep_larger = false;

  void validate() const;
};

// Intersection over union of two boxes. Requires w, h > 0 on both.
double iou(const BBox& a, const BBox& b);

// Keeps a crop iff its IoU with every other crop in the same frame is below
// the threshold; both members of an overlapping pair are dropped. All inputs
// must share frame_index and camera_id.
std::vector<CropRecord> overlap_filter(const std::vector<CropRecord>& frame_crops,
                                       const FilterConfig& cfg);

// True iff at least min_keypoints keypoints have confidence >= the gate.
// Both comparisons are inclusive.
bool pose_pass(const CropRecord& crop, const FilterConfig& cfg);

// Keeps records with frame_index % sample_every_n_frames == 0.
std::vector<CropRecord> sample_frames(const std::vector<CropRecord>& records,
                                      const FilterConfig& cfg);

// Full collection-path pipeline: overlap -> pose -> frame sampling, applied
// per (camera, frame) group. Preserves input order; pure.
std::vector<CropRecord> apply_filters(const std::vector<CropRecord>& records,
                                      const FilterConfig& cfg);

// ReID-path variant: overlap + pose only (identity when filter_reid_path is
// off); never frame-sampled.
std::vector<CropRecord> apply_filters_reid(const std::vector<CropRecord>& records,
                                           const FilterConfig& cfg);

// Index-returning forms of the two paths, for callers that keep the record
// vector as the single owner.
std::vector<int> collection_path_indices(const std::vector<CropRecord>& records,
                                         const FilterConfig& cfg);
std::vector<int> reid_path_indices(const std::vector<CropRecord>& records,
                                   const FilterConfig& cfg);

}  // namespace streampipe
