#include "streampipe/filter.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <utility>

namespace streampipe {

void FilterConfig::validate() const {
  if (iou_reject_threshold < 0.0 || iou_reject_threshold > 1.0)
    throw std::invalid_argument("iou_reject_threshold must be in [0,1]");
  if (min_keypoints < 0 || min_keypoints > kNumKeypoints)
    throw std::invalid_argument("min_keypoints must be in [0,17]");
  if (min_kp_confidence < 0.0 || min_kp_confidence > 1.0)
    throw std::invalid_argument("min_kp_confidence must be in [0,1]");
  if (sample_every_n_frames < 1)
    throw std::invalid_argument("sample_every_n_frames must be >= 1");
}

double iou(const BBox& a, const BBox& b) {
  if (a.w <= 0.0 || a.h <= 0.0 || b.w <= 0.0 || b.h <= 0.0)
    throw std::invalid_argument("iou: boxes need w > 0 and h > 0");
  const double iw = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
  if (iw <= 0.0) return 0.0;
  const double ih = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
  if (ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.w * a.h + b.w * b.h - inter);
}

namespace {

// Marks the losers of overlapping pairs. Default: both crops of a pair are
// tainted. With keep-larger, only the smaller box is dropped (equal areas
// drop both).
void mark_overlaps(const std::vector<const BBox*>& boxes, const FilterConfig& cfg,
                   std::vector<bool>& drop) {
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    for (std::size_t j = i + 1; j < boxes.size(); ++j) {
      if (iou(*boxes[i], *boxes[j]) < cfg.iou_reject_threshold) continue;
      if (!cfg.overlap_keep_larger) {
        drop[i] = true;
        drop[j] = true;
        continue;
      }
      const double area_i = boxes[i]->w * boxes[i]->h;
      const double area_j = boxes[j]->w * boxes[j]->h;
      if (area_i > area_j)
        drop[j] = true;
      else if (area_j > area_i)
        drop[i] = true;
      else {
        drop[i] = true;
        drop[j] = true;
      }
    }
  }
}

}  // namespace

std::vector<CropRecord> overlap_filter(const std::vector<CropRecord>& frame_crops,
                                       const FilterConfig& cfg) {
  if (frame_crops.empty()) return {};
  for (const auto& crop : frame_crops) {
    if (crop.frame_index != frame_crops.front().frame_index ||
        crop.camera_id != frame_crops.front().camera_id)
      throw std::invalid_argument("overlap_filter: crops must share frame and camera");
  }
  std::vector<const BBox*> boxes;
  boxes.reserve(frame_crops.size());
  for (const auto& crop : frame_crops) boxes.push_back(&crop.bbox);
  std::vector<bool> drop(frame_crops.size(), false);
  mark_overlaps(boxes, cfg, drop);
  std::vector<CropRecord> kept;
  kept.reserve(frame_crops.size());
  for (std::size_t i = 0; i < frame_crops.size(); ++i)
    if (!drop[i]) kept.push_back(frame_crops[i]);
  return kept;
}

bool pose_pass(const CropRecord& crop, const FilterConfig& cfg) {
  int confident = 0;
  for (const auto& kp : crop.keypoints)
    if (kp.confidence >= cfg.min_kp_confidence) ++confident;
  return confident >= cfg.min_keypoints;
}

std::vector<CropRecord> sample_frames(const std::vector<CropRecord>& records,
                                      const FilterConfig& cfg) {
  std::vector<CropRecord> kept;
  for (const auto& rec : records)
    if (rec.frame_index % cfg.sample_every_n_frames == 0) kept.push_back(rec);
  return kept;
}

namespace {

// Overlap rejection needs the crops of one (camera, frame) together. Group
// indices per (camera, frame), mark mutual overlaps, emit survivors in the
// original stream order.
std::vector<int> overlap_survivors(const std::vector<CropRecord>& records,
                                   const FilterConfig& cfg) {
  std::map<std::pair<int, std::int64_t>, std::vector<int>> groups;
  for (std::size_t i = 0; i < records.size(); ++i)
    groups[{records[i].camera_id, records[i].frame_index}].push_back(static_cast<int>(i));

  std::vector<bool> drop(records.size(), false);
  for (const auto& [key, members] : groups) {
    std::vector<const BBox*> boxes;
    boxes.reserve(members.size());
    for (int m : members) boxes.push_back(&records[static_cast<std::size_t>(m)].bbox);
    std::vector<bool> group_drop(members.size(), false);
    mark_overlaps(boxes, cfg, group_drop);
    for (std::size_t m = 0; m < members.size(); ++m)
      if (group_drop[m]) drop[static_cast<std::size_t>(members[m])] = true;
  }
  std::vector<int> kept;
  kept.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i)
    if (!drop[i]) kept.push_back(static_cast<int>(i));
  return kept;
}

std::vector<CropRecord> gather(const std::vector<CropRecord>& records,
                               const std::vector<int>& indices) {
  std::vector<CropRecord> out;
  out.reserve(indices.size());
  for (int i : indices) out.push_back(records[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace

std::vector<int> collection_path_indices(const std::vector<CropRecord>& records,
                                         const FilterConfig& cfg) {
  cfg.validate();
  std::vector<int> kept;
  for (int i : overlap_survivors(records, cfg)) {
    const auto& rec = records[static_cast<std::size_t>(i)];
    if (!pose_pass(rec, cfg)) continue;
    if (rec.frame_index % cfg.sample_every_n_frames != 0) continue;
    kept.push_back(i);
  }
  return kept;
}

std::vector<int> reid_path_indices(const std::vector<CropRecord>& records,
                                   const FilterConfig& cfg) {
  cfg.validate();
  if (!cfg.filter_reid_path) {
    std::vector<int> all(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) all[i] = static_cast<int>(i);
    return all;
  }
  std::vector<int> kept;
  for (int i : overlap_survivors(records, cfg))
    if (pose_pass(records[static_cast<std::size_t>(i)], cfg)) kept.push_back(i);
  return kept;
}

std::vector<CropRecord> apply_filters(const std::vector<CropRecord>& records,
                                      const FilterConfig& cfg) {
  return gather(records, collection_path_indices(records, cfg));
}

std::vector<CropRecord> apply_filters_reid(const std::vector<CropRecord>& records,
                                           const FilterConfig& cfg) {
  return gather(records, reid_path_indices(records, cfg));
}

}  // namespace streampipe
