#include "streampipe/segment.hpp"

#include <cmath>
#include <stdexcept>

namespace streampipe {

std::int64_t segment_length_ms(double tau_minutes) {
  if (tau_minutes <= 0.0) throw std::invalid_argument("tau_minutes must be > 0");
  return static_cast<std::int64_t>(std::llround(tau_minutes * 60000.0));
}

int assign_segment(std::int64_t timestamp_ms, double tau_minutes) {
  if (timestamp_ms < 0) throw std::invalid_argument("timestamp must be >= 0");
  return static_cast<int>(timestamp_ms / segment_length_ms(tau_minutes));
}

std::vector<TimeSegment> make_segments(std::int64_t duration_ms, double tau_minutes) {
  const std::int64_t len = segment_length_ms(tau_minutes);
  if (duration_ms <= 0) throw std::invalid_argument("duration_ms must be > 0");
  std::vector<TimeSegment> segments;
  for (std::int64_t start = 0; start < duration_ms; start += len) {
    TimeSegment seg;
    seg.index = static_cast<int>(segments.size());
    seg.start_ms = start;
    seg.end_ms = std::min(start + len, duration_ms);
    seg.partial = seg.end_ms - seg.start_ms < len;
    segments.push_back(seg);
  }
  return segments;
}

std::vector<std::vector<int>> segment_records(const std::vector<CropRecord>& records,
                                              const std::vector<TimeSegment>& segments) {
  if (segments.empty()) throw std::invalid_argument("segment_records: no segments");
  const std::int64_t len = segments.front().end_ms - segments.front().start_ms;
  std::vector<std::vector<int>> by_segment(segments.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto t = static_cast<std::size_t>(records[i].timestamp_ms / len);
    if (t >= segments.size())
      throw std::out_of_range("segment_records: record timestamp beyond stream duration");
    by_segment[t].push_back(static_cast<int>(i));
  }
  return by_segment;
}

MemoryBuffer::MemoryBuffer(double retention_minutes, std::int64_t segment_len_ms)
    : retention_minutes_(retention_minutes), segment_len_ms_(segment_len_ms) {
  if (retention_minutes <= 0.0) throw std::invalid_argument("retention_minutes must be > 0");
  if (segment_len_ms <= 0) throw std::invalid_argument("segment_len_ms must be > 0");
}

void MemoryBuffer::push_segment(int segment, const std::vector<int>& record_indices,
                                const std::vector<CropRecord>& records) {
  (void)segment;
  for (int idx : record_indices)
    entries_.emplace_back(idx, records[static_cast<std::size_t>(idx)].timestamp_ms);
}

std::vector<int> MemoryBuffer::view(int segment) const {
  // Age is measured at the segment-t boundary, when the selection stage
  // takes over the data.
  const std::int64_t now = static_cast<std::int64_t>(segment + 1) * segment_len_ms_;
  const auto retention_ms = static_cast<std::int64_t>(std::llround(retention_minutes_ * 60000.0));
  std::vector<int> visible;
  for (const auto& [idx, ts] : entries_) {
    if (ts >= now) continue;  // future segments are not yet owned by the reader
    if (now - ts <= retention_ms) visible.push_back(idx);
  }
  return visible;
}

}  // namespace streampipe
