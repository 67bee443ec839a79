#pragma once

#include <cstdint>
#include <vector>

#include "streampipe/stream.hpp"

namespace streampipe {

// Segments are half-open [start_ms, end_ms); a record exactly on a boundary
// belongs to the later segment, so segments tile the stream.
struct TimeSegment {
  int index = 0;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  bool partial = false;  // final segment of a stream whose length is not a multiple of tau
};

std::int64_t segment_length_ms(double tau_minutes);

// floor(timestamp / (tau * 60000)).
int assign_segment(std::int64_t timestamp_ms, double tau_minutes);

// Tiles [0, duration_ms) with equal segments; the trailing remainder, if any,
// becomes a shorter segment flagged partial.
std::vector<TimeSegment> make_segments(std::int64_t duration_ms, double tau_minutes);

// Record indices per segment, in stream order.
std::vector<std::vector<int>> segment_records(const std::vector<CropRecord>& records,
                                              const std::vector<TimeSegment>& segments);

// Bounded retention buffer for memory-mode experiments. Single-writer
// (collection) / single-reader (selection): ownership of a completed
// segment's indices transfers at the segment boundary via push_segment.
class MemoryBuffer {
 public:
  MemoryBuffer(double retention_minutes, std::int64_t segment_len_ms);

  void push_segment(int segment, const std::vector<int>& record_indices,
                    const std::vector<CropRecord>& records);

  // All retained record indices usable at segment t: every record from
  // segments eta <= t whose age at the segment-t boundary is within
  // retention. Standard mode is the degenerate view {eta = t}.
  std::vector<int> view(int segment) const;

  double retention_minutes() const { return retention_minutes_; }

 private:
  double retention_minutes_;
  std::int64_t segment_len_ms_;
  std::vector<std::pair<int, std::int64_t>> entries_;  // (record index, timestamp)
};

}  // namespace streampipe
