#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace streampipe {

struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
};

struct Keypoint {
  double x = 0.0;
  double y = 0.0;
  double confidence = 0.0;  // in [0, 1]
};

inline constexpr int kNumKeypoints = 17;

// One detected person instance. Immutable after creation; safe to share
// across threads.
struct CropRecord {
  std::int64_t frame_index = 0;
  std::int64_t timestamp_ms = 0;
  int camera_id = 0;
  std::optional<int> track_id;
  BBox bbox;
  std::array<Keypoint, kNumKeypoints> keypoints{};
  std::vector<double> feature;
  std::optional<int> gt_identity;  // synthetic/test streams only
};

struct StreamHeader {
  int num_cameras = 1;
  int feature_dim = 64;
  double fps = 1.0;
  std::int64_t duration_ms = 0;
};

struct Stream {
  StreamHeader header;
  std::vector<CropRecord> records;  // sorted by timestamp_ms globally
};

// Parameters for the seeded synthetic stream generator. Each identity owns a
// Gaussian cluster in feature space; noise records get random features and
// low-confidence keypoints.
struct SynthSpec {
  int num_identities = 10;
  double crops_per_identity_rate = 75.0;  // expected crops per identity per minute
  double cluster_spread = 0.02;           // sigma of each identity cluster
  double cluster_separation = 1.2;        // min distance between identity centroids
  std::vector<double> camera_weights = std::vector<double>(8, 0.125);
  double noise_fraction = 0.0;
  std::uint64_t rng_seed = 1;
  int feature_dim = 64;
  double fps = 1.0;
  std::int64_t duration_ms = 3600000;

  void validate() const;  // throws std::invalid_argument on bad fields
};

// v / ||v||_2. Throws std::invalid_argument on a zero (or non-finite) vector.
std::vector<double> normalize_feature(const std::vector<double>& v);

// Reads the line-delimited stream format: first line is the header object,
// each following line one record object. Errors name the offending line.
Stream parse_stream(std::istream& in);
Stream parse_stream_file(const std::filesystem::path& path);

void serialize_stream(const Stream& stream, std::ostream& out);
void serialize_stream_file(const Stream& stream, const std::filesystem::path& path);

// Merge-sorts several per-camera (or per-shard) streams into one, keeping the
// global timestamp order. Headers must agree on feature_dim and fps.
Stream merge_streams(std::vector<Stream> parts);

// Deterministic for a fixed rng_seed: identical spec -> byte-identical stream.
Stream synth_stream(const SynthSpec& spec);

}  // namespace streampipe
