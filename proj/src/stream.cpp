#include "streampipe/stream.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "streampipe/rng.hpp"

namespace streampipe {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

[[noreturn]] void fail_line(std::size_t line_no, const std::string& what) {
  throw std::runtime_error("line " + std::to_string(line_no) + ": " + what);
}

double require_finite(double v, std::size_t line_no, const char* field) {
  if (!std::isfinite(v)) fail_line(line_no, std::string("non-finite value in ") + field);
  return v;
}

CropRecord parse_record(const json& j, const StreamHeader& header, std::size_t line_no) {
  CropRecord rec;
  try {
    rec.frame_index = j.at("frame").get<std::int64_t>();
    rec.timestamp_ms = j.at("ts_ms").get<std::int64_t>();
    rec.camera_id = j.at("cam").get<int>();
    if (j.contains("track") && !j["track"].is_null()) rec.track_id = j["track"].get<int>();
    const auto& bbox = j.at("bbox");
    if (!bbox.is_array() || bbox.size() != 4) fail_line(line_no, "bbox must be [x,y,w,h]");
    rec.bbox = {require_finite(bbox[0].get<double>(), line_no, "bbox"),
                require_finite(bbox[1].get<double>(), line_no, "bbox"),
                require_finite(bbox[2].get<double>(), line_no, "bbox"),
                require_finite(bbox[3].get<double>(), line_no, "bbox")};
    const auto& kp = j.at("kp");
    if (!kp.is_array() || kp.size() != kNumKeypoints)
      fail_line(line_no, "expected " + std::to_string(kNumKeypoints) + " keypoints, got " +
                             std::to_string(kp.is_array() ? kp.size() : 0));
    for (int i = 0; i < kNumKeypoints; ++i) {
      const auto& triple = kp[i];
      if (!triple.is_array() || triple.size() != 3) fail_line(line_no, "keypoint must be [x,y,c]");
      rec.keypoints[i] = {require_finite(triple[0].get<double>(), line_no, "kp"),
                          require_finite(triple[1].get<double>(), line_no, "kp"),
                          require_finite(triple[2].get<double>(), line_no, "kp")};
    }
    const auto& feat = j.at("feat");
    if (!feat.is_array() ||
        static_cast<int>(feat.size()) != header.feature_dim)
      fail_line(line_no, "feature length " + std::to_string(feat.is_array() ? feat.size() : 0) +
                             " != header feature_dim " + std::to_string(header.feature_dim));
    rec.feature.reserve(feat.size());
    for (const auto& v : feat)
      rec.feature.push_back(require_finite(v.get<double>(), line_no, "feat"));
    if (j.contains("gt") && !j["gt"].is_null()) rec.gt_identity = j["gt"].get<int>();
  } catch (const json::exception& e) {
    fail_line(line_no, std::string("malformed record: ") + e.what());
  }

  if (rec.frame_index < 0) fail_line(line_no, "negative frame index");
  if (rec.timestamp_ms < 0) fail_line(line_no, "negative timestamp");
  if (rec.bbox.w <= 0.0 || rec.bbox.h <= 0.0) fail_line(line_no, "bbox needs w > 0 and h > 0");
  for (const auto& kp : rec.keypoints)
    if (kp.confidence < 0.0 || kp.confidence > 1.0)
      fail_line(line_no, "keypoint confidence outside [0,1]");
  if (rec.camera_id < 0 || rec.camera_id >= header.num_cameras)
    fail_line(line_no, "camera_id " + std::to_string(rec.camera_id) + " >= num_cameras " +
                           std::to_string(header.num_cameras));
  return rec;
}

}  // namespace

std::vector<double> normalize_feature(const std::vector<double>& v) {
  double norm_sq = 0.0;
  for (double x : v) {
    if (!std::isfinite(x)) throw std::invalid_argument("normalize_feature: non-finite component");
    norm_sq += x * x;
  }
  if (norm_sq <= 0.0) throw std::invalid_argument("normalize_feature: zero vector");
  const double inv = 1.0 / std::sqrt(norm_sq);
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] * inv;
  return out;
}

Stream parse_stream(std::istream& in) {
  Stream stream;
  std::string line;
  std::size_t line_no = 0;

  // Header line.
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty()) break;
  }
  if (line_no == 0 || line.empty()) throw std::runtime_error("line 1: missing stream header");
  try {
    const json j = json::parse(line);
    stream.header.num_cameras = j.at("num_cameras").get<int>();
    stream.header.feature_dim = j.at("feature_dim").get<int>();
    stream.header.fps = j.at("fps").get<double>();
    stream.header.duration_ms = j.at("duration_ms").get<std::int64_t>();
  } catch (const json::exception& e) {
    fail_line(line_no, std::string("malformed header: ") + e.what());
  }
  if (stream.header.num_cameras < 1) fail_line(line_no, "num_cameras must be >= 1");
  if (stream.header.feature_dim < 2) fail_line(line_no, "feature_dim must be >= 2");
  if (stream.header.fps <= 0.0) fail_line(line_no, "fps must be > 0");
  if (stream.header.duration_ms < 0) fail_line(line_no, "duration_ms must be >= 0");

  std::int64_t last_ts = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      fail_line(line_no, std::string("malformed record: ") + e.what());
    }
    CropRecord rec = parse_record(j, stream.header, line_no);
    if (rec.timestamp_ms < last_ts)
      fail_line(line_no, "timestamps not sorted (stream must be globally time-ordered)");
    if (rec.timestamp_ms >= stream.header.duration_ms)
      fail_line(line_no, "timestamp " + std::to_string(rec.timestamp_ms) +
                             " at or beyond header duration_ms " +
                             std::to_string(stream.header.duration_ms));
    last_ts = rec.timestamp_ms;
    stream.records.push_back(std::move(rec));
  }
  return stream;
}

Stream parse_stream_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open stream file: " + path.string());
  return parse_stream(in);
}

void serialize_stream(const Stream& stream, std::ostream& out) {
  ordered_json header;
  header["num_cameras"] = stream.header.num_cameras;
  header["feature_dim"] = stream.header.feature_dim;
  header["fps"] = stream.header.fps;
  header["duration_ms"] = stream.header.duration_ms;
  out << header.dump() << '\n';
  for (const auto& rec : stream.records) {
    ordered_json j;
    j["frame"] = rec.frame_index;
    j["ts_ms"] = rec.timestamp_ms;
    j["cam"] = rec.camera_id;
    if (rec.track_id) j["track"] = *rec.track_id;
    j["bbox"] = {rec.bbox.x, rec.bbox.y, rec.bbox.w, rec.bbox.h};
    ordered_json kp = ordered_json::array();
    for (const auto& p : rec.keypoints) kp.push_back({p.x, p.y, p.confidence});
    j["kp"] = std::move(kp);
    j["feat"] = rec.feature;
    if (rec.gt_identity) j["gt"] = *rec.gt_identity;
    out << j.dump() << '\n';
  }
}

void serialize_stream_file(const Stream& stream, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write stream file: " + path.string());
  serialize_stream(stream, out);
}

Stream merge_streams(std::vector<Stream> parts) {
  if (parts.empty()) throw std::invalid_argument("merge_streams: no streams given");
  Stream merged;
  merged.header = parts.front().header;
  for (const auto& part : parts) {
    if (part.header.feature_dim != merged.header.feature_dim)
      throw std::runtime_error("merge_streams: feature_dim mismatch between inputs");
    if (part.header.fps != merged.header.fps)
      throw std::runtime_error("merge_streams: fps mismatch between inputs");
    merged.header.num_cameras = std::max(merged.header.num_cameras, part.header.num_cameras);
    merged.header.duration_ms = std::max(merged.header.duration_ms, part.header.duration_ms);
  }
  std::size_t total = 0;
  for (const auto& part : parts) total += part.records.size();
  merged.records.reserve(total);
  for (auto& part : parts)
    std::move(part.records.begin(), part.records.end(), std::back_inserter(merged.records));
  std::stable_sort(merged.records.begin(), merged.records.end(),
                   [](const CropRecord& a, const CropRecord& b) {
                     return a.timestamp_ms < b.timestamp_ms;
                   });
  return merged;
}

void SynthSpec::validate() const {
  if (num_identities < 1) throw std::invalid_argument("num_identities must be >= 1");
  if (crops_per_identity_rate <= 0.0) throw std::invalid_argument("crops_per_identity_rate must be > 0");
  if (cluster_spread <= 0.0) throw std::invalid_argument("cluster_spread must be > 0");
  if (cluster_separation < 0.0) throw std::invalid_argument("cluster_separation must be >= 0");
  if (camera_weights.empty()) throw std::invalid_argument("camera_weights must be non-empty");
  double sum = 0.0;
  for (double w : camera_weights) {
    if (w < 0.0) throw std::invalid_argument("camera weights must be non-negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-6) throw std::invalid_argument("camera weights must sum to 1");
  if (noise_fraction < 0.0 || noise_fraction > 1.0)
    throw std::invalid_argument("noise_fraction must be in [0,1]");
  if (feature_dim < 2) throw std::invalid_argument("feature_dim must be >= 2");
  if (fps <= 0.0) throw std::invalid_argument("fps must be > 0");
  if (duration_ms <= 0) throw std::invalid_argument("duration_ms must be > 0");
}

Stream synth_stream(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.rng_seed);

  // Identity centroids: unit vectors rejection-sampled to honor the
  // separation floor. In high dimension random unit vectors are nearly
  // orthogonal, so a handful of attempts suffices for sane settings.
  std::vector<std::vector<double>> centroids;
  centroids.reserve(spec.num_identities);
  for (int id = 0; id < spec.num_identities; ++id) {
    bool placed = false;
    for (int attempt = 0; attempt < 20000 && !placed; ++attempt) {
      std::vector<double> c(spec.feature_dim);
      for (auto& x : c) x = rng.normal();
      c = normalize_feature(c);
      placed = true;
      for (const auto& other : centroids) {
        double d2 = 0.0;
        for (int i = 0; i < spec.feature_dim; ++i) {
          const double diff = c[i] - other[i];
          d2 += diff * diff;
        }
        if (d2 < spec.cluster_separation * spec.cluster_separation) {
          placed = false;
          break;
        }
      }
      if (placed) centroids.push_back(std::move(c));
    }
    if (!placed)
      throw std::runtime_error("synth_stream: cannot place identity centroids at separation " +
                               std::to_string(spec.cluster_separation));
  }

  const double minutes = static_cast<double>(spec.duration_ms) / 60000.0;
  const auto n_total = static_cast<std::int64_t>(
      std::llround(spec.num_identities * spec.crops_per_identity_rate * minutes));

  std::vector<std::int64_t> timestamps(n_total);
  for (auto& ts : timestamps) ts = rng.uniform_int(0, spec.duration_ms);
  std::sort(timestamps.begin(), timestamps.end());

  Stream stream;
  stream.header.num_cameras = static_cast<int>(spec.camera_weights.size());
  stream.header.feature_dim = spec.feature_dim;
  stream.header.fps = spec.fps;
  stream.header.duration_ms = spec.duration_ms;
  stream.records.reserve(n_total);

  // Crops in the same (camera, frame) get disjoint bbox slots so the
  // synthetic stream is overlap-free by construction.
  std::vector<std::int64_t> cam_last_frame(spec.camera_weights.size(), -1);
  std::vector<int> cam_slot(spec.camera_weights.size(), 0);

  for (std::int64_t n = 0; n < n_total; ++n) {
    CropRecord rec;
    rec.timestamp_ms = timestamps[n];
    rec.camera_id = rng.categorical(spec.camera_weights);
    rec.frame_index =
        static_cast<std::int64_t>(std::floor(static_cast<double>(rec.timestamp_ms) * spec.fps / 1000.0));
    const int identity = static_cast<int>(rng.uniform_int(0, spec.num_identities));
    const bool noise = rng.uniform() < spec.noise_fraction;
    rec.gt_identity = identity;
    rec.track_id = identity;

    std::vector<double> feat(spec.feature_dim);
    for (int i = 0; i < spec.feature_dim; ++i) {
      feat[i] = noise ? rng.normal() : centroids[identity][i] + spec.cluster_spread * rng.normal();
    }
    rec.feature = normalize_feature(feat);

    auto& last_frame = cam_last_frame[rec.camera_id];
    auto& slot = cam_slot[rec.camera_id];
    if (last_frame != rec.frame_index) {
      last_frame = rec.frame_index;
      slot = 0;
    }
    rec.bbox.w = 40.0 + 20.0 * rng.uniform();
    rec.bbox.h = 90.0 + 30.0 * rng.uniform();
    rec.bbox.x = 120.0 * slot;
    rec.bbox.y = 50.0 + 10.0 * rng.uniform();
    ++slot;

    for (auto& kp : rec.keypoints) {
      kp.x = rec.bbox.x + rng.uniform() * rec.bbox.w;
      kp.y = rec.bbox.y + rng.uniform() * rec.bbox.h;
      kp.confidence = noise ? 0.4 * rng.uniform() : 0.6 + 0.4 * rng.uniform();
    }
    stream.records.push_back(std::move(rec));
  }
  return stream;
}

}  // namespace streampipe
