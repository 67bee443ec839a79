#include "streampipe/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "streampipe/dbscan.hpp"
#include "streampipe/segment.hpp"

namespace streampipe {

using ordered_json = nlohmann::ordered_json;

void CostModel::validate() const {
  for (double c : {sds_fixed_s, sds_cost_per_pair_s, train_fixed_s, train_cost_per_iteration_s,
                   train_cost_per_crop_s})
    if (c < 0.0 || !std::isfinite(c))
      throw std::invalid_argument("cost model coefficients must be finite and >= 0");
}

double CostModel::sds_duration_s(std::int64_t sds_input, std::int64_t distance_evals) const {
  if (sds_input <= 0) return 0.0;
  return sds_fixed_s + sds_cost_per_pair_s * static_cast<double>(distance_evals);
}

double CostModel::train_duration_s(std::int64_t epochs, std::int64_t iterations,
                                   std::int64_t subset_size) const {
  if (subset_size <= 0) return 0.0;
  return train_fixed_s +
         train_cost_per_iteration_s * static_cast<double>(epochs) *
             static_cast<double>(iterations) +
         train_cost_per_crop_s * static_cast<double>(subset_size);
}

CostModel CostModel::from_key_values(const KeyValues& kv) {
  CostModel m;
  m.sds_fixed_s = kv_double(kv, "sds_fixed_s", m.sds_fixed_s);
  m.sds_cost_per_pair_s = kv_double(kv, "sds_cost_per_pair_s", m.sds_cost_per_pair_s);
  m.train_fixed_s = kv_double(kv, "train_fixed_s", m.train_fixed_s);
  m.train_cost_per_iteration_s =
      kv_double(kv, "train_cost_per_iteration_s", m.train_cost_per_iteration_s);
  m.train_cost_per_crop_s = kv_double(kv, "train_cost_per_crop_s", m.train_cost_per_crop_s);
  m.validate();
  return m;
}

void PipelineConfig::validate() const {
  if (tau_minutes <= 0.0) throw std::invalid_argument("tau_minutes must be > 0");
  if (instances_per_identity < 1) throw std::invalid_argument("K must be >= 1");
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  if (retention_minutes <= 0.0) throw std::invalid_argument("retention_minutes must be > 0");
  if (num_identities < 1) throw std::invalid_argument("num_identities must be >= 1");
  if (dbscan_eps <= 0.0) throw std::invalid_argument("eps must be > 0");
  if (dbscan_min_pts < 1) throw std::invalid_argument("min_pts must be >= 1");
  if (max_in_flight < 3) throw std::invalid_argument("max_in_flight must be >= 3");
  if (match_threshold < 0.0) throw std::invalid_argument("match_threshold must be >= 0");
  if (match_momentum < 0.0 || match_momentum > 1.0)
    throw std::invalid_argument("match_momentum must be in [0,1]");
  filter.validate();
}

GlobalMatcher::GlobalMatcher(double threshold, double momentum, Metric metric)
    : threshold_(threshold), momentum_(momentum), metric_(metric) {}

int GlobalMatcher::assign(const std::vector<double>& feature) {
  int best = -1;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < gallery_.size(); ++g) {
    const double d = distance(gallery_[g], feature, metric_);
    if (d < best_dist) {
      best_dist = d;
      best = static_cast<int>(g);
    }
  }
  if (best >= 0 && best_dist <= threshold_) {
    auto& entry = gallery_[static_cast<std::size_t>(best)];
    for (std::size_t d = 0; d < entry.size(); ++d)
      entry[d] = momentum_ * entry[d] + (1.0 - momentum_) * feature[d];
    entry = normalize_feature(entry);
    return best;
  }
  gallery_.push_back(feature);
  return static_cast<int>(gallery_.size()) - 1;
}

namespace {

// Filtering and segmentation results that every configuration over the same
// stream shares.
struct StreamPrep {
  std::vector<std::vector<double>> features;  // unit-normalized, per record
  std::vector<int> collection;                // collection-path record indices
  std::vector<int> reid;                      // reid-path record indices
};

struct TauPrep {
  std::vector<TimeSegment> segments;
  std::vector<std::vector<int>> by_segment;  // collection-path indices per segment
  CropCounts counts;
};

StreamPrep prepare_stream(const Stream& stream, const PipelineConfig& config) {
  StreamPrep prep;
  prep.features.reserve(stream.records.size());
  for (const auto& rec : stream.records) prep.features.push_back(normalize_feature(rec.feature));
  prep.collection = collection_path_indices(stream.records, config.filter);
  if (config.run_matcher) prep.reid = reid_path_indices(stream.records, config.filter);
  return prep;
}

TauPrep prepare_tau(const Stream& stream, const StreamPrep& prep, double tau_minutes) {
  TauPrep out;
  out.segments = make_segments(stream.header.duration_ms, tau_minutes);
  const std::int64_t len = segment_length_ms(tau_minutes);
  out.by_segment.resize(out.segments.size());
  for (int idx : prep.collection) {
    const auto t =
        static_cast<std::size_t>(stream.records[static_cast<std::size_t>(idx)].timestamp_ms / len);
    if (t >= out.segments.size())
      throw std::out_of_range("record timestamp beyond the stream duration");
    out.by_segment[t].push_back(idx);
  }
  out.counts = CropCounts(stream.header.num_cameras, static_cast<int>(out.segments.size()));
  for (std::size_t t = 0; t < out.by_segment.size(); ++t)
    for (int idx : out.by_segment[t])
      ++out.counts.at(stream.records[static_cast<std::size_t>(idx)].camera_id,
                      static_cast<int>(t));
  return out;
}

// Everything about one configuration's selection stages that does not depend
// on (E, I): budgets, per-segment subsets, pseudo-labels, distance counts.
struct SelectionOutcome {
  BudgetMatrix budgets;
  CropCounts available;
  ClampResult clamp;
  std::vector<SegmentReport> segments;  // windows not yet filled
};

BudgetMatrix compute_budgets(const CropCounts& counts, std::int64_t k, bool memory,
                             ProportionSource source) {
  if (source == ProportionSource::oracle)
    return memory ? budget_memory(counts, k) : budget_standard(counts, k);
  return memory ? budget_memory_causal(counts, k) : budget_standard_causal(counts, k);
}

// The SDS stage for one segment; pure, so the staged executor can call it
// from a worker thread.
void run_segment_sds(const Stream& stream, const StreamPrep& prep, const PipelineConfig& config,
                     const std::vector<int>& candidates,
                     const std::vector<std::int64_t>& budget_column, SegmentReport& report) {
  SubsetSelection sel = per_camera_sds(stream.records, prep.features, candidates, budget_column,
                                       config.metric, config.parallel_sds);
  report.sds_input = static_cast<std::int64_t>(candidates.size());
  report.selected_total = static_cast<std::int64_t>(sel.indices.size());
  report.objective = sel.objective;
  report.distance_evals = sel.distance_evals;
  report.sds_wall_s = sel.wall_time_s;
  report.selected_records = std::move(sel.indices);
  report.per_camera = std::move(sel.per_camera);
}

// The train-side clustering for one segment: pseudo-labels for the selected
// subset, plus quality against ground truth when available.
void run_segment_cluster(const Stream& stream, const StreamPrep& prep,
                         const PipelineConfig& config, SegmentReport& report) {
  if (report.selected_records.empty()) return;
  std::vector<std::vector<double>> pts;
  pts.reserve(report.selected_records.size());
  for (int idx : report.selected_records)
    pts.push_back(prep.features[static_cast<std::size_t>(idx)]);
  const ClusterLabels labels = dbscan(pts, config.dbscan_eps, config.dbscan_min_pts, config.metric);
  report.cluster_labels = labels.labels;
  report.clusters = labels.num_clusters;
  for (int l : labels.labels)
    if (l == kNoiseLabel) ++report.noise_points;

  bool have_gt = true;
  std::vector<int> gt;
  gt.reserve(report.selected_records.size());
  for (int idx : report.selected_records) {
    const auto& rec = stream.records[static_cast<std::size_t>(idx)];
    if (!rec.gt_identity) {
      have_gt = false;
      break;
    }
    gt.push_back(*rec.gt_identity);
  }
  if (have_gt && report.noise_points < static_cast<std::int64_t>(labels.labels.size()))
    report.purity = cluster_purity(labels, gt);
}

// Minimal single-producer single-consumer channel for the staged executor.
template <typename T>
class Channel {
 public:
  void push(T value) {
    {
      std::lock_guard lock(mutex_);
      items_.push_back(std::move(value));
    }
    cv_.notify_one();
  }
  T pop() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return !items_.empty(); });
    T value = std::move(items_.front());
    items_.pop_front();
    return value;
  }

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<T> items_;
};

SelectionOutcome run_selection(const Stream& stream, const StreamPrep& prep, const TauPrep& tau,
                               const PipelineConfig& config) {
  SelectionOutcome out;
  const std::int64_t k = subset_size(config.instances_per_identity, config.num_identities);
  out.budgets = compute_budgets(tau.counts, k, config.memory, config.budget_mode);

  const auto num_segments = tau.segments.size();
  const std::int64_t len_ms = segment_length_ms(config.tau_minutes);

  // Candidate sets per segment: the segment's own records, or the memory
  // view. The buffer is written by the collection stage at each boundary.
  std::vector<std::vector<int>> candidates(num_segments);
  CropCounts available = tau.counts;
  if (config.memory) {
    MemoryBuffer buffer(config.retention_minutes, len_ms);
    for (std::size_t t = 0; t < num_segments; ++t) {
      buffer.push_segment(static_cast<int>(t), tau.by_segment[t], stream.records);
      candidates[t] = buffer.view(static_cast<int>(t));
    }
    available = CropCounts(tau.counts.num_cameras, tau.counts.num_segments);
    for (std::size_t t = 0; t < num_segments; ++t)
      for (int idx : candidates[t])
        ++available.at(stream.records[static_cast<std::size_t>(idx)].camera_id,
                       static_cast<int>(t));
  } else {
    candidates = tau.by_segment;
  }
  out.available = available;
  out.clamp = clamp_to_available(out.budgets, available, config.redistribute);

  out.segments.resize(num_segments);
  for (std::size_t t = 0; t < num_segments; ++t) {
    SegmentReport& report = out.segments[t];
    report.segment = static_cast<int>(t);
    report.partial = tau.segments[t].partial;
    report.collected = static_cast<std::int64_t>(tau.by_segment[t].size());
    report.budget_total = out.budgets.segment_total(static_cast<int>(t));
    for (int i = 0; i < out.clamp.adjusted.num_cameras; ++i)
      report.shortfall_total +=
          out.clamp.shortfall[static_cast<std::size_t>(i) * out.clamp.adjusted.num_segments +
                              t];
  }

  // The SDS and train-side stages are pure per segment with single-owner
  // handoff, so they can run as communicating tasks or in topological order
  // with identical results. The producer loop below plays the collection
  // stage: it releases each segment at its boundary.
  if (config.concurrent) {
    Channel<int> to_sds;
    Channel<int> to_train;
    std::thread sds_worker([&] {
      while (true) {
        const int t = to_sds.pop();
        if (t < 0) {
          to_train.push(t);
          break;
        }
        run_segment_sds(stream, prep, config, candidates[static_cast<std::size_t>(t)],
                        out.clamp.adjusted.segment_column(t),
                        out.segments[static_cast<std::size_t>(t)]);
        to_train.push(t);
      }
    });
    std::thread train_worker([&] {
      while (true) {
        const int t = to_train.pop();
        if (t < 0) break;
        run_segment_cluster(stream, prep, config, out.segments[static_cast<std::size_t>(t)]);
      }
    });
    for (std::size_t t = 0; t < num_segments; ++t) to_sds.push(static_cast<int>(t));
    to_sds.push(-1);
    sds_worker.join();
    train_worker.join();
  } else {
    for (std::size_t t = 0; t < num_segments; ++t) {
      run_segment_sds(stream, prep, config, candidates[t],
                      out.clamp.adjusted.segment_column(static_cast<int>(t)), out.segments[t]);
      run_segment_cluster(stream, prep, config, out.segments[t]);
    }
  }
  return out;
}

void fill_schedule(PipelineSchedule& schedule, const PipelineConfig& config,
                   const CostModel& cost_model, const TauPrep& tau, const TrainerHook& trainer) {
  const double len_s = config.tau_minutes * 60.0;
  schedule.tau_minutes = config.tau_minutes;
  schedule.segment_len_s = len_s;
  schedule.strict = config.strict;
  schedule.max_in_flight = config.max_in_flight;

  double prev_sds_end = 0.0;
  double prev_train_end = 0.0;
  for (std::size_t t = 0; t < schedule.segments.size(); ++t) {
    SegmentReport& seg = schedule.segments[t];
    seg.collect.start_s = static_cast<double>(tau.segments[t].start_ms) / 1000.0;
    seg.collect.end_s = static_cast<double>(tau.segments[t].end_ms) / 1000.0;
    seg.collect.deadline_ok = true;

    const double sds_duration = config.measure == MeasureMode::real
                                    ? seg.sds_wall_s
                                    : cost_model.sds_duration_s(seg.sds_input, seg.distance_evals);
    double train_duration;
    if (trainer && seg.selected_total > 0) {
      TrainRequest request;
      request.segment = seg.segment;
      request.record_indices = seg.selected_records;
      request.pseudo_labels = seg.cluster_labels;
      request.epochs = config.epochs;
      request.iterations = config.iterations;
      train_duration = trainer(request).duration_s;
    } else {
      train_duration = cost_model.train_duration_s(config.epochs, config.iterations,
                                                   seg.selected_total);
    }

    if (config.strict) {
      seg.sds.start_s = seg.collect.end_s;
      seg.train.start_s = seg.collect.end_s + len_s;
    } else {
      seg.sds.start_s = std::max(seg.collect.end_s, prev_sds_end);
      seg.train.start_s = std::max(seg.sds.start_s + sds_duration, prev_train_end);
    }
    seg.sds.end_s = seg.sds.start_s + sds_duration;
    seg.train.end_s = seg.train.start_s + train_duration;
    prev_sds_end = seg.sds.end_s;
    prev_train_end = seg.train.end_s;
  }

  schedule.live_model_source.resize(schedule.segments.size());
  for (std::size_t t = 0; t < schedule.segments.size(); ++t)
    schedule.live_model_source[t] = static_cast<int>(t) >= 3 ? static_cast<int>(t) - 3 : -1;

  const ConstraintVerdict verdict = check_time_constraint(schedule, config.tau_minutes);
  constexpr double kSlack = 1e-9;
  for (std::size_t t = 0; t < schedule.segments.size(); ++t) {
    SegmentReport& seg = schedule.segments[t];
    if (config.strict) {
      seg.sds.deadline_ok = seg.sds.duration_s() <= len_s + kSlack;
      seg.train.deadline_ok = seg.train.duration_s() <= len_s + kSlack;
    } else {
      seg.sds.deadline_ok = true;
      seg.train.deadline_ok = verdict.segment_ok[t];
    }
  }
  schedule.disqualified = !verdict.pass;
}

std::optional<double> matcher_accuracy(const Stream& stream, const StreamPrep& prep,
                                       const PipelineConfig& config) {
  if (!config.run_matcher || prep.reid.empty()) return std::nullopt;
  GlobalMatcher matcher(config.match_threshold, config.match_momentum, config.metric);
  std::vector<int> assigned;
  std::vector<int> gt;
  assigned.reserve(prep.reid.size());
  gt.reserve(prep.reid.size());
  for (int idx : prep.reid) {
    const auto& rec = stream.records[static_cast<std::size_t>(idx)];
    if (!rec.gt_identity) return std::nullopt;  // accuracy undefined without ground truth
    assigned.push_back(matcher.assign(prep.features[static_cast<std::size_t>(idx)]));
    gt.push_back(*rec.gt_identity);
  }
  ClusterLabels as_labels;
  as_labels.labels = std::move(assigned);
  as_labels.num_clusters = static_cast<int>(matcher.gallery_size());
  return cluster_purity(as_labels, gt);
}

}  // namespace

ConstraintVerdict check_time_constraint(const PipelineSchedule& schedule, double tau_minutes) {
  const double len_s = tau_minutes * 60.0;
  constexpr double kSlack = 1e-9;
  ConstraintVerdict verdict;
  verdict.segment_ok.resize(schedule.segments.size(), true);
  for (std::size_t t = 0; t < schedule.segments.size(); ++t) {
    const SegmentReport& seg = schedule.segments[t];
    bool ok;
    if (schedule.strict) {
      ok = seg.sds.duration_s() <= len_s + kSlack && seg.train.duration_s() <= len_s + kSlack;
    } else {
      const double bound = seg.collect.end_s +
                           static_cast<double>(schedule.max_in_flight - 1) * len_s + kSlack;
      ok = seg.train.end_s <= bound;
    }
    verdict.segment_ok[t] = ok;
    verdict.pass = verdict.pass && ok;
  }
  return verdict;
}

int inference_latency_segments(const PipelineSchedule& schedule) {
  if (schedule.disqualified)
    throw std::logic_error("inference latency is undefined for a failing schedule");
  if (schedule.segments.empty()) throw std::logic_error("empty schedule");
  const double len_s = schedule.segment_len_s;
  int latency = -1;
  for (const auto& seg : schedule.segments) {
    if (seg.selected_total <= 0) continue;  // no model comes out of an empty segment
    double live_s;
    if (schedule.strict) {
      // Slot-synchronous: the model goes live at the boundary one slot after
      // its training slot opens, a fixed gap for every segment.
      live_s = seg.train.start_s + len_s;
    } else {
      live_s = len_s * std::ceil(seg.train.end_s / len_s - 1e-9);
    }
    const auto segs = static_cast<int>(std::ceil((live_s - seg.collect.end_s) / len_s - 1e-9));
    if (schedule.strict && latency >= 0 && segs != latency)
      throw std::logic_error("inconsistent latency across segments");
    latency = std::max(latency, segs);
  }
  if (latency < 0)
    throw std::logic_error("inference latency is undefined: no segment produced a model");
  return latency;
}

double inference_latency_minutes(const PipelineSchedule& schedule) {
  return static_cast<double>(inference_latency_segments(schedule)) * schedule.tau_minutes;
}

SimulationResult simulate_pipeline(const Stream& stream, const PipelineConfig& config,
                                   const CostModel& cost_model, const TrainerHook& trainer) {
  config.validate();
  cost_model.validate();

  SimulationResult result;
  result.header = stream.header;
  result.config = config;

  const StreamPrep prep = prepare_stream(stream, config);
  const TauPrep tau = prepare_tau(stream, prep, config.tau_minutes);
  SelectionOutcome selection = run_selection(stream, prep, tau, config);

  result.counts = tau.counts;
  result.budgets = selection.budgets;
  result.available = selection.available;
  result.clamp = selection.clamp;
  result.schedule.segments = std::move(selection.segments);
  fill_schedule(result.schedule, config, cost_model, tau, trainer);
  result.match_accuracy = matcher_accuracy(stream, prep, config);
  return result;
}

GridAxes GridAxes::reference_grid() {
  GridAxes axes;
  axes.instances_per_identity = {18, 20, 25, 30, 40, 50};
  axes.iterations = {100, 250, 500, 750, 1000, 1500};
  axes.epochs = {1, 2, 3, 5};
  axes.tau_minutes = {15.0, 20.0, 30.0};
  axes.memory_modes = {false, true};
  return axes;
}

std::int64_t GridAxes::size() const {
  return static_cast<std::int64_t>(instances_per_identity.size()) *
         static_cast<std::int64_t>(iterations.size()) * static_cast<std::int64_t>(epochs.size()) *
         static_cast<std::int64_t>(tau_minutes.size()) *
         static_cast<std::int64_t>(memory_modes.size());
}

PipelineConfig pipeline_config_from_key_values(const KeyValues& kv) {
  PipelineConfig c;
  c.tau_minutes = kv_double(kv, "tau_minutes", c.tau_minutes);
  c.instances_per_identity = kv_int(kv, "K", c.instances_per_identity);
  c.epochs = kv_int(kv, "epochs", c.epochs);
  c.iterations = kv_int(kv, "iterations", c.iterations);
  c.memory = kv_bool(kv, "memory", c.memory);
  c.retention_minutes = kv_double(kv, "retention_minutes", c.retention_minutes);
  c.num_identities = kv_int(kv, "num_identities", c.num_identities);
  c.metric = metric_from_string(kv_string(kv, "metric", to_string(c.metric)));
  c.dbscan_eps = kv_double(kv, "eps", c.dbscan_eps);
  c.dbscan_min_pts = static_cast<int>(kv_int(kv, "min_pts", c.dbscan_min_pts));
  const std::string mode = kv_string(kv, "budget_mode", "oracle");
  if (mode == "oracle")
    c.budget_mode = ProportionSource::oracle;
  else if (mode == "causal")
    c.budget_mode = ProportionSource::causal;
  else
    throw std::runtime_error("config key 'budget_mode': expected oracle or causal, got " + mode);
  c.redistribute = kv_bool(kv, "redistribute", c.redistribute);
  c.seed = static_cast<std::uint64_t>(kv_int(kv, "seed", static_cast<std::int64_t>(c.seed)));
  const std::string measure = kv_string(kv, "measure", "model");
  if (measure == "model")
    c.measure = MeasureMode::model;
  else if (measure == "real")
    c.measure = MeasureMode::real;
  else
    throw std::runtime_error("config key 'measure': expected model or real, got " + measure);
  c.concurrent = kv_bool(kv, "concurrent", c.concurrent);
  c.strict = kv_bool(kv, "strict", c.strict);
  c.max_in_flight = static_cast<int>(kv_int(kv, "max_in_flight", c.max_in_flight));
  c.run_matcher = kv_bool(kv, "run_matcher", c.run_matcher);
  c.match_threshold = kv_double(kv, "match_threshold", c.match_threshold);
  c.match_momentum = kv_double(kv, "match_momentum", c.match_momentum);
  c.parallel_sds = kv_bool(kv, "parallel_sds", c.parallel_sds);
  c.filter.iou_reject_threshold =
      kv_double(kv, "iou_reject_threshold", c.filter.iou_reject_threshold);
  c.filter.min_keypoints = static_cast<int>(kv_int(kv, "min_keypoints", c.filter.min_keypoints));
  c.filter.min_kp_confidence = kv_double(kv, "min_kp_confidence", c.filter.min_kp_confidence);
  c.filter.sample_every_n_frames =
      static_cast<int>(kv_int(kv, "sample_every_n_frames", c.filter.sample_every_n_frames));
  c.filter.filter_reid_path = kv_bool(kv, "filter_reid_path", c.filter.filter_reid_path);
  c.filter.overlap_keep_larger = kv_bool(kv, "overlap_keep_larger", c.filter.overlap_keep_larger);
  c.validate();
  return c;
}

std::vector<std::string> experiment_columns() {
  return {"run_id",        "tau_minutes",     "memory",
          "budget_mode",   "K",               "epochs",
          "iterations",    "k_total",         "eps",
          "min_pts",       "num_segments",    "segment",
          "partial",       "collected",       "sds_input",
          "budget",        "selected",        "shortfall",
          "objective",     "clusters",        "noise_points",
          "purity",        "sds_duration_s",  "train_duration_s",
          "sds_deadline_ok", "train_deadline_ok", "disqualified",
          "latency_segments", "latency_minutes"};
}

void append_experiment_rows(Table& table, std::int64_t run_id, const SimulationResult& result) {
  const auto& schedule = result.schedule;
  const ConstraintVerdict verdict = check_time_constraint(schedule, schedule.tau_minutes);
  bool trained_any = false;
  for (const auto& seg : schedule.segments) trained_any = trained_any || seg.selected_total > 0;
  Cell latency_segments = std::monostate{};
  Cell latency_minutes = std::monostate{};
  if (!schedule.disqualified && trained_any) {
    latency_segments = static_cast<std::int64_t>(inference_latency_segments(schedule));
    latency_minutes = inference_latency_minutes(schedule);
  }
  const std::int64_t k_total =
      subset_size(result.config.instances_per_identity, result.config.num_identities);
  const double len_s = schedule.segment_len_s;
  constexpr double kSlack = 1e-9;
  for (std::size_t t = 0; t < schedule.segments.size(); ++t) {
    const SegmentReport& seg = schedule.segments[t];
    const bool sds_ok = schedule.strict ? seg.sds.duration_s() <= len_s + kSlack
                                        : verdict.segment_ok[t];
    const bool train_ok = schedule.strict ? seg.train.duration_s() <= len_s + kSlack
                                          : verdict.segment_ok[t];
    table.add_row({run_id,
                   schedule.tau_minutes,
                   result.config.memory,
                   std::string(result.config.budget_mode == ProportionSource::oracle ? "oracle"
                                                                                     : "causal"),
                   result.config.instances_per_identity,
                   result.config.epochs,
                   result.config.iterations,
                   k_total,
                   result.config.dbscan_eps,
                   static_cast<std::int64_t>(result.config.dbscan_min_pts),
                   static_cast<std::int64_t>(schedule.segments.size()),
                   static_cast<std::int64_t>(seg.segment),
                   seg.partial,
                   seg.collected,
                   seg.sds_input,
                   seg.budget_total,
                   seg.selected_total,
                   seg.shortfall_total,
                   seg.objective ? Cell(*seg.objective) : Cell(std::monostate{}),
                   static_cast<std::int64_t>(seg.clusters),
                   seg.noise_points,
                   seg.purity ? Cell(*seg.purity) : Cell(std::monostate{}),
                   seg.sds.duration_s(),
                   seg.train.duration_s(),
                   sds_ok,
                   train_ok,
                   schedule.disqualified,
                   latency_segments,
                   latency_minutes});
  }
}

GridResult grid_run(const Stream& stream, const PipelineConfig& base, const CostModel& cost_model,
                    const GridAxes& axes) {
  PipelineConfig config = base;
  config.run_matcher = false;  // independent of the grid axes; not an experiment column
  config.validate();
  cost_model.validate();

  GridResult result;
  result.experiments.columns = experiment_columns();

  const StreamPrep prep = prepare_stream(stream, config);

  std::int64_t run_id = 0;
  for (double tau_minutes : axes.tau_minutes) {
    config.tau_minutes = tau_minutes;
    const TauPrep tau = prepare_tau(stream, prep, tau_minutes);
    for (bool memory : axes.memory_modes) {
      config.memory = memory;
      for (std::int64_t K : axes.instances_per_identity) {
        config.instances_per_identity = K;
        // Budgets, subsets, and pseudo-labels do not depend on (E, I).
        SelectionOutcome selection = run_selection(stream, prep, tau, config);
        for (std::int64_t E : axes.epochs) {
          config.epochs = E;
          for (std::int64_t I : axes.iterations) {
            config.iterations = I;
            SimulationResult run;
            run.header = stream.header;
            run.config = config;
            run.counts = tau.counts;
            run.budgets = selection.budgets;
            run.available = selection.available;
            run.clamp = selection.clamp;
            run.schedule.segments = selection.segments;
            fill_schedule(run.schedule, config, cost_model, tau, nullptr);
            if (run.schedule.disqualified) ++result.num_disqualified;
            append_experiment_rows(result.experiments, run_id, run);
            ++run_id;
          }
        }
      }
    }
  }
  result.num_configurations = run_id;
  return result;
}

Table schedule_table(const SimulationResult& result) {
  Table table;
  table.columns = {"segment", "stage", "start_s", "end_s", "duration_s", "deadline_ok"};
  for (const auto& seg : result.schedule.segments) {
    const auto row = [&](const char* stage, const StageWindow& w) {
      table.add_row({static_cast<std::int64_t>(seg.segment), std::string(stage), w.start_s,
                     w.end_s, w.duration_s(), w.deadline_ok});
    };
    row("collect", seg.collect);
    row("sds", seg.sds);
    row("train", seg.train);
  }
  return table;
}

Table subsets_table(const SimulationResult& result, const Stream& stream) {
  Table table;
  table.columns = {"segment", "camera", "record_id", "gt", "cluster"};
  for (const auto& seg : result.schedule.segments) {
    for (std::size_t i = 0; i < seg.selected_records.size(); ++i) {
      const int idx = seg.selected_records[i];
      const auto& rec = stream.records[static_cast<std::size_t>(idx)];
      table.add_row({static_cast<std::int64_t>(seg.segment),
                     static_cast<std::int64_t>(rec.camera_id), static_cast<std::int64_t>(idx),
                     rec.gt_identity ? Cell(static_cast<std::int64_t>(*rec.gt_identity))
                                     : Cell(std::monostate{}),
                     static_cast<std::int64_t>(seg.cluster_labels[i])});
    }
  }
  return table;
}

Table budgets_table(const SimulationResult& result) {
  Table table;
  table.columns = {"segment", "camera", "fractional", "integer", "available", "shortfall"};
  for (int t = 0; t < result.budgets.num_segments; ++t) {
    for (int i = 0; i < result.budgets.num_cameras; ++i) {
      const auto cell = static_cast<std::size_t>(i) * result.budgets.num_segments + t;
      table.add_row({static_cast<std::int64_t>(t), static_cast<std::int64_t>(i),
                     result.budgets.fractional_at(i, t), result.budgets.at(i, t),
                     result.available.at(i, t), result.clamp.shortfall[cell]});
    }
  }
  return table;
}

std::string summary_json(const SimulationResult& result) {
  const auto& schedule = result.schedule;
  ordered_json j;
  j["tau_minutes"] = schedule.tau_minutes;
  j["memory"] = result.config.memory;
  j["budget_mode"] =
      result.config.budget_mode == ProportionSource::oracle ? "oracle" : "causal";
  j["K"] = result.config.instances_per_identity;
  j["epochs"] = result.config.epochs;
  j["iterations"] = result.config.iterations;
  j["k_total"] = subset_size(result.config.instances_per_identity, result.config.num_identities);
  j["metric"] = to_string(result.config.metric);
  j["eps"] = result.config.dbscan_eps;
  j["min_pts"] = result.config.dbscan_min_pts;
  j["strict"] = schedule.strict;
  j["num_segments"] = schedule.segments.size();
  j["disqualified"] = schedule.disqualified;
  bool trained_any = false;
  for (const auto& seg : schedule.segments) trained_any = trained_any || seg.selected_total > 0;
  if (schedule.disqualified || !trained_any) {
    j["latency_segments"] = nullptr;
    j["latency_minutes"] = nullptr;
  } else {
    j["latency_segments"] = inference_latency_segments(schedule);
    j["latency_minutes"] = inference_latency_minutes(schedule);
  }
  std::int64_t trainings = 0;
  std::int64_t data_segments = 0;
  for (const auto& seg : schedule.segments) {
    if (seg.selected_total > 0) {
      ++data_segments;
      if (seg.train.deadline_ok) ++trainings;
    }
  }
  j["trainings_completed"] = trainings;
  j["steady_state_throughput"] =
      data_segments > 0 ? static_cast<double>(trainings) / static_cast<double>(data_segments)
                        : 0.0;
  j["shortfall_total"] = result.clamp.shortfall_total;
  if (result.match_accuracy)
    j["match_accuracy"] = *result.match_accuracy;
  else
    j["match_accuracy"] = nullptr;
  j["live_model_source"] = schedule.live_model_source;

  ordered_json per_segment = ordered_json::array();
  for (const auto& seg : schedule.segments) {
    ordered_json s;
    s["segment"] = seg.segment;
    s["partial"] = seg.partial;
    s["collected"] = seg.collected;
    s["sds_input"] = seg.sds_input;
    s["budget"] = seg.budget_total;
    s["selected"] = seg.selected_total;
    s["shortfall"] = seg.shortfall_total;
    if (seg.objective)
      s["objective"] = *seg.objective;
    else
      s["objective"] = nullptr;
    s["clusters"] = seg.clusters;
    s["noise_points"] = seg.noise_points;
    if (seg.purity)
      s["purity"] = *seg.purity;
    else
      s["purity"] = nullptr;
    s["sds_duration_s"] = seg.sds.duration_s();
    s["train_duration_s"] = seg.train.duration_s();
    s["sds_deadline_ok"] = seg.sds.deadline_ok;
    s["train_deadline_ok"] = seg.train.deadline_ok;
    per_segment.push_back(std::move(s));
  }
  j["per_segment"] = std::move(per_segment);
  return j.dump(2) + "\n";
}

}  // namespace streampipe
