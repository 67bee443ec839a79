#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "streampipe/budget.hpp"
#include "streampipe/config.hpp"
#include "streampipe/filter.hpp"
#include "streampipe/metric.hpp"
#include "streampipe/report.hpp"
#include "streampipe/sds.hpp"
#include "streampipe/stream.hpp"

namespace streampipe {

// Maps stage inputs to simulated durations. The real system's timings are
// hardware-bound; these coefficients are configuration, not ground truth.
struct CostModel {
  double sds_fixed_s = 5.0;
  double sds_cost_per_pair_s = 0.02;         // per distance evaluation
  double train_fixed_s = 10.0;
  double train_cost_per_iteration_s = 0.14;  // per epoch x iteration unit
  double train_cost_per_crop_s = 0.1;        // per selected crop

  void validate() const;
  double sds_duration_s(std::int64_t sds_input, std::int64_t distance_evals) const;
  double train_duration_s(std::int64_t epochs, std::int64_t iterations,
                          std::int64_t subset_size) const;
  static CostModel from_key_values(const KeyValues& kv);
};

enum class ProportionSource {
  oracle,  // full-stream totals, as the offline evaluation computes them
  causal   // running totals only, evaluable at the segment boundary
};
enum class MeasureMode { model, real };

struct PipelineConfig {
  double tau_minutes = 20.0;
  std::int64_t instances_per_identity = 20;  // K
  std::int64_t epochs = 1;                   // E
  std::int64_t iterations = 100;             // I
  bool memory = false;
  double retention_minutes = 60.0;
  std::int64_t num_identities = 10;
  Metric metric = Metric::euclidean;
  FilterConfig filter;
  double dbscan_eps = 0.6;
  int dbscan_min_pts = 4;
  ProportionSource budget_mode = ProportionSource::oracle;
  bool redistribute = false;
  std::uint64_t seed = 1;
  MeasureMode measure = MeasureMode::model;
  bool concurrent = false;  // run the three stages as communicating tasks
  bool strict = true;       // strict slot-fit constraint vs bounded-depth relaxed mode
  int max_in_flight = 3;
  bool run_matcher = true;
  double match_threshold = 0.5;
  double match_momentum = 0.9;
  bool parallel_sds = true;

  void validate() const;
};

struct StageWindow {
  double start_s = 0.0;
  double end_s = 0.0;
  bool deadline_ok = true;
  double duration_s() const { return end_s - start_s; }
};

struct SegmentReport {
  int segment = 0;
  bool partial = false;
  StageWindow collect;
  StageWindow sds;
  StageWindow train;
  std::int64_t collected = 0;   // collection-path crops in this segment
  std::int64_t sds_input = 0;   // standard: collected; memory: |memory view|
  std::int64_t budget_total = 0;
  std::int64_t selected_total = 0;
  std::int64_t shortfall_total = 0;
  std::optional<double> objective;  // min pairwise distance of the combined subset
  int clusters = 0;
  std::int64_t noise_points = 0;
  std::optional<double> purity;
  std::int64_t distance_evals = 0;
  double sds_wall_s = 0.0;
  std::vector<int> selected_records;  // indices into the stream's record vector
  std::vector<int> cluster_labels;    // parallel to selected_records
  std::vector<PerCameraSelection> per_camera;
};

// collect(t) occupies [t*tau, (t+1)*tau); sds(t) starts at (t+1)*tau;
// train(t) starts at (t+2)*tau; the model trained on segment t goes live at
// the (t+3)*tau boundary.
struct PipelineSchedule {
  double tau_minutes = 0.0;
  double segment_len_s = 0.0;
  bool strict = true;
  int max_in_flight = 3;
  std::vector<SegmentReport> segments;
  std::vector<int> live_model_source;  // per segment: source segment, -1 = pre-adapted model
  bool disqualified = false;
};

struct ConstraintVerdict {
  std::vector<bool> segment_ok;
  bool pass = true;
};

// Strict: segment t passes iff its SDS and train durations each fit within
// one segment length, so the pipeline never accumulates deficit. Relaxed:
// train(t) must complete within (max_in_flight - 1) segments of the end of
// collect(t).
ConstraintVerdict check_time_constraint(const PipelineSchedule& schedule, double tau_minutes);

// Only defined for passing schedules: the gap between the end of a segment's
// collection window and the boundary where its trained model goes live.
// Always exactly 2 segments.
int inference_latency_segments(const PipelineSchedule& schedule);
double inference_latency_minutes(const PipelineSchedule& schedule);

// Greedy nearest-neighbor multi-camera matcher: assigns an existing global id
// when the best gallery distance is within threshold, otherwise mints a new
// id. Gallery features track queries by exponential moving average.
class GlobalMatcher {
 public:
  GlobalMatcher(double threshold, double momentum, Metric metric);
  int assign(const std::vector<double>& feature);
  std::int64_t gallery_size() const { return static_cast<std::int64_t>(gallery_.size()); }

 private:
  double threshold_;
  double momentum_;
  Metric metric_;
  std::vector<std::vector<double>> gallery_;
};

// Optional external trainer hook; the default trainer is the cost model.
struct TrainRequest {
  int segment = 0;
  std::vector<int> record_indices;
  std::vector<int> pseudo_labels;
  std::int64_t epochs = 0;
  std::int64_t iterations = 0;
};
struct TrainOutcome {
  double duration_s = 0.0;
  std::string model_token;
};
using TrainerHook = std::function<TrainOutcome(const TrainRequest&)>;

struct SimulationResult {
  StreamHeader header;
  PipelineConfig config;
  PipelineSchedule schedule;
  CropCounts counts;        // collection-path counts n[camera][segment]
  CropCounts available;     // what SDS could draw from (memory view sizes in memory mode)
  BudgetMatrix budgets;     // before clamping
  ClampResult clamp;
  std::optional<double> match_accuracy;
};

SimulationResult simulate_pipeline(const Stream& stream, const PipelineConfig& config,
                                   const CostModel& cost_model,
                                   const TrainerHook& trainer = nullptr);

// Experiment grid axes; size() is the number of configurations.
struct GridAxes {
  std::vector<std::int64_t> instances_per_identity;
  std::vector<std::int64_t> iterations;
  std::vector<std::int64_t> epochs;
  std::vector<double> tau_minutes;
  std::vector<bool> memory_modes;

  static GridAxes reference_grid();
  std::int64_t size() const;
};

struct GridResult {
  Table experiments;
  std::int64_t num_configurations = 0;
  std::int64_t num_disqualified = 0;
};

// Runs one simulation per grid configuration in a fixed nested order
// (tau, memory, K, E, I) and collects the long-form experiment table: one
// row per (configuration, segment). Stage outputs that do not depend on
// (E, I) are computed once per (tau, memory, K).
GridResult grid_run(const Stream& stream, const PipelineConfig& base, const CostModel& cost_model,
                    const GridAxes& axes);

// Builds a PipelineConfig from the flat key-value configuration format;
// unknown keys are ignored so one file can also carry cost-model keys.
PipelineConfig pipeline_config_from_key_values(const KeyValues& kv);

// Table/artifact builders shared by the CLI and the tests.
std::vector<std::string> experiment_columns();
void append_experiment_rows(Table& table, std::int64_t run_id, const SimulationResult& result);
Table schedule_table(const SimulationResult& result);
Table subsets_table(const SimulationResult& result, const Stream& stream);
Table budgets_table(const SimulationResult& result);
std::string summary_json(const SimulationResult& result);

}  // namespace streampipe
