#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "streampipe/budget.hpp"
#include "streampipe/config.hpp"
#include "streampipe/dbscan_reference.hpp"
#include "streampipe/pipeline.hpp"
#include "streampipe/report.hpp"
#include "streampipe/rng.hpp"
#include "streampipe/sds.hpp"
#include "streampipe/stream.hpp"

namespace fs = std::filesystem;
using namespace streampipe;

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(text);
  while (std::getline(in, part, sep)) parts.push_back(part);
  return parts;
}

// Inline synth spec: "identities=10,cameras=8,minutes=60,seed=1,...".
// Also accepts a path to a key-value file.
SynthSpec parse_synth_spec(const std::string& text) {
  KeyValues kv;
  if (text.find('=') == std::string::npos) {
    kv = load_key_values(text);
  } else {
    std::string as_lines = text;
    for (auto& c : as_lines)
      if (c == ',') c = '\n';
    kv = parse_key_values(as_lines);
  }
  SynthSpec spec;
  spec.num_identities = static_cast<int>(kv_int(kv, "identities", spec.num_identities));
  spec.crops_per_identity_rate = kv_double(kv, "rate", spec.crops_per_identity_rate);
  spec.cluster_spread = kv_double(kv, "sigma", spec.cluster_spread);
  spec.cluster_separation = kv_double(kv, "separation", spec.cluster_separation);
  const auto cameras = kv_int(kv, "cameras", 8);
  spec.camera_weights.assign(static_cast<std::size_t>(cameras),
                             1.0 / static_cast<double>(cameras));
  if (kv.count("weights")) {
    spec.camera_weights.clear();
    for (const auto& w : split(kv.at("weights"), ';'))
      spec.camera_weights.push_back(std::stod(w));
  }
  spec.noise_fraction = kv_double(kv, "noise", spec.noise_fraction);
  spec.rng_seed = static_cast<std::uint64_t>(kv_int(kv, "seed", 1));
  spec.feature_dim = static_cast<int>(kv_int(kv, "dim", spec.feature_dim));
  spec.fps = kv_double(kv, "fps", spec.fps);
  spec.duration_ms = kv_int(kv, "duration_ms", kv_int(kv, "minutes", 60) * 60000);
  spec.validate();
  return spec;
}

struct CommonInputs {
  std::vector<std::string> stream_paths;
  std::string synth_spec;
  std::string config_path;
  std::string cost_model_path;
  std::string out_dir = "out";
  KeyValues overrides;  // flag values layered over the config file
};

Stream load_input_stream(const CommonInputs& inputs) {
  if (!inputs.synth_spec.empty()) return synth_stream(parse_synth_spec(inputs.synth_spec));
  if (inputs.stream_paths.empty())
    throw std::runtime_error("either --stream or --synth is required");
  std::vector<Stream> parts;
  parts.reserve(inputs.stream_paths.size());
  for (const auto& path : inputs.stream_paths) parts.push_back(parse_stream_file(path));
  return parts.size() == 1 ? std::move(parts.front()) : merge_streams(std::move(parts));
}

KeyValues layered_key_values(const CommonInputs& inputs) {
  KeyValues kv;
  if (!inputs.config_path.empty()) kv = load_key_values(inputs.config_path);
  if (!inputs.cost_model_path.empty())
    for (const auto& [key, value] : load_key_values(inputs.cost_model_path)) kv[key] = value;
  for (const auto& [key, value] : inputs.overrides) kv[key] = value;
  return kv;
}

void add_common_options(CLI::App* cmd, CommonInputs& inputs) {
  cmd->add_option("--stream", inputs.stream_paths,
                  "stream file(s) in the line-delimited format; several files are merge-sorted");
  cmd->add_option("--synth", inputs.synth_spec,
                  "synthetic stream spec: key=value pairs (identities, cameras, minutes, rate, "
                  "sigma, separation, noise, seed, dim, fps) or a key-value file path");
  cmd->add_option("--config", inputs.config_path, "flat key = value configuration file");
  cmd->add_option("--cost-model", inputs.cost_model_path, "cost model key-value file");
  cmd->add_option("--out", inputs.out_dir, "output directory")->capture_default_str();
}

// Every config key is overridable by a flag; flags win over the file.
void add_override_options(CLI::App* cmd, CommonInputs& inputs) {
  const auto opt = [&](const std::string& flag, const std::string& key, const std::string& help) {
    cmd->add_option_function<std::string>(
        flag, [&inputs, key](const std::string& value) { inputs.overrides[key] = value; }, help);
  };
  // Boolean keys accept a bare flag ("--memory") or an explicit value
  // ("--memory 0").
  const auto flag = [&](const std::string& name, const std::string& key,
                        const std::string& help) {
    cmd->add_option_function<std::string>(
           name,
           [&inputs, key](const std::string& value) {
             inputs.overrides[key] = value.empty() ? "1" : value;
           },
           help)
        ->expected(0, 1);
  };
  opt("--tau", "tau_minutes", "time segment length in minutes");
  opt("--K", "K", "instances per identity");
  opt("--E", "epochs", "training epochs");
  opt("--I", "iterations", "iterations per epoch");
  flag("--memory", "memory", "memory mode (bare flag or 1/0)");
  opt("--budget-mode", "budget_mode", "budget proportions: oracle | causal");
  opt("--metric", "metric", "feature metric: euclidean | cosine");
  opt("--eps", "eps", "clustering radius");
  opt("--min-pts", "min_pts", "clustering density threshold");
  opt("--seed", "seed", "simulation seed");
  opt("--num-identities", "num_identities", "identity count used for the subset size");
  opt("--retention", "retention_minutes", "memory retention in minutes");
  flag("--redistribute", "redistribute", "redistribute budget shortfalls (bare flag or 1/0)");
  opt("--measure", "measure", "stage timing source: model | real");
  opt("--strict", "strict", "strict per-slot constraint (1) or bounded-depth relaxed mode (0)");
  opt("--max-in-flight", "max_in_flight", "pipeline depth bound for relaxed mode");
  flag("--concurrent", "concurrent", "run the three stages as communicating tasks");
  opt("--match", "run_matcher", "run the global matcher over the reid path (1/0)");
  opt("--match-threshold", "match_threshold", "matcher assignment threshold");
  opt("--match-momentum", "match_momentum", "gallery moving-average momentum");
  opt("--parallel-sds", "parallel_sds", "per-camera selection parallelism (1/0)");
  opt("--iou-threshold", "iou_reject_threshold", "overlap rejection threshold");
  opt("--min-keypoints", "min_keypoints", "pose gate keypoint count");
  opt("--min-kp-confidence", "min_kp_confidence", "pose gate confidence");
  opt("--sample-every", "sample_every_n_frames", "collection-path frame sampling period");
  opt("--filter-reid-path", "filter_reid_path", "apply overlap/pose gates on the reid path (1/0)");
  flag("--overlap-keep-larger", "overlap_keep_larger",
       "keep the larger box of an overlapping pair instead of dropping both");
  opt("--sds-fixed", "sds_fixed_s", "cost model: fixed SDS seconds per segment");
  opt("--sds-cost-per-pair", "sds_cost_per_pair_s", "cost model: seconds per distance evaluation");
  opt("--train-fixed", "train_fixed_s", "cost model: fixed training seconds per segment");
  opt("--train-cost-per-iteration", "train_cost_per_iteration_s",
      "cost model: seconds per epoch x iteration");
  opt("--train-cost-per-crop", "train_cost_per_crop_s", "cost model: seconds per selected crop");
}

int cmd_run(const CommonInputs& inputs) {
  const KeyValues kv = layered_key_values(inputs);
  const PipelineConfig config = pipeline_config_from_key_values(kv);
  const CostModel cost_model = CostModel::from_key_values(kv);
  const Stream stream = load_input_stream(inputs);

  const SimulationResult result = simulate_pipeline(stream, config, cost_model);

  fs::create_directories(inputs.out_dir);
  const fs::path out(inputs.out_dir);
  emit(schedule_table(result), OutputFormat::csv, out / "schedule.csv");
  emit(subsets_table(result, stream), OutputFormat::csv, out / "subsets.csv");
  emit(budgets_table(result), OutputFormat::csv, out / "budgets.csv");
  Table experiments;
  experiments.columns = experiment_columns();
  append_experiment_rows(experiments, 0, result);
  emit(experiments, OutputFormat::csv, out / "experiments.csv");
  const std::string summary = summary_json(result);
  std::ofstream(out / "summary.json") << summary;

  std::cout << summary;
  std::cout << (result.schedule.disqualified ? "verdict: DISQUALIFIED (time constraint violated)"
                                             : "verdict: PASS")
            << "\n";
  return 0;
}

GridAxes parse_grid_file(const std::string& path) {
  GridAxes axes = GridAxes::reference_grid();
  if (path.empty()) return axes;
  const KeyValues kv = load_key_values(path);
  const auto int_list = [&](const char* key, std::vector<std::int64_t>& into) {
    if (!kv.count(key)) return;
    into.clear();
    for (const auto& v : split(kv.at(key), ',')) into.push_back(std::stoll(v));
  };
  int_list("K", axes.instances_per_identity);
  int_list("I", axes.iterations);
  int_list("E", axes.epochs);
  if (kv.count("tau")) {
    axes.tau_minutes.clear();
    for (const auto& v : split(kv.at("tau"), ',')) axes.tau_minutes.push_back(std::stod(v));
  }
  if (kv.count("modes")) {
    axes.memory_modes.clear();
    for (const auto& v : split(kv.at("modes"), ',')) {
      if (v == "standard")
        axes.memory_modes.push_back(false);
      else if (v == "memory")
        axes.memory_modes.push_back(true);
      else
        throw std::runtime_error("grid modes: expected standard or memory, got " + v);
    }
  }
  return axes;
}

int cmd_grid(const CommonInputs& inputs, const std::string& grid_path) {
  const KeyValues kv = layered_key_values(inputs);
  const PipelineConfig base = pipeline_config_from_key_values(kv);
  const CostModel cost_model = CostModel::from_key_values(kv);
  const GridAxes axes = parse_grid_file(grid_path);
  const Stream stream = load_input_stream(inputs);

  const GridResult result = grid_run(stream, base, cost_model, axes);

  fs::create_directories(inputs.out_dir);
  const fs::path out(inputs.out_dir);
  emit(result.experiments, OutputFormat::csv, out / "experiments.csv");
  nlohmann::ordered_json j;
  j["num_configurations"] = result.num_configurations;
  j["num_disqualified"] = result.num_disqualified;
  j["num_rows"] = result.experiments.rows.size();
  std::ofstream(out / "summary.json") << j.dump(2) << "\n";

  std::cout << "configurations: " << result.num_configurations
            << "  disqualified: " << result.num_disqualified
            << "  rows: " << result.experiments.rows.size() << "\n";
  return 0;
}

int cmd_report(const std::string& in_dir, const std::string& format, const std::string& metric,
               const std::string& group_by, bool include_disqualified, std::string out_dir,
               bool plot_best) {
  if (out_dir.empty()) out_dir = in_dir;
  const fs::path in(in_dir);
  std::ifstream file(in / "experiments.csv");
  if (!file) throw std::runtime_error("cannot open " + (in / "experiments.csv").string());
  std::ostringstream buf;
  buf << file.rdbuf();
  const Table experiments = parse_csv(buf.str());

  const std::vector<std::string> keys = split(group_by, ',');
  const auto summaries = group_summaries(experiments, metric, keys, include_disqualified);
  const Table table = summaries_to_table(summaries, keys);

  fs::create_directories(out_dir);
  const fs::path out(out_dir);
  if (format == "json") {
    nlohmann::ordered_json j;
    j["metric"] = metric;
    j["group_by"] = keys;
    j["quantile_rule"] = kQuantileRule;
    j["rows"] = nlohmann::ordered_json::parse(to_json(table));
    std::ofstream(out / "summaries.json") << j.dump(2) << "\n";
  } else {
    emit(table, OutputFormat::csv, out / "summaries.csv");
    nlohmann::ordered_json meta;
    meta["metric"] = metric;
    meta["group_by"] = keys;
    meta["quantile_rule"] = kQuantileRule;
    std::ofstream(out / "summaries.meta.json") << meta.dump(2) << "\n";
  }
  std::cout << to_csv(table);

  if (plot_best) {
    // Best metric value per (tau, memory) curve over time; x is the segment
    // end in minutes.
    const int tau_col = experiments.column_index("tau_minutes");
    const int mem_col = experiments.column_index("memory");
    const int seg_col = experiments.column_index("segment");
    const int disq_col = experiments.column_index("disqualified");
    const int metric_col = experiments.column_index(metric);
    std::map<std::pair<std::string, std::string>, std::map<std::int64_t, double>> best;
    for (const auto& row : experiments.rows) {
      if (!include_disqualified && format_cell(row[disq_col]) == "1") continue;
      const std::string metric_text = format_cell(row[metric_col]);
      if (metric_text.empty()) continue;
      const double value = std::stod(metric_text);
      const auto key = std::make_pair(format_cell(row[tau_col]), format_cell(row[mem_col]));
      const auto segment = std::stoll(format_cell(row[seg_col]));
      auto [it, fresh] = best[key].try_emplace(segment, value);
      if (!fresh) it->second = std::max(it->second, value);
    }
    for (const auto& [key, by_segment] : best) {
      Table series;
      series.columns = {"x_minutes", metric};
      const double tau = std::stod(key.first);
      for (const auto& [segment, value] : by_segment)
        series.add_row({(static_cast<double>(segment) + 1.0) * tau, value});
      const std::string mode = key.second == "1" ? "memory" : "standard";
      emit(series, OutputFormat::csv,
           out / ("best_" + metric + "_tau" + key.first + "_" + mode + ".csv"));
    }
  }
  return 0;
}

// Self-checks against the built-in oracles: exhaustive dispersion search,
// the naive clustering reference, and budget conservation.
int cmd_oracle(int instances, std::uint64_t seed) {
  Rng rng(seed);
  int failures = 0;

  int greedy_violations = 0;
  for (int trial = 0; trial < instances; ++trial) {
    const int n = 5 + static_cast<int>(rng.uniform_int(0, 8));       // 5..12
    const int k = 2 + static_cast<int>(rng.uniform_int(0, 4));       // 2..5
    std::vector<std::vector<double>> pts(static_cast<std::size_t>(n));
    for (auto& p : pts) p = {rng.uniform() * 10.0, rng.uniform() * 10.0};
    const auto greedy = greedy_kcenter(pts, std::min(k, n), Metric::euclidean);
    const auto optimal = brute_force_dispersion(pts, std::min(k, n), Metric::euclidean);
    if (greedy.objective && optimal.objective &&
        *greedy.objective < 0.5 * *optimal.objective - 1e-12)
      ++greedy_violations;
  }
  std::cout << "greedy >= optimal/2 over " << instances << " instances: "
            << (greedy_violations == 0 ? "PASS" : "FAIL") << " (" << greedy_violations
            << " violations)\n";
  failures += greedy_violations == 0 ? 0 : 1;

  int partition_mismatches = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 20 + static_cast<int>(rng.uniform_int(0, 180));
    std::vector<std::vector<double>> pts(static_cast<std::size_t>(n));
    for (auto& p : pts) p = {rng.uniform(), rng.uniform()};
    const auto fast = dbscan(pts, 0.08, 3, Metric::euclidean);
    const auto naive = dbscan_reference(pts, 0.08, 3, Metric::euclidean);
    if (!same_partition(fast, naive)) ++partition_mismatches;
  }
  std::cout << "clustering matches naive reference over 50 instances: "
            << (partition_mismatches == 0 ? "PASS" : "FAIL") << "\n";
  failures += partition_mismatches == 0 ? 0 : 1;

  int conservation_errors = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int cams = 1 + static_cast<int>(rng.uniform_int(0, 6));
    const int segs = 1 + static_cast<int>(rng.uniform_int(0, 5));
    CropCounts counts(cams, segs);
    for (auto& c : counts.n) c = rng.uniform_int(0, 50);
    if (counts.total() == 0) counts.n[0] = 1;
    const std::int64_t k = 1 + rng.uniform_int(0, 200);
    const auto standard = budget_standard(counts, k);
    std::int64_t total = 0;
    for (auto b : standard.b) total += b;
    if (total != k) ++conservation_errors;
    const auto memory = budget_memory(counts, k);
    if (memory.segment_total(segs - 1) != k) ++conservation_errors;
  }
  std::cout << "budget conservation over 200 matrices: "
            << (conservation_errors == 0 ? "PASS" : "FAIL") << "\n";
  failures += conservation_errors == 0 ? 0 : 1;

  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"streaming crop selection pipeline simulator"};
  app.require_subcommand(1);

  CommonInputs run_inputs;
  auto* run = app.add_subcommand("run", "simulate one pipeline configuration");
  add_common_options(run, run_inputs);
  add_override_options(run, run_inputs);

  CommonInputs grid_inputs;
  std::string grid_path;
  auto* grid = app.add_subcommand("grid", "run an experiment grid");
  add_common_options(grid, grid_inputs);
  add_override_options(grid, grid_inputs);
  grid->add_option("--grid", grid_path, "grid axes file (defaults to the reference grid)");

  std::string report_in = "out";
  std::string report_format = "csv";
  std::string report_metric = "purity";
  std::string report_group_by = "tau_minutes,segment,memory";
  std::string report_out;
  bool include_disqualified = false;
  bool plot_best = false;
  auto* report = app.add_subcommand("report", "summarize an experiments table");
  report->add_option("--in", report_in, "directory containing experiments.csv")
      ->capture_default_str();
  report->add_option("--format", report_format, "csv | json")->capture_default_str();
  report->add_option("--metric", report_metric, "metric column to summarize")
      ->capture_default_str();
  report->add_option("--group-by", report_group_by, "comma-separated group key columns")
      ->capture_default_str();
  report->add_flag("--include-disqualified", include_disqualified,
                   "keep rows that violate the time constraint");
  report->add_option("--out", report_out, "output directory (defaults to --in)");
  report->add_flag("--plot-best", plot_best, "emit best-per-configuration (x,y) series");

  int oracle_instances = 1000;
  std::uint64_t oracle_seed = 7;
  auto* oracle = app.add_subcommand("oracle", "run brute-force self-checks");
  oracle->add_option("--instances", oracle_instances, "random instances for the dispersion check")
      ->capture_default_str();
  oracle->add_option("--seed", oracle_seed, "seed")->capture_default_str();

  std::string synth_spec_text;
  std::string synth_out = "stream.jsonl";
  auto* synth = app.add_subcommand("synth", "write a synthetic stream file");
  synth->add_option("--synth", synth_spec_text, "synthetic stream spec (see run --synth)")
      ->required();
  synth->add_option("--out", synth_out, "destination file")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_inputs);
    if (grid->parsed()) return cmd_grid(grid_inputs, grid_path);
    if (report->parsed())
      return cmd_report(report_in, report_format, report_metric, report_group_by,
                        include_disqualified, report_out, plot_best);
    if (oracle->parsed()) return cmd_oracle(oracle_instances, oracle_seed);
    if (synth->parsed()) {
      const Stream stream = synth_stream(parse_synth_spec(synth_spec_text));
      serialize_stream_file(stream, synth_out);
      std::cout << "wrote " << stream.records.size() << " records to " << synth_out << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
