#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "streampipe/pipeline.hpp"
#include "streampipe/report.hpp"
#include "test_util.hpp"

using namespace streampipe;

namespace {

SynthSpec desk_hour(std::uint64_t seed = 1, int cameras = 4, double rate = 20.0) {
  SynthSpec spec;
  spec.num_identities = 10;
  spec.crops_per_identity_rate = rate;
  spec.camera_weights.assign(static_cast<std::size_t>(cameras),
                             1.0 / static_cast<double>(cameras));
  spec.duration_ms = 3600000;
  spec.cluster_spread = 0.02;
  spec.cluster_separation = 1.2;
  spec.feature_dim = 32;
  spec.fps = 1.0;
  spec.rng_seed = seed;
  return spec;
}

CostModel zero_cost() {
  CostModel m;
  m.sds_fixed_s = 0.0;
  m.sds_cost_per_pair_s = 0.0;
  m.train_fixed_s = 0.0;
  m.train_cost_per_iteration_s = 0.0;
  m.train_cost_per_crop_s = 0.0;
  return m;
}

PipelineConfig base_config(double tau) {
  PipelineConfig config;
  config.tau_minutes = tau;
  config.instances_per_identity = 10;
  config.num_identities = 10;
  config.run_matcher = false;
  config.parallel_sds = false;
  return config;
}

}  // namespace

TEST_CASE("zero-cost model: all deadlines met, latency exactly two segments") {
  const Stream stream = synth_stream(desk_hour());
  for (double tau : {15.0, 20.0, 30.0}) {
    const auto result = simulate_pipeline(stream, base_config(tau), zero_cost());
    CHECK_FALSE(result.schedule.disqualified);
    CHECK(inference_latency_segments(result.schedule) == 2);
    CHECK(inference_latency_minutes(result.schedule) == doctest::Approx(2.0 * tau));
  }
}

TEST_CASE("an hour at tau=20 makes three segments with nominal stage starts") {
  const Stream stream = synth_stream(desk_hour());
  const auto result = simulate_pipeline(stream, base_config(20.0), zero_cost());
  REQUIRE(result.schedule.segments.size() == 3);
  const double len = 1200.0;
  for (int t = 0; t < 3; ++t) {
    const auto& seg = result.schedule.segments[t];
    CHECK(seg.collect.start_s == doctest::Approx(t * len));
    CHECK(seg.collect.end_s == doctest::Approx((t + 1) * len));
    CHECK(seg.sds.start_s == doctest::Approx((t + 1) * len));
    CHECK(seg.train.start_s == doctest::Approx((t + 2) * len));
  }
  // train(0) runs somewhere inside [40, 60) minutes when stage costs fit.
  CHECK(result.schedule.segments[0].train.start_s >= 2400.0);
  CHECK(result.schedule.segments[0].train.end_s <= 3600.0);
}

TEST_CASE("a stage overrunning its slot disqualifies the configuration") {
  const Stream stream = synth_stream(desk_hour());
  PipelineConfig config = base_config(20.0);
  CostModel cost = zero_cost();
  // E * I * coefficient just over the 1200 s slot.
  config.epochs = 1;
  config.iterations = 100;
  cost.train_cost_per_iteration_s = 12.001;
  const auto result = simulate_pipeline(stream, config, cost);
  CHECK(result.schedule.disqualified);
  for (const auto& seg : result.schedule.segments) CHECK_FALSE(seg.train.deadline_ok);
  CHECK_THROWS_AS(inference_latency_segments(result.schedule), std::logic_error);

  const auto verdict = check_time_constraint(result.schedule, 20.0);
  CHECK_FALSE(verdict.pass);
}

TEST_CASE("memory mode with growing selection cost fails late segments only") {
  const Stream stream = synth_stream(desk_hour());
  PipelineConfig config = base_config(15.0);
  config.memory = true;
  CostModel cost = zero_cost();
  cost.sds_cost_per_pair_s = 0.5;  // grows with the accumulating memory view

  const auto result = simulate_pipeline(stream, config, cost);
  CHECK(result.schedule.disqualified);
  const auto& segs = result.schedule.segments;
  REQUIRE(segs.size() == 4);
  // Input grows with memory, so evals and simulated durations grow too.
  for (std::size_t t = 1; t < segs.size(); ++t) {
    CHECK(segs[t].sds_input >= segs[t - 1].sds_input);
    CHECK(segs[t].sds.duration_s() >= segs[t - 1].sds.duration_s());
  }
  CHECK_FALSE(segs.back().sds.deadline_ok);
}

TEST_CASE("memory-mode SDS input equals the memory view and accumulates") {
  const Stream stream = synth_stream(desk_hour());
  PipelineConfig standard = base_config(20.0);
  PipelineConfig memory = standard;
  memory.memory = true;
  const auto rs = simulate_pipeline(stream, standard, zero_cost());
  const auto rm = simulate_pipeline(stream, memory, zero_cost());

  std::int64_t running = 0;
  for (std::size_t t = 0; t < rs.schedule.segments.size(); ++t) {
    running += rs.schedule.segments[t].collected;
    CHECK(rm.schedule.segments[t].sds_input == running);  // 60-minute retention covers the hour
    CHECK(rs.schedule.segments[t].sds_input == rs.schedule.segments[t].collected);
  }
}

TEST_CASE("steady state: exactly one training completes per segment slot") {
  const Stream stream = synth_stream(desk_hour());
  const auto result = simulate_pipeline(stream, base_config(20.0), zero_cost());
  REQUIRE_FALSE(result.schedule.disqualified);
  const double len = result.schedule.segment_len_s;
  for (const auto& seg : result.schedule.segments) {
    REQUIRE(seg.selected_total > 0);
    // train(t) lives entirely inside slot t+2.
    CHECK(seg.train.start_s == doctest::Approx((seg.segment + 2) * len));
    CHECK(seg.train.end_s <= (seg.segment + 3) * len + 1e-9);
  }
}

TEST_CASE("global matcher") {
  SUBCASE("an empty gallery mints id 0") {
    GlobalMatcher matcher(0.5, 0.9, Metric::euclidean);
    CHECK(matcher.assign(normalize_feature({1.0, 0.0})) == 0);
  }
  SUBCASE("an exact repeat reuses the id") {
    GlobalMatcher matcher(0.5, 0.9, Metric::euclidean);
    const auto f = normalize_feature({1.0, 2.0, 3.0});
    CHECK(matcher.assign(f) == 0);
    CHECK(matcher.assign(f) == 0);
    CHECK(matcher.gallery_size() == 1);
  }
  SUBCASE("well-separated identities match ground truth almost always") {
    SynthSpec spec = desk_hour(3, 2, 10.0);
    spec.num_identities = 2;
    spec.duration_ms = 600000;
    const Stream stream = synth_stream(spec);
    PipelineConfig config = base_config(5.0);
    config.num_identities = 2;
    config.run_matcher = true;
    const auto result = simulate_pipeline(stream, config, zero_cost());
    REQUIRE(result.match_accuracy.has_value());
    CHECK(*result.match_accuracy >= 0.99);
  }
}

TEST_CASE("grid of size one equals a single simulation") {
  const Stream stream = synth_stream(desk_hour());
  PipelineConfig config = base_config(20.0);
  config.epochs = 2;
  config.iterations = 250;
  GridAxes axes;
  axes.instances_per_identity = {config.instances_per_identity};
  axes.iterations = {config.iterations};
  axes.epochs = {config.epochs};
  axes.tau_minutes = {config.tau_minutes};
  axes.memory_modes = {false};

  const auto grid = grid_run(stream, config, zero_cost(), axes);
  CHECK(grid.num_configurations == 1);

  const auto single = simulate_pipeline(stream, config, zero_cost());
  Table expected;
  expected.columns = experiment_columns();
  append_experiment_rows(expected, 0, single);
  CHECK(to_csv(grid.experiments) == to_csv(expected));
}

TEST_CASE("reference grid enumerates 864 configurations") {
  CHECK(GridAxes::reference_grid().size() == 864);
}

TEST_CASE("simulation output is deterministic and concurrency-invariant") {
  const Stream stream = synth_stream(desk_hour());
  PipelineConfig config = base_config(20.0);
  config.memory = true;

  const auto a = simulate_pipeline(stream, config, CostModel{});
  const auto b = simulate_pipeline(stream, config, CostModel{});
  Table ta, tb;
  ta.columns = tb.columns = experiment_columns();
  append_experiment_rows(ta, 0, a);
  append_experiment_rows(tb, 0, b);
  CHECK(to_csv(ta) == to_csv(tb));

  config.concurrent = true;
  const auto c = simulate_pipeline(stream, config, CostModel{});
  Table tc;
  tc.columns = experiment_columns();
  append_experiment_rows(tc, 0, c);
  CHECK(to_csv(ta) == to_csv(tc));
  CHECK(summary_json(a) == summary_json(c));
}

TEST_CASE("relaxed mode tolerates slot overruns within the depth bound") {
  const Stream stream = synth_stream(desk_hour());
  PipelineConfig config = base_config(20.0);
  CostModel cost = zero_cost();
  cost.train_fixed_s = 1500.0;  // over one slot but within two

  config.strict = true;
  CHECK(simulate_pipeline(stream, config, cost).schedule.disqualified);

  config.strict = false;
  config.max_in_flight = 3;
  const auto relaxed = simulate_pipeline(stream, config, cost);
  CHECK_FALSE(relaxed.schedule.disqualified);

  CostModel heavy = cost;
  heavy.train_fixed_s = 3000.0;  // beyond the depth-3 budget
  CHECK(simulate_pipeline(stream, config, heavy).schedule.disqualified);
}

TEST_CASE("trainer hook overrides the cost model duration") {
  const Stream stream = synth_stream(desk_hour());
  int calls = 0;
  const TrainerHook trainer = [&calls](const TrainRequest& request) {
    ++calls;
    CHECK(request.record_indices.size() == request.pseudo_labels.size());
    return TrainOutcome{42.0, "external"};
  };
  const auto result = simulate_pipeline(stream, base_config(20.0), zero_cost(), trainer);
  CHECK(calls == 3);
  for (const auto& seg : result.schedule.segments)
    CHECK(seg.train.duration_s() == doctest::Approx(42.0));
}

TEST_CASE("budgets, shortfalls, and selections reconcile per cell") {
  SynthSpec spec = desk_hour(5, 3, 8.0);  // sparse stream forces shortfalls
  const Stream stream = synth_stream(spec);
  PipelineConfig config = base_config(20.0);
  config.instances_per_identity = 40;  // k = 400 over ~140 collected crops
  const auto result = simulate_pipeline(stream, config, zero_cost());

  for (const auto& seg : result.schedule.segments) {
    for (const auto& cam : seg.per_camera) {
      CHECK(static_cast<std::int64_t>(cam.indices.size()) ==
            std::min(cam.budget, cam.available));
    }
  }
  std::int64_t selected = 0, shortfall = 0;
  for (const auto& seg : result.schedule.segments) {
    selected += seg.selected_total;
    shortfall += seg.shortfall_total;
  }
  const std::int64_t k = subset_size(config.instances_per_identity, config.num_identities);
  CHECK(selected + shortfall == k);
}

TEST_CASE("pipeline config from key-values applies overrides and validates") {
  KeyValues kv;
  kv["tau_minutes"] = "15";
  kv["K"] = "18";
  kv["memory"] = "true";
  kv["budget_mode"] = "causal";
  kv["metric"] = "cosine";
  kv["eps"] = "0.4";
  const auto config = pipeline_config_from_key_values(kv);
  CHECK(config.tau_minutes == 15.0);
  CHECK(config.instances_per_identity == 18);
  CHECK(config.memory);
  CHECK(config.budget_mode == ProportionSource::causal);
  CHECK(config.metric == Metric::cosine);
  CHECK(config.dbscan_eps == 0.4);

  kv["budget_mode"] = "psychic";
  CHECK_THROWS_AS(pipeline_config_from_key_values(kv), std::runtime_error);
}

TEST_CASE("a non-divisor stream length yields a flagged partial segment, same latency") {
  SynthSpec spec = desk_hour();
  spec.duration_ms = 3000000;  // 50 minutes at tau=20: two full segments + one partial
  const Stream stream = synth_stream(spec);
  const auto result = simulate_pipeline(stream, base_config(20.0), zero_cost());
  REQUIRE(result.schedule.segments.size() == 3);
  CHECK_FALSE(result.schedule.segments[0].partial);
  CHECK_FALSE(result.schedule.segments[1].partial);
  CHECK(result.schedule.segments[2].partial);
  const auto& partial = result.schedule.segments[2];
  CHECK(partial.collect.end_s == doctest::Approx(3000.0));
  CHECK(partial.sds.start_s == doctest::Approx(3000.0));
  CHECK(partial.train.start_s == doctest::Approx(4200.0));
  CHECK(inference_latency_segments(result.schedule) == 2);
}

TEST_CASE("cosine metric runs the whole pipeline") {
  const Stream stream = synth_stream(desk_hour());
  PipelineConfig config = base_config(20.0);
  config.metric = Metric::cosine;
  config.dbscan_eps = 0.18;  // 1 - cos similarity; ~0.6 euclidean on unit vectors
  config.run_matcher = true;
  const auto result = simulate_pipeline(stream, config, zero_cost());
  CHECK_FALSE(result.schedule.disqualified);
  for (const auto& seg : result.schedule.segments) {
    REQUIRE(seg.purity.has_value());
    CHECK(*seg.purity >= 0.95);
  }
  REQUIRE(result.match_accuracy.has_value());
  CHECK(*result.match_accuracy >= 0.99);
}

TEST_CASE("budgets table reconciles fractional, integer, available, shortfall") {
  SynthSpec spec = desk_hour(5, 3, 8.0);
  const Stream stream = synth_stream(spec);
  PipelineConfig config = base_config(20.0);
  config.instances_per_identity = 40;  // forces shortfalls
  const auto result = simulate_pipeline(stream, config, zero_cost());

  const Table table = budgets_table(result);
  CHECK(table.columns == std::vector<std::string>{"segment", "camera", "fractional", "integer",
                                                  "available", "shortfall"});
  CHECK(table.rows.size() ==
        static_cast<std::size_t>(result.counts.num_cameras * result.counts.num_segments));
  for (const auto& row : table.rows) {
    const auto integer = std::get<std::int64_t>(row[3]);
    const auto available = std::get<std::int64_t>(row[4]);
    const auto shortfall = std::get<std::int64_t>(row[5]);
    CHECK(shortfall == std::max<std::int64_t>(0, integer - available));
  }

  // Standard mode: availability is the per-cell collection count.
  CHECK(result.available.n == result.counts.n);

  // Memory mode: availability is the (cumulative) memory view size.
  config.memory = true;
  const auto memory = simulate_pipeline(stream, config, zero_cost());
  for (int i = 0; i < memory.counts.num_cameras; ++i) {
    std::int64_t cum = 0;
    for (int t = 0; t < memory.counts.num_segments; ++t) {
      cum += memory.counts.at(i, t);
      CHECK(memory.available.at(i, t) == cum);
    }
  }
}

TEST_CASE("schedule and subset tables carry the pinned columns") {
  const Stream stream = synth_stream(desk_hour());
  const auto result = simulate_pipeline(stream, base_config(20.0), zero_cost());
  const Table sched = schedule_table(result);
  CHECK(sched.columns == std::vector<std::string>{"segment", "stage", "start_s", "end_s",
                                                  "duration_s", "deadline_ok"});
  CHECK(sched.rows.size() == 9);  // 3 segments x 3 stages

  const Table subsets = subsets_table(result, stream);
  CHECK(subsets.columns ==
        std::vector<std::string>{"segment", "camera", "record_id", "gt", "cluster"});
  std::int64_t selected = 0;
  for (const auto& seg : result.schedule.segments) selected += seg.selected_total;
  CHECK(static_cast<std::int64_t>(subsets.rows.size()) == selected);
}
