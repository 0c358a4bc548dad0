// bench_test.cpp

#include <chrono>
#include <thread>

#include "doctest.h"
#include "dsff/bench.h"

using namespace dsff;

namespace {

WorkloadConfig Small(int utterances, double seconds) {
  WorkloadConfig c;
  c.n_utterances = utterances;
  c.duration_s = seconds;
  c.sources = {{25.0, 32}, {50.0, 48}, {50.0, 40}};
  c.latent_dim = 64;
  c.n_mels = 20;
  c.attn_dim = 32;
  return c;
}

}  // namespace

TEST_SUITE("bench") {

TEST_CASE("workload accounting comes from inputs") {
  const Workload w = make_workload(Small(3, 1.5));
  const WorkloadRecord r = w.record();
  CHECK(r.n_utterances == 3);
  CHECK(r.total_duration_s == doctest::Approx(4.5));
  CHECK(r.target_frames == 3 * 150);
  REQUIRE(w.utterances[0].sources.size() == 3);
  CHECK(w.utterances[0].sources[0].n_frames() == 38);  // lround(1.5 * 25)
  CHECK(w.utterances[0].sources[1].n_frames() == 75);
  CHECK(w.utterances[0].sources[2].dim() == 40);
  CHECK(make_workload(Small(3, 1.5)).utterances[2].mel.data == w.utterances[2].mel.data);
  CHECK_THROWS_AS(make_workload(Small(0, 1.0)), Error);
  CHECK_THROWS_AS(make_workload(Small(1, 0.0)), Error);
}

TEST_CASE("injected delay bounds rtf from below") {
  const Workload w = make_workload(Small(1, 1.0));
  BenchOptions opts;
  opts.runs = 3;
  opts.stage_hook = [] { std::this_thread::sleep_for(std::chrono::milliseconds(500)); };
  const BenchReport r = measure_rtf(AlignStrategy::kResampling, w, opts);
  REQUIRE(r.rtf.has_value());
  CHECK(*r.rtf >= 0.5);
  CHECK(r.run_seconds.size() == 3);
}

TEST_CASE("repeated measurement: positive values, identical workloads") {
  const Workload w = make_workload(Small(2, 1.0));
  const BenchReport a = measure_rtf(AlignStrategy::kResampling, w);
  const BenchReport b = measure_rtf(AlignStrategy::kResampling, w);
  CHECK(*a.rtf > 0.0);
  CHECK(*b.rtf > 0.0);
  CHECK(a.workload == b.workload);
  const BenchReport x = measure_rtx(AlignStrategy::kCrossAttention, w);
  CHECK(*x.rtx > 0.0);
  CHECK(x.workload == a.workload);
}

TEST_CASE("parallel timing mode") {
  const Workload w = make_workload(Small(3, 1.0));
  BenchOptions opts;
  opts.jobs = 2;
  const BenchReport r = measure_rtf(AlignStrategy::kResampling, w, opts);
  CHECK(*r.rtf > 0.0);
  CHECK(*measure_rtx(AlignStrategy::kResampling, w, opts).rtx > 0.0);
}

TEST_CASE("doubling the dataset changes rtx by less than 2x") {
  const Workload small = make_workload(Small(4, 4.0));
  const Workload large = make_workload(Small(8, 4.0));
  const double a = *measure_rtx(AlignStrategy::kResampling, small).rtx;
  const double b = *measure_rtx(AlignStrategy::kResampling, large).rtx;
  CHECK(b / a < 2.0);
  CHECK(a / b < 2.0);
}

TEST_CASE("cost dominance when frame pairs dwarf frames") {
  // 400 target frames against 100-200 source frames: pair product >= 100x.
  WorkloadConfig c = Small(2, 4.0);
  c.latent_dim = 128;
  c.attn_dim = 128;
  const Workload w = make_workload(c);
  const double resampling = *measure_rtf(AlignStrategy::kResampling, w).rtf;
  const double attention = *measure_rtf(AlignStrategy::kCrossAttention, w).rtf;
  CHECK(resampling < attention);
}

TEST_CASE("compare_alignment structure") {
  BenchOptions opts;
  opts.runs = 3;
  const AlignmentComparison cmp = compare_alignment(Small(3, 1.0), opts);
  CHECK(cmp.resampling.strategy == AlignStrategy::kResampling);
  CHECK(cmp.cross_attention.strategy == AlignStrategy::kCrossAttention);
  CHECK(cmp.resampling.workload == cmp.cross_attention.workload);
  CHECK(cmp.resampling.extra_parameters == 0);
  CHECK(cmp.cross_attention.extra_parameters == 3 * 64 * 32 + (32 + 48 + 40) * 32);
  CHECK(cmp.resampling.rtx.has_value());
  CHECK(cmp.resampling.rtf.has_value());
  CHECK(cmp.mcd_delta == doctest::Approx(cmp.cross_attention_mcd - cmp.resampling_mcd));
  const std::string csv = format_bench_csv(cmp);
  CHECK(csv.find("strategy,rtx,rtf") == 0);
  CHECK(csv.find("\nresampling,") != std::string::npos);
  CHECK(csv.find("\ncross_attention,") != std::string::npos);
  const std::string table = format_bench_table(cmp);
  CHECK(table.find("3 utterances") != std::string::npos);
}

TEST_CASE("empty workloads are rejected") {
  Workload w = make_workload(Small(1, 1.0));
  const StrategyModel m = make_strategy_model(AlignStrategy::kResampling, w);
  w.utterances.clear();
  CHECK_THROWS_AS(measure_rtf(m, w), Error);
  CHECK_THROWS_AS(measure_rtx(m, w), Error);
}

}  // TEST_SUITE
