// bench.h
//
// Training throughput (RTX = d_train / t_train) and inference latency
// (RTF = t_infer / d_infer) of the conversion path, for resampling-based and
// cross-attention-based alignment of the semantic sources.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dsff/align_fuse.h"
#include "dsff/common.h"
#include "dsff/conditioning.h"
#include "dsff/decoder.h"
#include "dsff/prosody.h"

namespace dsff {

enum class AlignStrategy { kResampling, kCrossAttention };

std::string to_string(AlignStrategy s);

struct SourceShape {
  double frame_rate = 50.0;
  Eigen::Index dim = 512;
};

struct WorkloadConfig {
  int n_utterances = 20;
  double duration_s = 10.0;
  std::vector<SourceShape> sources = {{25.0, 512}, {50.0, 1024}, {50.0, 768}};
  double target_frame_rate = 100.0;
  Eigen::Index latent_dim = 384;
  Eigen::Index n_mels = 80;
  Eigen::Index attn_dim = 384;
  int latent_factors = 8;
  double lambda_relative = 1e-3;
  std::uint64_t seed = 2024;
};

// Workload description carried in every report; derived from inputs only.
struct WorkloadRecord {
  int n_utterances = 0;
  double total_duration_s = 0.0;
  std::vector<SourceShape> sources;
  double target_frame_rate = 0.0;
  Eigen::Index target_frames = 0;  // summed over utterances
  Eigen::Index latent_dim = 0;

  bool operator==(const WorkloadRecord& other) const;
};

struct BenchUtterance {
  std::vector<FeatureSequence> sources;
  QuantizedTrack f0_bins;
  QuantizedTrack energy_bins;
  std::string speaker;
  FeatureSequence mel;  // target, on the common grid
  double duration_s = 0.0;
};

struct Workload {
  WorkloadConfig config;
  std::vector<BenchUtterance> utterances;

  WorkloadRecord record() const;
};

// Seeded synthetic utterances: a smooth latent trajectory drives both the
// semantic sources (each at its own frame rate) and the mel target.
Workload make_workload(const WorkloadConfig& cfg);

// Fixed weights for one alignment strategy.
struct StrategyModel {
  AlignStrategy strategy = AlignStrategy::kResampling;
  std::vector<ProjectionWeights> projections;   // resampling
  std::vector<CrossAttnWeights> attention;      // cross attention
  ProjectionWeights condenc;
  EmbeddingTable f0_table;
  EmbeddingTable energy_table;
  SpeakerTable speakers;
  DecoderWeights decoder;

  // Learned parameters added by the alignment stage beyond the per-source
  // linear projections: zero for resampling, the query and key projections
  // for cross attention.
  std::int64_t extra_parameters() const;
};

// Seeded alignment, condition and table weights; the decoder is fit on the
// first `train_utterances` utterances (all when 0).
StrategyModel make_strategy_model(AlignStrategy strategy, const Workload& workload,
                                  std::size_t train_utterances = 0);

Condition strategy_condition(const StrategyModel& model, const BenchUtterance& u);

struct BenchOptions {
  int runs = 3;
  int jobs = 1;
  // Called once per utterance inside the timed region.
  std::function<void()> stage_hook;
};

struct BenchReport {
  AlignStrategy strategy = AlignStrategy::kResampling;
  std::optional<double> rtx;
  std::optional<double> rtf;
  std::vector<double> run_seconds;  // timed runs, warm-up excluded
  WorkloadRecord workload;
  std::int64_t extra_parameters = 0;
};

// Untimed warm-up on the first utterance, then `runs` timed passes over the
// whole workload; t_infer is the median pass time.
BenchReport measure_rtf(AlignStrategy strategy, const Workload& workload,
                        const BenchOptions& options = {});

// Times feature preparation via the strategy plus one full ridge fit.
BenchReport measure_rtx(AlignStrategy strategy, const Workload& workload,
                        const BenchOptions& options = {});

// Same measurements with prebuilt weights (the model's decoder is used for
// inference; measure_rtx refits its own).
BenchReport measure_rtf(const StrategyModel& model, const Workload& workload,
                        const BenchOptions& options = {});
BenchReport measure_rtx(const StrategyModel& model, const Workload& workload,
                        const BenchOptions& options = {});

struct AlignmentComparison {
  BenchReport resampling;
  BenchReport cross_attention;
  // Held-out reconstruction MCD of each strategy's fitted decoder.
  double resampling_mcd = 0.0;
  double cross_attention_mcd = 0.0;
  double mcd_delta = 0.0;  // cross attention minus resampling
};

AlignmentComparison compare_alignment(const WorkloadConfig& cfg, const BenchOptions& options = {});

std::string format_bench_table(const AlignmentComparison& cmp);
std::string format_bench_csv(const AlignmentComparison& cmp);

}  // namespace dsff
