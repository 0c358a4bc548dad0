// bench.cpp

#include "dsff/bench.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "dsff/metrics.h"
#include "dsff/pipeline.h"
#include "dsff/rng.h"

namespace dsff {
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

constexpr int kSpeakers = 4;

// Smooth trajectories: each factor is a sum of three random low-frequency
// sinusoids sampled on the target grid.
Matrix LatentTrajectory(Rng& rng, Eigen::Index frames, int factors, double frame_rate) {
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  Matrix z(frames, factors);
  for (int k = 0; k < factors; ++k) {
    double freq[3];
    double phase[3];
    for (int h = 0; h < 3; ++h) {
      freq[h] = rng.Uniform(0.2, 3.0);
      phase[h] = rng.Uniform(0.0, kTwoPi);
    }
    for (Eigen::Index t = 0; t < frames; ++t) {
      const double time = static_cast<double>(t) / frame_rate;
      double v = 0.0;
      for (int h = 0; h < 3; ++h) v += std::sin(kTwoPi * freq[h] * time + phase[h]);
      z(t, k) = v / 3.0;
    }
  }
  return z;
}

}  // namespace

std::string to_string(AlignStrategy s) {
  return s == AlignStrategy::kResampling ? "resampling" : "cross_attention";
}

bool WorkloadRecord::operator==(const WorkloadRecord& o) const {
  if (n_utterances != o.n_utterances || total_duration_s != o.total_duration_s ||
      target_frame_rate != o.target_frame_rate || target_frames != o.target_frames ||
      latent_dim != o.latent_dim || sources.size() != o.sources.size()) {
    return false;
  }
  for (std::size_t i = 0; i < sources.size(); ++i) {
    if (sources[i].frame_rate != o.sources[i].frame_rate || sources[i].dim != o.sources[i].dim) {
      return false;
    }
  }
  return true;
}

WorkloadRecord Workload::record() const {
  WorkloadRecord r;
  r.n_utterances = static_cast<int>(utterances.size());
  r.sources = config.sources;
  r.target_frame_rate = config.target_frame_rate;
  r.latent_dim = config.latent_dim;
  for (const auto& u : utterances) {
    r.total_duration_s += u.duration_s;
    r.target_frames += u.mel.n_frames();
  }
  return r;
}

Workload make_workload(const WorkloadConfig& cfg) {
  Require(cfg.n_utterances >= 1, "workload needs at least one utterance");
  Require(cfg.duration_s > 0.0, "utterance duration must be positive");
  Require(!cfg.sources.empty(), "workload needs at least one source");
  Require(cfg.latent_factors >= 1, "workload needs at least one latent factor");

  Rng rng(cfg.seed);
  Workload w;
  w.config = cfg;

  // Per-source read-out of the latent factors, shared across utterances.
  std::vector<Matrix> readouts;
  for (const auto& s : cfg.sources) {
    Require(s.frame_rate > 0.0 && s.dim >= 1, "invalid source shape");
    readouts.push_back(rng.GaussianMatrix(cfg.latent_factors, s.dim, 1.0));
  }
  const Matrix mel_readout = rng.GaussianMatrix(cfg.latent_factors, cfg.n_mels, 1.0);

  QuantSpec f0_spec;
  QuantSpec energy_spec;
  energy_spec.scale = QuantScale::kLinear;
  energy_spec.lo = 0.0;
  energy_spec.hi = 1.0;

  for (int n = 0; n < cfg.n_utterances; ++n) {
    BenchUtterance u;
    u.duration_s = cfg.duration_s;
    u.speaker = "spk" + std::to_string(n % kSpeakers);
    const auto frames = std::max<Eigen::Index>(
        1, static_cast<Eigen::Index>(std::lround(cfg.duration_s * cfg.target_frame_rate)));
    FeatureSequence latent;
    latent.data = LatentTrajectory(rng, frames, cfg.latent_factors, cfg.target_frame_rate);
    latent.frame_rate = cfg.target_frame_rate;

    for (std::size_t j = 0; j < cfg.sources.size(); ++j) {
      const auto src_frames = std::max<Eigen::Index>(
          1, static_cast<Eigen::Index>(std::lround(cfg.duration_s * cfg.sources[j].frame_rate)));
      FeatureSequence src = resample_time(latent, src_frames);
      src.data = src.data * readouts[j] + rng.GaussianMatrix(src_frames, cfg.sources[j].dim, 0.05);
      src.frame_rate = cfg.sources[j].frame_rate;
      src.source_tag = "src" + std::to_string(j);
      u.sources.push_back(std::move(src));
    }

    u.mel.data = (latent.data * mel_readout).array() - 5.0;
    u.mel.data += rng.GaussianMatrix(frames, cfg.n_mels, 0.01);
    u.mel.frame_rate = cfg.target_frame_rate;
    u.mel.source_tag = "mel";

    F0Track f0;
    f0.frame_rate = cfg.target_frame_rate;
    EnergyTrack energy;
    energy.frame_rate = cfg.target_frame_rate;
    for (Eigen::Index t = 0; t < frames; ++t) {
      const bool voiced = latent.data(t, 0) > -0.6;
      f0.values.push_back(voiced ? 220.0 * std::exp2(latent.data(t, 0)) : 0.0);
      f0.voiced.push_back(voiced);
      energy.values.push_back(0.5 + 0.5 * latent.data(t, cfg.latent_factors > 1 ? 1 : 0));
    }
    u.f0_bins = quantize(f0, f0_spec);
    u.energy_bins = quantize(energy, energy_spec);
    w.utterances.push_back(std::move(u));
  }
  return w;
}

std::int64_t StrategyModel::extra_parameters() const {
  if (strategy == AlignStrategy::kResampling) return 0;
  std::int64_t total = 0;
  for (const auto& a : attention) total += a.w_q.size() + a.w_k.size();
  return total;
}

Condition strategy_condition(const StrategyModel& model, const BenchUtterance& u) {
  const Eigen::Index frames = u.mel.n_frames();
  const double rate = u.mel.frame_rate;
  FeatureSequence f0_emb = embed_quantized(u.f0_bins, model.f0_table);
  FeatureSequence energy_emb = embed_quantized(u.energy_bins, model.energy_table);
  FeatureSequence semantic;
  if (model.strategy == AlignStrategy::kResampling) {
    semantic = fuse_add(u.sources, model.projections, frames);
  } else {
    FeatureSequence queries = f0_emb;
    queries.data += energy_emb.data;
    semantic = fuse_cross_attention(queries, u.sources, model.attention);
  }
  semantic.frame_rate = rate;
  f0_emb.frame_rate = rate;
  energy_emb.frame_rate = rate;
  const FeatureSequence spk = speaker_frames(u.speaker, model.speakers, frames, rate);
  return assemble_condition(semantic, f0_emb, energy_emb, spk, model.condenc);
}

StrategyModel make_strategy_model(AlignStrategy strategy, const Workload& workload,
                                  std::size_t train_utterances) {
  const WorkloadConfig& cfg = workload.config;
  const Eigen::Index d = cfg.latent_dim;
  StrategyModel m;
  m.strategy = strategy;
  for (std::size_t j = 0; j < cfg.sources.size(); ++j) {
    if (strategy == AlignStrategy::kResampling) {
      m.projections.push_back(
          make_projection(cfg.sources[j].dim, d, cfg.seed + 100 + j, "src" + std::to_string(j)));
    } else {
      m.attention.push_back(
          make_cross_attention(d, cfg.sources[j].dim, cfg.attn_dim, d, cfg.seed + 200 + j));
    }
  }
  m.condenc = make_projection(d, d, cfg.seed + 300, "condenc");
  m.f0_table = make_embedding_table(cfg.seed + 301, d);
  m.energy_table = make_embedding_table(cfg.seed + 302, d);
  std::vector<std::string> names;
  for (int s = 0; s < kSpeakers; ++s) names.push_back("spk" + std::to_string(s));
  m.speakers = make_speaker_table(names, d, cfg.seed + 303);

  const std::size_t n = train_utterances == 0
                            ? workload.utterances.size()
                            : std::min(train_utterances, workload.utterances.size());
  PairedDataset data(n);
  for (std::size_t i = 0; i < n; ++i) {
    data[i].condition = strategy_condition(m, workload.utterances[i]);
    data[i].mel = workload.utterances[i].mel;
  }
  m.decoder = fit_ridge_relative(data, cfg.lambda_relative);
  return m;
}

BenchReport measure_rtf(const StrategyModel& model, const Workload& workload,
                        const BenchOptions& options) {
  Require(!workload.utterances.empty(), "empty workload");
  Require(options.runs >= 1, "need at least one timed run");
  const WorkloadRecord record = workload.record();
  Require(record.total_duration_s > 0.0, "workload has zero duration");

  const auto infer = [&](const BenchUtterance& u) {
    const FeatureSequence mel = decode(strategy_condition(model, u), model.decoder);
    if (options.stage_hook) options.stage_hook();
    return mel.data(0, 0);
  };

  volatile double sink = infer(workload.utterances.front());  // warm-up
  BenchReport report;
  report.strategy = model.strategy;
  report.workload = record;
  report.extra_parameters = model.extra_parameters();
  for (int r = 0; r < options.runs; ++r) {
    if (options.jobs <= 1) {
      const auto start = Clock::now();
      for (const auto& u : workload.utterances) sink = infer(u);
      report.run_seconds.push_back(Seconds(start));
    } else {
      std::vector<double> per_utt(workload.utterances.size());
      parallel_for(workload.utterances.size(), options.jobs, [&](std::size_t i) {
        const auto start = Clock::now();
        const double v = infer(workload.utterances[i]);
        per_utt[i] = Seconds(start);
        (void)v;
      });
      double total = 0.0;
      for (double t : per_utt) total += t;
      report.run_seconds.push_back(total);
    }
  }
  (void)sink;
  report.rtf = Median(report.run_seconds) / record.total_duration_s;
  return report;
}

BenchReport measure_rtx(const StrategyModel& model, const Workload& workload,
                        const BenchOptions& options) {
  Require(!workload.utterances.empty(), "empty dataset");
  Require(options.runs >= 1, "need at least one timed run");
  const WorkloadRecord record = workload.record();
  Require(record.total_duration_s > 0.0, "dataset has zero duration");
  const double lambda_relative = workload.config.lambda_relative;

  const auto train = [&](std::size_t count) {
    PairedDataset data(count);
    const auto prep = [&](std::size_t i) {
      data[i].condition = strategy_condition(model, workload.utterances[i]);
      if (options.stage_hook) options.stage_hook();
      data[i].mel = workload.utterances[i].mel;
    };
    if (options.jobs <= 1) {
      for (std::size_t i = 0; i < count; ++i) prep(i);
    } else {
      parallel_for(count, options.jobs, prep);
    }
    return fit_ridge_relative(data, lambda_relative);
  };

  volatile double sink = train(1).bias(0);  // warm-up
  BenchReport report;
  report.strategy = model.strategy;
  report.workload = record;
  report.extra_parameters = model.extra_parameters();
  for (int r = 0; r < options.runs; ++r) {
    const auto start = Clock::now();
    sink = train(workload.utterances.size()).bias(0);
    report.run_seconds.push_back(Seconds(start));
  }
  (void)sink;
  report.rtx = record.total_duration_s / Median(report.run_seconds);
  return report;
}

BenchReport measure_rtf(AlignStrategy strategy, const Workload& workload,
                        const BenchOptions& options) {
  Require(!workload.utterances.empty(), "empty workload");
  return measure_rtf(make_strategy_model(strategy, workload), workload, options);
}

BenchReport measure_rtx(AlignStrategy strategy, const Workload& workload,
                        const BenchOptions& options) {
  Require(!workload.utterances.empty(), "empty dataset");
  return measure_rtx(make_strategy_model(strategy, workload), workload, options);
}

AlignmentComparison compare_alignment(const WorkloadConfig& cfg, const BenchOptions& options) {
  const Workload workload = make_workload(cfg);
  const std::size_t n = workload.utterances.size();
  // Hold out the last utterance for the quality comparison when possible.
  const std::size_t train = n > 1 ? n - 1 : n;
  const BenchUtterance& held_out = workload.utterances.back();

  AlignmentComparison cmp;
  for (AlignStrategy s : {AlignStrategy::kResampling, AlignStrategy::kCrossAttention}) {
    const StrategyModel model = make_strategy_model(s, workload, train);
    const double quality =
        mcd(decode(strategy_condition(model, held_out), model.decoder), held_out.mel);
    BenchReport report = measure_rtf(model, workload, options);
    report.rtx = measure_rtx(model, workload, options).rtx;
    if (s == AlignStrategy::kResampling) {
      cmp.resampling = std::move(report);
      cmp.resampling_mcd = quality;
    } else {
      cmp.cross_attention = std::move(report);
      cmp.cross_attention_mcd = quality;
    }
  }
  cmp.mcd_delta = cmp.cross_attention_mcd - cmp.resampling_mcd;
  return cmp;
}

std::string format_bench_table(const AlignmentComparison& cmp) {
  std::ostringstream out;
  const WorkloadRecord& w = cmp.resampling.workload;
  out << "workload: " << w.n_utterances << " utterances, " << w.total_duration_s
      << " s audio, target " << w.target_frame_rate << " fps, D=" << w.latent_dim << ", sources";
  for (const auto& s : w.sources) out << " " << s.dim << "@" << s.frame_rate << "fps";
  out << "\n\n";
  out << std::left << std::setw(18) << "strategy" << std::right << std::setw(12) << "RTX"
      << std::setw(12) << "RTF" << std::setw(14) << "extra params" << std::setw(12) << "MCD (dB)"
      << "\n";
  const auto row = [&](const BenchReport& r, double quality) {
    out << std::left << std::setw(18) << to_string(r.strategy) << std::right << std::fixed
        << std::setprecision(2) << std::setw(12) << r.rtx.value_or(0.0) << std::setprecision(4)
        << std::setw(12) << r.rtf.value_or(0.0) << std::setw(14) << r.extra_parameters
        << std::setprecision(3) << std::setw(12) << quality << "\n";
    out.unsetf(std::ios::fixed);
  };
  row(cmp.cross_attention, cmp.cross_attention_mcd);
  row(cmp.resampling, cmp.resampling_mcd);
  out << "\nMCD delta (cross_attention - resampling): " << std::fixed << std::setprecision(3)
      << cmp.mcd_delta << " dB\n";
  return out.str();
}

std::string format_bench_csv(const AlignmentComparison& cmp) {
  std::ostringstream out;
  out << "strategy,rtx,rtf,extra_parameters,mcd_db,n_utterances,total_duration_s\n";
  out << std::setprecision(17);
  const auto row = [&](const BenchReport& r, double quality) {
    out << to_string(r.strategy) << "," << r.rtx.value_or(0.0) << "," << r.rtf.value_or(0.0) << ","
        << r.extra_parameters << "," << quality << "," << r.workload.n_utterances << ","
        << r.workload.total_duration_s << "\n";
  };
  row(cmp.cross_attention, cmp.cross_attention_mcd);
  row(cmp.resampling, cmp.resampling_mcd);
  return out.str();
}

}  // namespace dsff
