// prosody.cpp

#include "dsff/prosody.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "dsff/rng.h"

namespace dsff {
namespace {

// Candidate peaks within this fraction of the strongest one are preferred in
// order of increasing lag; period multiples are never chosen over the period.
constexpr double kOctavePreference = 0.9;

double ScaleCoord(double v, QuantScale scale) {
  return scale == QuantScale::kLog ? std::log(v) : v;
}

double ScaleInverse(double g, QuantScale scale) {
  return scale == QuantScale::kLog ? std::exp(g) : g;
}

double Median(std::vector<double> values) {
  const std::size_t n = values.size();
  const std::size_t mid = n / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double upper = values[mid];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lower + upper);
}

Eigen::Index NearestSource(Eigen::Index t, Eigen::Index target, Eigen::Index source) {
  if (target == 1) return 0;
  const double p = static_cast<double>(t) * static_cast<double>(source - 1) /
                   static_cast<double>(target - 1);
  return std::min<Eigen::Index>(source - 1, static_cast<Eigen::Index>(std::lround(p)));
}

}  // namespace

void ValidateF0Track(const F0Track& track) {
  Require(track.values.size() == track.voiced.size(), "F0 values and voicing differ in length");
  Require(track.frame_rate > 0.0, "F0 frame rate must be positive");
  for (std::size_t i = 0; i < track.values.size(); ++i) {
    const double v = track.values[i];
    Require(std::isfinite(v) && v >= 0.0, "F0 values must be finite and nonnegative");
    Require((v > 0.0) == static_cast<bool>(track.voiced[i]),
            "F0 value must be zero exactly on unvoiced frames");
  }
}

F0Track extract_f0(const AudioBuffer& audio, const F0Config& cfg) {
  Require(audio.sample_rate > 0, "sample rate must be positive");
  const double sr = audio.sample_rate;
  Require(cfg.f0_min > 0.0 && cfg.f0_min < cfg.f0_max && cfg.f0_max <= sr / 4.0,
          "invalid F0 range: need 0 < f0_min < f0_max <= sample_rate / 4");
  Require(cfg.hop > 0.0 && cfg.frame_length > 0.0, "invalid F0 framing");

  const int frame_len = static_cast<int>(std::lround(cfg.frame_length * sr));
  const int hop = std::max(1, static_cast<int>(std::lround(cfg.hop * sr)));
  const int lag_min = std::max(2, static_cast<int>(std::floor(sr / cfg.f0_max)));
  const int lag_max = static_cast<int>(std::ceil(sr / cfg.f0_min));
  Require(frame_len > lag_max + 1, "F0 frame too short for the lowest F0");
  const auto len = static_cast<int>(audio.samples.size());
  if (len < frame_len) Fail(ErrorCode::kInvalidArgument, "audio too short for one F0 frame");

  const int n_frames = 1 + (len - frame_len) / hop;
  F0Track track;
  track.values.assign(n_frames, 0.0);
  track.voiced.assign(n_frames, false);
  track.frame_rate = sr / hop;

  std::vector<double> x(frame_len);
  std::vector<double> prefix(frame_len + 1);
  std::vector<double> nccf(lag_max + 2, 0.0);
  for (int f = 0; f < n_frames; ++f) {
    const double* frame = audio.samples.data() + static_cast<std::ptrdiff_t>(f) * hop;
    double mean = 0.0;
    double raw_energy = 0.0;
    for (int n = 0; n < frame_len; ++n) {
      mean += frame[n];
      raw_energy += frame[n] * frame[n];
    }
    mean /= frame_len;
    if (std::sqrt(raw_energy / frame_len) < cfg.silence_rms) continue;

    prefix[0] = 0.0;
    for (int n = 0; n < frame_len; ++n) {
      x[n] = frame[n] - mean;
      prefix[n + 1] = prefix[n] + x[n] * x[n];
    }

    // Normalized cross-correlation between x[0, N - lag) and x[lag, N).
    for (int lag = lag_min - 1; lag <= lag_max + 1; ++lag) {
      const int span = frame_len - lag;
      double dot = 0.0;
      for (int n = 0; n < span; ++n) dot += x[n] * x[n + lag];
      const double e0 = prefix[span];
      const double e1 = prefix[frame_len] - prefix[lag];
      const double denom = std::sqrt(e0 * e1);
      nccf[lag] = denom > 0.0 ? dot / denom : 0.0;
    }

    double strongest = -1.0;
    for (int lag = lag_min; lag <= lag_max; ++lag) {
      if (nccf[lag] >= nccf[lag - 1] && nccf[lag] > nccf[lag + 1]) {
        strongest = std::max(strongest, nccf[lag]);
      }
    }
    if (strongest < cfg.voicing_threshold) continue;

    int best = -1;
    for (int lag = lag_min; lag <= lag_max; ++lag) {
      if (nccf[lag] >= nccf[lag - 1] && nccf[lag] > nccf[lag + 1] &&
          nccf[lag] >= kOctavePreference * strongest) {
        best = lag;
        break;
      }
    }

    const double a = nccf[best - 1];
    const double b = nccf[best];
    const double c = nccf[best + 1];
    const double curvature = a - 2.0 * b + c;
    const double shift = curvature < 0.0 ? 0.5 * (a - c) / curvature : 0.0;
    const double f0 = sr / (best + shift);
    if (f0 < cfg.f0_min || f0 > cfg.f0_max) continue;
    track.values[f] = f0;
    track.voiced[f] = true;
  }
  return track;
}

EnergyTrack extract_energy(const SpectralFrames& frames) {
  Require(frames.magnitudes.rows() >= 1, "no spectral frames");
  Require(frames.magnitudes.allFinite() && (frames.magnitudes.array() >= 0.0).all(),
          "spectral magnitudes must be finite and nonnegative");
  EnergyTrack energy;
  energy.frame_rate = frames.frame_rate;
  energy.values.resize(frames.magnitudes.rows());
  for (Eigen::Index i = 0; i < frames.magnitudes.rows(); ++i) {
    energy.values[i] = frames.magnitudes.row(i).norm();
  }
  return energy;
}

void ValidateQuantSpec(const QuantSpec& spec) {
  Require(spec.n_bins == kQuantBins, "quantization uses exactly 256 bins");
  Require(std::isfinite(spec.lo) && std::isfinite(spec.hi) && spec.lo < spec.hi,
          "quantization range needs lo < hi");
  Require(spec.scale != QuantScale::kLog || spec.lo > 0.0,
          "log-scale quantization needs lo > 0");
}

int quantize_value(double value, const QuantSpec& spec) {
  ValidateQuantSpec(spec);
  if (value == 0.0 || std::isnan(value)) return 0;
  const double v = std::clamp(value, spec.lo, spec.hi);
  const double g_lo = ScaleCoord(spec.lo, spec.scale);
  const double g_hi = ScaleCoord(spec.hi, spec.scale);
  const double frac = std::clamp((ScaleCoord(v, spec.scale) - g_lo) / (g_hi - g_lo), 0.0, 1.0);
  const double span = static_cast<double>(spec.n_bins - 1) - 1e-4;
  return 1 + static_cast<int>(std::floor(frac * span));
}

QuantizedTrack quantize(const F0Track& track, const QuantSpec& spec) {
  ValidateQuantSpec(spec);
  ValidateF0Track(track);
  QuantizedTrack q;
  q.spec = spec;
  q.frame_rate = track.frame_rate;
  q.bins.resize(track.size());
  for (std::size_t i = 0; i < track.size(); ++i) {
    q.bins[i] = track.voiced[i] ? quantize_value(track.values[i], spec) : 0;
  }
  return q;
}

QuantizedTrack quantize(const EnergyTrack& track, const QuantSpec& spec) {
  ValidateQuantSpec(spec);
  QuantizedTrack q;
  q.spec = spec;
  q.frame_rate = track.frame_rate;
  q.bins.resize(track.values.size());
  for (std::size_t i = 0; i < track.values.size(); ++i) {
    Require(std::isfinite(track.values[i]) && track.values[i] >= 0.0,
            "energy values must be finite and nonnegative");
    q.bins[i] = quantize_value(track.values[i], spec);
  }
  return q;
}

double bin_width(const QuantSpec& spec) {
  ValidateQuantSpec(spec);
  const double span = static_cast<double>(spec.n_bins - 1) - 1e-4;
  return (ScaleCoord(spec.hi, spec.scale) - ScaleCoord(spec.lo, spec.scale)) / span;
}

double dequantize(int bin, const QuantSpec& spec) {
  Require(bin >= 0 && bin < spec.n_bins, "bin out of range");
  if (bin == 0) return 0.0;
  const double g = ScaleCoord(spec.lo, spec.scale) + (bin - 0.5) * bin_width(spec);
  return ScaleInverse(g, spec.scale);
}

QuantSpec energy_quant_spec(std::span<const EnergyTrack> corpus, double percentile) {
  Require(percentile > 0.0 && percentile <= 100.0, "percentile must be in (0, 100]");
  std::vector<double> all;
  for (const auto& track : corpus) all.insert(all.end(), track.values.begin(), track.values.end());
  Require(!all.empty(), "energy corpus is empty");
  std::sort(all.begin(), all.end());
  // Linear interpolation between order statistics.
  const double rank = percentile / 100.0 * static_cast<double>(all.size() - 1);
  const auto lo_index = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi_index = std::min(lo_index + 1, all.size() - 1);
  const double frac = rank - static_cast<double>(lo_index);
  double hi = all[lo_index] + frac * (all[hi_index] - all[lo_index]);
  if (!(hi > 0.0)) hi = all.back() > 0.0 ? all.back() : 1.0;

  QuantSpec spec;
  spec.scale = QuantScale::kLinear;
  spec.lo = 0.0;
  spec.hi = hi;
  return spec;
}

EmbeddingTable make_embedding_table(std::uint64_t seed, Eigen::Index dim) {
  Require(dim > 0, "embedding dimension must be positive");
  Rng rng(seed);
  return EmbeddingTable{rng.UniformMatrix(kQuantBins, dim, -0.1, 0.1)};
}

FeatureSequence embed_quantized(const QuantizedTrack& q, const EmbeddingTable& table) {
  Require(table.rows.rows() == q.spec.n_bins, "embedding table rows must equal bin count");
  Require(!q.bins.empty(), "quantized track is empty");
  FeatureSequence out;
  out.frame_rate = q.frame_rate;
  out.data.resize(static_cast<Eigen::Index>(q.bins.size()), table.dim());
  for (std::size_t i = 0; i < q.bins.size(); ++i) {
    Require(q.bins[i] >= 0 && q.bins[i] < q.spec.n_bins, "bin out of range");
    out.data.row(static_cast<Eigen::Index>(i)) = table.rows.row(q.bins[i]);
  }
  return out;
}

double voiced_median(std::span<const F0Track> tracks) {
  std::vector<double> voiced;
  for (const auto& track : tracks) {
    for (std::size_t i = 0; i < track.size(); ++i) {
      if (track.voiced[i]) voiced.push_back(track.values[i]);
    }
  }
  if (voiced.empty()) Fail(ErrorCode::kInvalidArgument, "cannot transpose unvoiced material");
  return Median(std::move(voiced));
}

double transposition_factor(const F0Track& source, std::span<const F0Track> target_corpus) {
  const double source_median = voiced_median(std::span<const F0Track>(&source, 1));
  const double target_median = voiced_median(target_corpus);
  return target_median / source_median;
}

F0Track transpose(const F0Track& f0, double factor) {
  Require(factor > 0.0 && std::isfinite(factor), "transposition factor must be positive");
  F0Track out = f0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out.voiced[i]) out.values[i] *= factor;
  }
  return out;
}

F0Track retime(const F0Track& f0, Eigen::Index target_frames) {
  Require(target_frames >= 1, "target frame count must be positive");
  Require(!f0.values.empty(), "F0 track is empty");
  const auto source = static_cast<Eigen::Index>(f0.size());
  F0Track out;
  out.frame_rate = f0.frame_rate * static_cast<double>(target_frames) / static_cast<double>(source);
  out.values.resize(target_frames);
  out.voiced.resize(target_frames);
  for (Eigen::Index t = 0; t < target_frames; ++t) {
    const Eigen::Index s = NearestSource(t, target_frames, source);
    out.values[t] = f0.values[s];
    out.voiced[t] = f0.voiced[s];
  }
  return out;
}

EnergyTrack retime(const EnergyTrack& energy, Eigen::Index target_frames) {
  Require(target_frames >= 1, "target frame count must be positive");
  Require(!energy.values.empty(), "energy track is empty");
  const auto source = static_cast<Eigen::Index>(energy.values.size());
  EnergyTrack out;
  out.frame_rate =
      energy.frame_rate * static_cast<double>(target_frames) / static_cast<double>(source);
  out.values.resize(target_frames);
  for (Eigen::Index t = 0; t < target_frames; ++t) {
    out.values[t] = energy.values[NearestSource(t, target_frames, source)];
  }
  return out;
}

FeatureSequence f0_values_to_feature(const F0Track& f0) {
  FeatureSequence seq;
  seq.frame_rate = f0.frame_rate;
  seq.source_tag = "f0";
  seq.data.resize(static_cast<Eigen::Index>(f0.size()), 1);
  for (std::size_t i = 0; i < f0.size(); ++i) seq.data(i, 0) = f0.values[i];
  return seq;
}

FeatureSequence f0_voicing_to_feature(const F0Track& f0) {
  FeatureSequence seq;
  seq.frame_rate = f0.frame_rate;
  seq.source_tag = "voicing";
  seq.data.resize(static_cast<Eigen::Index>(f0.size()), 1);
  for (std::size_t i = 0; i < f0.size(); ++i) seq.data(i, 0) = f0.voiced[i] ? 1.0 : 0.0;
  return seq;
}

F0Track f0_from_features(const FeatureSequence& values, const FeatureSequence* voicing) {
  Require(values.dim() == 1, "F0 file must have exactly one column");
  F0Track f0;
  f0.frame_rate = values.frame_rate;
  const auto n = static_cast<std::size_t>(values.n_frames());
  f0.values.resize(n);
  f0.voiced.resize(n);
  if (voicing != nullptr) {
    Require(voicing->dim() == 1 && voicing->n_frames() == values.n_frames(),
            "voicing file must be one column with the same frame count");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double v = values.data(static_cast<Eigen::Index>(i), 0);
    const bool voiced = voicing != nullptr ? voicing->data(static_cast<Eigen::Index>(i), 0) > 0.5
                                           : v > 0.0;
    f0.voiced[i] = voiced;
    f0.values[i] = voiced ? v : 0.0;
  }
  ValidateF0Track(f0);
  return f0;
}

FeatureSequence energy_to_feature(const EnergyTrack& energy) {
  FeatureSequence seq;
  seq.frame_rate = energy.frame_rate;
  seq.source_tag = "energy";
  seq.data.resize(static_cast<Eigen::Index>(energy.values.size()), 1);
  for (std::size_t i = 0; i < energy.values.size(); ++i) seq.data(i, 0) = energy.values[i];
  return seq;
}

EnergyTrack energy_from_feature(const FeatureSequence& seq) {
  Require(seq.dim() == 1, "energy file must have exactly one column");
  EnergyTrack energy;
  energy.frame_rate = seq.frame_rate;
  energy.values.assign(seq.data.data(), seq.data.data() + seq.data.size());
  return energy;
}

}  // namespace dsff
