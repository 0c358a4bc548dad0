// prosody.h
//
// F0 and energy contours, their 256-bin quantization and embedding, and key
// transposition by the ratio of voiced F0 medians.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dsff/audio_io.h"
#include "dsff/common.h"

namespace dsff {

inline constexpr int kQuantBins = 256;

// values[i] == 0 exactly when voiced[i] is false.
struct F0Track {
  std::vector<double> values;
  std::vector<bool> voiced;
  double frame_rate = 0.0;

  std::size_t size() const { return values.size(); }
};

struct EnergyTrack {
  std::vector<double> values;
  double frame_rate = 0.0;
};

struct F0Config {
  double f0_min = 50.0;
  double f0_max = 1100.0;
  double frame_length = 0.040;  // seconds
  double hop = 0.010;           // seconds
  double voicing_threshold = 0.45;
  double silence_rms = 1e-4;
};

enum class QuantScale { kLog, kLinear };

struct QuantSpec {
  int n_bins = kQuantBins;
  QuantScale scale = QuantScale::kLog;
  double lo = 50.0;
  double hi = 1100.0;
};

struct QuantizedTrack {
  std::vector<int> bins;
  QuantSpec spec;
  double frame_rate = 0.0;
};

// Rows indexed by bin; rows.rows() == kQuantBins.
struct EmbeddingTable {
  Matrix rows;

  Eigen::Index dim() const { return rows.cols(); }
};

void ValidateF0Track(const F0Track& track);

F0Track extract_f0(const AudioBuffer& audio, const F0Config& cfg);

EnergyTrack extract_energy(const SpectralFrames& frames);

void ValidateQuantSpec(const QuantSpec& spec);

// Bin of a single value; 0 is reserved for zero / unvoiced input.
int quantize_value(double value, const QuantSpec& spec);

QuantizedTrack quantize(const F0Track& track, const QuantSpec& spec);
QuantizedTrack quantize(const EnergyTrack& track, const QuantSpec& spec);

// Center of a bin's interval (geometric for log scale, arithmetic for linear),
// and the bin width in the scale's own coordinate (ln Hz or linear units).
double dequantize(int bin, const QuantSpec& spec);
double bin_width(const QuantSpec& spec);

// Linear spec over [0, percentile of all frames of all tracks].
QuantSpec energy_quant_spec(std::span<const EnergyTrack> corpus, double percentile = 99.0);

EmbeddingTable make_embedding_table(std::uint64_t seed, Eigen::Index dim);

FeatureSequence embed_quantized(const QuantizedTrack& q, const EmbeddingTable& table);

// Median of the voiced values; the mean of the two middle values for even counts.
double voiced_median(std::span<const F0Track> tracks);

double transposition_factor(const F0Track& source, std::span<const F0Track> target_corpus);

F0Track transpose(const F0Track& f0, double factor);

// Nearest-frame retiming, which keeps voicing flags intact.
F0Track retime(const F0Track& f0, Eigen::Index target_frames);
EnergyTrack retime(const EnergyTrack& energy, Eigen::Index target_frames);

// 1-column DSFF forms: the value track and the 0/1 voicing track.
FeatureSequence f0_values_to_feature(const F0Track& f0);
FeatureSequence f0_voicing_to_feature(const F0Track& f0);
F0Track f0_from_features(const FeatureSequence& values, const FeatureSequence* voicing);
FeatureSequence energy_to_feature(const EnergyTrack& energy);
EnergyTrack energy_from_feature(const FeatureSequence& seq);

}  // namespace dsff
