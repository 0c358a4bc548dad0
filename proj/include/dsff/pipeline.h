// pipeline.h
//
// End-to-end wiring: audio analysis on the common frame grid, model
// construction from seeds, condition building for training and conversion,
// and model persistence.

#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dsff/align_fuse.h"
#include "dsff/audio_io.h"
#include "dsff/conditioning.h"
#include "dsff/config.h"
#include "dsff/decoder.h"
#include "dsff/prosody.h"

namespace dsff {

// Mel, F0 and energy on one grid of n_frames frames at the mel frame rate.
struct AudioAnalysis {
  FeatureSequence mel;
  F0Track f0;
  EnergyTrack energy;

  Eigen::Index n_frames() const { return mel.n_frames(); }
};

AudioAnalysis analyze_audio(const AudioBuffer& audio, const PipelineConfig& cfg);

struct Model {
  std::vector<ProjectionWeights> projections;  // one per semantic source
  ProjectionWeights condenc;
  EmbeddingTable f0_table;
  EmbeddingTable energy_table;
  SpeakerTable speakers;
  QuantSpec f0_quant;
  QuantSpec energy_quant;
  DecoderWeights decoder;
  // Voiced F0 of each speaker's training corpus, for key transposition.
  std::map<std::string, std::vector<F0Track>> speaker_f0;
};

// Values as stored on disk (f32), so in-memory and reloaded models agree.
Matrix round_to_storage(const Matrix& m);

// Weights drawn from the config seeds; the decoder is left empty.
Model init_model(const PipelineConfig& cfg, const std::vector<Eigen::Index>& source_dims,
                 const std::vector<std::string>& speakers, const QuantSpec& energy_quant);

struct UtteranceInputs {
  std::vector<FeatureSequence> sources;
  F0Track f0;
  EnergyTrack energy;
  std::string speaker;
};

Condition build_condition(const Model& model, const UtteranceInputs& in, Eigen::Index n_frames,
                          double frame_rate);

struct TrainingUtterance {
  AudioBuffer audio;
  std::vector<FeatureSequence> sources;
  std::string speaker;
};

// Analyzes, conditions and fits the decoder over the whole corpus.
// jobs > 1 analyzes utterances in parallel; results are gathered in input order.
Model train_model(const PipelineConfig& cfg, const std::vector<TrainingUtterance>& corpus,
                  int jobs = 1);

struct ConversionResult {
  FeatureSequence mel;
  F0Track transposed_f0;
  double factor = 1.0;
};

// Source semantic features and energy kept, F0 transposed into the reference
// speaker's range (or by an explicit factor), reference speaker ID injected.
ConversionResult convert_utterance(const PipelineConfig& cfg, const Model& model,
                                   const AudioBuffer& source_audio,
                                   const std::vector<FeatureSequence>& sources,
                                   const std::string& reference_speaker,
                                   std::optional<double> factor = std::nullopt);

void save_model(const Model& model, const std::filesystem::path& dir);
Model load_model(const std::filesystem::path& dir);

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Exceptions propagate
// (the first one by index).
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace dsff
