// fixtures.h
//
// Synthetic singing corpora for tests and demos: harmonic note sequences per
// speaker, semantic feature files derived from each utterance's mel
// spectrogram at their own frame rates, transcripts, and manifests.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dsff/audio_io.h"
#include "dsff/config.h"

namespace dsff {

struct FixtureOptions {
  int speakers = 2;
  int utterances_per_speaker = 3;
  double duration_s = 1.0;
  std::vector<double> source_rates = {25.0, 50.0, 50.0};
  std::vector<int> source_dims = {24, 40, 32};
};

// Harmonic tone following a piecewise-constant note sequence, with short
// silences at both ends. Harmonic amplitudes fall off as h^-(1 + tilt).
AudioBuffer synth_singing(const std::vector<double>& note_hz, double note_s, double tilt,
                          int sample_rate, double lead_silence_s = 0.05);

AudioBuffer sine_wave(double freq_hz, double duration_s, int sample_rate, double amplitude = 0.5);

struct FixtureSet {
  std::filesystem::path train_manifest;
  std::filesystem::path convert_manifest;
  std::filesystem::path config;
  std::vector<std::string> speakers;
};

// Writes wavs, feature files, transcripts, config.ini, train.tsv and
// convert.tsv under dir. Deterministic given cfg.seeds.fixtures.
FixtureSet generate_fixtures(const PipelineConfig& cfg, const FixtureOptions& options,
                             const std::filesystem::path& dir);

}  // namespace dsff
