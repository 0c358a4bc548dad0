// fixtures.cpp

#include "dsff/fixtures.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dsff/align_fuse.h"
#include "dsff/feature_store.h"
#include "dsff/pipeline.h"
#include "dsff/rng.h"

namespace dsff {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr int kHarmonics = 6;
const int kScale[] = {0, 2, 4, 7, 9, 12};
const char* const kSyllables[] = {"la", "na", "mi", "do", "re", "so", "ti", "ya"};

}  // namespace

AudioBuffer sine_wave(double freq_hz, double duration_s, int sample_rate, double amplitude) {
  AudioBuffer audio;
  audio.sample_rate = sample_rate;
  const auto n = static_cast<std::size_t>(std::lround(duration_s * sample_rate));
  audio.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    audio.samples[i] = amplitude * std::sin(kTwoPi * freq_hz * static_cast<double>(i) / sample_rate);
  }
  return audio;
}

AudioBuffer synth_singing(const std::vector<double>& note_hz, double note_s, double tilt,
                          int sample_rate, double lead_silence_s) {
  Require(!note_hz.empty() && note_s > 0.0, "need at least one note");
  AudioBuffer audio;
  audio.sample_rate = sample_rate;
  const auto lead = static_cast<std::size_t>(std::lround(lead_silence_s * sample_rate));
  const auto per_note = static_cast<std::size_t>(std::lround(note_s * sample_rate));
  const std::size_t voiced = per_note * note_hz.size();
  audio.samples.assign(lead + voiced + lead, 0.0);

  double norm = 0.0;
  for (int h = 1; h <= kHarmonics; ++h) norm += std::pow(h, -(1.0 + tilt));
  const auto ramp = static_cast<std::size_t>(0.01 * sample_rate);

  double phase = 0.0;
  for (std::size_t i = 0; i < voiced; ++i) {
    const double f0 = note_hz[i / per_note];
    phase += kTwoPi * f0 / sample_rate;
    double v = 0.0;
    for (int h = 1; h <= kHarmonics; ++h) {
      if (h * f0 >= 0.5 * sample_rate) break;
      v += std::pow(h, -(1.0 + tilt)) * std::sin(h * phase);
    }
    double env = 1.0;
    if (i < ramp) env = static_cast<double>(i) / ramp;
    if (voiced - i < ramp) env = static_cast<double>(voiced - i) / ramp;
    audio.samples[lead + i] = 0.4 * env * v / norm;
  }
  return audio;
}

FixtureSet generate_fixtures(const PipelineConfig& cfg, const FixtureOptions& options,
                             const std::filesystem::path& dir) {
  Require(options.speakers >= 1 && options.utterances_per_speaker >= 1,
          "need at least one speaker and one utterance");
  Require(options.source_rates.size() == options.source_dims.size() &&
              !options.source_rates.empty(),
          "source rates and dims must pair up");
  std::filesystem::create_directories(dir);
  Rng rng(cfg.seeds.fixtures);

  std::vector<Matrix> readouts;
  for (int dim : options.source_dims) {
    readouts.push_back(rng.GaussianMatrix(cfg.mel.n_mels, dim, 1.0 / std::sqrt(cfg.mel.n_mels)));
  }

  FixtureSet set;
  set.config = dir / "config.ini";
  set.train_manifest = dir / "train.tsv";
  set.convert_manifest = dir / "convert.tsv";
  write_file(set.config, dump_config(cfg));

  std::ostringstream train;
  std::ostringstream convert;
  train << "# wav\tspeaker\tsemantic features...\n";
  convert << "# wav\treference speaker\toutput mel\tsemantic features...\n";

  const int notes = std::max(1, static_cast<int>(std::lround(options.duration_s / 0.25)));
  const double note_s = options.duration_s / notes;
  for (int k = 0; k < options.speakers; ++k) {
    const std::string speaker = "singer" + std::to_string(k);
    set.speakers.push_back(speaker);
    const double base_hz = 150.0 * std::pow(1.5, k);
    for (int m = 0; m < options.utterances_per_speaker; ++m) {
      const std::string stem = speaker + "_utt" + std::to_string(m);
      std::vector<double> melody;
      std::string lyric;
      for (int n = 0; n < notes; ++n) {
        const int step = kScale[rng.Next() % std::size(kScale)];
        melody.push_back(base_hz * std::exp2(step / 12.0));
        if (!lyric.empty()) lyric += ' ';
        lyric += kSyllables[rng.Next() % std::size(kSyllables)];
      }
      const AudioBuffer audio = synth_singing(melody, note_s, 0.5 * k, cfg.sample_rate);
      write_wav(audio, dir / (stem + ".wav"));
      write_file(dir / (stem + ".txt"), lyric + "\n");

      const FeatureSequence mel = analyze_audio(audio, cfg).mel;
      const double duration = audio.duration_seconds();
      train << stem << ".wav\t" << speaker;
      std::string feature_list;
      for (std::size_t j = 0; j < readouts.size(); ++j) {
        const auto frames = std::max<Eigen::Index>(
            1, static_cast<Eigen::Index>(std::lround(duration * options.source_rates[j])));
        FeatureSequence src = resample_time(mel, frames);
        src.data = src.data * readouts[j] +
                   rng.GaussianMatrix(frames, options.source_dims[j], 0.01);
        src.frame_rate = options.source_rates[j];
        src.source_tag = "synthetic" + std::to_string(j);
        const std::string name = stem + "_src" + std::to_string(j) + ".dsff";
        write_feature(src, dir / name);
        feature_list += "\t" + name;
      }
      train << feature_list << "\n";
      if (options.speakers > 1 && m == 0) {
        const std::string target = "singer" + std::to_string((k + 1) % options.speakers);
        convert << stem << ".wav\t" << target << "\t" << stem << "_to_" << target << ".mel.dsff"
                << feature_list << "\n";
      }
    }
  }
  write_file(set.train_manifest, train.str());
  write_file(set.convert_manifest, convert.str());
  return set;
}

}  // namespace dsff
