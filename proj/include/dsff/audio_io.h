// audio_io.h
//
// Mono PCM WAV I/O, Hann-windowed STFT magnitudes and log-mel spectrograms.

#pragma once

#include <filesystem>
#include <vector>

#include "dsff/common.h"

namespace dsff {

struct AudioBuffer {
  std::vector<double> samples;  // normalized to [-1, 1]
  int sample_rate = 0;

  double duration_seconds() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

struct StftConfig {
  int frame_length = 1024;
  int hop_length = 256;
  int fft_size = 1024;
};

struct SpectralFrames {
  Matrix magnitudes;  // [n_frames x (fft_size / 2 + 1)]
  double frame_rate = 0.0;
  int sample_rate = 0;
  int fft_size = 0;
};

struct MelConfig {
  int n_mels = 80;
  double fmin = 0.0;
  double fmax = 8000.0;
  double floor = 1e-10;
};

AudioBuffer read_wav(const std::filesystem::path& path);

// Writes 16- or 24-bit PCM. Samples are rounded to the nearest integer code
// and clipped to the representable range.
void write_wav(const AudioBuffer& audio, const std::filesystem::path& path,
               int bits_per_sample = 16);

// Frames lie fully inside the signal: n_frames = 1 + (len - frame_length) / hop.
SpectralFrames stft_magnitudes(const AudioBuffer& audio, const StftConfig& cfg);

// Triangular HTK-mel filterbank applied to magnitudes, then ln(max(x, floor)).
FeatureSequence log_mel(const SpectralFrames& frames, const MelConfig& cfg);

// [n_mels x n_bins] filterbank used by log_mel.
Matrix mel_filterbank(int sample_rate, int fft_size, const MelConfig& cfg);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

}  // namespace dsff
