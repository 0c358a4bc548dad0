// config.h
//
// PipelineConfig and its INI-style text form ("[section]" headers followed by
// "key = value" lines, '#' or ';' comments). Every field is always written,
// so a dumped config documents every default.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "dsff/audio_io.h"
#include "dsff/prosody.h"

namespace dsff {

struct SeedConfig {
  std::uint64_t projection = 11;  // source i uses projection + i
  std::uint64_t condenc = 12;
  std::uint64_t f0_embedding = 13;
  std::uint64_t energy_embedding = 14;
  std::uint64_t speakers = 15;
  std::uint64_t attention = 16;   // source i uses attention + i
  std::uint64_t fixtures = 17;
};

struct PipelineConfig {
  int latent_dim = 384;
  double target_frame_rate = 100.0;
  int sample_rate = 16000;

  int stft_frame_length = 1024;
  int stft_fft_size = 1024;
  MelConfig mel;

  F0Config f0;  // f0.hop is derived from target_frame_rate

  QuantScale f0_scale = QuantScale::kLog;
  double f0_quant_lo = 50.0;
  double f0_quant_hi = 1100.0;
  double energy_percentile = 99.0;

  double lambda_relative = 1e-3;
  int attn_dim = 384;

  SeedConfig seeds;
  std::string model_dir = "model";

  // Hop in samples for a given rate; the STFT and F0 grids share it.
  int hop_length(int sample_rate) const;
  StftConfig stft(int sample_rate) const;
  F0Config f0_config(int sample_rate) const;
  QuantSpec f0_quant() const;

  // Sets every seed from one base value: base, base + 1, ... in field order.
  void set_base_seed(std::uint64_t base);

  void validate() const;
};

PipelineConfig parse_config(const std::string& text);
std::string dump_config(const PipelineConfig& cfg);

PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace dsff
