// audio_io.cpp

#include "dsff/audio_io.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include <unsupported/Eigen/FFT>

namespace dsff {
namespace {

constexpr double kPi = 3.14159265358979323846;

std::uint32_t ReadU32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t ReadU16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void PutU32(std::string* out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out->push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void PutU16(std::string* out, std::uint16_t v) {
  out->push_back(static_cast<char>(v & 0xFF));
  out->push_back(static_cast<char>(v >> 8));
}

}  // namespace

AudioBuffer read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  const auto bad = [&](const std::string& why) {
    Fail(ErrorCode::kFormat, path.string() + ": " + why);
  };
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    bad("malformed header");
  }

  bool have_fmt = false;
  int channels = 0;
  int bits = 0;
  int sample_rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t size = ReadU32(chunk + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || body + size > bytes.size()) bad("malformed header");
      const std::uint16_t format = ReadU16(bytes.data() + body);
      channels = ReadU16(bytes.data() + body + 2);
      sample_rate = static_cast<int>(ReadU32(bytes.data() + body + 4));
      bits = ReadU16(bytes.data() + body + 14);
      if (format != 1) bad("unsupported encoding (only integer PCM)");
      if (channels != 1) bad("unsupported channel count");
      if (bits != 16 && bits != 24) bad("unsupported bit depth");
      if (sample_rate <= 0) bad("malformed header");
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) bad("malformed header");
      const int width = bits / 8;
      if (body + size > bytes.size() || size % width != 0) bad("truncated data chunk");
      const std::size_t count = size / width;
      if (count == 0) bad("empty data chunk");
      AudioBuffer audio;
      audio.sample_rate = sample_rate;
      audio.samples.resize(count);
      const unsigned char* p = bytes.data() + body;
      for (std::size_t i = 0; i < count; ++i, p += width) {
        if (bits == 16) {
          const auto v = static_cast<std::int16_t>(ReadU16(p));
          audio.samples[i] = v / 32768.0;
        } else {
          std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
          if (v & 0x800000) v -= 0x1000000;
          audio.samples[i] = v / 8388608.0;
        }
      }
      return audio;
    }
    pos = body + size + (size & 1u);
  }
  Fail(ErrorCode::kFormat, path.string() + ": " + (have_fmt ? "missing data chunk" : "malformed header"));
}

void write_wav(const AudioBuffer& audio, const std::filesystem::path& path,
               int bits_per_sample) {
  Require(bits_per_sample == 16 || bits_per_sample == 24, "bit depth must be 16 or 24");
  Require(audio.sample_rate > 0, "sample rate must be positive");
  const int width = bits_per_sample / 8;
  const double full_scale = bits_per_sample == 16 ? 32768.0 : 8388608.0;
  const std::uint32_t data_size = static_cast<std::uint32_t>(audio.samples.size() * width);

  std::string out;
  out.reserve(44 + data_size);
  out.append("RIFF");
  PutU32(&out, 36 + data_size);
  out.append("WAVE");
  out.append("fmt ");
  PutU32(&out, 16);
  PutU16(&out, 1);
  PutU16(&out, 1);
  PutU32(&out, static_cast<std::uint32_t>(audio.sample_rate));
  PutU32(&out, static_cast<std::uint32_t>(audio.sample_rate * width));
  PutU16(&out, static_cast<std::uint16_t>(width));
  PutU16(&out, static_cast<std::uint16_t>(bits_per_sample));
  out.append("data");
  PutU32(&out, data_size);
  for (double x : audio.samples) {
    Require(std::isfinite(x), "audio contains non-finite samples");
    const double code = std::clamp(std::round(x * full_scale), -full_scale, full_scale - 1.0);
    const auto v = static_cast<std::int32_t>(code);
    for (int b = 0; b < width; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
  }
  if (data_size & 1u) out.push_back('\0');

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) Fail(ErrorCode::kIo, "cannot write " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) Fail(ErrorCode::kIo, "write failed for " + path.string());
}

SpectralFrames stft_magnitudes(const AudioBuffer& audio, const StftConfig& cfg) {
  Require(cfg.hop_length > 0 && cfg.hop_length <= cfg.frame_length &&
              cfg.frame_length <= cfg.fft_size,
          "invalid STFT config: need 0 < hop <= frame_length <= fft_size");
  Require(audio.sample_rate > 0, "sample rate must be positive");
  const auto len = static_cast<int>(audio.samples.size());
  if (len < cfg.frame_length) {
    Fail(ErrorCode::kInvalidArgument, "audio shorter than one frame");
  }
  const int n_frames = 1 + (len - cfg.frame_length) / cfg.hop_length;
  const int n_bins = cfg.fft_size / 2 + 1;

  // Periodic Hann.
  std::vector<double> window(cfg.frame_length);
  for (int n = 0; n < cfg.frame_length; ++n) {
    window[n] = 0.5 - 0.5 * std::cos(2.0 * kPi * n / cfg.frame_length);
  }

  SpectralFrames frames;
  frames.magnitudes.resize(n_frames, n_bins);
  frames.frame_rate = static_cast<double>(audio.sample_rate) / cfg.hop_length;
  frames.sample_rate = audio.sample_rate;
  frames.fft_size = cfg.fft_size;

  Eigen::FFT<double> fft;
  std::vector<double> buffer(cfg.fft_size, 0.0);
  std::vector<std::complex<double>> spectrum;
  for (int f = 0; f < n_frames; ++f) {
    const int start = f * cfg.hop_length;
    std::fill(buffer.begin(), buffer.end(), 0.0);
    for (int n = 0; n < cfg.frame_length; ++n) buffer[n] = audio.samples[start + n] * window[n];
    fft.fwd(spectrum, buffer);
    for (int k = 0; k < n_bins; ++k) frames.magnitudes(f, k) = std::abs(spectrum[k]);
  }
  return frames;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

Matrix mel_filterbank(int sample_rate, int fft_size, const MelConfig& cfg) {
  const double nyquist = sample_rate / 2.0;
  Require(cfg.fmin >= 0.0 && cfg.fmin < cfg.fmax && cfg.fmax <= nyquist,
          "invalid frequency range: need 0 <= fmin < fmax <= Nyquist");
  Require(cfg.n_mels >= 13, "n_mels must be at least 13");
  Require(cfg.floor > 0.0, "log floor must be positive");

  const int n_bins = fft_size / 2 + 1;
  const double mel_lo = hz_to_mel(cfg.fmin);
  const double mel_hi = hz_to_mel(cfg.fmax);
  std::vector<double> edges(cfg.n_mels + 2);
  for (int i = 0; i < cfg.n_mels + 2; ++i) {
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (cfg.n_mels + 1));
  }

  Matrix bank = Matrix::Zero(cfg.n_mels, n_bins);
  for (int m = 0; m < cfg.n_mels; ++m) {
    const double left = edges[m];
    const double center = edges[m + 1];
    const double right = edges[m + 2];
    for (int k = 0; k < n_bins; ++k) {
      const double hz = static_cast<double>(k) * sample_rate / fft_size;
      double w = 0.0;
      if (hz > left && hz <= center) {
        w = (hz - left) / (center - left);
      } else if (hz > center && hz < right) {
        w = (right - hz) / (right - center);
      }
      bank(m, k) = w;
    }
  }
  return bank;
}

FeatureSequence log_mel(const SpectralFrames& frames, const MelConfig& cfg) {
  Require(frames.magnitudes.rows() >= 1, "no spectral frames");
  Require(frames.magnitudes.cols() == frames.fft_size / 2 + 1,
          "magnitude width does not match fft size");
  const Matrix bank = mel_filterbank(frames.sample_rate, frames.fft_size, cfg);

  FeatureSequence out;
  out.data.noalias() = frames.magnitudes * bank.transpose();
  out.data = out.data.array().max(cfg.floor).log().matrix();
  out.frame_rate = frames.frame_rate;
  out.source_tag = "mel";
  return out;
}

}  // namespace dsff
