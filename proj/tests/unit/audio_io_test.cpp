// audio_io_test.cpp

#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>

#include "doctest.h"
#include "dsff/audio_io.h"
#include "test_util.h"

using namespace dsff;

namespace {

constexpr double kPi = 3.14159265358979323846;

void PutU16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>(v >> 8));
}
void PutU32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

// Hand-assembled RIFF/WAVE bytes, independent of write_wav.
std::string WavBytes(std::uint16_t format, std::uint16_t channels, std::uint32_t rate,
                     std::uint16_t bits, const std::string& payload) {
  std::string fmt;
  PutU16(fmt, format);
  PutU16(fmt, channels);
  PutU32(fmt, rate);
  PutU32(fmt, rate * channels * bits / 8);
  PutU16(fmt, static_cast<std::uint16_t>(channels * bits / 8));
  PutU16(fmt, bits);
  std::string body = "WAVE";
  body += "fmt ";
  PutU32(body, static_cast<std::uint32_t>(fmt.size()));
  body += fmt;
  body += "data";
  PutU32(body, static_cast<std::uint32_t>(payload.size()));
  body += payload;
  std::string out = "RIFF";
  PutU32(out, static_cast<std::uint32_t>(body.size()));
  return out + body;
}

void WriteBytes(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream(p, std::ios::binary) << bytes;
}

AudioBuffer Sine(double hz, int n, int sr, double amp = 0.5) {
  AudioBuffer a;
  a.sample_rate = sr;
  a.samples.resize(n);
  for (int i = 0; i < n; ++i) a.samples[i] = amp * std::sin(2.0 * kPi * hz * i / sr);
  return a;
}

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST_SUITE("audio_io") {

TEST_CASE("full-scale 16-bit sample normalizes by 32768") {
  testutil::TempDir dir("wav");
  std::string payload;
  PutU16(payload, 0x7FFF);
  WriteBytes(dir / "one.wav", WavBytes(1, 1, 16000, 16, payload));
  const AudioBuffer a = read_wav(dir / "one.wav");
  REQUIRE(a.samples.size() == 1);
  CHECK(a.samples[0] == 32767.0 / 32768.0);
  CHECK(a.sample_rate == 16000);
}

TEST_CASE("160 zero samples read as silence") {
  testutil::TempDir dir("wav");
  WriteBytes(dir / "z.wav", WavBytes(1, 1, 16000, 16, std::string(320, '\0')));
  const AudioBuffer a = read_wav(dir / "z.wav");
  CHECK(a.samples.size() == 160);
  for (double s : a.samples) CHECK(s == 0.0);
}

TEST_CASE("24-bit negative full scale") {
  testutil::TempDir dir("wav");
  const std::string payload("\x00\x00\x80\xff\xff\x7f", 6);
  WriteBytes(dir / "p.wav", WavBytes(1, 1, 8000, 24, payload));
  const AudioBuffer a = read_wav(dir / "p.wav");
  REQUIRE(a.samples.size() == 2);
  CHECK(a.samples[0] == -1.0);
  CHECK(a.samples[1] == 8388607.0 / 8388608.0);
}

TEST_CASE("rejected containers") {
  testutil::TempDir dir("wav");
  SUBCASE("stereo") {
    WriteBytes(dir / "s.wav", WavBytes(1, 2, 16000, 16, std::string(8, '\0')));
    try {
      read_wav(dir / "s.wav");
      FAIL("stereo accepted");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("unsupported channel count") != std::string::npos);
      CHECK(e.code() == ErrorCode::kFormat);
    }
  }
  SUBCASE("float encoding") {
    WriteBytes(dir / "f.wav", WavBytes(3, 1, 16000, 32, std::string(8, '\0')));
    try {
      read_wav(dir / "f.wav");
      FAIL("float accepted");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("unsupported encoding") != std::string::npos);
    }
  }
  SUBCASE("truncated data chunk") {
    std::string bytes = WavBytes(1, 1, 16000, 16, std::string(20, '\0'));
    bytes.resize(bytes.size() - 6);
    WriteBytes(dir / "t.wav", bytes);
    try {
      read_wav(dir / "t.wav");
      FAIL("truncated accepted");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("truncated data chunk") != std::string::npos);
    }
  }
  SUBCASE("not RIFF") {
    WriteBytes(dir / "x.wav", "hello world, not a wave file");
    CHECK(CodeOf([&] { read_wav(dir / "x.wav"); }) == ErrorCode::kFormat);
  }
  SUBCASE("missing file") {
    CHECK(CodeOf([&] { read_wav(dir / "absent.wav"); }) == ErrorCode::kIo);
  }
}

TEST_CASE("write/read round trip is exact on integer codes") {
  testutil::TempDir dir("wav");
  Rng rng(7);
  for (int bits : {16, 24}) {
    const double full = bits == 16 ? 32768.0 : 8388608.0;
    AudioBuffer a;
    a.sample_rate = 22050;
    for (int i = 0; i < 500; ++i) {
      const double code = std::floor(rng.Uniform(-full, full));
      a.samples.push_back(code / full);
    }
    const auto path = dir / ("rt" + std::to_string(bits) + ".wav");
    write_wav(a, path, bits);
    const AudioBuffer b = read_wav(path);
    CHECK(b.sample_rate == 22050);
    REQUIRE(b.samples.size() == a.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) CHECK(b.samples[i] == a.samples[i]);
  }
}

TEST_CASE("stft frame count and shape") {
  const StftConfig cfg{1024, 256, 1024};
  SUBCASE("length equals frame length") {
    const SpectralFrames f = stft_magnitudes(Sine(440, 1024, 16000), cfg);
    CHECK(f.magnitudes.rows() == 1);
    CHECK(f.magnitudes.cols() == 513);
  }
  SUBCASE("general formula") {
    for (int len : {1024, 1025, 1279, 1280, 5000}) {
      const SpectralFrames f = stft_magnitudes(Sine(440, len, 16000), cfg);
      CHECK(f.magnitudes.rows() == 1 + (len - 1024) / 256);
      CHECK(f.frame_rate == doctest::Approx(16000.0 / 256));
    }
  }
  SUBCASE("too short") {
    CHECK(CodeOf([&] { stft_magnitudes(Sine(440, 1023, 16000), cfg); }) ==
          ErrorCode::kInvalidArgument);
  }
}

TEST_CASE("stft of silence is zero") {
  AudioBuffer a{std::vector<double>(4000, 0.0), 16000};
  const SpectralFrames f = stft_magnitudes(a, StftConfig{});
  CHECK(f.magnitudes.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("bin-centered sine peaks at its bin") {
  const StftConfig cfg{1024, 256, 1024};
  for (int k : {5, 32, 100, 300}) {
    const double hz = k * 16000.0 / 1024;
    const SpectralFrames f = stft_magnitudes(Sine(hz, 8192, 16000), cfg);
    for (Eigen::Index i = 1; i + 1 < f.magnitudes.rows(); ++i) {
      Eigen::Index arg;
      f.magnitudes.row(i).maxCoeff(&arg);
      CHECK(arg == k);
    }
  }
}

TEST_CASE("stft is positively homogeneous") {
  Rng rng(3);
  AudioBuffer a{std::vector<double>(3000), 16000};
  for (double& s : a.samples) s = rng.Uniform(-0.4, 0.4);
  const SpectralFrames base = stft_magnitudes(a, StftConfig{});
  for (double scale : {0.25, 1.7, 2.0}) {
    AudioBuffer b = a;
    for (double& s : b.samples) s *= scale;
    const SpectralFrames f = stft_magnitudes(b, StftConfig{});
    for (Eigen::Index i = 0; i < f.magnitudes.size(); ++i) {
      const double want = scale * base.magnitudes.data()[i];
      CHECK(std::abs(f.magnitudes.data()[i] - want) <= 1e-9 * std::max(1.0, std::abs(want)));
    }
  }
}

TEST_CASE("log_mel contract") {
  const MelConfig mel{};
  SUBCASE("zero frames clamp to ln(floor)") {
    SpectralFrames f{Matrix::Zero(4, 513), 62.5, 16000, 1024};
    const FeatureSequence m = log_mel(f, mel);
    CHECK(m.n_frames() == 4);
    CHECK(m.dim() == 80);
    for (Eigen::Index i = 0; i < m.data.size(); ++i) CHECK(m.data.data()[i] == std::log(1e-10));
    CHECK(m.frame_rate == 62.5);
  }
  SUBCASE("doubling magnitudes adds ln 2") {
    Rng rng(9);
    SpectralFrames f{rng.UniformMatrix(6, 513, 0.0, 1.0), 62.5, 16000, 1024};
    SpectralFrames g = f;
    g.magnitudes *= 2.0;
    const FeatureSequence a = log_mel(f, mel);
    const FeatureSequence b = log_mel(g, mel);
    for (Eigen::Index i = 0; i < a.data.size(); ++i) {
      if (a.data.data()[i] > std::log(1e-10)) {
        CHECK(b.data.data()[i] - a.data.data()[i] == doctest::Approx(std::log(2.0)).epsilon(1e-12));
      }
    }
  }
  SUBCASE("invalid ranges") {
    SpectralFrames f{Matrix::Zero(1, 513), 62.5, 16000, 1024};
    CHECK(CodeOf([&] { log_mel(f, MelConfig{80, 8000, 100, 1e-10}); }) ==
          ErrorCode::kInvalidArgument);
    CHECK(CodeOf([&] { log_mel(f, MelConfig{80, 0, 9000, 1e-10}); }) ==
          ErrorCode::kInvalidArgument);
    CHECK(CodeOf([&] { log_mel(f, MelConfig{12, 0, 8000, 1e-10}); }) ==
          ErrorCode::kInvalidArgument);
  }
}

TEST_CASE("mel scale round trip and anchor") {
  CHECK(hz_to_mel(700.0) == doctest::Approx(2595.0 * std::log10(2.0)));
  for (double hz : {0.0, 50.0, 440.0, 1000.0, 7999.0}) {
    CHECK(mel_to_hz(hz_to_mel(hz)) == doctest::Approx(hz).epsilon(1e-12));
  }
}

TEST_CASE("log_mel is finite on random input") {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    SpectralFrames f{rng.UniformMatrix(3, 513, 0.0, 100.0), 62.5, 16000, 1024};
    if (trial % 3 == 0) f.magnitudes.row(1).setZero();
    CHECK(AllFinite(log_mel(f, MelConfig{}).data));
  }
}

}  // TEST_SUITE
