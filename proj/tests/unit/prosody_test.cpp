// prosody_test.cpp

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "dsff/fixtures.h"
#include "dsff/prosody.h"
#include "test_util.h"

using namespace dsff;

namespace {

F0Track Track(std::vector<double> values) {
  F0Track t;
  t.frame_rate = 100.0;
  for (double v : values) t.voiced.push_back(v > 0.0);
  t.values = std::move(values);
  return t;
}

F0Config DefaultF0(int sample_rate) {
  F0Config cfg;
  cfg.hop = 160.0 / sample_rate;
  return cfg;
}

std::vector<double> VoicedValues(const F0Track& t) {
  std::vector<double> v;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t.voiced[i]) v.push_back(t.values[i]);
  return v;
}

}  // namespace

TEST_SUITE("prosody") {

TEST_CASE("440 Hz sine: voiced and within 1%") {
  const AudioBuffer a = sine_wave(440.0, 2.0, 16000);
  const F0Track t = extract_f0(a, DefaultF0(16000));
  REQUIRE(t.size() > 100);
  std::size_t good = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t.voiced[i] && std::abs(t.values[i] - 440.0) / 440.0 < 0.01) ++good;
  }
  CHECK(static_cast<double>(good) / t.size() >= 0.95);
}

TEST_CASE("octave sanity across the singing range") {
  for (double hz : {110.0, 220.0, 440.0, 880.0}) {
    CAPTURE(hz);
    const F0Track t = extract_f0(sine_wave(hz, 1.0, 16000), DefaultF0(16000));
    const std::vector<double> v = VoicedValues(t);
    REQUIRE_FALSE(v.empty());
    CHECK(std::abs(oracle::Median(v) - hz) / hz < 0.01);
  }
}

TEST_CASE("digital silence is unvoiced") {
  const AudioBuffer a{std::vector<double>(16000, 0.0), 16000};
  const F0Track t = extract_f0(a, DefaultF0(16000));
  REQUIRE(t.size() > 0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK_FALSE(t.voiced[i]);
    CHECK(t.values[i] == 0.0);
  }
}

TEST_CASE("white noise is mostly unvoiced") {
  Rng rng(1);
  AudioBuffer a{std::vector<double>(16000), 16000};
  for (double& s : a.samples) s = rng.Uniform(-0.5, 0.5);
  const F0Track t = extract_f0(a, DefaultF0(16000));
  const std::size_t voiced = std::count(t.voiced.begin(), t.voiced.end(), true);
  CHECK(voiced < t.size() / 10);
}

TEST_CASE("harmonic tone tracks its fundamental") {
  const AudioBuffer a = synth_singing({196.0, 294.0}, 0.5, 0.3, 16000);
  const F0Track t = extract_f0(a, DefaultF0(16000));
  std::size_t near = 0, voiced = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!t.voiced[i]) continue;
    ++voiced;
    const double v = t.values[i];
    if (std::abs(v - 196.0) / 196.0 < 0.01 || std::abs(v - 294.0) / 294.0 < 0.01) ++near;
  }
  REQUIRE(voiced > 50);
  CHECK(static_cast<double>(near) / voiced >= 0.9);
}

TEST_CASE("extract_f0 preconditions") {
  const AudioBuffer a = sine_wave(440.0, 0.5, 16000);
  F0Config cfg = DefaultF0(16000);
  cfg.f0_max = 5000.0;  // above sample_rate / 4
  CHECK_THROWS_AS(extract_f0(a, cfg), Error);
  cfg = DefaultF0(16000);
  cfg.f0_min = 500.0;
  cfg.f0_max = 400.0;
  CHECK_THROWS_AS(extract_f0(a, cfg), Error);
  CHECK_THROWS_AS(extract_f0(sine_wave(440.0, 0.01, 16000), DefaultF0(16000)), Error);
}

TEST_CASE("track invariants hold on extracted output") {
  const AudioBuffer a = synth_singing({150.0, 600.0, 1000.0}, 0.3, 0.2, 16000);
  const F0Config cfg = DefaultF0(16000);
  const F0Track t = extract_f0(a, cfg);
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK((t.values[i] == 0.0) == !t.voiced[i]);
    if (t.voiced[i]) {
      CHECK(t.values[i] >= cfg.f0_min);
      CHECK(t.values[i] <= cfg.f0_max);
    }
  }
}

TEST_CASE("energy is the frame L2 norm") {
  SUBCASE("spec examples") {
    SpectralFrames f{Matrix::Zero(3, 2), 100.0, 16000, 2};
    f.magnitudes(1, 0) = 3.0;
    f.magnitudes(2, 0) = 3.0;
    f.magnitudes(2, 1) = 4.0;
    const EnergyTrack e = extract_energy(f);
    CHECK(e.values[0] == 0.0);
    CHECK(e.values[1] == 3.0);
    CHECK(e.values[2] == 5.0);
    CHECK(e.frame_rate == 100.0);
  }
  SUBCASE("sum-of-squares oracle") {
    Rng rng(12);
    SpectralFrames f{rng.UniformMatrix(30, 513, 0.0, 10.0), 62.5, 16000, 1024};
    const EnergyTrack e = extract_energy(f);
    for (Eigen::Index i = 0; i < f.magnitudes.rows(); ++i) {
      std::vector<double> row(f.magnitudes.row(i).data(), f.magnitudes.row(i).data() + 513);
      CHECK(e.values[i] == doctest::Approx(oracle::SumOfSquaresNorm(row)).epsilon(1e-12));
    }
  }
}

TEST_CASE("quantization endpoints and reserved bin") {
  const QuantSpec spec{256, QuantScale::kLog, 50.0, 1100.0};
  CHECK(quantize_value(50.0, spec) == 1);
  CHECK(quantize_value(1100.0, spec) == 255);
  CHECK(quantize_value(0.0, spec) == 0);
  CHECK(quantize_value(10.0, spec) == 1);     // clamped
  CHECK(quantize_value(5000.0, spec) == 255); // clamped
  const QuantizedTrack q = quantize(Track({0.0, 50.0, 1100.0}), spec);
  CHECK(q.bins == std::vector<int>{0, 1, 255});
}

TEST_CASE("log midpoint maps to the middle bin") {
  const QuantSpec spec{256, QuantScale::kLog, 50.0, 1100.0};
  // 1 + floor(0.5 * 254.9999) by the mapping formula.
  const int expected = 1 + static_cast<int>(std::floor(0.5 * 254.9999));
  const int bin = quantize_value(std::sqrt(50.0 * 1100.0), spec);
  CHECK(std::abs(bin - 128) <= 1);
  CHECK(std::abs(bin - expected) <= 1);
}

TEST_CASE("quantization is monotone with bounded inverse") {
  Rng rng(256);
  for (QuantScale scale : {QuantScale::kLog, QuantScale::kLinear}) {
    const QuantSpec spec{256, scale, 50.0, 1100.0};
    std::vector<double> values;
    for (int i = 0; i < 2000; ++i) values.push_back(rng.Uniform(50.0, 1100.0));
    std::sort(values.begin(), values.end());
    int prev = 0;
    for (double v : values) {
      const int b = quantize_value(v, spec);
      CHECK(b >= prev);
      CHECK(b >= 1);
      CHECK(b <= 255);
      prev = b;
      const double center = dequantize(b, spec);
      const double err = scale == QuantScale::kLog ? std::abs(std::log(center) - std::log(v))
                                                   : std::abs(center - v);
      CHECK(err <= bin_width(spec));
    }
  }
}

TEST_CASE("invalid quant specs") {
  CHECK_THROWS_AS(quantize_value(1.0, QuantSpec{256, QuantScale::kLog, 0.0, 10.0}), Error);
  CHECK_THROWS_AS(quantize_value(1.0, QuantSpec{256, QuantScale::kLinear, 5.0, 5.0}), Error);
  CHECK_THROWS_AS(quantize_value(1.0, QuantSpec{128, QuantScale::kLinear, 0.0, 5.0}), Error);
}

TEST_CASE("energy quant spec uses the corpus percentile") {
  EnergyTrack a{{0.0, 1.0, 2.0, 3.0}, 100.0};
  EnergyTrack b{{4.0}, 100.0};
  const std::vector<EnergyTrack> corpus{a, b};
  const QuantSpec spec = energy_quant_spec(corpus, 50.0);
  CHECK(spec.scale == QuantScale::kLinear);
  CHECK(spec.lo == 0.0);
  CHECK(spec.hi == doctest::Approx(2.0));
  // Energy zero goes to the reserved bin, the top to 255.
  CHECK(quantize_value(0.0, spec) == 0);
  CHECK(quantize_value(2.0, spec) == 255);
}

TEST_CASE("embedding lookup") {
  EmbeddingTable table = make_embedding_table(13, 8);
  CHECK(table.rows.rows() == 256);
  CHECK(table.dim() == 8);
  CHECK(table.rows.maxCoeff() <= 0.1);
  CHECK(table.rows.minCoeff() >= -0.1);
  SUBCASE("rows stacked by bin") {
    QuantizedTrack q{{0, 0, 5}, QuantSpec{}, 50.0};
    const FeatureSequence out = embed_quantized(q, table);
    CHECK(out.n_frames() == 3);
    CHECK(out.frame_rate == 50.0);
    CHECK(out.data.row(0) == table.rows.row(0));
    CHECK(out.data.row(1) == table.rows.row(0));
    CHECK(out.data.row(2) == table.rows.row(5));
  }
  SUBCASE("zero table") {
    EmbeddingTable zero{Matrix::Zero(256, 4)};
    QuantizedTrack q{{1, 2, 3}, QuantSpec{}, 50.0};
    CHECK(embed_quantized(q, zero).data.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("identical bins give identical rows") {
    QuantizedTrack q{std::vector<int>(10, 77), QuantSpec{}, 50.0};
    const FeatureSequence out = embed_quantized(q, table);
    for (Eigen::Index i = 1; i < out.n_frames(); ++i) CHECK(out.data.row(i) == out.data.row(0));
  }
  SUBCASE("table must have 256 rows") {
    QuantizedTrack q{{1}, QuantSpec{}, 50.0};
    CHECK_THROWS_AS(embed_quantized(q, EmbeddingTable{Matrix::Zero(100, 4)}), Error);
  }
  SUBCASE("seeded tables are reproducible") {
    CHECK(make_embedding_table(13, 8).rows == table.rows);
    CHECK(make_embedding_table(14, 8).rows != table.rows);
  }
}

TEST_CASE("transposition factor is the median ratio") {
  SUBCASE("200 to 300") {
    const std::vector<F0Track> target{Track({300.0, 0.0, 300.0})};
    CHECK(transposition_factor(Track({200.0, 200.0, 0.0}), target) == 1.5);
  }
  SUBCASE("identical distributions") {
    const F0Track t = Track({100.0, 0.0, 150.0, 220.0});
    const std::vector<F0Track> target{t};
    CHECK(transposition_factor(t, target) == 1.0);
  }
  SUBCASE("unvoiced source") {
    const std::vector<F0Track> target{Track({300.0})};
    try {
      transposition_factor(Track({0.0, 0.0}), target);
      FAIL("expected failure");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("cannot transpose unvoiced material") != std::string::npos);
    }
  }
  SUBCASE("unvoiced target corpus") {
    const std::vector<F0Track> target{Track({0.0}), Track({0.0, 0.0})};
    CHECK_THROWS_AS(transposition_factor(Track({100.0}), target), Error);
  }
  SUBCASE("median pools the whole corpus") {
    const std::vector<F0Track> target{Track({100.0, 400.0}), Track({200.0, 0.0, 300.0})};
    CHECK(voiced_median(target) == 250.0);
  }
}

TEST_CASE("transpose scales voiced frames only") {
  const F0Track t = Track({220.0, 0.0, 440.0});
  const F0Track out = transpose(t, 1.5);
  CHECK(out.values == std::vector<double>{330.0, 0.0, 660.0});
  CHECK(out.voiced == t.voiced);
  CHECK(transpose(t, 1.0).values == t.values);
  CHECK_THROWS_AS(transpose(t, 0.0), Error);
  CHECK_THROWS_AS(transpose(t, -2.0), Error);
}

TEST_CASE("transposition closure property") {
  Rng rng(4);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> src;
    const int n = testutil::RandomInt(rng, 1, 60);
    for (int i = 0; i < n; ++i) src.push_back(rng.Uniform() < 0.3 ? 0.0 : rng.Uniform(80.0, 900.0));
    src.push_back(rng.Uniform(80.0, 900.0));
    std::vector<F0Track> target;
    const int m = testutil::RandomInt(rng, 1, 4);
    for (int k = 0; k < m; ++k) {
      std::vector<double> v;
      const int len = testutil::RandomInt(rng, 1, 40);
      for (int i = 0; i < len; ++i) v.push_back(rng.Uniform() < 0.3 ? 0.0 : rng.Uniform(80.0, 900.0));
      v.push_back(rng.Uniform(80.0, 900.0));
      target.push_back(Track(v));
    }
    const F0Track source = Track(src);
    const double k = transposition_factor(source, target);
    const F0Track moved = transpose(source, k);
    const std::vector<F0Track> moved_list{moved};
    const double want = voiced_median(target);
    CHECK(std::abs(voiced_median(moved_list) - want) <= 1e-9 * want);
    // Median homogeneity against the sort-based oracle.
    CHECK(oracle::Median(VoicedValues(moved)) ==
          doctest::Approx(k * oracle::Median(VoicedValues(source))).epsilon(1e-12));
  }
}

TEST_CASE("retime keeps flags and endpoints") {
  const F0Track t = Track({100.0, 0.0, 300.0, 400.0});
  const F0Track r = retime(t, 7);
  CHECK(r.size() == 7);
  CHECK(r.values.front() == 100.0);
  CHECK(r.values.back() == 400.0);
  for (std::size_t i = 0; i < r.size(); ++i) CHECK((r.values[i] == 0.0) == !r.voiced[i]);
  CHECK(retime(t, 4).values == t.values);
}

TEST_CASE("1-column DSFF forms round trip") {
  const F0Track t = Track({100.0, 0.0, 300.0});
  const FeatureSequence v = f0_values_to_feature(t);
  const FeatureSequence flags = f0_voicing_to_feature(t);
  CHECK(v.dim() == 1);
  CHECK(flags.data(1, 0) == 0.0);
  CHECK(flags.data(2, 0) == 1.0);
  const F0Track back = f0_from_features(v, &flags);
  CHECK(back.values == t.values);
  CHECK(back.voiced == t.voiced);
  const F0Track inferred = f0_from_features(v, nullptr);
  CHECK(inferred.voiced == t.voiced);
  const EnergyTrack e{{0.0, 1.5, 2.0}, 100.0};
  CHECK(energy_from_feature(energy_to_feature(e)).values == e.values);
}

}  // TEST_SUITE
