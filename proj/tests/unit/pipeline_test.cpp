// pipeline_test.cpp

#include <atomic>
#include <fstream>
#include <thread>

#include "doctest.h"
#include "dsff/feature_store.h"
#include "dsff/fixtures.h"
#include "dsff/metrics.h"
#include "dsff/pipeline.h"
#include "test_util.h"

using namespace dsff;

namespace {

PipelineConfig SmallConfig() {
  PipelineConfig c;
  c.latent_dim = 48;
  c.attn_dim = 16;
  return c;
}

// Three sources at 25/50/50 fps derived from a utterance of `seconds`.
std::vector<FeatureSequence> Sources(Rng& rng, double seconds) {
  std::vector<FeatureSequence> s;
  const double rates[] = {25.0, 50.0, 50.0};
  const int dims[] = {6, 10, 8};
  for (int j = 0; j < 3; ++j) {
    s.push_back(testutil::RandomSequence(rng, static_cast<Eigen::Index>(seconds * rates[j]), dims[j],
                                         rates[j], "src" + std::to_string(j)));
  }
  return s;
}

std::vector<TrainingUtterance> Corpus(Rng& rng) {
  std::vector<TrainingUtterance> corpus;
  const std::vector<std::vector<double>> notes{{220.0, 247.0}, {262.0, 294.0}, {440.0, 494.0}, {523.0, 587.0}};
  for (int k = 0; k < 4; ++k) {
    TrainingUtterance u;
    u.audio = synth_singing(notes[k], 0.3, 0.2, 16000);
    u.sources = Sources(rng, u.audio.duration_seconds());
    u.speaker = k < 2 ? "low" : "high";
    corpus.push_back(std::move(u));
  }
  return corpus;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("analysis puts mel, F0 and energy on one grid") {
  const PipelineConfig cfg = SmallConfig();
  const AudioAnalysis a = analyze_audio(synth_singing({330.0}, 0.5, 0.2, 16000), cfg);
  CHECK(a.mel.dim() == 80);
  CHECK(a.mel.frame_rate == doctest::Approx(100.0));
  CHECK(a.f0.size() == static_cast<std::size_t>(a.n_frames()));
  CHECK(a.energy.values.size() == static_cast<std::size_t>(a.n_frames()));
  std::vector<double> voiced;
  for (std::size_t i = 0; i < a.f0.size(); ++i)
    if (a.f0.voiced[i]) voiced.push_back(a.f0.values[i]);
  REQUIRE(voiced.size() > 20);
  CHECK(oracle::Median(voiced) == doctest::Approx(330.0).epsilon(0.01));
}

TEST_CASE("models are reproducible from seeds") {
  const PipelineConfig cfg = SmallConfig();
  const QuantSpec eq{256, QuantScale::kLinear, 0.0, 10.0};
  const Model a = init_model(cfg, {6, 10}, {"x", "y"}, eq);
  const Model b = init_model(cfg, {6, 10}, {"x", "y"}, eq);
  CHECK(a.projections[1].matrix == b.projections[1].matrix);
  CHECK(a.condenc.matrix == b.condenc.matrix);
  CHECK(a.f0_table.rows == b.f0_table.rows);
  CHECK(a.speakers.rows() == b.speakers.rows());
  PipelineConfig other = cfg;
  other.set_base_seed(999);
  CHECK(init_model(other, {6, 10}, {"x", "y"}, eq).condenc.matrix != a.condenc.matrix);
  // Weights are already at storage precision.
  CHECK(round_to_storage(a.projections[0].matrix) == a.projections[0].matrix);
}

TEST_CASE("train, save, load and convert") {
  testutil::TempDir dir("model");
  Rng rng(1);
  const PipelineConfig cfg = SmallConfig();
  const std::vector<TrainingUtterance> corpus = Corpus(rng);
  const Model model = train_model(cfg, corpus, 1);
  CHECK(model.decoder.matrix.rows() == cfg.latent_dim);
  CHECK(model.decoder.matrix.cols() == 80);
  CHECK(model.speaker_f0.at("low").size() == 2);

  SUBCASE("parallel training is bit-identical") {
    const Model par = train_model(cfg, corpus, 3);
    CHECK(par.decoder.matrix == model.decoder.matrix);
    CHECK(par.decoder.bias == model.decoder.bias);
  }

  SUBCASE("reload reproduces conversion") {
    save_model(model, dir.path());
    const Model back = load_model(dir.path());
    CHECK(back.projections.size() == 3);
    CHECK(back.speakers.names() == model.speakers.names());
    CHECK(back.energy_quant.hi == doctest::Approx(model.energy_quant.hi).epsilon(1e-6));
    save_model(back, dir / "again");
    const Model twice = load_model(dir / "again");
    CHECK(twice.decoder.matrix == back.decoder.matrix);
    const ConversionResult r1 = convert_utterance(cfg, back, corpus[0].audio, corpus[0].sources, "high", 1.0);
    const ConversionResult r2 = convert_utterance(cfg, twice, corpus[0].audio, corpus[0].sources, "high", 1.0);
    CHECK(r1.mel.data == r2.mel.data);
  }

  SUBCASE("conversion transposes into the reference range") {
    const ConversionResult r = convert_utterance(cfg, model, corpus[0].audio, corpus[0].sources, "high");
    const std::vector<F0Track>& ref = model.speaker_f0.at("high");
    const std::vector<F0Track> moved{r.transposed_f0};
    const double want = voiced_median(ref);
    CHECK(std::abs(voiced_median(moved) - want) <= 1e-9 * want);
    CHECK(r.factor > 1.5);
    CHECK(r.mel.n_frames() == analyze_audio(corpus[0].audio, cfg).n_frames());
  }

  SUBCASE("reference speaker changes the output") {
    const ConversionResult lo = convert_utterance(cfg, model, corpus[0].audio, corpus[0].sources, "low", 1.0);
    const ConversionResult hi = convert_utterance(cfg, model, corpus[0].audio, corpus[0].sources, "high", 1.0);
    CHECK(lo.mel.data != hi.mel.data);
    // With the F0 fixed, the difference is the speaker row pushed through the linear maps.
    const RowVector delta = (model.speakers.rows().row(model.speakers.index_of("high")) -
                             model.speakers.rows().row(model.speakers.index_of("low"))) *
                            model.condenc.matrix * model.decoder.matrix;
    for (Eigen::Index t = 0; t < lo.mel.n_frames(); ++t) {
      CHECK(((hi.mel.data.row(t) - lo.mel.data.row(t)) - delta).cwiseAbs().maxCoeff() <= 1e-9);
    }
  }

  SUBCASE("errors") {
    CHECK_THROWS_AS(convert_utterance(cfg, model, corpus[0].audio, corpus[0].sources, "nobody"), Error);
    std::vector<FeatureSequence> two(corpus[0].sources.begin(), corpus[0].sources.begin() + 2);
    CHECK_THROWS_AS(convert_utterance(cfg, model, corpus[0].audio, two, "low"), Error);
    CHECK_THROWS_AS(load_model(dir / "missing"), Error);
  }
}

TEST_CASE("identity conversion with an exact-fit decoder") {
  testutil::TempDir dir("identity");
  PipelineConfig cfg = SmallConfig();
  cfg.latent_dim = 160;
  cfg.lambda_relative = 1e-6;
  Rng rng(2);
  TrainingUtterance u;
  u.audio = synth_singing({300.0, 350.0}, 0.3, 0.2, 16000);
  u.speaker = "solo";
  const AudioAnalysis a = analyze_audio(u.audio, cfg);
  // A full-rank source on the mel grid lets the ridge fit interpolate.
  u.sources = {FeatureSequence{round_to_storage(rng.GaussianMatrix(a.n_frames(), 128, 1.0)), 100.0, "dense"}};
  const Model model = train_model(cfg, {u});
  save_model(model, dir.path());
  const Model back = load_model(dir.path());
  const ConversionResult r = convert_utterance(cfg, back, u.audio, u.sources, "solo", 1.0);
  CHECK(r.factor == 1.0);
  CHECK(mcd(r.mel, a.mel) < 1e-3);
}

TEST_CASE("parallel_for") {
  SUBCASE("covers every index once") {
    for (int jobs : {1, 2, 4, 16}) {
      std::vector<std::atomic<int>> hits(37);
      parallel_for(hits.size(), jobs, [&](std::size_t i) { hits[i]++; });
      for (const auto& h : hits) CHECK(h.load() == 1);
    }
  }
  SUBCASE("first failing index wins") {
    try {
      parallel_for(10, 4, [](std::size_t i) {
        if (i == 3 || i == 7) throw Error(ErrorCode::kIo, "fail " + std::to_string(i));
      });
      FAIL("expected failure");
    } catch (const Error& e) {
      CHECK(std::string(e.what()) == "fail 3");
    }
  }
  SUBCASE("zero items") { CHECK_NOTHROW(parallel_for(0, 4, [](std::size_t) {})); }
}

TEST_CASE("fixtures are deterministic and complete") {
  testutil::TempDir a("fx_a"), b("fx_b");
  PipelineConfig cfg;
  FixtureOptions opts;
  opts.speakers = 2;
  opts.utterances_per_speaker = 2;
  opts.duration_s = 0.4;
  const FixtureSet sa = generate_fixtures(cfg, opts, a.path());
  const FixtureSet sb = generate_fixtures(cfg, opts, b.path());
  CHECK(sa.speakers == sb.speakers);
  CHECK(read_file(sa.train_manifest) == read_file(sb.train_manifest));
  for (const auto& entry : std::filesystem::directory_iterator(a.path())) {
    const auto name = entry.path().filename();
    CHECK(read_file(entry.path()) == read_file(b.path() / name));
  }
  const PipelineConfig back = load_config(sa.config);
  CHECK(dump_config(back) == dump_config(cfg));
  const AudioBuffer w = read_wav(a / "singer0_utt0.wav");
  CHECK(w.sample_rate == cfg.sample_rate);
}

}  // TEST_SUITE
