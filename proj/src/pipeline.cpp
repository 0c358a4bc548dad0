// pipeline.cpp

#include "dsff/pipeline.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <exception>
#include <sstream>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "dsff/feature_store.h"

namespace dsff {
namespace {

std::string FormatDouble(double v) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, result.ptr);
}

double ParseDouble(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    Fail(ErrorCode::kFormat, "model.ini: invalid value for " + key);
  }
  return v;
}

FeatureSequence TableFeature(const Matrix& rows, const std::string& tag) {
  FeatureSequence seq;
  seq.data = rows;
  seq.frame_rate = 1.0;
  seq.source_tag = tag;
  return seq;
}

// All tracks of a speaker concatenated into one; medians only see voiced frames.
F0Track ConcatTracks(const std::vector<F0Track>& tracks) {
  F0Track all;
  all.frame_rate = tracks.empty() ? 1.0 : tracks.front().frame_rate;
  for (const auto& t : tracks) {
    all.values.insert(all.values.end(), t.values.begin(), t.values.end());
    all.voiced.insert(all.voiced.end(), t.voiced.begin(), t.voiced.end());
  }
  return all;
}

}  // namespace

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

AudioAnalysis analyze_audio(const AudioBuffer& audio, const PipelineConfig& cfg) {
  const SpectralFrames frames = stft_magnitudes(audio, cfg.stft(audio.sample_rate));
  MelConfig mel_cfg = cfg.mel;
  mel_cfg.fmax = std::min(mel_cfg.fmax, audio.sample_rate / 2.0);

  AudioAnalysis a;
  a.mel = log_mel(frames, mel_cfg);
  a.energy = extract_energy(frames);
  a.f0 = retime(extract_f0(audio, cfg.f0_config(audio.sample_rate)), a.mel.n_frames());
  a.f0.frame_rate = a.mel.frame_rate;
  return a;
}

Matrix round_to_storage(const Matrix& m) { return m.cast<float>().cast<double>(); }

Model init_model(const PipelineConfig& cfg, const std::vector<Eigen::Index>& source_dims,
                 const std::vector<std::string>& speakers, const QuantSpec& energy_quant) {
  cfg.validate();
  Require(!source_dims.empty(), "model needs at least one semantic source");
  const Eigen::Index d = cfg.latent_dim;
  Model model;
  for (std::size_t i = 0; i < source_dims.size(); ++i) {
    ProjectionWeights w =
        make_projection(source_dims[i], d, cfg.seeds.projection + i, "src" + std::to_string(i));
    w.matrix = round_to_storage(w.matrix);
    model.projections.push_back(std::move(w));
  }
  model.condenc = make_projection(d, d, cfg.seeds.condenc, "condenc");
  model.condenc.matrix = round_to_storage(model.condenc.matrix);
  model.f0_table.rows = round_to_storage(make_embedding_table(cfg.seeds.f0_embedding, d).rows);
  model.energy_table.rows =
      round_to_storage(make_embedding_table(cfg.seeds.energy_embedding, d).rows);
  const SpeakerTable raw = make_speaker_table(speakers, d, cfg.seeds.speakers);
  model.speakers = SpeakerTable(round_to_storage(raw.rows()), raw.names());
  model.f0_quant = cfg.f0_quant();
  model.energy_quant = energy_quant;
  return model;
}

Condition build_condition(const Model& model, const UtteranceInputs& in, Eigen::Index n_frames,
                          double frame_rate) {
  Require(in.sources.size() == model.projections.size(),
          "expected " + std::to_string(model.projections.size()) + " semantic sources, got " +
              std::to_string(in.sources.size()));
  FeatureSequence semantic = fuse_add(in.sources, model.projections, n_frames);
  semantic.frame_rate = frame_rate;

  F0Track f0 = static_cast<Eigen::Index>(in.f0.size()) == n_frames ? in.f0 : retime(in.f0, n_frames);
  EnergyTrack energy = static_cast<Eigen::Index>(in.energy.values.size()) == n_frames
                           ? in.energy
                           : retime(in.energy, n_frames);
  FeatureSequence f0_emb = embed_quantized(quantize(f0, model.f0_quant), model.f0_table);
  FeatureSequence energy_emb =
      embed_quantized(quantize(energy, model.energy_quant), model.energy_table);
  const FeatureSequence spk = speaker_frames(in.speaker, model.speakers, n_frames, frame_rate);
  return assemble_condition(semantic, f0_emb, energy_emb, spk, model.condenc);
}

Model train_model(const PipelineConfig& cfg, const std::vector<TrainingUtterance>& corpus,
                  int jobs) {
  Require(!corpus.empty(), "training corpus is empty");
  std::vector<Eigen::Index> dims;
  for (const auto& s : corpus.front().sources) dims.push_back(s.dim());
  std::vector<std::string> speakers;
  for (const auto& u : corpus) {
    Require(u.sources.size() == dims.size(), "utterances differ in semantic source count");
    for (std::size_t i = 0; i < dims.size(); ++i) {
      Require(u.sources[i].dim() == dims[i], "utterances differ in semantic source dims");
    }
    if (std::find(speakers.begin(), speakers.end(), u.speaker) == speakers.end()) {
      speakers.push_back(u.speaker);
    }
  }

  std::vector<AudioAnalysis> analyses(corpus.size());
  parallel_for(corpus.size(), jobs,
               [&](std::size_t i) { analyses[i] = analyze_audio(corpus[i].audio, cfg); });

  std::vector<EnergyTrack> energies;
  for (const auto& a : analyses) energies.push_back(a.energy);
  Model model = init_model(cfg, dims, speakers, energy_quant_spec(energies, cfg.energy_percentile));

  PairedDataset data(corpus.size());
  parallel_for(corpus.size(), jobs, [&](std::size_t i) {
    const AudioAnalysis& a = analyses[i];
    UtteranceInputs in{corpus[i].sources, a.f0, a.energy, corpus[i].speaker};
    data[i].condition = build_condition(model, in, a.n_frames(), a.mel.frame_rate);
    data[i].mel = a.mel;
  });
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    model.speaker_f0[corpus[i].speaker].push_back(analyses[i].f0);
  }
  model.decoder = fit_ridge_relative(data, cfg.lambda_relative);
  return model;
}

ConversionResult convert_utterance(const PipelineConfig& cfg, const Model& model,
                                   const AudioBuffer& source_audio,
                                   const std::vector<FeatureSequence>& sources,
                                   const std::string& reference_speaker,
                                   std::optional<double> factor) {
  const AudioAnalysis a = analyze_audio(source_audio, cfg);
  ConversionResult result;
  if (factor) {
    result.factor = *factor;
  } else {
    const auto it = model.speaker_f0.find(reference_speaker);
    if (it == model.speaker_f0.end()) {
      Fail(ErrorCode::kInvalidArgument, "speaker not in table: " + reference_speaker);
    }
    result.factor = transposition_factor(a.f0, it->second);
  }
  result.transposed_f0 = transpose(a.f0, result.factor);
  UtteranceInputs in{sources, result.transposed_f0, a.energy, reference_speaker};
  const Condition cond = build_condition(model, in, a.n_frames(), a.mel.frame_rate);
  result.mel = decode(cond, model.decoder);
  return result;
}

void save_model(const Model& model, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ostringstream ini;
  ini << "[model]\n";
  ini << "n_sources = " << model.projections.size() << "\n";
  ini << "lambda = " << FormatDouble(model.decoder.lambda) << "\n";
  ini << "[quant]\n";
  ini << "f0_scale = " << (model.f0_quant.scale == QuantScale::kLog ? "log" : "linear") << "\n";
  ini << "f0_lo = " << FormatDouble(model.f0_quant.lo) << "\n";
  ini << "f0_hi = " << FormatDouble(model.f0_quant.hi) << "\n";
  ini << "energy_lo = " << FormatDouble(model.energy_quant.lo) << "\n";
  ini << "energy_hi = " << FormatDouble(model.energy_quant.hi) << "\n";
  write_file(dir / "model.ini", ini.str());

  for (std::size_t i = 0; i < model.projections.size(); ++i) {
    write_feature(projection_to_feature(model.projections[i]),
                  dir / ("proj_" + std::to_string(i) + ".dsff"));
  }
  write_feature(projection_to_feature(model.condenc, "condenc"), dir / "condenc.dsff");
  write_feature(TableFeature(model.f0_table.rows, "embed:f0"), dir / "embed_f0.dsff");
  write_feature(TableFeature(model.energy_table.rows, "embed:energy"), dir / "embed_energy.dsff");
  write_speaker_table(model.speakers, dir / "speakers.dsff");
  write_feature(decoder_to_feature(model.decoder), dir / "decoder.dsff");
  for (std::size_t row = 0; row < model.speakers.names().size(); ++row) {
    const auto it = model.speaker_f0.find(model.speakers.names()[row]);
    if (it == model.speaker_f0.end()) continue;
    F0Track all = ConcatTracks(it->second);
    FeatureSequence seq = f0_values_to_feature(all);
    seq.source_tag = "f0corpus";
    write_feature(seq, dir / ("f0corpus_" + std::to_string(row) + ".dsff"));
  }
}

Model load_model(const std::filesystem::path& dir) {
  boost::property_tree::ptree ini;
  {
    std::istringstream in(read_file(dir / "model.ini"));
    try {
      boost::property_tree::ini_parser::read_ini(in, ini);
    } catch (const boost::property_tree::ini_parser_error& e) {
      Fail(ErrorCode::kFormat, "model.ini: " + e.message());
    }
  }
  const auto get = [&](const std::string& key) {
    const auto v = ini.get_optional<std::string>(key);
    if (!v) Fail(ErrorCode::kFormat, "model.ini: missing " + key);
    return *v;
  };

  Model model;
  const auto n_sources = static_cast<std::size_t>(ParseDouble("model.n_sources", get("model.n_sources")));
  for (std::size_t i = 0; i < n_sources; ++i) {
    model.projections.push_back(
        projection_from_feature(read_feature(dir / ("proj_" + std::to_string(i) + ".dsff"))));
  }
  model.condenc = projection_from_feature(read_feature(dir / "condenc.dsff"));
  model.f0_table.rows = read_feature(dir / "embed_f0.dsff").data;
  model.energy_table.rows = read_feature(dir / "embed_energy.dsff").data;
  model.speakers = read_speaker_table(dir / "speakers.dsff");
  model.decoder = decoder_from_feature(read_feature(dir / "decoder.dsff"));
  model.decoder.lambda = ParseDouble("model.lambda", get("model.lambda"));

  model.f0_quant.scale = get("quant.f0_scale") == "log" ? QuantScale::kLog : QuantScale::kLinear;
  model.f0_quant.lo = ParseDouble("quant.f0_lo", get("quant.f0_lo"));
  model.f0_quant.hi = ParseDouble("quant.f0_hi", get("quant.f0_hi"));
  model.energy_quant.scale = QuantScale::kLinear;
  model.energy_quant.lo = ParseDouble("quant.energy_lo", get("quant.energy_lo"));
  model.energy_quant.hi = ParseDouble("quant.energy_hi", get("quant.energy_hi"));
  ValidateQuantSpec(model.f0_quant);
  ValidateQuantSpec(model.energy_quant);

  for (std::size_t row = 0; row < model.speakers.names().size(); ++row) {
    const auto path = dir / ("f0corpus_" + std::to_string(row) + ".dsff");
    if (!std::filesystem::exists(path)) continue;
    model.speaker_f0[model.speakers.names()[row]].push_back(
        f0_from_features(read_feature(path), nullptr));
  }
  return model;
}

}  // namespace dsff
