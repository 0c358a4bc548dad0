// cli.cpp

#include "dsff/cli.h"

#include <array>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "dsff/bench.h"
#include "dsff/config.h"
#include "dsff/feature_store.h"
#include "dsff/fixtures.h"
#include "dsff/metrics.h"
#include "dsff/pipeline.h"

namespace dsff {
namespace {

namespace fs = std::filesystem;

struct ManifestLine {
  int line_no = 0;
  std::vector<std::string> fields;
};

// Tab-separated records; blank lines and '#' comments skipped.
std::vector<ManifestLine> ReadManifest(const fs::path& path, std::size_t min_fields) {
  std::istringstream in(read_file(path));
  std::vector<ManifestLine> lines;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    ManifestLine rec;
    rec.line_no = line_no;
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = line.find('\t', start);
      rec.fields.push_back(line.substr(start, tab == std::string::npos ? std::string::npos
                                                                        : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (rec.fields.size() < min_fields) {
      Fail(ErrorCode::kFormat, path.string() + ":" + std::to_string(line_no) + ": expected at least " +
                                   std::to_string(min_fields) + " tab-separated fields");
    }
    lines.push_back(std::move(rec));
  }
  if (lines.empty()) Fail(ErrorCode::kFormat, path.string() + ": manifest has no records");
  return lines;
}

fs::path Resolve(const fs::path& base_dir, const std::string& field) {
  const fs::path p(field);
  return p.is_absolute() ? p : base_dir / p;
}

std::vector<FeatureSequence> ReadSources(const std::vector<std::string>& paths,
                                         const fs::path& base_dir) {
  std::vector<FeatureSequence> sources;
  for (const auto& p : paths) sources.push_back(read_feature(Resolve(base_dir, p)));
  return sources;
}

std::string FormatMetric(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream s;
  s << std::setprecision(10) << *v;
  return s.str();
}

F0Track ReadF0(const fs::path& path) { return f0_from_features(read_feature(path), nullptr); }

// Trims both tracks to a common length by nearest-frame retiming of the longer.
void MatchLengths(F0Track* a, F0Track* b) {
  if (a->size() > b->size()) *a = retime(*a, static_cast<Eigen::Index>(b->size()));
  if (b->size() > a->size()) *b = retime(*b, static_cast<Eigen::Index>(a->size()));
}

MetricReport EvaluateRecord(const ManifestLine& rec, const fs::path& base, F0Unit unit,
                            bool use_dtw) {
  const auto field = [&](std::size_t i) -> std::optional<fs::path> {
    if (rec.fields[i].empty() || rec.fields[i] == "-") return std::nullopt;
    return Resolve(base, rec.fields[i]);
  };
  MetricReport report;
  report.f0rmse_unit = unit;
  if (field(0) && field(1)) {
    FeatureSequence a = read_feature(*field(0));
    FeatureSequence b = read_feature(*field(1));
    if (!use_dtw && a.n_frames() != b.n_frames()) {
      const Eigen::Index n = std::min(a.n_frames(), b.n_frames());
      a = resample_time(a, n);
      b = resample_time(b, n);
    }
    report.mcd = mcd(a, b, use_dtw);
  }
  if (field(2) && field(3)) {
    F0Track a = ReadF0(*field(2));
    F0Track b = ReadF0(*field(3));
    MatchLengths(&a, &b);
    report.f0corr = f0_corr(a, b);
    report.f0rmse = f0_rmse(a, b, unit);
  }
  if (field(4) && field(5)) {
    report.cer = cer(read_file(*field(5)), read_file(*field(4)));
  }
  if (field(6) && field(7)) {
    const FeatureSequence a = read_feature(*field(6));
    const FeatureSequence b = read_feature(*field(7));
    Require(a.n_frames() == 1 && b.n_frames() == 1, "speaker embeddings must be 1-frame files");
    report.sim = cosine_sim(std::span<const double>(a.data.data(), a.data.size()),
                            std::span<const double>(b.data.data(), b.data.size()));
  }
  return report;
}

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return kExitInvalidInput;
    case ErrorCode::kIo:
      return kExitIo;
    case ErrorCode::kFormat:
      return kExitFormat;
    case ErrorCode::kConfig:
      return kExitConfig;
    case ErrorCode::kNumeric:
      return kExitNumeric;
  }
  return kExitInternal;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"dsff: multi-source semantic feature fusion for singing voice conversion"};
  app.name(args.empty() ? "dsff" : fs::path(args[0]).filename().string());
  app.require_subcommand(0, 1);
  app.fallthrough();  // global flags may follow the subcommand

  std::string config_path;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  bool dump = false;
  app.add_option("--config", config_path, "Pipeline config file (INI)");
  app.add_option("--seed", seed, "Base seed for every randomly initialized table");
  app.add_option("--jobs", jobs, "Worker threads for per-utterance work")->check(CLI::PositiveNumber);
  app.add_flag("--dump-config", dump, "Print the effective config and exit");

  // gen-fixtures
  auto* gen = app.add_subcommand("gen-fixtures", "Write a synthetic singing corpus");
  std::string gen_out;
  FixtureOptions fixture_opts;
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--speakers", fixture_opts.speakers)->check(CLI::PositiveNumber);
  gen->add_option("--utterances", fixture_opts.utterances_per_speaker, "Utterances per speaker")
      ->check(CLI::PositiveNumber);
  gen->add_option("--duration", fixture_opts.duration_s, "Voiced seconds per utterance")
      ->check(CLI::PositiveNumber);

  // extract-prosody
  auto* prosody = app.add_subcommand("extract-prosody", "Mel, F0, voicing and energy of a WAV");
  std::string prosody_wav;
  std::string prosody_prefix;
  prosody->add_option("--wav", prosody_wav)->required();
  prosody->add_option("--out-prefix", prosody_prefix, "Writes <prefix>.{mel,f0,voicing,energy}.dsff")
      ->required();

  // fuse
  auto* fuse = app.add_subcommand("fuse", "Resample, project and add semantic feature files");
  std::vector<std::string> fuse_features;
  Eigen::Index fuse_frames = 0;
  std::string fuse_like;
  std::string fuse_model;
  std::string fuse_out;
  fuse->add_option("--features", fuse_features)->required();
  auto* frames_opt = fuse->add_option("--frames", fuse_frames, "Target frame count");
  auto* like_opt = fuse->add_option("--like", fuse_like, "Take the target frame count from this file");
  frames_opt->excludes(like_opt);
  fuse->add_option("--model", fuse_model, "Use this model's projections instead of seeded ones");
  fuse->add_option("--out", fuse_out)->required();

  // fit
  auto* fit = app.add_subcommand("fit", "Fit the reference decoder on a training manifest");
  std::string fit_manifest;
  std::string fit_out;
  fit->add_option("--manifest", fit_manifest, "Lines: wav<TAB>speaker<TAB>features...")->required();
  fit->add_option("--out", fit_out, "Model directory (default: paths.model_dir)");

  // convert
  auto* conv = app.add_subcommand("convert", "Convert source audio to a reference speaker");
  std::string conv_model;
  std::string conv_wav;
  std::vector<std::string> conv_features;
  std::string conv_speaker;
  std::string conv_out;
  std::string conv_f0_out;
  std::string conv_manifest;
  std::optional<double> conv_factor;
  conv->add_option("--model", conv_model, "Model directory (default: paths.model_dir)");
  conv->add_option("--wav", conv_wav);
  conv->add_option("--features", conv_features);
  conv->add_option("--speaker", conv_speaker, "Reference speaker");
  conv->add_option("--out", conv_out, "Output mel DSFF");
  conv->add_option("--f0-out", conv_f0_out, "Also write the transposed F0 track");
  conv->add_option("--factor", conv_factor, "Explicit transposition factor")
      ->check(CLI::PositiveNumber);
  conv->add_option("--manifest", conv_manifest,
                   "Batch lines: wav<TAB>speaker<TAB>out<TAB>features...");

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Objective metrics over a manifest");
  std::string eval_manifest;
  std::string eval_out;
  std::string eval_unit = "hz";
  bool eval_dtw = false;
  eval->add_option("--manifest", eval_manifest,
                   "Lines: conv_mel ref_mel conv_f0 ref_f0 hyp_txt ref_txt conv_emb ref_emb "
                   "(tab-separated, '-' to skip)")
      ->required();
  eval->add_option("--out", eval_out, "CSV report path")->required();
  eval->add_option("--f0-unit", eval_unit)->check(CLI::IsMember({"hz", "cents"}));
  eval->add_flag("--dtw", eval_dtw, "Align mel frames by DTW for MCD");

  // bench
  auto* bench = app.add_subcommand("bench", "Resampling vs cross-attention RTX/RTF");
  WorkloadConfig workload;
  BenchOptions bench_opts;
  std::string bench_csv;
  bench->add_option("--utterances", workload.n_utterances)->check(CLI::PositiveNumber);
  bench->add_option("--duration", workload.duration_s, "Seconds per utterance")
      ->check(CLI::PositiveNumber);
  bench->add_option("--runs", bench_opts.runs, "Timed runs (median reported)")
      ->check(CLI::PositiveNumber);
  bench->add_option("--csv", bench_csv, "Also write a CSV report");

  std::vector<std::string> argv_storage(args.begin(), args.end());
  if (argv_storage.empty()) argv_storage.push_back("dsff");
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << app.get_name() << ": " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    PipelineConfig cfg = config_path.empty() ? PipelineConfig{} : load_config(config_path);
    if (seed) cfg.set_base_seed(*seed);
    cfg.validate();

    if (dump) {
      out << dump_config(cfg);
      return kExitOk;
    }
    if (app.get_subcommands().empty()) {
      err << app.get_name() << ": a subcommand is required\n" << app.help();
      return kExitUsage;
    }

    if (gen->parsed()) {
      const FixtureSet set = generate_fixtures(cfg, fixture_opts, gen_out);
      out << "wrote fixtures: " << set.train_manifest.string() << ", "
          << set.convert_manifest.string() << "\n";
    } else if (prosody->parsed()) {
      const AudioAnalysis a = analyze_audio(read_wav(prosody_wav), cfg);
      write_feature(a.mel, prosody_prefix + ".mel.dsff");
      write_feature(f0_values_to_feature(a.f0), prosody_prefix + ".f0.dsff");
      write_feature(f0_voicing_to_feature(a.f0), prosody_prefix + ".voicing.dsff");
      write_feature(energy_to_feature(a.energy), prosody_prefix + ".energy.dsff");
      std::size_t voiced = 0;
      for (bool v : a.f0.voiced) voiced += v ? 1 : 0;
      out << a.n_frames() << " frames at " << a.mel.frame_rate << " fps, " << voiced
          << " voiced\n";
    } else if (fuse->parsed()) {
      const std::vector<FeatureSequence> sources = ReadSources(fuse_features, fs::path());
      Eigen::Index frames = fuse_frames;
      if (!fuse_like.empty()) frames = read_feature(fuse_like).n_frames();
      if (frames < 1) Fail(ErrorCode::kInvalidArgument, "give --frames N or --like FILE");
      std::vector<ProjectionWeights> weights;
      if (!fuse_model.empty()) {
        weights = load_model(fuse_model).projections;
      } else {
        std::vector<Eigen::Index> dims;
        for (const auto& s : sources) dims.push_back(s.dim());
        weights = init_model(cfg, dims, {}, QuantSpec{}).projections;
      }
      FeatureSequence fused = fuse_add(sources, weights, frames);
      write_feature(fused, fuse_out);
      out << "fused " << sources.size() << " sources into " << fused.n_frames() << "x"
          << fused.dim() << "\n";
    } else if (fit->parsed()) {
      const fs::path manifest(fit_manifest);
      const fs::path base = manifest.parent_path();
      std::vector<TrainingUtterance> corpus;
      for (const auto& rec : ReadManifest(manifest, 3)) {
        TrainingUtterance u;
        u.audio = read_wav(Resolve(base, rec.fields[0]));
        u.speaker = rec.fields[1];
        u.sources = ReadSources({rec.fields.begin() + 2, rec.fields.end()}, base);
        corpus.push_back(std::move(u));
      }
      const Model model = train_model(cfg, corpus, jobs);
      const fs::path dir = fit_out.empty() ? fs::path(cfg.model_dir) : fs::path(fit_out);
      save_model(model, dir);
      out << "fit decoder on " << corpus.size() << " utterances, lambda " << model.decoder.lambda
          << ", model written to " << dir.string() << "\n";
    } else if (conv->parsed()) {
      const Model model = load_model(conv_model.empty() ? fs::path(cfg.model_dir)
                                                        : fs::path(conv_model));
      if (!conv_manifest.empty()) {
        const fs::path manifest(conv_manifest);
        const fs::path base = manifest.parent_path();
        const auto records = ReadManifest(manifest, 4);
        std::vector<double> factors(records.size());
        parallel_for(records.size(), jobs, [&](std::size_t i) {
          const auto& f = records[i].fields;
          const ConversionResult r =
              convert_utterance(cfg, model, read_wav(Resolve(base, f[0])),
                                ReadSources({f.begin() + 3, f.end()}, base), f[1], conv_factor);
          write_feature(r.mel, Resolve(base, f[2]));
          factors[i] = r.factor;
        });
        for (std::size_t i = 0; i < records.size(); ++i) {
          out << records[i].fields[2] << ": factor " << factors[i] << "\n";
        }
      } else {
        if (conv_wav.empty() || conv_features.empty() || conv_speaker.empty() || conv_out.empty()) {
          err << app.get_name()
              << ": convert needs --wav, --features, --speaker and --out (or --manifest)\n"
              << conv->help();
          return kExitUsage;
        }
        const ConversionResult r =
            convert_utterance(cfg, model, read_wav(conv_wav), ReadSources(conv_features, fs::path()),
                              conv_speaker, conv_factor);
        write_feature(r.mel, conv_out);
        if (!conv_f0_out.empty()) write_feature(f0_values_to_feature(r.transposed_f0), conv_f0_out);
        out << "converted " << r.mel.n_frames() << " frames, transposition factor " << r.factor
            << "\n";
      }
    } else if (eval->parsed()) {
      const fs::path manifest(eval_manifest);
      const fs::path base = manifest.parent_path();
      const auto records = ReadManifest(manifest, 8);
      const F0Unit unit = eval_unit == "cents" ? F0Unit::kCents : F0Unit::kHz;
      std::vector<MetricReport> reports(records.size());
      parallel_for(records.size(), jobs, [&](std::size_t i) {
        reports[i] = EvaluateRecord(records[i], base, unit, eval_dtw);
      });

      std::ostringstream csv;
      csv << "utterance,mcd_db,f0corr,f0rmse_" << to_string(unit) << ",cer,sim\n";
      std::array<double, 5> sums{};
      std::array<int, 5> counts{};
      for (std::size_t i = 0; i < records.size(); ++i) {
        const MetricReport& r = reports[i];
        const std::optional<double> values[5] = {r.mcd, r.f0corr, r.f0rmse, r.cer, r.sim};
        csv << fs::path(records[i].fields[0]).filename().string();
        for (int k = 0; k < 5; ++k) {
          csv << "," << FormatMetric(values[k]);
          if (values[k]) {
            sums[k] += *values[k];
            ++counts[k];
          }
        }
        csv << "\n";
      }
      csv << "mean";
      for (int k = 0; k < 5; ++k) {
        csv << ","
            << FormatMetric(counts[k] ? std::optional<double>(sums[k] / counts[k]) : std::nullopt);
      }
      csv << "\n";
      write_file(eval_out, csv.str());
      out << csv.str();
    } else if (bench->parsed()) {
      workload.latent_dim = cfg.latent_dim;
      workload.attn_dim = cfg.attn_dim;
      workload.target_frame_rate = cfg.target_frame_rate;
      workload.n_mels = cfg.mel.n_mels;
      workload.lambda_relative = cfg.lambda_relative;
      bench_opts.jobs = jobs;
      const AlignmentComparison cmp = compare_alignment(workload, bench_opts);
      out << format_bench_table(cmp);
      if (!bench_csv.empty()) write_file(bench_csv, format_bench_csv(cmp));
    }
    return kExitOk;
  } catch (const Error& e) {
    err << app.get_name() << ": error: " << e.what() << "\n";
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    err << app.get_name() << ": internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace dsff
