// config.cpp

#include "dsff/config.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>
#include <type_traits>
#include <vector>

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

template <typename T>
T ParseNumber(const std::string& key, const std::string& text) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    Fail(ErrorCode::kConfig, "invalid value for " + key + ": '" + text + "'");
  }
  return value;
}

QuantScale ParseScale(const std::string& key, const std::string& text) {
  if (text == "log") return QuantScale::kLog;
  if (text == "linear") return QuantScale::kLinear;
  Fail(ErrorCode::kConfig, "invalid value for " + key + ": '" + text + "' (log|linear)");
}

std::string ScaleName(QuantScale s) { return s == QuantScale::kLog ? "log" : "linear"; }

// One binding per config key: how to print it and how to parse it.
struct Field {
  std::string section;
  std::string key;
  std::function<std::string(const PipelineConfig&)> get;
  std::function<void(PipelineConfig&, const std::string&)> set;
};

template <typename T, typename Member>
Field NumberField(std::string section, std::string key, Member member) {
  const std::string full = section + "." + key;
  return Field{
      section, key,
      [member](const PipelineConfig& c) {
        if constexpr (std::is_floating_point_v<T>) {
          return FormatDouble(member(c));
        } else {
          return std::to_string(member(c));
        }
      },
      [member, full](PipelineConfig& c, const std::string& v) {
        member(c) = ParseNumber<T>(full, v);
      }};
}

const std::vector<Field>& Fields() {
  static const std::vector<Field> fields = [] {
    std::vector<Field> f;
    f.push_back(NumberField<int>("pipeline", "latent_dim",
                                 [](auto& c) -> auto& { return c.latent_dim; }));
    f.push_back(NumberField<double>("pipeline", "target_frame_rate",
                                    [](auto& c) -> auto& { return c.target_frame_rate; }));
    f.push_back(NumberField<int>("pipeline", "sample_rate",
                                 [](auto& c) -> auto& { return c.sample_rate; }));
    f.push_back(NumberField<int>("stft", "frame_length",
                                 [](auto& c) -> auto& { return c.stft_frame_length; }));
    f.push_back(NumberField<int>("stft", "fft_size",
                                 [](auto& c) -> auto& { return c.stft_fft_size; }));
    f.push_back(NumberField<int>("mel", "n_mels",
                                 [](auto& c) -> auto& { return c.mel.n_mels; }));
    f.push_back(NumberField<double>("mel", "fmin",
                                    [](auto& c) -> auto& { return c.mel.fmin; }));
    f.push_back(NumberField<double>("mel", "fmax",
                                    [](auto& c) -> auto& { return c.mel.fmax; }));
    f.push_back(NumberField<double>("mel", "floor",
                                    [](auto& c) -> auto& { return c.mel.floor; }));
    f.push_back(NumberField<double>("f0", "f0_min",
                                    [](auto& c) -> auto& { return c.f0.f0_min; }));
    f.push_back(NumberField<double>("f0", "f0_max",
                                    [](auto& c) -> auto& { return c.f0.f0_max; }));
    f.push_back(NumberField<double>("f0", "frame_length",
                                    [](auto& c) -> auto& { return c.f0.frame_length; }));
    f.push_back(NumberField<double>(
        "f0", "voicing_threshold", [](auto& c) -> auto& { return c.f0.voicing_threshold; }));
    f.push_back(NumberField<double>("f0", "silence_rms",
                                    [](auto& c) -> auto& { return c.f0.silence_rms; }));
    f.push_back(Field{"quant", "f0_scale",
                      [](const PipelineConfig& c) { return ScaleName(c.f0_scale); },
                      [](PipelineConfig& c, const std::string& v) {
                        c.f0_scale = ParseScale("quant.f0_scale", v);
                      }});
    f.push_back(NumberField<double>("quant", "f0_lo",
                                    [](auto& c) -> auto& { return c.f0_quant_lo; }));
    f.push_back(NumberField<double>("quant", "f0_hi",
                                    [](auto& c) -> auto& { return c.f0_quant_hi; }));
    f.push_back(NumberField<double>(
        "quant", "energy_percentile", [](auto& c) -> auto& { return c.energy_percentile; }));
    f.push_back(NumberField<double>(
        "decoder", "lambda_relative", [](auto& c) -> auto& { return c.lambda_relative; }));
    f.push_back(NumberField<int>("attention", "attn_dim",
                                 [](auto& c) -> auto& { return c.attn_dim; }));
    using S = std::uint64_t;
    f.push_back(NumberField<S>("seeds", "projection",
                               [](auto& c) -> auto& { return c.seeds.projection; }));
    f.push_back(NumberField<S>("seeds", "condenc",
                               [](auto& c) -> auto& { return c.seeds.condenc; }));
    f.push_back(NumberField<S>("seeds", "f0_embedding",
                               [](auto& c) -> auto& { return c.seeds.f0_embedding; }));
    f.push_back(NumberField<S>("seeds", "energy_embedding",
                               [](auto& c) -> auto& { return c.seeds.energy_embedding; }));
    f.push_back(NumberField<S>("seeds", "speakers",
                               [](auto& c) -> auto& { return c.seeds.speakers; }));
    f.push_back(NumberField<S>("seeds", "attention",
                               [](auto& c) -> auto& { return c.seeds.attention; }));
    f.push_back(NumberField<S>("seeds", "fixtures",
                               [](auto& c) -> auto& { return c.seeds.fixtures; }));
    f.push_back(Field{"paths", "model_dir", [](const PipelineConfig& c) { return c.model_dir; },
                      [](PipelineConfig& c, const std::string& v) { c.model_dir = v; }});
    return f;
  }();
  return fields;
}

}  // namespace

int PipelineConfig::hop_length(int rate) const {
  return std::max(1, static_cast<int>(std::lround(rate / target_frame_rate)));
}

StftConfig PipelineConfig::stft(int rate) const {
  StftConfig s;
  s.frame_length = stft_frame_length;
  s.fft_size = stft_fft_size;
  s.hop_length = hop_length(rate);
  return s;
}

F0Config PipelineConfig::f0_config(int rate) const {
  F0Config c = f0;
  c.hop = static_cast<double>(hop_length(rate)) / rate;
  return c;
}

QuantSpec PipelineConfig::f0_quant() const {
  QuantSpec q;
  q.scale = f0_scale;
  q.lo = f0_quant_lo;
  q.hi = f0_quant_hi;
  return q;
}

void PipelineConfig::set_base_seed(std::uint64_t base) {
  seeds.projection = base;
  seeds.condenc = base + 1;
  seeds.f0_embedding = base + 2;
  seeds.energy_embedding = base + 3;
  seeds.speakers = base + 4;
  seeds.attention = base + 5;
  seeds.fixtures = base + 6;
}

void PipelineConfig::validate() const {
  const auto check = [](bool ok, const std::string& what) {
    if (!ok) Fail(ErrorCode::kConfig, "invalid config: " + what);
  };
  check(latent_dim > 0, "pipeline.latent_dim must be positive");
  check(target_frame_rate > 0.0, "pipeline.target_frame_rate must be positive");
  check(sample_rate > 0, "pipeline.sample_rate must be positive");
  check(stft_frame_length > 0 && stft_frame_length <= stft_fft_size,
        "need 0 < stft.frame_length <= stft.fft_size");
  check(mel.n_mels >= 13, "mel.n_mels must be at least 13");
  check(mel.fmin >= 0.0 && mel.fmin < mel.fmax, "need 0 <= mel.fmin < mel.fmax");
  check(mel.floor > 0.0, "mel.floor must be positive");
  check(f0.f0_min > 0.0 && f0.f0_min < f0.f0_max, "need 0 < f0.f0_min < f0.f0_max");
  check(f0.frame_length > 0.0, "f0.frame_length must be positive");
  check(f0_quant_lo < f0_quant_hi && (f0_scale != QuantScale::kLog || f0_quant_lo > 0.0),
        "invalid F0 quantization range");
  check(energy_percentile > 0.0 && energy_percentile <= 100.0,
        "quant.energy_percentile must be in (0, 100]");
  check(lambda_relative >= 0.0, "decoder.lambda_relative must be nonnegative");
  check(attn_dim > 0, "attention.attn_dim must be positive");
  check(!model_dir.empty(), "paths.model_dir must be nonempty");
}

PipelineConfig parse_config(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    Fail(ErrorCode::kConfig, std::string("config parse error: ") + e.message() + " at line " +
                                 std::to_string(e.line()));
  }

  std::map<std::string, const Field*> index;
  for (const auto& f : Fields()) index[f.section + "." + f.key] = &f;

  PipelineConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      Fail(ErrorCode::kConfig, "config key outside a section: " + section);
    }
    for (const auto& [key, value] : body) {
      const auto it = index.find(section + "." + key);
      if (it == index.end()) Fail(ErrorCode::kConfig, "unknown config key " + section + "." + key);
      it->second->set(cfg, value.data());
    }
  }
  cfg.validate();
  return cfg;
}

std::string dump_config(const PipelineConfig& cfg) {
  std::ostringstream out;
  std::string section;
  for (const auto& f : Fields()) {
    if (f.section != section) {
      if (!section.empty()) out << "\n";
      section = f.section;
      out << "[" << section << "]\n";
    }
    out << f.key << " = " << f.get(cfg) << "\n";
  }
  return out.str();
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error&) {
    Fail(ErrorCode::kConfig, "cannot read config " + path.string());
  }
  return parse_config(text);
}

}  // namespace dsff
