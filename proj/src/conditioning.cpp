// conditioning.cpp

#include "dsff/conditioning.h"

#include <sstream>

#include "dsff/feature_store.h"
#include "dsff/rng.h"

namespace dsff {

SpeakerTable::SpeakerTable(Matrix rows, std::vector<std::string> names)
    : rows_(std::move(rows)), names_(std::move(names)) {
  Require(static_cast<Eigen::Index>(names_.size()) == rows_.rows(),
          "speaker table needs one name per row");
  Require(rows_.allFinite(), "speaker table contains non-finite values");
  for (std::size_t i = 0; i < names_.size(); ++i) {
    Require(!names_[i].empty(), "speaker names must be nonempty");
    const bool inserted = index_.emplace(names_[i], static_cast<Eigen::Index>(i)).second;
    Require(inserted, "duplicate speaker name: " + names_[i]);
  }
}

Eigen::Index SpeakerTable::index_of(const std::string& name) const {
  const auto it = index_.find(name);
  if (it == index_.end()) Fail(ErrorCode::kInvalidArgument, "speaker not in table: " + name);
  return it->second;
}

SpeakerTable make_speaker_table(const std::vector<std::string>& names, Eigen::Index dim,
                                std::uint64_t seed) {
  Require(dim > 0, "speaker dimension must be positive");
  Rng rng(seed);
  Matrix rows = rng.UniformMatrix(static_cast<Eigen::Index>(names.size()), dim, -0.1, 0.1);
  return SpeakerTable(std::move(rows), names);
}

FeatureSequence speaker_frames(const std::string& speaker, const SpeakerTable& table,
                               Eigen::Index n_frames, double frame_rate) {
  Require(n_frames >= 1, "frame count must be positive");
  const Eigen::Index row = table.index_of(speaker);
  FeatureSequence out;
  out.frame_rate = frame_rate;
  out.source_tag = "speaker:" + speaker;
  out.data = table.rows().row(row).replicate(n_frames, 1);
  return out;
}

Condition assemble_condition(const FeatureSequence& semantic, const FeatureSequence& f0_emb,
                             const FeatureSequence& energy_emb, const FeatureSequence& spk,
                             const ProjectionWeights& condenc) {
  for (const FeatureSequence* s : {&f0_emb, &energy_emb, &spk}) {
    if (s->n_frames() != semantic.n_frames() || s->dim() != semantic.dim()) {
      Fail(ErrorCode::kInvalidArgument,
           "shape mismatch: condition inputs must all be " + std::to_string(semantic.n_frames()) +
               "x" + std::to_string(semantic.dim()));
    }
  }
  Require(condenc.in_dim() == semantic.dim() && condenc.bias.size() == condenc.out_dim(),
          "shape mismatch: condition encoder input dim");

  Matrix summed = semantic.data + f0_emb.data;
  summed += energy_emb.data;
  summed += spk.data;
  Condition c;
  c.frame_rate = semantic.frame_rate;
  c.data.noalias() = summed * condenc.matrix;
  c.data.rowwise() += condenc.bias;
  return c;
}

void write_speaker_table(const SpeakerTable& table, const std::filesystem::path& path) {
  Require(table.rows().rows() >= 1, "speaker table is empty");
  FeatureSequence seq;
  seq.data = table.rows();
  seq.frame_rate = 1.0;
  seq.source_tag = "speakers";
  std::string names;
  for (const auto& name : table.names()) {
    Require(name.find('\n') == std::string::npos, "speaker names cannot contain newlines");
    names += name + "\n";
  }
  write_feature(seq, path);
  write_file(path.string() + ".names", names);
}

SpeakerTable read_speaker_table(const std::filesystem::path& path) {
  FeatureSequence seq = read_feature(path);
  std::istringstream in(read_file(path.string() + ".names"));
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) names.push_back(line);
  }
  return SpeakerTable(std::move(seq.data), std::move(names));
}

}  // namespace dsff
