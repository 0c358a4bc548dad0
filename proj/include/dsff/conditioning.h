// conditioning.h
//
// Speaker lookup and assembly of the frame-level condition
//   c = CondEnc(semantic + f0_emb + energy_emb + speaker).

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "dsff/align_fuse.h"
#include "dsff/common.h"

namespace dsff {

class SpeakerTable {
 public:
  SpeakerTable() = default;
  // Throws on duplicate names or a row count different from names.size().
  SpeakerTable(Matrix rows, std::vector<std::string> names);

  const Matrix& rows() const { return rows_; }
  const std::vector<std::string>& names() const { return names_; }
  Eigen::Index dim() const { return rows_.cols(); }
  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  // Throws "speaker not in table".
  Eigen::Index index_of(const std::string& name) const;

 private:
  Matrix rows_;
  std::vector<std::string> names_;
  std::unordered_map<std::string, Eigen::Index> index_;
};

struct Condition {
  Matrix data;  // [T x D]
  double frame_rate = 0.0;

  Eigen::Index n_frames() const { return data.rows(); }
  Eigen::Index dim() const { return data.cols(); }
};

// Uniform [-0.1, 0.1] rows, one per name, in the given order.
SpeakerTable make_speaker_table(const std::vector<std::string>& names, Eigen::Index dim,
                                std::uint64_t seed);

FeatureSequence speaker_frames(const std::string& speaker, const SpeakerTable& table,
                               Eigen::Index n_frames, double frame_rate);

Condition assemble_condition(const FeatureSequence& semantic, const FeatureSequence& f0_emb,
                             const FeatureSequence& energy_emb, const FeatureSequence& spk,
                             const ProjectionWeights& condenc);

// DSFF rows tagged "speakers" plus a sidecar "<path>.names" with one name
// per line in row order.
void write_speaker_table(const SpeakerTable& table, const std::filesystem::path& path);
SpeakerTable read_speaker_table(const std::filesystem::path& path);

}  // namespace dsff
