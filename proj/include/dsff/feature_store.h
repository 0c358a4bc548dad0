// feature_store.h
//
// The DSFF container: little-endian
//   magic "DSFF" | version u32 = 1 | n_frames u64 | dim u32 | frame_rate f64 |
//   tag_len u16 | tag bytes (UTF-8) | n_frames * dim f32, row-major.
// Values are stored as f32, so anything written is rounded to single
// precision; reading restores those f32 values exactly.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dsff/common.h"

namespace dsff {

inline constexpr std::uint32_t kDsffVersion = 1;

void write_feature(const FeatureSequence& seq, const std::filesystem::path& path);

FeatureSequence read_feature(const std::filesystem::path& path);

// In-memory forms of the container, used by the file functions.
std::string encode_feature(const FeatureSequence& seq);
FeatureSequence decode_feature(const std::string& bytes);

// Rectangular numeric CSV, one frame per row.
FeatureSequence import_csv(const std::filesystem::path& path, double frame_rate,
                           const std::string& source_tag);
FeatureSequence parse_csv(const std::string& text, double frame_rate,
                          const std::string& source_tag);

// Whole-file helpers shared by the sidecar formats.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace dsff
