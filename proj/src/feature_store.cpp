// feature_store.cpp

#include "dsff/feature_store.h"

#include <bit>
#include <cmath>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

namespace dsff {
namespace {

static_assert(std::endian::native == std::endian::little,
              "DSFF encoding assumes a little-endian host");

constexpr char kMagic[4] = {'D', 'S', 'F', 'F'};
constexpr std::size_t kFixedHeader = 4 + 4 + 8 + 4 + 8 + 2;

template <typename T>
void Put(std::string* out, T value) {
  char raw[sizeof(T)];
  std::memcpy(raw, &value, sizeof(T));
  out->append(raw, sizeof(T));
}

template <typename T>
T Get(const std::string& bytes, std::size_t offset) {
  T value;
  std::memcpy(&value, bytes.data() + offset, sizeof(T));
  return value;
}

std::string_view Trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) Fail(ErrorCode::kIo, "write failed for " + path.string());
}

std::string encode_feature(const FeatureSequence& seq) {
  ValidateFeatureSequence(seq);
  Require(seq.source_tag.size() <= std::numeric_limits<std::uint16_t>::max(),
          "source tag too long");
  Require(seq.dim() <= std::numeric_limits<std::uint32_t>::max(), "dimension too large");
  constexpr double kF32Max = std::numeric_limits<float>::max();
  Require((seq.data.array().abs() <= kF32Max).all(), "value exceeds f32 range");

  std::string out;
  out.reserve(kFixedHeader + seq.source_tag.size() + 4 * seq.data.size());
  out.append(kMagic, 4);
  Put<std::uint32_t>(&out, kDsffVersion);
  Put<std::uint64_t>(&out, static_cast<std::uint64_t>(seq.n_frames()));
  Put<std::uint32_t>(&out, static_cast<std::uint32_t>(seq.dim()));
  Put<double>(&out, seq.frame_rate);
  Put<std::uint16_t>(&out, static_cast<std::uint16_t>(seq.source_tag.size()));
  out.append(seq.source_tag);
  for (Eigen::Index i = 0; i < seq.n_frames(); ++i) {
    for (Eigen::Index j = 0; j < seq.dim(); ++j) {
      Put<float>(&out, static_cast<float>(seq.data(i, j)));
    }
  }
  return out;
}

FeatureSequence decode_feature(const std::string& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    Fail(ErrorCode::kFormat, "not a DSFF file");
  }
  if (bytes.size() < kFixedHeader) Fail(ErrorCode::kFormat, "inconsistent payload length");
  const auto version = Get<std::uint32_t>(bytes, 4);
  if (version != kDsffVersion) {
    Fail(ErrorCode::kFormat, "unsupported DSFF version " + std::to_string(version));
  }
  const auto n_frames = Get<std::uint64_t>(bytes, 8);
  const auto dim = Get<std::uint32_t>(bytes, 16);
  const auto frame_rate = Get<double>(bytes, 20);
  const auto tag_len = Get<std::uint16_t>(bytes, 28);

  const std::size_t header = kFixedHeader + tag_len;
  // Guard the size product against overflow before comparing lengths.
  if (dim != 0 && n_frames > (std::numeric_limits<std::uint64_t>::max() - header) / 4 / dim) {
    Fail(ErrorCode::kFormat, "inconsistent payload length");
  }
  if (bytes.size() != header + 4 * n_frames * dim) {
    Fail(ErrorCode::kFormat, "inconsistent payload length");
  }

  FeatureSequence seq;
  seq.source_tag = bytes.substr(kFixedHeader, tag_len);
  seq.frame_rate = frame_rate;
  seq.data.resize(static_cast<Eigen::Index>(n_frames), static_cast<Eigen::Index>(dim));
  std::size_t offset = header;
  for (Eigen::Index i = 0; i < seq.data.rows(); ++i) {
    for (Eigen::Index j = 0; j < seq.data.cols(); ++j, offset += 4) {
      seq.data(i, j) = Get<float>(bytes, offset);
    }
  }
  try {
    ValidateFeatureSequence(seq);
  } catch (const Error& e) {
    Fail(ErrorCode::kFormat, std::string("invalid DSFF content: ") + e.what());
  }
  return seq;
}

void write_feature(const FeatureSequence& seq, const std::filesystem::path& path) {
  // Encoding validates, so nothing touches the disk for invalid input.
  const std::string bytes = encode_feature(seq);
  write_file(path, bytes);
}

FeatureSequence read_feature(const std::filesystem::path& path) {
  try {
    return decode_feature(read_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kFormat) {
      Fail(ErrorCode::kFormat, path.string() + ": " + e.what());
    }
    throw;
  }
}

FeatureSequence parse_csv(const std::string& text, double frame_rate,
                          const std::string& source_tag) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view trimmed = Trim(line);
    if (trimmed.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    int column = 0;
    while (true) {
      ++column;
      const std::size_t comma = trimmed.find(',', start);
      const std::string_view cell =
          Trim(trimmed.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                     : comma - start));
      double value = 0.0;
      const char* first = cell.data();
      const char* last = cell.data() + cell.size();
      if (!cell.empty() && *first == '+') ++first;
      const auto [ptr, ec] = std::from_chars(first, last, value);
      if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(value)) {
        Fail(ErrorCode::kFormat, "non-numeric cell at line " + std::to_string(line_no) +
                                     ", column " + std::to_string(column));
      }
      row.push_back(value);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      Fail(ErrorCode::kFormat, "ragged row at line " + std::to_string(line_no));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) Fail(ErrorCode::kFormat, "empty CSV");

  FeatureSequence seq;
  seq.frame_rate = frame_rate;
  seq.source_tag = source_tag;
  seq.data.resize(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) seq.data(i, j) = rows[i][j];
  }
  ValidateFeatureSequence(seq);
  return seq;
}

FeatureSequence import_csv(const std::filesystem::path& path, double frame_rate,
                           const std::string& source_tag) {
  return parse_csv(read_file(path), frame_rate, source_tag);
}

}  // namespace dsff
