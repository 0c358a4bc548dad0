// common.h

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace dsff {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;

// Error categories; the CLI maps each one to its own exit code.
enum class ErrorCode {
  kInvalidArgument,
  kIo,
  kFormat,
  kConfig,
  kNumeric,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void Require(bool condition, const std::string& message) {
  if (!condition) Fail(ErrorCode::kInvalidArgument, message);
}

// A frame-rate-annotated matrix of feature frames, one frame per row.
struct FeatureSequence {
  Matrix data;
  double frame_rate = 0.0;
  std::string source_tag;

  Eigen::Index n_frames() const { return data.rows(); }
  Eigen::Index dim() const { return data.cols(); }
};

// Throws kInvalidArgument unless n_frames >= 1, dim >= 1, entries finite and
// frame_rate > 0.
void ValidateFeatureSequence(const FeatureSequence& seq);

bool AllFinite(const Matrix& m);

}  // namespace dsff
