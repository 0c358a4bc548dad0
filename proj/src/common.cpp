// common.cpp

#include "dsff/common.h"

#include <cmath>

namespace dsff {

bool AllFinite(const Matrix& m) { return m.allFinite(); }

void ValidateFeatureSequence(const FeatureSequence& seq) {
  Require(seq.n_frames() >= 1, "feature sequence has no frames");
  Require(seq.dim() >= 1, "feature sequence has zero dimension");
  Require(seq.frame_rate > 0.0 && std::isfinite(seq.frame_rate),
          "feature sequence frame rate must be positive");
  Require(AllFinite(seq.data), "feature sequence contains non-finite values");
}

}  // namespace dsff
