// decoder.h
//
// Closed-form reference decoder: ridge regression from condition frames to
// log-mel frames. With fixed random projections upstream, the add-fused
// linear front end plus this decoder is one linear map over the sources, and
// the normal equations give its exact regularized optimum.

#pragma once

#include <filesystem>
#include <vector>

#include "dsff/common.h"
#include "dsff/conditioning.h"

namespace dsff {

// mel = condition * matrix + bias; matrix is [D x n_mels].
struct DecoderWeights {
  Matrix matrix;
  RowVector bias;
  double lambda = 0.0;
};

struct TrainingPair {
  Condition condition;
  FeatureSequence mel;
};

using PairedDataset = std::vector<TrainingPair>;

void ValidateDataset(const PairedDataset& data);

// Minimizes sum ||x W + b - y||^2 + lambda ||W||_F^2 with an unpenalized bias
// (handled by mean-centering). Throws kNumeric for a singular system at
// lambda == 0.
DecoderWeights fit_ridge(const PairedDataset& data, double lambda);

// lambda = relative * trace(centered Gram) / D.
DecoderWeights fit_ridge_relative(const PairedDataset& data, double relative);

FeatureSequence decode(const Condition& cond, const DecoderWeights& w);

double regularized_objective(const DecoderWeights& w, const PairedDataset& data);

// DSFF form: matrix rows plus a bias row, tagged "decoder:ridge". The ridge
// strength is not part of the file; it reads back as 0.
FeatureSequence decoder_to_feature(const DecoderWeights& w);
DecoderWeights decoder_from_feature(const FeatureSequence& seq);

}  // namespace dsff
