// decoder.cpp

#include "dsff/decoder.h"

#include <cmath>

namespace dsff {
namespace {

struct NormalEquations {
  Matrix gram;   // centered X^T X
  Matrix cross;  // centered X^T Y
  RowVector x_mean;
  RowVector y_mean;
};

// Two passes in dataset order: means, then centered products.
NormalEquations Accumulate(const PairedDataset& data) {
  ValidateDataset(data);
  const Eigen::Index d = data[0].condition.dim();
  const Eigen::Index m = data[0].mel.dim();
  NormalEquations ne;
  ne.x_mean = RowVector::Zero(d);
  ne.y_mean = RowVector::Zero(m);
  Eigen::Index total = 0;
  for (const auto& pair : data) {
    ne.x_mean += pair.condition.data.colwise().sum();
    ne.y_mean += pair.mel.data.colwise().sum();
    total += pair.condition.n_frames();
  }
  ne.x_mean /= static_cast<double>(total);
  ne.y_mean /= static_cast<double>(total);

  ne.gram = Matrix::Zero(d, d);
  ne.cross = Matrix::Zero(d, m);
  for (const auto& pair : data) {
    const Matrix xc = pair.condition.data.rowwise() - ne.x_mean;
    const Matrix yc = pair.mel.data.rowwise() - ne.y_mean;
    ne.gram.noalias() += xc.transpose() * xc;
    ne.cross.noalias() += xc.transpose() * yc;
  }
  return ne;
}

DecoderWeights Solve(const NormalEquations& ne, double lambda) {
  Require(lambda >= 0.0 && std::isfinite(lambda), "ridge lambda must be nonnegative");
  Matrix system = ne.gram;
  system.diagonal().array() += lambda;
  const Eigen::LDLT<Matrix> ldlt(system);
  const auto pivots = ldlt.vectorD().cwiseAbs();
  const double largest = pivots.maxCoeff();
  const bool singular = ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
                        !(largest > 0.0) || pivots.minCoeff() <= 1e-12 * largest;
  if (singular) {
    Fail(ErrorCode::kNumeric,
         lambda == 0.0 ? "singular normal equations with lambda = 0; use lambda > 0"
                       : "ridge system is not positive definite");
  }
  DecoderWeights w;
  w.matrix = ldlt.solve(ne.cross);
  w.bias = ne.y_mean - ne.x_mean * w.matrix;
  w.lambda = lambda;
  if (!w.matrix.allFinite() || !w.bias.allFinite()) {
    Fail(ErrorCode::kNumeric, "ridge solution is not finite");
  }
  return w;
}

}  // namespace

void ValidateDataset(const PairedDataset& data) {
  Require(!data.empty(), "paired dataset is empty");
  const Eigen::Index d = data[0].condition.dim();
  const Eigen::Index m = data[0].mel.dim();
  Require(d >= 1 && m >= 1, "paired dataset has zero-width frames");
  for (const auto& pair : data) {
    Require(pair.condition.n_frames() == pair.mel.n_frames(),
            "condition and mel frame counts differ within a pair");
    Require(pair.condition.n_frames() >= 1, "pair has no frames");
    Require(pair.condition.dim() == d && pair.mel.dim() == m,
            "inconsistent dims across dataset pairs");
  }
}

DecoderWeights fit_ridge(const PairedDataset& data, double lambda) {
  return Solve(Accumulate(data), lambda);
}

DecoderWeights fit_ridge_relative(const PairedDataset& data, double relative) {
  Require(relative >= 0.0, "relative lambda must be nonnegative");
  const NormalEquations ne = Accumulate(data);
  const double lambda = relative * ne.gram.trace() / static_cast<double>(ne.gram.rows());
  return Solve(ne, lambda);
}

FeatureSequence decode(const Condition& cond, const DecoderWeights& w) {
  if (cond.dim() != w.matrix.rows()) {
    Fail(ErrorCode::kInvalidArgument, "dimension mismatch: condition dim " +
                                          std::to_string(cond.dim()) + " vs decoder input " +
                                          std::to_string(w.matrix.rows()));
  }
  FeatureSequence mel;
  mel.frame_rate = cond.frame_rate;
  mel.source_tag = "mel";
  mel.data.noalias() = cond.data * w.matrix;
  mel.data.rowwise() += w.bias;
  return mel;
}

double regularized_objective(const DecoderWeights& w, const PairedDataset& data) {
  ValidateDataset(data);
  double total = 0.0;
  for (const auto& pair : data) {
    const FeatureSequence predicted = decode(pair.condition, w);
    Require(predicted.dim() == pair.mel.dim(), "dimension mismatch: decoder output vs mel");
    total += (predicted.data - pair.mel.data).squaredNorm();
  }
  return total + w.lambda * w.matrix.squaredNorm();
}

FeatureSequence decoder_to_feature(const DecoderWeights& w) {
  FeatureSequence seq;
  seq.frame_rate = 1.0;
  seq.source_tag = "decoder:ridge";
  seq.data.resize(w.matrix.rows() + 1, w.matrix.cols());
  seq.data.topRows(w.matrix.rows()) = w.matrix;
  seq.data.bottomRows(1) = w.bias;
  return seq;
}

DecoderWeights decoder_from_feature(const FeatureSequence& seq) {
  Require(seq.n_frames() >= 2, "decoder file needs a matrix and a bias row");
  DecoderWeights w;
  w.matrix = seq.data.topRows(seq.n_frames() - 1);
  w.bias = seq.data.bottomRows(1);
  return w;
}

}  // namespace dsff
