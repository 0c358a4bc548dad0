// align_fuse.cpp

#include "dsff/align_fuse.h"

#include <algorithm>
#include <cmath>

#include "dsff/rng.h"

namespace dsff {
namespace {

constexpr double kPi = 3.14159265358979323846;

double Sinc(double x) {
  if (x == 0.0) return 1.0;
  if (x == std::round(x)) return 0.0;
  return std::sin(kPi * x) / (kPi * x);
}

double SourcePosition(Eigen::Index t, Eigen::Index target, Eigen::Index source) {
  if (target == 1) return 0.0;
  return static_cast<double>(t) * static_cast<double>(source - 1) /
         static_cast<double>(target - 1);
}

}  // namespace

FeatureSequence resample_time(const FeatureSequence& seq, Eigen::Index target_frames,
                              ResampleKernel kernel) {
  Require(seq.n_frames() >= 1, "cannot resample an empty sequence");
  Require(target_frames >= 1, "target frame count must be positive");
  const Eigen::Index source = seq.n_frames();

  FeatureSequence out;
  out.source_tag = seq.source_tag;
  out.frame_rate =
      seq.frame_rate * static_cast<double>(target_frames) / static_cast<double>(source);
  out.data.resize(target_frames, seq.dim());

  for (Eigen::Index t = 0; t < target_frames; ++t) {
    const double p = SourcePosition(t, target_frames, source);
    switch (kernel) {
      case ResampleKernel::kLinear: {
        const auto i0 = static_cast<Eigen::Index>(std::floor(p));
        const Eigen::Index i1 = std::min(i0 + 1, source - 1);
        const double frac = p - static_cast<double>(i0);
        if (frac == 0.0) {
          out.data.row(t) = seq.data.row(i0);
        } else {
          out.data.row(t) = seq.data.row(i0) + frac * (seq.data.row(i1) - seq.data.row(i0));
        }
        break;
      }
      case ResampleKernel::kNearest: {
        const auto i = std::min<Eigen::Index>(source - 1, std::lround(p));
        out.data.row(t) = seq.data.row(i);
        break;
      }
      case ResampleKernel::kLanczos3: {
        constexpr int kA = 3;
        const auto center = static_cast<Eigen::Index>(std::floor(p));
        out.data.row(t).setZero();
        double total = 0.0;
        for (Eigen::Index i = center - kA + 1; i <= center + kA; ++i) {
          const double x = p - static_cast<double>(i);
          if (std::abs(x) >= kA) continue;
          const double w = Sinc(x) * Sinc(x / kA);
          const Eigen::Index clamped = std::clamp<Eigen::Index>(i, 0, source - 1);
          out.data.row(t) += w * seq.data.row(clamped);
          total += w;
        }
        out.data.row(t) /= total;
        break;
      }
    }
  }
  return out;
}

FeatureSequence project(const FeatureSequence& seq, const ProjectionWeights& w) {
  if (seq.dim() != w.in_dim()) {
    Fail(ErrorCode::kInvalidArgument,
         "dimension mismatch: sequence dim " + std::to_string(seq.dim()) +
             " vs projection input " + std::to_string(w.in_dim()));
  }
  Require(w.bias.size() == w.out_dim(), "projection bias size mismatch");
  FeatureSequence out;
  out.frame_rate = seq.frame_rate;
  out.source_tag = seq.source_tag;
  out.data.noalias() = seq.data * w.matrix;
  out.data.rowwise() += w.bias;
  return out;
}

FeatureSequence fuse_add(std::span<const FeatureSequence> seqs,
                         std::span<const ProjectionWeights> weights, Eigen::Index target_frames,
                         ResampleKernel kernel) {
  Require(!seqs.empty(), "fusion needs at least one source");
  Require(seqs.size() == weights.size(), "one projection per source is required");
  FeatureSequence fused;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    FeatureSequence projected = project(resample_time(seqs[i], target_frames, kernel), weights[i]);
    if (i == 0) {
      fused = std::move(projected);
      fused.source_tag = "fused";
    } else {
      Require(projected.dim() == fused.dim(), "projection output dims differ across sources");
      fused.data += projected.data;
    }
  }
  return fused;
}

FeatureSequence cross_attention_align(const FeatureSequence& queries,
                                      const FeatureSequence& source, const CrossAttnWeights& w,
                                      Matrix* attention) {
  Require(queries.dim() == w.w_q.rows(), "dimension mismatch: queries vs w_q");
  Require(source.dim() == w.w_k.rows() && source.dim() == w.w_v.rows(),
          "dimension mismatch: source vs w_k / w_v");
  Require(w.w_q.cols() == w.w_k.cols() && w.w_q.cols() > 0, "attention dims of w_q and w_k differ");

  const Matrix q = queries.data * w.w_q;
  const Matrix k = source.data * w.w_k;
  const Matrix v = source.data * w.w_v;
  Matrix scores = q * k.transpose();
  scores *= 1.0 / std::sqrt(static_cast<double>(w.attn_dim()));
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    auto row = scores.row(i);
    const double peak = row.maxCoeff();
    row = (row.array() - peak).exp().matrix();
    row /= row.sum();
  }

  FeatureSequence out;
  out.frame_rate = queries.frame_rate;
  out.source_tag = source.source_tag;
  out.data.noalias() = scores * v;
  if (attention != nullptr) *attention = std::move(scores);
  return out;
}

FeatureSequence fuse_cross_attention(const FeatureSequence& queries,
                                     std::span<const FeatureSequence> seqs,
                                     std::span<const CrossAttnWeights> weights) {
  Require(!seqs.empty(), "fusion needs at least one source");
  Require(seqs.size() == weights.size(), "one attention block per source is required");
  FeatureSequence fused = cross_attention_align(queries, seqs[0], weights[0]);
  fused.source_tag = "fused";
  for (std::size_t i = 1; i < seqs.size(); ++i) {
    const FeatureSequence part = cross_attention_align(queries, seqs[i], weights[i]);
    Require(part.dim() == fused.dim(), "attention output dims differ across sources");
    fused.data += part.data;
  }
  return fused;
}

FeatureSequence concat_features(std::span<const FeatureSequence> seqs) {
  Require(!seqs.empty(), "nothing to concatenate");
  Eigen::Index total = 0;
  for (const auto& s : seqs) {
    Require(s.n_frames() == seqs[0].n_frames(), "concatenation needs equal frame counts");
    total += s.dim();
  }
  FeatureSequence out;
  out.frame_rate = seqs[0].frame_rate;
  out.source_tag = "concat";
  out.data.resize(seqs[0].n_frames(), total);
  Eigen::Index col = 0;
  for (const auto& s : seqs) {
    out.data.middleCols(col, s.dim()) = s.data;
    col += s.dim();
  }
  return out;
}

ProjectionWeights block_stack(std::span<const ProjectionWeights> weights) {
  Require(!weights.empty(), "nothing to stack");
  Eigen::Index rows = 0;
  for (const auto& w : weights) {
    Require(w.out_dim() == weights[0].out_dim(), "stacked projections need equal output dims");
    rows += w.in_dim();
  }
  ProjectionWeights out;
  out.source_tag = "stacked";
  out.matrix.resize(rows, weights[0].out_dim());
  out.bias = RowVector::Zero(weights[0].out_dim());
  Eigen::Index row = 0;
  for (const auto& w : weights) {
    out.matrix.middleRows(row, w.in_dim()) = w.matrix;
    out.bias += w.bias;
    row += w.in_dim();
  }
  return out;
}

ProjectionWeights make_projection(Eigen::Index in_dim, Eigen::Index out_dim, std::uint64_t seed,
                                  const std::string& source_tag) {
  Require(in_dim > 0 && out_dim > 0, "projection dims must be positive");
  Rng rng(seed);
  ProjectionWeights w;
  w.matrix = rng.GaussianMatrix(in_dim, out_dim, 1.0 / std::sqrt(static_cast<double>(in_dim)));
  w.bias = RowVector::Zero(out_dim);
  w.source_tag = source_tag;
  return w;
}

CrossAttnWeights make_cross_attention(Eigen::Index query_dim, Eigen::Index source_dim,
                                      Eigen::Index attn_dim, Eigen::Index out_dim,
                                      std::uint64_t seed) {
  Require(query_dim > 0 && source_dim > 0 && attn_dim > 0 && out_dim > 0,
          "attention dims must be positive");
  Rng rng(seed);
  CrossAttnWeights w;
  w.w_q = rng.GaussianMatrix(query_dim, attn_dim, 1.0 / std::sqrt(static_cast<double>(query_dim)));
  w.w_k = rng.GaussianMatrix(source_dim, attn_dim, 1.0 / std::sqrt(static_cast<double>(source_dim)));
  w.w_v = rng.GaussianMatrix(source_dim, out_dim, 1.0 / std::sqrt(static_cast<double>(source_dim)));
  return w;
}

FeatureSequence projection_to_feature(const ProjectionWeights& w, const std::string& tag) {
  FeatureSequence seq;
  seq.frame_rate = 1.0;
  seq.source_tag = tag.empty() ? "proj:" + w.source_tag : tag;
  seq.data.resize(w.in_dim() + 1, w.out_dim());
  seq.data.topRows(w.in_dim()) = w.matrix;
  seq.data.bottomRows(1) = w.bias;
  return seq;
}

ProjectionWeights projection_from_feature(const FeatureSequence& seq) {
  Require(seq.n_frames() >= 2, "projection file needs a matrix and a bias row");
  ProjectionWeights w;
  w.matrix = seq.data.topRows(seq.n_frames() - 1);
  w.bias = seq.data.bottomRows(1);
  w.source_tag = seq.source_tag.rfind("proj:", 0) == 0 ? seq.source_tag.substr(5) : seq.source_tag;
  return w;
}

}  // namespace dsff
