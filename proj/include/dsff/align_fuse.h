// align_fuse.h
//
// Frame-rate alignment of feature sequences and their fusion into one latent
// sequence: per-source linear projection followed by element-wise addition.
// Single-head cross attention is provided as the learned-alignment baseline.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dsff/common.h"

namespace dsff {

enum class ResampleKernel {
  kLinear,   // endpoint-aligned linear interpolation (default)
  kNearest,
  kLanczos3, // windowed sinc, a = 3
};

// out = x * matrix + bias, with matrix [D_in x D].
struct ProjectionWeights {
  Matrix matrix;
  RowVector bias;
  std::string source_tag;

  Eigen::Index in_dim() const { return matrix.rows(); }
  Eigen::Index out_dim() const { return matrix.cols(); }
  std::int64_t parameter_count() const { return matrix.size() + bias.size(); }
};

struct CrossAttnWeights {
  Matrix w_q;  // [D_q x d_attn]
  Matrix w_k;  // [D_kv x d_attn]
  Matrix w_v;  // [D_kv x D]

  Eigen::Index attn_dim() const { return w_q.cols(); }
  std::int64_t parameter_count() const { return w_q.size() + w_k.size() + w_v.size(); }
};

// Output frame t samples source position t * (T_src - 1) / (T - 1), or 0 when
// T == 1. No anti-aliasing is applied when downsampling.
FeatureSequence resample_time(const FeatureSequence& seq, Eigen::Index target_frames,
                              ResampleKernel kernel = ResampleKernel::kLinear);

FeatureSequence project(const FeatureSequence& seq, const ProjectionWeights& w);

// Resample every source to target_frames, project, and sum.
FeatureSequence fuse_add(std::span<const FeatureSequence> seqs,
                         std::span<const ProjectionWeights> weights, Eigen::Index target_frames,
                         ResampleKernel kernel = ResampleKernel::kLinear);

// softmax(Q K^T / sqrt(d_attn)) V with Q from queries and K, V from source.
// When attention is non-null it receives the [T_q x T_src] weight matrix.
FeatureSequence cross_attention_align(const FeatureSequence& queries,
                                      const FeatureSequence& source, const CrossAttnWeights& w,
                                      Matrix* attention = nullptr);

// Cross-attention counterpart of fuse_add: one attention block per source,
// all querying the same target-grid sequence, outputs summed.
FeatureSequence fuse_cross_attention(const FeatureSequence& queries,
                                     std::span<const FeatureSequence> seqs,
                                     std::span<const CrossAttnWeights> weights);

// Column-wise concatenation of equal-length sequences.
FeatureSequence concat_features(std::span<const FeatureSequence> seqs);

// Vertically stacked matrices with summed biases; projecting the
// concatenation with this equals summing the individual projections.
ProjectionWeights block_stack(std::span<const ProjectionWeights> weights);

// Gaussian entries with std 1/sqrt(D_in), zero bias.
ProjectionWeights make_projection(Eigen::Index in_dim, Eigen::Index out_dim, std::uint64_t seed,
                                  const std::string& source_tag);

// Gaussian entries with std 1/sqrt(fan-in).
CrossAttnWeights make_cross_attention(Eigen::Index query_dim, Eigen::Index source_dim,
                                      Eigen::Index attn_dim, Eigen::Index out_dim,
                                      std::uint64_t seed);

// DSFF form: the matrix rows followed by one bias row, tagged "proj:<source_tag>"
// (or the caller's tag when given).
FeatureSequence projection_to_feature(const ProjectionWeights& w, const std::string& tag = "");
ProjectionWeights projection_from_feature(const FeatureSequence& seq);

}  // namespace dsff
