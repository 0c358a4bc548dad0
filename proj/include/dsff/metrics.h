// metrics.h
//
// Objective conversion metrics: mel-cepstral distortion, F0 correlation and
// RMSE, character error rate and cosine similarity.

#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dsff/common.h"
#include "dsff/prosody.h"

namespace dsff {

inline constexpr int kMcdOrder = 13;

enum class F0Unit { kHz, kCents };

std::string to_string(F0Unit unit);

struct MetricReport {
  std::optional<double> mcd;
  std::optional<double> f0corr;
  std::optional<double> f0rmse;
  F0Unit f0rmse_unit = F0Unit::kHz;
  std::optional<double> cer;
  std::optional<double> sim;
};

// First kMcdOrder orthonormal DCT-II coefficients of each log-mel frame.
Matrix mel_cepstrum(const Matrix& log_mel);

// Mean over aligned frames of (10 / ln 10) * sqrt(2 * sum_{i=1}^{K-1} dc_i^2).
// With use_dtw the alignment minimizes the summed Euclidean cepstral distance.
double mcd(const FeatureSequence& mel_a, const FeatureSequence& mel_b, bool use_dtw = false);

double f0_corr(const F0Track& a, const F0Track& b);

double f0_rmse(const F0Track& a, const F0Track& b, F0Unit unit = F0Unit::kHz);

// Lowercases (ASCII and Latin-1), drops punctuation and collapses whitespace.
std::u32string normalize_transcript(std::string_view utf8);

std::size_t edit_distance(std::u32string_view a, std::u32string_view b);

double cer(std::string_view reference, std::string_view hypothesis);

double cosine_sim(std::span<const double> a, std::span<const double> b);

std::u32string decode_utf8(std::string_view utf8);

}  // namespace dsff
