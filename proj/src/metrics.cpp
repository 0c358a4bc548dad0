// metrics.cpp

#include "dsff/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dsff {
namespace {

constexpr double kPi = 3.14159265358979323846;
const double kMcdScale = 10.0 / std::log(10.0);

Matrix DctBasis(Eigen::Index n) {
  Matrix basis(n, kMcdOrder);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (int k = 0; k < kMcdOrder; ++k) {
      const double norm = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
      basis(j, k) = norm * std::cos(kPi * k * (2.0 * j + 1.0) / (2.0 * n));
    }
  }
  return basis;
}

double FrameDistortion(const Matrix& ca, Eigen::Index i, const Matrix& cb, Eigen::Index j) {
  const auto diff = ca.row(i).tail(kMcdOrder - 1) - cb.row(j).tail(kMcdOrder - 1);
  return kMcdScale * std::sqrt(2.0 * diff.squaredNorm());
}

struct VoicedPairs {
  std::vector<double> a;
  std::vector<double> b;
};

VoicedPairs MutuallyVoiced(const F0Track& a, const F0Track& b) {
  if (a.size() != b.size()) {
    Fail(ErrorCode::kInvalidArgument, "F0 tracks differ in frame count");
  }
  ValidateF0Track(a);
  ValidateF0Track(b);
  VoicedPairs pairs;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.voiced[i] && b.voiced[i]) {
      pairs.a.push_back(a.values[i]);
      pairs.b.push_back(b.values[i]);
    }
  }
  return pairs;
}

bool IsPunctuation(char32_t c) {
  if (c < 0x80) {
    return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
           (c >= 0x7B && c <= 0x7E);
  }
  return (c >= 0xA1 && c <= 0xBF && c != 0xAA && c != 0xB5 && c != 0xBA) || c == 0xD7 ||
         c == 0xF7 || (c >= 0x2010 && c <= 0x205E) || (c >= 0x3000 && c <= 0x303F && c != 0x3000) ||
         (c >= 0xFF01 && c <= 0xFF0F) || (c >= 0xFF1A && c <= 0xFF20) ||
         (c >= 0xFF3B && c <= 0xFF40) || (c >= 0xFF5B && c <= 0xFF65);
}

bool IsSpace(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\v' || c == U'\f' ||
         c == 0x85 || c == 0xA0 || c == 0x3000 || (c >= 0x2000 && c <= 0x200A) || c == 0x2028 ||
         c == 0x2029 || c == 0x202F || c == 0x205F;
}

char32_t ToLower(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c + 32;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 32;
  return c;
}

}  // namespace

std::string to_string(F0Unit unit) { return unit == F0Unit::kHz ? "hz" : "cents"; }

Matrix mel_cepstrum(const Matrix& log_mel) {
  Require(log_mel.cols() >= kMcdOrder, "mel dimension must be at least 13");
  return log_mel * DctBasis(log_mel.cols());
}

double mcd(const FeatureSequence& mel_a, const FeatureSequence& mel_b, bool use_dtw) {
  Require(mel_a.n_frames() >= 1 && mel_b.n_frames() >= 1, "empty mel input");
  if (mel_a.dim() != mel_b.dim()) Fail(ErrorCode::kInvalidArgument, "mel dims differ");
  const Matrix ca = mel_cepstrum(mel_a.data);
  const Matrix cb = mel_cepstrum(mel_b.data);

  if (!use_dtw) {
    Require(mel_a.n_frames() == mel_b.n_frames(), "frame counts differ; resample or use DTW");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < ca.rows(); ++i) sum += FrameDistortion(ca, i, cb, i);
    return sum / static_cast<double>(ca.rows());
  }

  // Steps (1,0), (0,1), (1,1); ties resolved toward the diagonal.
  const Eigen::Index n = ca.rows();
  const Eigen::Index m = cb.rows();
  Matrix local(n, m);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j) local(i, j) = FrameDistortion(ca, i, cb, j);

  constexpr double kInf = std::numeric_limits<double>::infinity();
  Matrix cost = Matrix::Constant(n, m, kInf);
  Eigen::Matrix<Eigen::Index, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> steps(n, m);
  steps.setZero();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      if (i == 0 && j == 0) {
        cost(0, 0) = local(0, 0);
        steps(0, 0) = 1;
        continue;
      }
      double best = kInf;
      Eigen::Index best_steps = 0;
      const auto consider = [&](Eigen::Index pi, Eigen::Index pj) {
        if (pi < 0 || pj < 0) return;
        if (cost(pi, pj) < best ||
            (cost(pi, pj) == best && steps(pi, pj) + 1 < best_steps)) {
          best = cost(pi, pj);
          best_steps = steps(pi, pj) + 1;
        }
      };
      consider(i - 1, j - 1);
      consider(i - 1, j);
      consider(i, j - 1);
      cost(i, j) = best + local(i, j);
      steps(i, j) = best_steps;
    }
  }
  return cost(n - 1, m - 1) / static_cast<double>(steps(n - 1, m - 1));
}

double f0_corr(const F0Track& a, const F0Track& b) {
  const VoicedPairs p = MutuallyVoiced(a, b);
  if (p.a.size() < 2) Fail(ErrorCode::kInvalidArgument, "fewer than 2 mutually voiced frames");
  const auto n = static_cast<double>(p.a.size());
  double mean_a = 0.0;
  double mean_b = 0.0;
  for (std::size_t i = 0; i < p.a.size(); ++i) {
    mean_a += p.a[i];
    mean_b += p.b[i];
  }
  mean_a /= n;
  mean_b /= n;
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < p.a.size(); ++i) {
    const double da = p.a[i] - mean_a;
    const double db = p.b[i] - mean_b;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) Fail(ErrorCode::kInvalidArgument, "zero F0 variance");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double f0_rmse(const F0Track& a, const F0Track& b, F0Unit unit) {
  const VoicedPairs p = MutuallyVoiced(a, b);
  if (p.a.empty()) Fail(ErrorCode::kInvalidArgument, "no mutually voiced frames");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.a.size(); ++i) {
    const double d = unit == F0Unit::kHz ? p.a[i] - p.b[i] : 1200.0 * std::log2(p.a[i] / p.b[i]);
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(p.a.size()));
}

std::u32string decode_utf8(std::string_view utf8) {
  std::u32string out;
  std::size_t i = 0;
  const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(utf8[k]); };
  while (i < utf8.size()) {
    const unsigned char lead = byte(i);
    int extra = 0;
    char32_t cp = 0;
    if (lead < 0x80) {
      cp = lead;
    } else if ((lead & 0xE0) == 0xC0) {
      cp = lead & 0x1F;
      extra = 1;
    } else if ((lead & 0xF0) == 0xE0) {
      cp = lead & 0x0F;
      extra = 2;
    } else if ((lead & 0xF8) == 0xF0) {
      cp = lead & 0x07;
      extra = 3;
    } else {
      Fail(ErrorCode::kFormat, "invalid UTF-8 text");
    }
    for (int k = 1; k <= extra; ++k) {
      if (i + k >= utf8.size() || (byte(i + k) & 0xC0) != 0x80) {
        Fail(ErrorCode::kFormat, "invalid UTF-8 text");
      }
      cp = (cp << 6) | (byte(i + k) & 0x3F);
    }
    out.push_back(cp);
    i += extra + 1;
  }
  return out;
}

std::u32string normalize_transcript(std::string_view utf8) {
  std::u32string out;
  bool pending_space = false;
  for (char32_t c : decode_utf8(utf8)) {
    if (IsSpace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (IsPunctuation(c)) continue;
    if (pending_space) out.push_back(U' ');
    pending_space = false;
    out.push_back(ToLower(c));
  }
  return out;
}

std::size_t edit_distance(std::u32string_view a, std::u32string_view b) {
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t substitute = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, substitute});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double cer(std::string_view reference, std::string_view hypothesis) {
  const std::u32string ref = normalize_transcript(reference);
  if (ref.empty()) Fail(ErrorCode::kInvalidArgument, "empty reference transcript");
  const std::u32string hyp = normalize_transcript(hypothesis);
  return static_cast<double>(edit_distance(ref, hyp)) / static_cast<double>(ref.size());
}

double cosine_sim(std::span<const double> a, std::span<const double> b) {
  Require(a.size() == b.size(), "embedding dims differ");
  Require(!a.empty(), "empty embedding");
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (!(na > 0.0) || !(nb > 0.0)) Fail(ErrorCode::kInvalidArgument, "zero vector");
  return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

}  // namespace dsff
