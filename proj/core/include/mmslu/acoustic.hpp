#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "mmslu/matrix.hpp"

namespace mmslu {

struct AudioClip {
  Vector samples;  // mono, nominally in [-1, 1]
  double sample_rate = 16000.0;
};

/// Frame-level low-level descriptor settings. Column layout of the LLD
/// matrix is [mfcc_0..mfcc_{n-1}, log_energy?, zcr?] followed, when deltas
/// are on, by the deltas of those same columns in the same order.
struct LldConfig {
  double frame_length = 0.025;  // seconds
  double hop = 0.010;           // seconds
  double preemphasis = 0.97;
  std::size_t n_mel = 26;
  std::size_t n_mfcc = 13;
  bool include_log_energy = true;
  bool include_zcr = true;
  bool include_deltas = true;

  void validate() const;
  std::size_t frame_samples(double sample_rate) const;
  std::size_t hop_samples(double sample_rate) const;
  std::size_t base_lld_count() const;
  std::size_t lld_count() const { return base_lld_count() * (include_deltas ? 2 : 1); }
};

inline constexpr double kLogFloor = 1e-10;
inline constexpr std::size_t kDeltaWindow = 2;

/// floor((n - frame_len) / hop) + 1; zero when n < frame_len.
std::size_t frame_count(std::size_t n, std::size_t frame_len, std::size_t hop);
/// Smallest power of two >= frame_len.
std::size_t fft_size_for(std::size_t frame_len);

/// HTK Mel scale: 2595 * log10(1 + f / 700).
double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Triangular filters equally spaced on the Mel scale between 0 Hz and
/// Nyquist, evaluated in the Mel domain: n_mel x (fft_size / 2 + 1).
Matrix mel_filterbank(std::size_t n_mel, std::size_t fft_size, double sample_rate);
/// Peak (center) frequency in Hz of each filter.
Vector mel_center_frequencies(std::size_t n_mel, double sample_rate);

/// Linear filterbank energies, frames x n_mel (before the log).
Matrix filterbank_energies(const AudioClip& clip, const LldConfig& cfg);

/// frames x lld_count matrix of low-level descriptors.
Matrix extract_lld(const AudioClip& clip, const LldConfig& cfg);

/// Delta regression over +/- kDeltaWindow frames with edge replication.
Matrix delta_features(const Matrix& features);

enum class Functional { Mean, Stddev, Min, Max, Range, Median, Skewness, Kurtosis };
inline constexpr std::size_t kFunctionalCount = 8;
inline constexpr std::array<std::string_view, kFunctionalCount> kFunctionalNames = {
    "mean", "stddev", "min", "max", "range", "median", "skewness", "kurtosis"};

/// Statistics per LLD column, laid out as out[column * 8 + functional].
/// Moments are population moments; kurtosis is m4 / sigma^4 (not excess).
/// Zero-variance columns have skewness = kurtosis = 0.
Vector apply_functionals(const Matrix& lld);

enum class AcousticSource { Precomputed, Builtin };

struct UtteranceAcoustics {
  Vector vector;
  std::size_t dim = 0;
  AcousticSource source = AcousticSource::Builtin;
};

UtteranceAcoustics extract_utterance(const AudioClip& clip, const LldConfig& cfg);

/// Reads a per-utterance sidecar of precomputed vectors (e.g. 1582-dim IS10).
std::map<std::string, UtteranceAcoustics> load_precomputed(const std::filesystem::path& path);

}  // namespace mmslu
