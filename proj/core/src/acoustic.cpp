#include "mmslu/acoustic.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "mmslu/error.hpp"
#include "mmslu/sidecar.hpp"

namespace mmslu {

void LldConfig::validate() const {
  if (!(frame_length > 0.0) || !(hop > 0.0) || hop > frame_length) {
    throw ConfigError("LLD config requires 0 < hop <= frame_length");
  }
  if (n_mel == 0 || n_mfcc == 0 || n_mfcc > n_mel) {
    throw ConfigError("LLD config requires 1 <= n_mfcc <= n_mel");
  }
  if (!std::isfinite(preemphasis)) throw ConfigError("LLD preemphasis must be finite");
}

std::size_t LldConfig::frame_samples(double sample_rate) const {
  return static_cast<std::size_t>(std::lround(frame_length * sample_rate));
}

std::size_t LldConfig::hop_samples(double sample_rate) const {
  return static_cast<std::size_t>(std::lround(hop * sample_rate));
}

std::size_t LldConfig::base_lld_count() const {
  return n_mfcc + (include_log_energy ? 1 : 0) + (include_zcr ? 1 : 0);
}

std::size_t frame_count(std::size_t n, std::size_t frame_len, std::size_t hop) {
  if (hop == 0) throw InvalidArgument("frame hop must be positive");
  if (frame_len == 0 || n < frame_len) return 0;
  return (n - frame_len) / hop + 1;
}

std::size_t fft_size_for(std::size_t frame_len) {
  std::size_t n = 1;
  while (n < frame_len) n <<= 1;
  return n;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

namespace {

Vector mel_edges(std::size_t n_mel, double sample_rate) {
  const double top = hz_to_mel(sample_rate / 2.0);
  Vector edges(n_mel + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = top * static_cast<double>(i) / static_cast<double>(n_mel + 1);
  }
  return edges;
}

// FFTW planning is not thread-safe; execution on distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class PowerSpectrum {
 public:
  explicit PowerSpectrum(std::size_t fft_size) : size_(fft_size) {
    in_ = fftw_alloc_real(size_);
    out_ = fftw_alloc_complex(size_ / 2 + 1);
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(size_), in_, out_, FFTW_ESTIMATE);
  }
  ~PowerSpectrum() {
    {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(plan_);
    }
    fftw_free(in_);
    fftw_free(out_);
  }
  PowerSpectrum(const PowerSpectrum&) = delete;
  PowerSpectrum& operator=(const PowerSpectrum&) = delete;

  /// |X_k|^2 for k = 0..size/2 of the zero-padded frame.
  void compute(std::span<const double> frame, std::span<double> power) {
    std::fill(in_, in_ + size_, 0.0);
    std::copy(frame.begin(), frame.end(), in_);
    fftw_execute(plan_);
    for (std::size_t k = 0; k <= size_ / 2; ++k) {
      power[k] = out_[k][0] * out_[k][0] + out_[k][1] * out_[k][1];
    }
  }

 private:
  std::size_t size_;
  double* in_ = nullptr;
  fftw_complex* out_ = nullptr;
  fftw_plan plan_ = nullptr;
};

struct FrameLayout {
  std::size_t length;
  std::size_t hop;
  std::size_t count;
  std::size_t fft_size;
};

FrameLayout layout_for(const AudioClip& clip, const LldConfig& cfg) {
  cfg.validate();
  if (!(clip.sample_rate > 0.0)) throw InvalidArgument("sample rate must be positive");
  FrameLayout layout;
  layout.length = cfg.frame_samples(clip.sample_rate);
  layout.hop = cfg.hop_samples(clip.sample_rate);
  if (layout.length == 0 || layout.hop == 0) {
    throw ConfigError("frame length and hop must each cover at least one sample");
  }
  if (clip.samples.size() < layout.length) {
    throw TooShortError("clip of " + std::to_string(clip.samples.size()) +
                        " samples is shorter than one frame (" + std::to_string(layout.length) +
                        ")");
  }
  layout.count = frame_count(clip.samples.size(), layout.length, layout.hop);
  layout.fft_size = fft_size_for(layout.length);
  return layout;
}

// Pre-emphasis (first sample scaled by 1 - p) followed by a Hamming window.
void prepare_frame(std::span<const double> raw, double preemphasis, std::span<double> out) {
  const std::size_t L = raw.size();
  for (std::size_t n = 0; n < L; ++n) {
    const double previous = n == 0 ? raw[0] : raw[n - 1];
    const double emphasized = raw[n] - preemphasis * previous;
    const double window =
        L > 1 ? 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                                       static_cast<double>(L - 1))
              : 1.0;
    out[n] = emphasized * window;
  }
}

}  // namespace

Matrix mel_filterbank(std::size_t n_mel, std::size_t fft_size, double sample_rate) {
  if (n_mel == 0 || fft_size < 2) throw InvalidArgument("mel filterbank needs n_mel >= 1, fft >= 2");
  const Vector edges = mel_edges(n_mel, sample_rate);
  const std::size_t bins = fft_size / 2 + 1;
  Matrix weights(n_mel, bins);
  for (std::size_t k = 0; k < bins; ++k) {
    const double mel = hz_to_mel(static_cast<double>(k) * sample_rate / static_cast<double>(fft_size));
    for (std::size_t m = 0; m < n_mel; ++m) {
      const double left = edges[m], center = edges[m + 1], right = edges[m + 2];
      if (mel > left && mel <= center) {
        weights(m, k) = (mel - left) / (center - left);
      } else if (mel > center && mel < right) {
        weights(m, k) = (right - mel) / (right - center);
      }
    }
  }
  return weights;
}

Vector mel_center_frequencies(std::size_t n_mel, double sample_rate) {
  const Vector edges = mel_edges(n_mel, sample_rate);
  Vector centers(n_mel);
  for (std::size_t m = 0; m < n_mel; ++m) centers[m] = mel_to_hz(edges[m + 1]);
  return centers;
}

Matrix filterbank_energies(const AudioClip& clip, const LldConfig& cfg) {
  const FrameLayout layout = layout_for(clip, cfg);
  const Matrix bank = mel_filterbank(cfg.n_mel, layout.fft_size, clip.sample_rate);
  PowerSpectrum spectrum(layout.fft_size);
  Vector frame(layout.length), power(layout.fft_size / 2 + 1);
  Matrix energies(layout.count, cfg.n_mel);
  std::span<const double> samples = clip.samples;
  for (std::size_t t = 0; t < layout.count; ++t) {
    prepare_frame(samples.subspan(t * layout.hop, layout.length), cfg.preemphasis, frame);
    spectrum.compute(frame, power);
    auto out = energies.row(t);
    std::fill(out.begin(), out.end(), 0.0);
    gemv_accumulate(bank, power, out);
  }
  return energies;
}

Matrix delta_features(const Matrix& features) {
  const std::size_t T = features.rows();
  const std::size_t D = features.cols();
  Matrix deltas(T, D);
  double norm = 0.0;
  for (std::size_t n = 1; n <= kDeltaWindow; ++n) norm += static_cast<double>(n * n);
  norm *= 2.0;
  const auto clamp = [T](std::ptrdiff_t t) {
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(t, 0, static_cast<std::ptrdiff_t>(T) - 1));
  };
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t d = 0; d < D; ++d) {
      double acc = 0.0;
      for (std::size_t n = 1; n <= kDeltaWindow; ++n) {
        const auto st = static_cast<std::ptrdiff_t>(t);
        const auto sn = static_cast<std::ptrdiff_t>(n);
        acc += static_cast<double>(n) * (features(clamp(st + sn), d) - features(clamp(st - sn), d));
      }
      deltas(t, d) = acc / norm;
    }
  }
  return deltas;
}

Matrix extract_lld(const AudioClip& clip, const LldConfig& cfg) {
  const FrameLayout layout = layout_for(clip, cfg);
  const Matrix energies = filterbank_energies(clip, cfg);
  const std::size_t M = cfg.n_mel;
  const std::size_t base = cfg.base_lld_count();

  // Orthonormal DCT-II basis, n_mfcc x n_mel.
  Matrix dct(cfg.n_mfcc, M);
  for (std::size_t j = 0; j < cfg.n_mfcc; ++j) {
    const double scale = std::sqrt((j == 0 ? 1.0 : 2.0) / static_cast<double>(M));
    for (std::size_t m = 0; m < M; ++m) {
      dct(j, m) = scale * std::cos(std::numbers::pi * static_cast<double>(j) *
                                   (static_cast<double>(m) + 0.5) / static_cast<double>(M));
    }
  }

  Matrix lld(layout.count, base);
  Vector log_energies(M);
  std::span<const double> samples = clip.samples;
  for (std::size_t t = 0; t < layout.count; ++t) {
    for (std::size_t m = 0; m < M; ++m) {
      log_energies[m] = std::log(std::max(energies(t, m), kLogFloor));
    }
    auto row = lld.row(t);
    std::fill(row.begin(), row.end(), 0.0);
    gemv_accumulate(dct, log_energies, row.subspan(0, cfg.n_mfcc));

    auto raw = samples.subspan(t * layout.hop, layout.length);
    std::size_t column = cfg.n_mfcc;
    if (cfg.include_log_energy) {
      double energy = 0.0;
      for (double s : raw) energy += s * s;
      row[column++] = std::log(std::max(energy, kLogFloor));
    }
    if (cfg.include_zcr) {
      std::size_t crossings = 0;
      for (std::size_t n = 1; n < raw.size(); ++n) {
        if ((raw[n - 1] < 0.0) != (raw[n] < 0.0)) ++crossings;
      }
      row[column++] =
          raw.size() > 1 ? static_cast<double>(crossings) / static_cast<double>(raw.size() - 1) : 0.0;
    }
  }
  if (!cfg.include_deltas) return lld;

  const Matrix deltas = delta_features(lld);
  Matrix full(layout.count, 2 * base);
  for (std::size_t t = 0; t < layout.count; ++t) {
    std::copy(lld.row(t).begin(), lld.row(t).end(), full.row(t).begin());
    std::copy(deltas.row(t).begin(), deltas.row(t).end(),
              full.row(t).begin() + static_cast<std::ptrdiff_t>(base));
  }
  return full;
}

Vector apply_functionals(const Matrix& lld) {
  if (lld.rows() == 0 || lld.cols() == 0) throw EmptyInputError("functionals over an empty LLD matrix");
  const std::size_t T = lld.rows();
  const double n = static_cast<double>(T);
  Vector out(lld.cols() * kFunctionalCount);
  Vector column(T);
  for (std::size_t d = 0; d < lld.cols(); ++d) {
    for (std::size_t t = 0; t < T; ++t) column[t] = lld(t, d);
    double mean = 0.0;
    for (double v : column) mean += v;
    mean /= n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : column) {
      const double c = v - mean;
      m2 += c * c;
      m3 += c * c * c;
      m4 += c * c * c * c;
    }
    std::sort(column.begin(), column.end());
    const double lo = column.front();
    const double hi = column.back();
    // A constant column can still leave rounding residue in the moments.
    if (lo == hi) m2 = m3 = m4 = 0.0;
    m2 /= n;
    m3 /= n;
    m4 /= n;
    const double stddev = std::sqrt(m2);
    const double median =
        T % 2 == 1 ? column[T / 2] : 0.5 * (column[T / 2 - 1] + column[T / 2]);
    double* f = out.data() + d * kFunctionalCount;
    f[0] = mean;
    f[1] = stddev;
    f[2] = lo;
    f[3] = hi;
    f[4] = hi - lo;
    f[5] = median;
    f[6] = m2 > 0.0 ? m3 / (m2 * stddev) : 0.0;
    f[7] = m2 > 0.0 ? m4 / (m2 * m2) : 0.0;
  }
  return out;
}

UtteranceAcoustics extract_utterance(const AudioClip& clip, const LldConfig& cfg) {
  UtteranceAcoustics result;
  result.vector = apply_functionals(extract_lld(clip, cfg));
  result.dim = result.vector.size();
  result.source = AcousticSource::Builtin;
  return result;
}

std::map<std::string, UtteranceAcoustics> load_precomputed(const std::filesystem::path& path) {
  std::map<std::string, UtteranceAcoustics> out;
  for (auto& [id, values] : read_vector_sidecar(path)) {
    UtteranceAcoustics entry;
    entry.dim = values.size();
    entry.vector = std::move(values);
    entry.source = AcousticSource::Precomputed;
    out.emplace(id, std::move(entry));
  }
  return out;
}

}  // namespace mmslu
