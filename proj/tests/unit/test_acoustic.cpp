#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mmslu/acoustic.hpp"
#include "mmslu/error.hpp"
#include "mmslu/random.hpp"
#include "mmslu/sidecar.hpp"
#include "mmslu/wav.hpp"
#include "support/dsp_oracle.hpp"
#include "support/fixtures.hpp"

using namespace mmslu;

namespace {

AudioClip sine(double hz, double seconds, double sr = 16000.0) {
  AudioClip c{{}, sr};
  for (std::size_t i = 0; i < static_cast<std::size_t>(seconds * sr); ++i) {
    c.samples.push_back(0.5 * std::sin(2 * std::numbers::pi * hz * static_cast<double>(i) / sr));
  }
  return c;
}

}  // namespace

TEST(FrameCount, MatchesEnumerationOnFuzzedTriples) {
  Rng rng(77);
  for (int i = 0; i < 50; ++i) {
    const std::size_t n = rng.index(5000), len = 1 + rng.index(600), hop = 1 + rng.index(300);
    EXPECT_EQ(frame_count(n, len, hop), oracle::enumerate_frames(n, len, hop)) << n << " " << len << " " << hop;
  }
  EXPECT_EQ(frame_count(399, 400, 160), 0u);
  EXPECT_EQ(frame_count(400, 400, 160), 1u);
  EXPECT_EQ(frame_count(560, 400, 160), 2u);
  EXPECT_THROW(frame_count(10, 4, 0), InvalidArgument);
}

TEST(Mel, ScaleRoundTripAndAnchor) {
  EXPECT_NEAR(hz_to_mel(700.0), 2595.0 * std::log10(2.0), 1e-12);
  for (double hz : {0.0, 100.0, 1000.0, 7999.0}) EXPECT_NEAR(mel_to_hz(hz_to_mel(hz)), hz, 1e-9);
  EXPECT_EQ(fft_size_for(400), 512u);
  EXPECT_EQ(fft_size_for(512), 512u);
}

TEST(Mel, FilterbankShape) {
  const Matrix bank = mel_filterbank(26, 512, 16000.0);
  ASSERT_EQ(bank.rows(), 26u);
  ASSERT_EQ(bank.cols(), 257u);
  for (std::size_t m = 0; m < 26; ++m) {
    const auto row = bank.row(m);
    EXPECT_LE(*std::max_element(row.begin(), row.end()), 1.0);
    EXPECT_GT(*std::max_element(row.begin(), row.end()), 0.0) << "empty filter " << m;
    for (double w : row) EXPECT_GE(w, 0.0);
  }
}

TEST(Filterbank, SineEnergyPeaksNearItsFrequency) {
  LldConfig cfg;
  const Matrix e = filterbank_energies(sine(440.0, 0.2), cfg);
  const auto row = e.row(5);
  const std::size_t peak = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
  const Vector centers = mel_center_frequencies(cfg.n_mel, 16000.0);
  std::size_t nearest = 0;
  for (std::size_t m = 1; m < centers.size(); ++m) {
    if (std::abs(centers[m] - 440.0) < std::abs(centers[nearest] - 440.0)) nearest = m;
  }
  EXPECT_LE(peak > nearest ? peak - nearest : nearest - peak, 1u);
}

TEST(OracleEquivalence, FilterbankAndUtteranceVectors) {
  LldConfig cfg;
  for (const auto& [name, clip] : oracle::reference_clips()) {
    SCOPED_TRACE(name);
    const Matrix fast = filterbank_energies(clip, cfg);
    const auto slow = oracle::direct_filterbank(clip, cfg);
    ASSERT_EQ(fast.rows(), slow.size());
    double scale = 0.0;
    for (const auto& r : slow) for (double v : r) scale = std::max(scale, std::abs(v));
    for (std::size_t t = 0; t < slow.size(); ++t) {
      for (std::size_t m = 0; m < cfg.n_mel; ++m) {
        ASSERT_LE(oracle::relative_error(fast(t, m), slow[t][m], std::max(scale * 1e-9, 1e-300)), 1e-6);
      }
    }
    const Vector v = extract_utterance(clip, cfg).vector;
    const auto ref = oracle::direct_utterance(clip, cfg);
    ASSERT_EQ(v.size(), ref.size());
    for (std::size_t k = 0; k < v.size(); ++k) {
      ASSERT_LE(oracle::relative_error(v[k], ref[k], 1e-6), 1e-6) << "index " << k;
    }
  }
}

TEST(Lld, ColumnLayoutAndSilence) {
  LldConfig cfg;
  AudioClip silence{Vector(4000, 0.0), 16000.0};
  const Matrix lld = extract_lld(silence, cfg);
  ASSERT_EQ(lld.cols(), 30u);
  EXPECT_EQ(lld.rows(), frame_count(4000, 400, 160));
  EXPECT_DOUBLE_EQ(lld(0, 13), std::log(kLogFloor));  // log-energy column
  EXPECT_DOUBLE_EQ(lld(0, 14), 0.0);                  // zero-crossing rate
  for (std::size_t k = 15; k < 30; ++k) EXPECT_DOUBLE_EQ(lld(3, k), 0.0);  // deltas
  EXPECT_EQ(extract_utterance(silence, cfg).dim, 240u);
}

TEST(Lld, OptionalColumns) {
  LldConfig cfg;
  cfg.include_deltas = false;
  cfg.include_zcr = false;
  EXPECT_EQ(extract_lld(sine(300, 0.1), cfg).cols(), 14u);
  cfg.include_log_energy = false;
  EXPECT_EQ(extract_utterance(sine(300, 0.1), cfg).dim, 13u * kFunctionalCount);
}

TEST(Lld, ZeroCrossingRateOfAlternatingSignal) {
  LldConfig cfg;
  cfg.include_deltas = false;
  AudioClip c{{}, 16000.0};
  for (int i = 0; i < 400; ++i) c.samples.push_back(i % 2 ? 1.0 : -1.0);
  EXPECT_DOUBLE_EQ(extract_lld(c, cfg)(0, 14), 1.0);
}

TEST(Lld, TooShortClip) {
  AudioClip c{Vector(100, 0.1), 16000.0};
  EXPECT_THROW(extract_lld(c, LldConfig{}), TooShortError);
}

TEST(Lld, ConfigValidation) {
  LldConfig cfg;
  cfg.n_mfcc = 40;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = LldConfig{};
  cfg.hop = 0.05;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Lld, TimeReversalLeavesStaticFunctionalsUnchanged) {
  // Holds when pre-emphasis is off and the frames tile the clip exactly.
  LldConfig cfg;
  cfg.preemphasis = 0.0;
  cfg.include_deltas = false;
  Rng rng(8);
  AudioClip clip{{}, 16000.0};
  const std::size_t n = 400 + 160 * 20;
  for (std::size_t i = 0; i < n; ++i) clip.samples.push_back(rng.normal(0.0, 0.2) + 0.1 * std::sin(0.03 * static_cast<double>(i)));
  AudioClip reversed = clip;
  std::reverse(reversed.samples.begin(), reversed.samples.end());
  const Vector a = extract_utterance(clip, cfg).vector, b = extract_utterance(reversed, cfg).vector;
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-9 * std::max(1.0, std::abs(a[k])));
}

TEST(Deltas, RampHasUnitSlopeInside) {
  Matrix ramp(8, 1);
  for (std::size_t t = 0; t < 8; ++t) ramp(t, 0) = static_cast<double>(t);
  const Matrix d = delta_features(ramp);
  for (std::size_t t = 2; t < 6; ++t) EXPECT_DOUBLE_EQ(d(t, 0), 1.0);
  // Edge clamping: at t = 0 the window sees [0, 0, 0, 1, 2].
  EXPECT_DOUBLE_EQ(d(0, 0), (1.0 * (1 - 0) + 2.0 * (2 - 0)) / 10.0);
}

TEST(Functionals, HandWorkedColumn) {
  Matrix m(4, 2);
  for (std::size_t t = 0; t < 4; ++t) {
    m(t, 0) = static_cast<double>(t + 1);
    m(t, 1) = 3.0;
  }
  const Vector f = apply_functionals(m);
  ASSERT_EQ(f.size(), 16u);
  EXPECT_DOUBLE_EQ(f[0], 2.5);
  EXPECT_DOUBLE_EQ(f[1], std::sqrt(1.25));
  EXPECT_DOUBLE_EQ(f[2], 1.0);
  EXPECT_DOUBLE_EQ(f[3], 4.0);
  EXPECT_DOUBLE_EQ(f[4], 3.0);
  EXPECT_DOUBLE_EQ(f[5], 2.5);
  EXPECT_NEAR(f[6], 0.0, 1e-15);
  EXPECT_NEAR(f[7], 2.5625 / 1.5625, 1e-14);
  // Constant column: zero spread, skewness and kurtosis pinned to 0.
  EXPECT_EQ(f[9], 0.0);
  EXPECT_EQ(f[14], 0.0);
  EXPECT_EQ(f[15], 0.0);
  EXPECT_THROW(apply_functionals(Matrix()), EmptyInputError);
}

TEST(Functionals, MatchOracleOnRandomMatrices) {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix m(1 + rng.index(30), 1 + rng.index(5));
    std::vector<std::vector<double>> rows(m.rows(), std::vector<double>(m.cols()));
    for (std::size_t t = 0; t < m.rows(); ++t) {
      for (std::size_t d = 0; d < m.cols(); ++d) rows[t][d] = m(t, d) = rng.normal(0.0, 3.0);
    }
    const Vector f = apply_functionals(m);
    const auto g = oracle::direct_functionals(rows);
    for (std::size_t k = 0; k < f.size(); ++k) EXPECT_LE(oracle::relative_error(f[k], g[k], 1e-9), 1e-9);
  }
}

TEST(Wav, PcmRoundTrip) {
  const auto dir = support::scratch_dir("wav");
  const AudioClip c = sine(440.0, 0.05);
  write_wav(dir / "a.wav", c);
  const AudioClip back = read_wav(dir / "a.wav");
  EXPECT_EQ(back.sample_rate, 16000.0);
  ASSERT_EQ(back.samples.size(), c.samples.size());
  for (std::size_t i = 0; i < c.samples.size(); ++i) EXPECT_NEAR(back.samples[i], c.samples[i], 1.0 / 32768.0);
  support::write_file(dir / "bad.wav", "RIFFxxxxWAVE");
  EXPECT_THROW(read_wav(dir / "bad.wav"), FormatError);
}

TEST(Precomputed, LoadsIs10SizedVectors) {
  const auto dir = support::scratch_dir("is10");
  FeatureMap m;
  m["u1"] = Vector(1582, 0.5);
  m["u2"] = Vector(1582, -0.25);
  write_vector_sidecar(dir / "is10.tsv", m);
  const auto loaded = load_precomputed(dir / "is10.tsv");
  ASSERT_EQ(loaded.size(), 2u);
  EXPECT_EQ(loaded.at("u1").dim, 1582u);
  EXPECT_EQ(loaded.at("u2").source, AcousticSource::Precomputed);
  EXPECT_EQ(loaded.at("u2").vector[1581], -0.25);
}
