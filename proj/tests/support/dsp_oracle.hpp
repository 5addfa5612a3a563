#pragma once

// Brute-force reference for the acoustic pipeline. Shares no code with the
// library: direct O(N^2) DFT, filter weights evaluated from the triangle
// definition, DCT and moments written out longhand.

#include <string>
#include <utility>
#include <vector>

#include "mmslu/acoustic.hpp"

namespace mmslu::oracle {

/// Counts frame start positions one by one.
std::size_t enumerate_frames(std::size_t n, std::size_t frame_len, std::size_t hop);

std::vector<double> direct_power_spectrum(const std::vector<double>& frame, std::size_t fft_size);

/// frames x n_mel
std::vector<std::vector<double>> direct_filterbank(const AudioClip& clip, const LldConfig& cfg);
std::vector<std::vector<double>> direct_lld(const AudioClip& clip, const LldConfig& cfg);
std::vector<double> direct_functionals(const std::vector<std::vector<double>>& lld);
std::vector<double> direct_utterance(const AudioClip& clip, const LldConfig& cfg);

/// Ten short clips (<= 0.5 s), including a 440 Hz sine and silence.
std::vector<std::pair<std::string, AudioClip>> reference_clips();

/// |a - b| / max(|a|, |b|, floor)
double relative_error(double a, double b, double floor);

}  // namespace mmslu::oracle
