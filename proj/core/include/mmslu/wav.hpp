#pragma once

#include <filesystem>

#include "mmslu/acoustic.hpp"

namespace mmslu {

/// Reads RIFF/WAVE with 16-bit PCM or 32-bit IEEE float samples. Multichannel
/// input is averaged down to mono.
AudioClip read_wav(const std::filesystem::path& path);

/// Writes 16-bit PCM mono; samples are clipped to [-1, 1].
void write_wav(const std::filesystem::path& path, const AudioClip& clip);

}  // namespace mmslu
