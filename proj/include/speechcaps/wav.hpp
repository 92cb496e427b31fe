// Copyright 2026 The speechcaps-forge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SPEECHCAPS_WAV_HPP_
#define SPEECHCAPS_WAV_HPP_

#include <cstdint>
#include <filesystem>
#include <string_view>

#include "speechcaps/signal.hpp"

namespace speechcaps {

enum class SampleFormat { kPcmInt, kFloat };

struct WavInfo {
  SampleFormat format = SampleFormat::kPcmInt;
  int channels = 0;
  int sample_rate_hz = 0;
  int bits_per_sample = 0;
  std::int64_t frames = 0;  // samples per channel

  double duration_s() const {
    return sample_rate_hz > 0 ? static_cast<double>(frames) / sample_rate_hz : 0.0;
  }
};

/// Parses only the header chunks. Accepts PCM 8/16/24/32-bit integer and
/// 32/64-bit IEEE float, plain or WAVE_FORMAT_EXTENSIBLE.
/// Throws Error(kCorruptFile) on malformed/truncated files and
/// Error(kUnsupportedFormat) on other encodings.
WavInfo read_wav_info(const std::filesystem::path& path);

/// Decodes to mono float in [-1, 1]; channels are averaged.
Waveform read_wav(const std::filesystem::path& path);

/// In-memory variants of the above (used by tests and the file readers).
WavInfo parse_wav_info(std::string_view bytes);
Waveform decode_wav(std::string_view bytes);

/// Writes 16-bit PCM mono; samples are clipped to [-1, 1].
void write_wav_pcm16(const std::filesystem::path& path, const Waveform& wave);

}  // namespace speechcaps

#endif  // SPEECHCAPS_WAV_HPP_
