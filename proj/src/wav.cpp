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

#include "speechcaps/wav.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "speechcaps/error.hpp"

namespace speechcaps {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t le32(std::string_view b, std::size_t off) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(b[off])) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[off + 1])) << 8 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[off + 2])) << 16 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[off + 3])) << 24;
}

std::uint16_t le16(std::string_view b, std::size_t off) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(b[off]) |
                                    static_cast<unsigned char>(b[off + 1]) << 8);
}

struct Layout {
  WavInfo info;
  std::size_t data_offset = 0;
};

Layout parse_layout(std::string_view b) {
  if (b.size() < 12 || b.substr(0, 4) != "RIFF" || b.substr(8, 4) != "WAVE") {
    throw Error(ErrorCode::kCorruptFile, "missing RIFF/WAVE header");
  }
  Layout layout;
  bool have_fmt = false;
  std::uint16_t block_align = 0;
  std::size_t pos = 12;
  while (true) {
    if (pos + 8 > b.size()) {
      throw Error(ErrorCode::kCorruptFile, have_fmt ? "no data chunk" : "truncated header");
    }
    const std::string_view id = b.substr(pos, 4);
    const std::uint32_t size = le32(b, pos + 4);
    const std::size_t body = pos + 8;
    if (id == "fmt ") {
      if (size < 16 || body + size > b.size()) throw Error(ErrorCode::kCorruptFile, "truncated fmt chunk");
      std::uint16_t tag = le16(b, body);
      layout.info.channels = le16(b, body + 2);
      layout.info.sample_rate_hz = static_cast<int>(le32(b, body + 4));
      block_align = le16(b, body + 12);
      layout.info.bits_per_sample = le16(b, body + 14);
      if (tag == kFormatExtensible) {
        if (size < 40) throw Error(ErrorCode::kCorruptFile, "truncated extensible fmt chunk");
        tag = le16(b, body + 24);  // first two bytes of the subformat GUID
      }
      if (tag == kFormatPcm) {
        layout.info.format = SampleFormat::kPcmInt;
        const int bits = layout.info.bits_per_sample;
        if (bits != 8 && bits != 16 && bits != 24 && bits != 32) {
          throw Error(ErrorCode::kUnsupportedFormat, "PCM bit depth " + std::to_string(bits));
        }
      } else if (tag == kFormatFloat) {
        layout.info.format = SampleFormat::kFloat;
        const int bits = layout.info.bits_per_sample;
        if (bits != 32 && bits != 64) {
          throw Error(ErrorCode::kUnsupportedFormat, "float bit depth " + std::to_string(bits));
        }
      } else {
        throw Error(ErrorCode::kUnsupportedFormat, "format tag " + std::to_string(tag));
      }
      if (layout.info.channels < 1 || layout.info.sample_rate_hz < 1) {
        throw Error(ErrorCode::kCorruptFile, "invalid channel count or sample rate");
      }
      if (block_align != layout.info.channels * (layout.info.bits_per_sample / 8)) {
        throw Error(ErrorCode::kCorruptFile, "inconsistent block alignment");
      }
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw Error(ErrorCode::kCorruptFile, "data chunk before fmt chunk");
      if (body + size > b.size()) throw Error(ErrorCode::kCorruptFile, "truncated data chunk");
      layout.info.frames = static_cast<std::int64_t>(size / block_align);
      layout.data_offset = body;
      return layout;
    }
    pos = body + size + (size & 1u);
  }
}

std::string slurp(const std::filesystem::path& path, std::size_t limit = std::string::npos) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingAudio, "cannot open '" + path.string() + "'");
  if (limit == std::string::npos) {
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
  std::string buf(limit, '\0');
  in.read(buf.data(), static_cast<std::streamsize>(limit));
  buf.resize(static_cast<std::size_t>(in.gcount()));
  return buf;
}

double decode_sample(std::string_view b, std::size_t off, const WavInfo& info) {
  if (info.format == SampleFormat::kFloat) {
    if (info.bits_per_sample == 32) {
      float f;
      std::memcpy(&f, b.data() + off, sizeof f);
      return std::clamp(static_cast<double>(f), -1.0, 1.0);
    }
    double d;
    std::memcpy(&d, b.data() + off, sizeof d);
    return std::clamp(d, -1.0, 1.0);
  }
  switch (info.bits_per_sample) {
    case 8:
      return (static_cast<double>(static_cast<unsigned char>(b[off])) - 128.0) / 128.0;
    case 16:
      return static_cast<std::int16_t>(le16(b, off)) / 32768.0;
    case 24: {
      std::int32_t v = static_cast<std::int32_t>(static_cast<unsigned char>(b[off]) |
                                                 static_cast<unsigned char>(b[off + 1]) << 8 |
                                                 static_cast<unsigned char>(b[off + 2]) << 16);
      if (v & 0x800000) v -= 0x1000000;
      return v / 8388608.0;
    }
    default:
      return static_cast<std::int32_t>(le32(b, off)) / 2147483648.0;
  }
}

}  // namespace

WavInfo parse_wav_info(std::string_view bytes) { return parse_layout(bytes).info; }

Waveform decode_wav(std::string_view bytes) {
  const Layout layout = parse_layout(bytes);
  const WavInfo& info = layout.info;
  const std::size_t width = static_cast<std::size_t>(info.bits_per_sample / 8);
  Waveform wave;
  wave.sample_rate_hz = info.sample_rate_hz;
  wave.samples.resize(info.frames);
  for (std::int64_t i = 0; i < info.frames; ++i) {
    double acc = 0.0;
    for (int c = 0; c < info.channels; ++c) {
      const std::size_t off =
          layout.data_offset + (static_cast<std::size_t>(i) * info.channels + c) * width;
      acc += decode_sample(bytes, off, info);
    }
    wave.samples[i] = static_cast<float>(acc / info.channels);
  }
  return wave;
}

WavInfo read_wav_info(const std::filesystem::path& path) {
  // Header chunks normally fit in the first few KB; fall back to the whole file
  // when the data chunk comes after large metadata chunks.
  std::string head = slurp(path, 1 << 16);
  try {
    return parse_wav_info(head);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kCorruptFile || head.size() < (1u << 16)) throw;
  }
  return parse_wav_info(slurp(path));
}

Waveform read_wav(const std::filesystem::path& path) { return decode_wav(slurp(path)); }

void write_wav_pcm16(const std::filesystem::path& path, const Waveform& wave) {
  const auto n = static_cast<std::uint32_t>(wave.samples.size());
  const std::uint32_t data_bytes = n * 2;
  std::string out;
  out.reserve(44 + data_bytes);
  auto put32 = [&](std::uint32_t v) {
    for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xFF));
  };
  auto put16 = [&](std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>(v >> 8));
  };
  out += "RIFF";
  put32(36 + data_bytes);
  out += "WAVEfmt ";
  put32(16);
  put16(kFormatPcm);
  put16(1);
  put32(static_cast<std::uint32_t>(wave.sample_rate_hz));
  put32(static_cast<std::uint32_t>(wave.sample_rate_hz) * 2);
  put16(2);
  put16(16);
  out += "data";
  put32(data_bytes);
  for (Eigen::Index i = 0; i < wave.samples.size(); ++i) {
    const double v = std::clamp(static_cast<double>(wave.samples[i]), -1.0, 1.0);
    const long q = std::clamp(std::lround(v * 32768.0), -32768L, 32767L);
    put16(static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw Error(ErrorCode::kIo, "failed while writing '" + path.string() + "'");
}

}  // namespace speechcaps
