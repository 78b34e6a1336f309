// Copyright 2026 The specmer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "specmer/audio_io.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "specmer/binary_io.hpp"
#include "specmer/errors.hpp"
#include "specmer/rng.hpp"

namespace specmer {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

struct WavFormat {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t block_align = 0;
  std::uint16_t bits = 0;
};

WavFormat parse_fmt(ByteReader chunk) {
  WavFormat f;
  if (chunk.remaining() < 16) {
    throw FormatError("'fmt ' chunk too short (" +
                      std::to_string(chunk.remaining()) + " bytes)");
  }
  f.format = chunk.get_le<std::uint16_t>();
  f.channels = chunk.get_le<std::uint16_t>();
  f.sample_rate = chunk.get_le<std::uint32_t>();
  chunk.skip(4);  // byte rate
  f.block_align = chunk.get_le<std::uint16_t>();
  f.bits = chunk.get_le<std::uint16_t>();
  if (f.format == kFormatExtensible) {
    if (chunk.remaining() < 2 + 2 + 4 + 16) {
      throw FormatError("'fmt ' chunk: truncated WAVE_FORMAT_EXTENSIBLE block");
    }
    chunk.skip(2 + 2 + 4);  // cbSize, valid bits, channel mask
    f.format = chunk.get_le<std::uint16_t>();  // first two GUID bytes
  }
  return f;
}

double decode_sample(const std::uint8_t* p, const WavFormat& f) {
  switch (f.bits) {
    case 8:
      return (static_cast<int>(p[0]) - 128) / 128.0;
    case 16: {
      const auto v = static_cast<std::int16_t>(p[0] | (p[1] << 8));
      return v / 32768.0;
    }
    case 24: {
      // Sign-extend into 32 bits, then scale by 2^23.
      std::uint32_t raw = static_cast<std::uint32_t>(p[0]) |
                          (static_cast<std::uint32_t>(p[1]) << 8) |
                          (static_cast<std::uint32_t>(p[2]) << 16);
      if (raw & 0x800000u) raw |= 0xFF000000u;
      const auto v = static_cast<std::int32_t>(raw);
      return v / 8388608.0;
    }
    case 32: {
      std::uint32_t raw = static_cast<std::uint32_t>(p[0]) |
                          (static_cast<std::uint32_t>(p[1]) << 8) |
                          (static_cast<std::uint32_t>(p[2]) << 16) |
                          (static_cast<std::uint32_t>(p[3]) << 24);
      if (f.format == kFormatFloat) {
        float v;
        std::memcpy(&v, &raw, sizeof v);
        if (!std::isfinite(v)) throw FormatError("'data' chunk: non-finite float sample");
        return std::clamp(static_cast<double>(v), -1.0, 1.0);
      }
      return static_cast<std::int32_t>(raw) / 2147483648.0;
    }
  }
  throw UnsupportedCodecError("unsupported bit depth " + std::to_string(f.bits));
}

}  // namespace

void validate(const AudioSegment& audio) {
  if (audio.sample_rate <= 0) {
    throw RangeError("sample rate must be positive, got " +
                     std::to_string(audio.sample_rate));
  }
  if (audio.samples.empty()) throw EmptyAudioError("audio has no samples");
  for (double s : audio.samples) {
    if (!std::isfinite(s) || s < -1.0 || s > 1.0) {
      throw RangeError("sample outside [-1, 1]: " + std::to_string(s));
    }
  }
}

AudioSegment decode_wav(std::span<const std::uint8_t> bytes,
                        std::string source_id) {
  ByteReader r(bytes.data(), bytes.size(), "RIFF header");
  if (bytes.size() < 12) throw FormatError("'RIFF' header truncated");
  if (r.get_bytes(4) != "RIFF") throw FormatError("'RIFF' magic missing");
  r.skip(4);
  if (r.get_bytes(4) != "WAVE") throw FormatError("'RIFF' form type is not WAVE");

  std::optional<WavFormat> fmt;
  std::optional<std::span<const std::uint8_t>> data;
  while (r.remaining() >= 8 && !data) {
    const std::string id = r.get_bytes(4);
    const std::uint32_t size = r.get_le<std::uint32_t>();
    const std::size_t start = r.position();
    if (id == "fmt ") {
      if (size > r.remaining()) throw FormatError("'fmt ' chunk truncated");
      fmt = parse_fmt(ByteReader(bytes.data() + start, size, "'fmt ' chunk"));
    } else if (id == "data") {
      if (!fmt) throw FormatError("'data' chunk precedes 'fmt ' chunk");
      // Streaming writers leave the size unset; take what is there.
      const std::size_t n = std::min<std::size_t>(size, r.remaining());
      data = bytes.subspan(start, n);
      break;
    } else if (size > r.remaining()) {
      throw FormatError("'" + id + "' chunk truncated");
    }
    r.skip(std::min<std::size_t>(size + (size & 1u), r.remaining()));
  }
  if (!fmt) throw FormatError("'fmt ' chunk missing");
  if (!data) throw FormatError("'data' chunk missing");

  const WavFormat& f = *fmt;
  const bool int_pcm = f.format == kFormatPcm &&
                       (f.bits == 8 || f.bits == 16 || f.bits == 24 || f.bits == 32);
  const bool float_pcm = f.format == kFormatFloat && f.bits == 32;
  if (!int_pcm && !float_pcm) {
    throw UnsupportedCodecError("unsupported encoding: format tag " +
                                std::to_string(f.format) + ", " +
                                std::to_string(f.bits) + " bits");
  }
  if (f.channels < 1 || f.channels > 2) {
    throw UnsupportedCodecError("unsupported channel count " +
                                std::to_string(f.channels));
  }
  if (f.sample_rate == 0) throw FormatError("'fmt ' chunk: zero sample rate");
  const std::size_t sample_bytes = f.bits / 8;
  const std::size_t frame_bytes = sample_bytes * f.channels;
  if (f.block_align != frame_bytes) {
    throw FormatError("'fmt ' chunk: block align " + std::to_string(f.block_align) +
                      " does not match " + std::to_string(frame_bytes));
  }
  const std::size_t frames = data->size() / frame_bytes;
  if (frames == 0) throw EmptyAudioError("'data' chunk holds no samples");

  AudioSegment out;
  out.sample_rate = static_cast<int>(f.sample_rate);
  out.source_id = std::move(source_id);
  out.samples.resize(frames);
  const std::uint8_t* p = data->data();
  for (std::size_t i = 0; i < frames; ++i, p += frame_bytes) {
    if (f.channels == 1) {
      out.samples[i] = decode_sample(p, f);
    } else {
      out.samples[i] = (decode_sample(p, f) + decode_sample(p + sample_bytes, f)) / 2.0;
    }
  }
  return out;
}

AudioSegment read_wav(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return decode_wav(bytes, path.string());
}

std::vector<std::uint8_t> encode_wav16(const AudioSegment& audio) {
  const auto n = static_cast<std::uint32_t>(audio.samples.size());
  std::vector<std::uint8_t> out;
  out.reserve(44 + 2 * n);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_le<std::uint32_t>(out, 36 + 2 * n);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put_le<std::uint32_t>(out, 16);
  put_le<std::uint16_t>(out, kFormatPcm);
  put_le<std::uint16_t>(out, 1);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(audio.sample_rate));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(audio.sample_rate) * 2);
  put_le<std::uint16_t>(out, 2);
  put_le<std::uint16_t>(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_le<std::uint32_t>(out, 2 * n);
  for (double s : audio.samples) {
    const double scaled = std::round(std::clamp(s, -1.0, 1.0) * 32768.0);
    put_le<std::int16_t>(out, static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0)));
  }
  return out;
}

void write_wav16(const std::filesystem::path& path, const AudioSegment& audio) {
  write_file_atomic(path, encode_wav16(audio));
}

AudioSegment synth_tone(const std::vector<double>& freqs, double duration_s,
                        int sample_rate, double amplitude, std::uint64_t seed,
                        double noise_peak) {
  if (sample_rate <= 0) throw RangeError("sample rate must be positive");
  if (!(duration_s > 0)) throw RangeError("duration must be positive");
  if (noise_peak < 0 || noise_peak > 0.01) {
    throw RangeError("noise peak must lie in [0, 0.01]");
  }
  for (double f : freqs) {
    if (f < 0) throw RangeError("negative frequency " + std::to_string(f));
    if (f >= sample_rate / 2.0) {
      throw AliasingError("frequency " + std::to_string(f) +
                          " Hz is at or above Nyquist for rate " +
                          std::to_string(sample_rate));
    }
  }
  if (!freqs.empty() &&
      (!(amplitude > 0) || amplitude * freqs.size() > 1.0 + 1e-12)) {
    throw RangeError("amplitude must lie in (0, 1/len(freqs)]");
  }

  const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate));
  if (n == 0) throw RangeError("duration shorter than one sample");
  AudioSegment out;
  out.sample_rate = sample_rate;
  out.source_id = "synth";
  out.samples.resize(n);
  Rng rng(seed);
  for (std::size_t k = 0; k < n; ++k) {
    double v = 0.0;
    for (double f : freqs) {
      v += std::sin(2.0 * M_PI * f * static_cast<double>(k) / sample_rate);
    }
    v *= amplitude;
    if (noise_peak > 0) v += rng.uniform(-noise_peak, noise_peak);
    out.samples[k] = std::clamp(v, -1.0, 1.0);
  }
  return out;
}

}  // namespace specmer
