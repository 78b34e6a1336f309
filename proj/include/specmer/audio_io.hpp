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

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace specmer {

// Mono audio, amplitudes normalized to [-1, 1].
struct AudioSegment {
  std::vector<double> samples;
  int sample_rate = 0;
  std::string source_id;

  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

// Throws if `audio` breaks the AudioSegment invariants (nonempty, finite,
// within [-1, 1], positive rate).
void validate(const AudioSegment& audio);

// Decodes a RIFF/WAVE file: PCM 8/16/24/32-bit integer or 32-bit float,
// one or two channels. Stereo is averaged to mono.
AudioSegment read_wav(const std::filesystem::path& path);
AudioSegment decode_wav(std::span<const std::uint8_t> bytes,
                        std::string source_id = {});

// 16-bit PCM mono. Samples are clipped to [-1, 1] and rounded.
std::vector<std::uint8_t> encode_wav16(const AudioSegment& audio);
void write_wav16(const std::filesystem::path& path, const AudioSegment& audio);

// Sum of unit sinusoids scaled by `amplitude`, plus seeded uniform noise of
// peak `noise_peak`. Deterministic for fixed arguments.
AudioSegment synth_tone(const std::vector<double>& freqs, double duration_s,
                        int sample_rate, double amplitude, std::uint64_t seed,
                        double noise_peak = 0.01);

}  // namespace specmer
