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
#include <iosfwd>
#include <string>
#include <vector>

#include "specmer/audio_io.hpp"

namespace specmer {

enum class Window { rectangular, hann };

std::string to_string(Window w);
Window window_from_string(const std::string& name);

struct StftConfig {
  int nfft = 512;
  Window window = Window::hann;

  // Frequency bins of the one-sided spectrum, and the side of the square
  // spectrogram.
  int K() const { return nfft / 2 + 1; }

  // nfft must be a power of two and at least 16.
  void validate() const;

  // The config whose spectrogram side is `K` (nfft = 2 (K - 1)).
  static StftConfig for_side(int K, Window window = Window::hann);
};

// Dense row-major matrix: rows are frequency bins, columns time frames.
struct PowerMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

enum class SpectrogramScale : std::uint8_t { power = 0, log_power = 1, standardized = 2 };

struct Spectrogram {
  StftConfig config;
  SpectrogramScale scale = SpectrogramScale::power;
  std::vector<double> values;  // K x K, row-major (frequency, time)

  int K() const { return config.K(); }
  double at(int f, int t) const {
    return values[static_cast<std::size_t>(f) * K() + t];
  }
};

// Samples shared by consecutive windows when `music_len` samples are cut into
// M + 1 windows of `win_size`:
//   floor(((M + 1) * win_size - music_len) / M)
// Negative values mean samples are skipped between windows. The result is
// capped at win_size - 1 so the hop stays positive.
long long compute_overlap(long long M, long long win_size, long long music_len);

// Number of full frames of `nfft` samples at hop nfft - overlap.
long long frame_count(long long music_len, long long nfft, long long overlap);

// Power |STFT|^2 with frame t starting at sample t * (nfft - overlap).
// Returns K rows by frame_count() columns.
PowerMatrix stft_power(const AudioSegment& audio, const StftConfig& config,
                       long long overlap);

// The K x K network input: power spectrogram with overlap from
// compute_overlap(K, nfft, len), trimmed or zero-padded to K frames, mapped
// through log(1 + x) and standardized to zero mean and unit variance.
Spectrogram fixed_spectrogram(const AudioSegment& audio, const StftConfig& config);

// Pointwise log(1 + x) on a power-scale spectrogram.
void to_log_power(Spectrogram& spec);
// Zero mean, unit variance over all entries; a constant matrix becomes zeros.
void standardize(Spectrogram& spec);

// SPG1 binary form: "SPG1", u32 K, u32 nfft, u8 scale, K*K f32 row-major.
// Values are stored in single precision. The window is not recorded.
std::vector<std::uint8_t> encode_spg(const Spectrogram& spec);
Spectrogram decode_spg(const std::vector<std::uint8_t>& bytes);
void write_spg(const std::filesystem::path& path, const Spectrogram& spec);
Spectrogram read_spg(const std::filesystem::path& path);

// Debug dumps.
void write_csv(std::ostream& out, const Spectrogram& spec);
// 8-bit greyscale, low frequencies at the bottom.
void write_pgm(const std::filesystem::path& path, const Spectrogram& spec);

}  // namespace specmer
