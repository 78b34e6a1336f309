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

#include "specmer/spectrogram.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "specmer/binary_io.hpp"
#include "specmer/errors.hpp"
#include "specmer/fft.hpp"

namespace specmer {
namespace {

long long floor_div(long long a, long long b) {
  long long q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::vector<double> make_window(const StftConfig& config) {
  std::vector<double> w(config.nfft, 1.0);
  if (config.window == Window::hann) {
    // Periodic Hann.
    for (int n = 0; n < config.nfft; ++n) {
      w[n] = 0.5 - 0.5 * std::cos(2.0 * M_PI * n / config.nfft);
    }
  }
  return w;
}

// Fills `num_frames` columns; samples past the end of the audio read as 0.
PowerMatrix compute_frames(const AudioSegment& audio, const StftConfig& config,
                           long long hop, long long num_frames) {
  const std::vector<double> window = make_window(config);
  const std::size_t nfft = config.nfft;
  const std::size_t K = config.K();
  const auto& x = audio.samples;

  PowerMatrix out;
  out.rows = K;
  out.cols = static_cast<std::size_t>(num_frames);
  out.values.assign(out.rows * out.cols, 0.0);

  std::vector<std::complex<double>> buf(nfft);
  for (std::size_t t = 0; t < out.cols; ++t) {
    const std::size_t start = t * static_cast<std::size_t>(hop);
    for (std::size_t n = 0; n < nfft; ++n) {
      const std::size_t i = start + n;
      buf[n] = i < x.size() ? x[i] * window[n] : 0.0;
    }
    fft_inplace(buf);
    for (std::size_t k = 0; k < K; ++k) out.values[k * out.cols + t] = std::norm(buf[k]);
  }
  return out;
}

}  // namespace

std::string to_string(Window w) {
  return w == Window::hann ? "hann" : "rectangular";
}

Window window_from_string(const std::string& name) {
  if (name == "hann") return Window::hann;
  if (name == "rectangular") return Window::rectangular;
  throw ConfigError("unknown window '" + name + "' (expected hann or rectangular)");
}

void StftConfig::validate() const {
  if (nfft < 16 || !is_power_of_two(nfft)) {
    throw ConfigError("nfft must be a power of two >= 16, got " + std::to_string(nfft));
  }
}

StftConfig StftConfig::for_side(int K, Window window) {
  StftConfig c{2 * (K - 1), window};
  c.validate();
  return c;
}

long long compute_overlap(long long M, long long win_size, long long music_len) {
  if (M <= 0 || win_size <= 0) {
    throw RangeError("frequency dimension and window size must be positive");
  }
  if (music_len < win_size) {
    throw SegmentTooShortError("segment of " + std::to_string(music_len) +
                               " samples is shorter than the " +
                               std::to_string(win_size) + "-sample window");
  }
  const long long r = floor_div((M + 1) * win_size - music_len, M);
  // Only music_len == win_size reaches win_size; keep the hop at one sample.
  return std::min(r, win_size - 1);
}

long long frame_count(long long music_len, long long nfft, long long overlap) {
  if (overlap >= nfft) {
    throw RangeError("overlap " + std::to_string(overlap) +
                     " must be smaller than nfft " + std::to_string(nfft));
  }
  if (music_len < nfft) return 0;
  return floor_div(music_len - overlap, nfft - overlap);
}

PowerMatrix stft_power(const AudioSegment& audio, const StftConfig& config,
                       long long overlap) {
  config.validate();
  const auto len = static_cast<long long>(audio.samples.size());
  const long long frames = frame_count(len, config.nfft, overlap);
  if (frames < 1) {
    throw SegmentTooShortError("segment of " + std::to_string(len) +
                               " samples is shorter than one " +
                               std::to_string(config.nfft) + "-sample window");
  }
  return compute_frames(audio, config, config.nfft - overlap, frames);
}

Spectrogram fixed_spectrogram(const AudioSegment& audio, const StftConfig& config) {
  config.validate();
  const long long K = config.K();
  const auto len = static_cast<long long>(audio.samples.size());
  const long long overlap = compute_overlap(K, config.nfft, len);
  // Frames beyond the available ones read zero padding; surplus frames are
  // never computed, which is the same as trimming trailing columns.
  const PowerMatrix power = compute_frames(audio, config, config.nfft - overlap, K);

  Spectrogram spec;
  spec.config = config;
  spec.scale = SpectrogramScale::power;
  spec.values = power.values;
  to_log_power(spec);
  standardize(spec);
  return spec;
}

void to_log_power(Spectrogram& spec) {
  if (spec.scale != SpectrogramScale::power) {
    throw StateError("log mapping expects a power-scale spectrogram");
  }
  for (double& v : spec.values) v = std::log1p(v);
  spec.scale = SpectrogramScale::log_power;
}

void standardize(Spectrogram& spec) {
  const auto n = static_cast<double>(spec.values.size());
  double mean = 0.0;
  for (double v : spec.values) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : spec.values) var += (v - mean) * (v - mean);
  const double stddev = std::sqrt(var / n);
  if (stddev <= 1e-10 * std::max(1.0, std::abs(mean))) {
    std::fill(spec.values.begin(), spec.values.end(), 0.0);
  } else {
    for (double& v : spec.values) v = (v - mean) / stddev;
  }
  spec.scale = SpectrogramScale::standardized;
}

std::vector<std::uint8_t> encode_spg(const Spectrogram& spec) {
  const auto K = static_cast<std::uint32_t>(spec.K());
  if (spec.values.size() != static_cast<std::size_t>(K) * K) {
    throw ShapeError("spectrogram holds " + std::to_string(spec.values.size()) +
                     " values, expected K*K = " + std::to_string(K * K));
  }
  std::vector<std::uint8_t> out{'S', 'P', 'G', '1'};
  out.reserve(13 + 4 * spec.values.size());
  put_le<std::uint32_t>(out, K);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(spec.config.nfft));
  put_le<std::uint8_t>(out, static_cast<std::uint8_t>(spec.scale));
  for (double v : spec.values) put_le<float>(out, static_cast<float>(v));
  return out;
}

Spectrogram decode_spg(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes.data(), bytes.size(), "SPG1");
  if (r.get_bytes(4) != "SPG1") throw FormatError("SPG1: bad magic");
  const auto K = r.get_le<std::uint32_t>();
  const auto nfft = r.get_le<std::uint32_t>();
  const auto scale = r.get_le<std::uint8_t>();
  if (scale > 2) throw FormatError("SPG1: unknown scale " + std::to_string(scale));
  Spectrogram spec;
  spec.config.nfft = static_cast<int>(nfft);
  spec.config.validate();
  if (static_cast<std::uint32_t>(spec.K()) != K) {
    throw FormatError("SPG1: K = " + std::to_string(K) + " inconsistent with nfft " +
                      std::to_string(nfft));
  }
  spec.scale = static_cast<SpectrogramScale>(scale);
  spec.values.resize(static_cast<std::size_t>(K) * K);
  for (double& v : spec.values) v = r.get_le<float>();
  if (!r.at_end()) throw FormatError("SPG1: trailing bytes");
  return spec;
}

void write_spg(const std::filesystem::path& path, const Spectrogram& spec) {
  write_file_atomic(path, encode_spg(spec));
}

Spectrogram read_spg(const std::filesystem::path& path) {
  return decode_spg(read_file_bytes(path));
}

void write_csv(std::ostream& out, const Spectrogram& spec) {
  const int K = spec.K();
  out.precision(9);
  for (int f = 0; f < K; ++f) {
    for (int t = 0; t < K; ++t) {
      if (t) out << ',';
      out << spec.at(f, t);
    }
    out << '\n';
  }
}

void write_pgm(const std::filesystem::path& path, const Spectrogram& spec) {
  const int K = spec.K();
  const auto [lo, hi] = std::minmax_element(spec.values.begin(), spec.values.end());
  const double range = *hi - *lo;
  std::ostringstream out;
  out << "P5\n" << K << ' ' << K << "\n255\n";
  for (int f = K - 1; f >= 0; --f) {
    for (int t = 0; t < K; ++t) {
      const double u = range > 0 ? (spec.at(f, t) - *lo) / range : 0.0;
      out.put(static_cast<char>(static_cast<unsigned char>(std::lround(u * 255))));
    }
  }
  write_file_atomic(path, out.str());
}

}  // namespace specmer
