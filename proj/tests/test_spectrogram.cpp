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

#include <cmath>
#include <filesystem>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "oracles/oracles.hpp"
#include "specmer/errors.hpp"
#include "specmer/fft.hpp"
#include "specmer/rng.hpp"
#include "specmer/spectrogram.hpp"

namespace {

using namespace specmer;

AudioSegment segment(std::vector<double> samples, int rate = 8192) {
  return {std::move(samples), rate, "t"};
}

AudioSegment random_audio(Rng& rng, std::size_t n) {
  std::vector<double> s(n);
  for (double& v : s) v = rng.uniform(-1.0, 1.0);
  return segment(std::move(s));
}

std::size_t column_argmax(const PowerMatrix& p, std::size_t c) {
  std::size_t best = 0;
  for (std::size_t r = 1; r < p.rows; ++r)
    if (p.at(r, c) > p.at(best, c)) best = r;
  return best;
}

}  // namespace

TEST_CASE("compute_overlap") {
  CHECK(compute_overlap(4, 100, 500) == 0);
  CHECK(compute_overlap(257, 512, 100000) == 124);
  CHECK(compute_overlap(4, 100, 1000) == -125);
  // Exact division: floor equals the real value.
  CHECK(compute_overlap(3, 10, 28) == 4);
  // Negative numerator floors toward minus infinity.
  CHECK(compute_overlap(3, 10, 42) == -1);
  // music_len == win_size gives win_size and is capped to keep hop 1.
  CHECK(compute_overlap(4, 100, 100) == 99);
  CHECK_THROWS_AS(compute_overlap(4, 100, 99), SegmentTooShortError);
}

TEST_CASE("-125 overlap yields exactly M + 1 frames for M=4, w=100, L=1000") {
  const long long r = compute_overlap(4, 100, 1000);
  CHECK(frame_count(1000, 100, r) == 5);
}

TEST_CASE("frame count is M + 1 whenever the overlap formula divides exactly") {
  Rng rng(21);
  for (int i = 0; i < 300; ++i) {
    const long long M = 1 + static_cast<long long>(rng.below(300));
    const long long w = 16 + static_cast<long long>(rng.below(1000));
    // L = (M + 1) w - M r for an integer r < w, with L >= w.
    const long long r_max = std::min<long long>(w - 1, w);
    const long long r = r_max - static_cast<long long>(rng.below(static_cast<std::uint64_t>(3 * w)));
    const long long L = (M + 1) * w - M * r;
    if (L < w) continue;
    CHECK(compute_overlap(M, w, L) == r);
    CHECK(frame_count(L, w, r) == M + 1);
  }
}

TEST_CASE("flooring the overlap can leave fewer than M + 1 frames") {
  // L = w + K + 1 with nfft 256 (K = 129): overlap w - 2, hop 2.
  const long long K = 129, w = 256, L = w + K + 1;
  const long long r = compute_overlap(K, w, L);
  CHECK(r == w - 2);
  CHECK(frame_count(L, w, r) < K);
  // fixed_spectrogram still returns K x K by reading zeros past the end.
  Rng rng(1);
  const auto spec = fixed_spectrogram(random_audio(rng, L), StftConfig{256});
  CHECK(spec.values.size() == static_cast<std::size_t>(K * K));
}

TEST_CASE("stft_power matches the naive DFT") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 16u << rng.below(4);
    const auto audio = random_audio(rng, n * 3);
    const long long overlap = static_cast<long long>(rng.below(n)) - static_cast<long long>(n / 2);
    const auto p = stft_power(audio, StftConfig{static_cast<int>(n), Window::rectangular}, overlap);
    const long long hop = static_cast<long long>(n) - overlap;
    REQUIRE(p.rows == n / 2 + 1);
    REQUIRE(p.cols == static_cast<std::size_t>((3 * static_cast<long long>(n) - overlap) / hop));
    for (std::size_t c = 0; c < p.cols; ++c) {
      std::vector<double> frame(audio.samples.begin() + c * hop,
                                audio.samples.begin() + c * hop + n);
      const auto ref = oracle::naive_dft_power(frame);
      for (std::size_t k = 0; k < ref.size(); ++k) CHECK(p.at(k, c) == doctest::Approx(ref[k]).epsilon(1e-9));
    }
  }
}

TEST_CASE("hann window is the periodic form") {
  Rng rng(8);
  const auto audio = random_audio(rng, 32);
  const auto p = stft_power(audio, StftConfig{32, Window::hann}, 0);
  std::vector<double> frame(32);
  for (int i = 0; i < 32; ++i) {
    frame[i] = audio.samples[i] * 0.5 * (1.0 - std::cos(2 * M_PI * i / 32.0));
  }
  const auto ref = oracle::naive_dft_power(frame);
  for (std::size_t k = 0; k < ref.size(); ++k) CHECK(p.at(k, 0) == doctest::Approx(ref[k]).epsilon(1e-9));
}

TEST_CASE("stft_power examples") {
  SUBCASE("all-zero audio") {
    const auto p = stft_power(segment(std::vector<double>(1024, 0.0)), StftConfig{256}, 0);
    CHECK(std::all_of(p.values.begin(), p.values.end(), [](double v) { return v == 0.0; }));
  }
  SUBCASE("440 Hz peaks at bin 14 in every column") {
    const auto a = synth_tone({440.0}, 1.0, 8192, 0.9, 1);
    const auto p = stft_power(a, StftConfig{256, Window::rectangular}, 0);
    CHECK(p.rows == 129);
    for (std::size_t c = 0; c < p.cols; ++c) CHECK(column_argmax(p, c) == 14);
  }
  SUBCASE("too short") {
    CHECK_THROWS_AS(stft_power(segment(std::vector<double>(100, 0.0)), StftConfig{256}, 0),
                    SegmentTooShortError);
  }
  SUBCASE("overlap at nfft") {
    CHECK_THROWS_AS(stft_power(segment(std::vector<double>(1000, 0.0)), StftConfig{256}, 256),
                    RangeError);
  }
}

TEST_CASE("fft matches the naive DFT for every power of two up to 1024") {
  Rng rng(13);
  for (std::size_t n = 1; n <= 1024; n *= 2) {
    std::vector<double> x(n);
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    std::vector<std::complex<double>> c(x.begin(), x.end());
    fft_inplace(c);
    const auto ref = oracle::naive_dft_power_two_sided(x);
    for (std::size_t k = 0; k < n; ++k) CHECK(std::norm(c[k]) == doctest::Approx(ref[k]).epsilon(1e-9));
  }
  std::vector<std::complex<double>> bad(12);
  CHECK_THROWS(fft_inplace(bad));
}

TEST_CASE("fixed_spectrogram") {
  SUBCASE("silence gives an all-zero standardized matrix") {
    const StftConfig cfg{256};
    const auto spec = fixed_spectrogram(segment(std::vector<double>(130 * 256, 0.0)), cfg);
    CHECK(spec.K() == 129);
    CHECK(spec.scale == SpectrogramScale::standardized);
    CHECK(std::all_of(spec.values.begin(), spec.values.end(), [](double v) { return v == 0.0; }));
  }
  SUBCASE("5 s tone at nfft 512 is 257 x 257 and standardized") {
    const auto spec = fixed_spectrogram(synth_tone({700.0}, 5.0, 8192, 0.5, 2), StftConfig{512});
    REQUIRE(spec.values.size() == 257u * 257u);
    const double n = static_cast<double>(spec.values.size());
    const double mean = std::accumulate(spec.values.begin(), spec.values.end(), 0.0) / n;
    double var = 0;
    for (double v : spec.values) var += (v - mean) * (v - mean);
    CHECK(std::abs(mean) < 1e-6);
    CHECK(std::abs(std::sqrt(var / n) - 1.0) < 1e-6);
  }
  SUBCASE("different tones give different row-marginal argmax") {
    auto marginal_argmax = [](const Spectrogram& s) {
      int best = 0;
      double best_v = -1e300;
      for (int f = 0; f < s.K(); ++f) {
        double sum = 0;
        for (int t = 0; t < s.K(); ++t) sum += s.at(f, t);
        if (sum > best_v) best_v = sum, best = f;
      }
      return best;
    };
    const StftConfig cfg{256};
    const int a = marginal_argmax(fixed_spectrogram(synth_tone({500.0}, 3.0, 8192, 0.8, 1), cfg));
    const int b = marginal_argmax(fixed_spectrogram(synth_tone({2048.0}, 3.0, 8192, 0.8, 1), cfg));
    CHECK(a == std::lround(500.0 * 256 / 8192));
    CHECK(b == 64);
  }
  SUBCASE("columns equal the STFT frames before scaling") {
    // Length with exact division: (K + 1) frames exist and the first K are used.
    const StftConfig cfg{16, Window::rectangular};
    Rng rng(4);
    const long long K = 9, r = -3, L = (K + 1) * 16 - K * r;
    const auto audio = random_audio(rng, L);
    const auto p = stft_power(audio, cfg, r);
    REQUIRE(p.cols == static_cast<std::size_t>(K + 1));
    Spectrogram expect{cfg, SpectrogramScale::power, {}};
    for (std::size_t f = 0; f < p.rows; ++f)
      for (long long t = 0; t < K; ++t) expect.values.push_back(p.at(f, t));
    to_log_power(expect);
    standardize(expect);
    const auto got = fixed_spectrogram(audio, cfg);
    for (std::size_t i = 0; i < got.values.size(); ++i) CHECK(got.values[i] == doctest::Approx(expect.values[i]).epsilon(1e-12));
  }
  SUBCASE("shorter than one window") {
    CHECK_THROWS_AS(fixed_spectrogram(segment(std::vector<double>(100, 0.1)), StftConfig{256}),
                    SegmentTooShortError);
  }
}

TEST_CASE("log1p preserves each column's argmax") {
  Rng rng(17);
  const auto p = stft_power(random_audio(rng, 4096), StftConfig{256}, 0);
  std::vector<std::size_t> before;
  for (std::size_t c = 0; c < p.cols; ++c) before.push_back(column_argmax(p, c));
  PowerMatrix logged = p;
  for (double& v : logged.values) v = std::log1p(v);
  for (std::size_t c = 0; c < p.cols; ++c) CHECK(column_argmax(logged, c) == before[c]);
  Spectrogram already{StftConfig{16}, SpectrogramScale::log_power, {1.0}};
  CHECK_THROWS_AS(to_log_power(already), StateError);
}

TEST_CASE("StftConfig") {
  CHECK(StftConfig{512}.K() == 257);
  CHECK(StftConfig::for_side(129).nfft == 256);
  CHECK_THROWS(StftConfig{100}.validate());
  CHECK_THROWS(StftConfig{8}.validate());
  CHECK_THROWS(StftConfig::for_side(100));
  CHECK(window_from_string("hann") == Window::hann);
  CHECK(window_from_string(to_string(Window::rectangular)) == Window::rectangular);
  CHECK_THROWS(window_from_string("hamming"));
}

TEST_CASE("SPG1 round trip and errors") {
  Rng rng(3);
  const auto spec = fixed_spectrogram(random_audio(rng, 5000), StftConfig{32});
  const auto bytes = encode_spg(spec);
  CHECK(bytes.size() == 13 + 4 * 17 * 17);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "SPG1");
  const auto back = decode_spg(bytes);
  CHECK(back.K() == 17);
  CHECK(back.scale == SpectrogramScale::standardized);
  for (std::size_t i = 0; i < spec.values.size(); ++i) {
    CHECK(back.values[i] == static_cast<double>(static_cast<float>(spec.values[i])));
  }
  CHECK(encode_spg(back) == bytes);

  auto bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_spg(bad), FormatError);
  CHECK_THROWS_AS(decode_spg({bytes.begin(), bytes.end() - 1}), FormatError);
  bad = bytes;
  bad[12] = 9;
  CHECK_THROWS_AS(decode_spg(bad), FormatError);

  const auto path = std::filesystem::temp_directory_path() / "specmer_test.spg";
  write_spg(path, spec);
  CHECK(encode_spg(read_spg(path)) == bytes);
  std::filesystem::remove(path);
}

TEST_CASE("debug dumps") {
  Rng rng(3);
  const auto spec = fixed_spectrogram(random_audio(rng, 3000), StftConfig{16});
  std::ostringstream csv;
  write_csv(csv, spec);
  const std::string text = csv.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 9);
  const auto path = std::filesystem::temp_directory_path() / "specmer_test.pgm";
  write_pgm(path, spec);
  CHECK(std::filesystem::file_size(path) > 81);
  std::filesystem::remove(path);
}
