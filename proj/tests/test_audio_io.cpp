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

#include "doctest.h"
#include "specmer/audio_io.hpp"
#include "specmer/binary_io.hpp"
#include "specmer/errors.hpp"
#include "specmer/rng.hpp"
#include "specmer/spectrogram.hpp"

namespace {

using namespace specmer;
using Bytes = std::vector<std::uint8_t>;

void append_tag(Bytes& b, const char* tag) { b.insert(b.end(), tag, tag + 4); }

// Hand-assembled RIFF/WAVE with an optional extra chunk before "data".
Bytes make_wav(std::uint16_t format, std::uint16_t channels, std::uint32_t rate,
               std::uint16_t bits, const Bytes& data, bool extra_chunk = false) {
  Bytes fmt;
  put_le<std::uint16_t>(fmt, format);
  put_le<std::uint16_t>(fmt, channels);
  put_le<std::uint32_t>(fmt, rate);
  put_le<std::uint32_t>(fmt, rate * channels * bits / 8);
  put_le<std::uint16_t>(fmt, static_cast<std::uint16_t>(channels * bits / 8));
  put_le<std::uint16_t>(fmt, bits);
  Bytes body;
  append_tag(body, "WAVE");
  append_tag(body, "fmt ");
  put_le<std::uint32_t>(body, static_cast<std::uint32_t>(fmt.size()));
  body.insert(body.end(), fmt.begin(), fmt.end());
  if (extra_chunk) {
    append_tag(body, "LIST");
    put_le<std::uint32_t>(body, 3);
    body.insert(body.end(), {1, 2, 3, 0});  // odd size plus pad byte
  }
  append_tag(body, "data");
  put_le<std::uint32_t>(body, static_cast<std::uint32_t>(data.size()));
  body.insert(body.end(), data.begin(), data.end());
  Bytes out;
  append_tag(out, "RIFF");
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(body.size()));
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

Bytes pcm16(std::initializer_list<std::int16_t> v) {
  Bytes b;
  for (auto s : v) put_le<std::int16_t>(b, s);
  return b;
}

}  // namespace

TEST_CASE("16-bit mono samples scale by 32768") {
  const auto a = decode_wav(make_wav(1, 1, 8000, 16, pcm16({0, 16384, -32768})), "x");
  REQUIRE(a.samples.size() == 3);
  CHECK(a.samples[0] == 0.0);
  CHECK(a.samples[1] == 0.5);
  CHECK(a.samples[2] == -1.0);
  CHECK(a.sample_rate == 8000);
  CHECK(a.source_id == "x");
}

TEST_CASE("stereo is averaged to mono") {
  const auto a = decode_wav(make_wav(1, 2, 8000, 16, pcm16({1000, 3000, -2, 2})));
  REQUIRE(a.samples.size() == 2);
  CHECK(a.samples[0] == 2000.0 / 32768.0);
  CHECK(a.samples[1] == 0.0);
}

TEST_CASE("8, 24 and 32-bit integer and float encodings") {
  SUBCASE("8-bit is unsigned with midpoint 128") {
    const auto a = decode_wav(make_wav(1, 1, 8000, 8, Bytes{128, 0, 192}));
    CHECK(a.samples == std::vector<double>{0.0, -1.0, 0.5});
  }
  SUBCASE("24-bit sign-extends and scales by 2^23") {
    Bytes d{0x00, 0x00, 0x40, 0x00, 0x00, 0x80, 0xFF, 0xFF, 0xFF};
    const auto a = decode_wav(make_wav(1, 1, 8000, 24, d));
    CHECK(a.samples == std::vector<double>{0.5, -1.0, -1.0 / 8388608.0});
  }
  SUBCASE("32-bit float passes through") {
    Bytes d;
    put_le<float>(d, 0.25f);
    put_le<float>(d, -0.75f);
    const auto a = decode_wav(make_wav(3, 1, 44100, 32, d));
    CHECK(a.samples == std::vector<double>{0.25, -0.75});
  }
  SUBCASE("32-bit integer") {
    Bytes d;
    put_le<std::int32_t>(d, 1 << 30);
    const auto a = decode_wav(make_wav(1, 1, 8000, 32, d));
    CHECK(a.samples == std::vector<double>{0.5});
  }
}

TEST_CASE("unknown chunks are skipped") {
  const auto a = decode_wav(make_wav(1, 1, 8000, 16, pcm16({100, -100}), true));
  CHECK(a.samples.size() == 2);
}

TEST_CASE("metadata is preserved for a long file") {
  Bytes d(220500 * 2, 0);
  const auto a = decode_wav(make_wav(1, 1, 44100, 16, d));
  CHECK(a.sample_rate == 44100);
  CHECK(a.samples.size() == 220500);
}

TEST_CASE("decode errors") {
  const Bytes good = make_wav(1, 1, 8000, 16, pcm16({1, 2}));
  SUBCASE("bad RIFF magic") {
    Bytes b = good;
    b[0] = 'X';
    CHECK_THROWS_AS(decode_wav(b), FormatError);
  }
  SUBCASE("truncated fmt chunk names the chunk") {
    Bytes b(good.begin(), good.begin() + 24);
    try {
      decode_wav(b);
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(std::string(e.what()).find("fmt") != std::string::npos);
    }
  }
  SUBCASE("unsupported codec") {
    CHECK_THROWS_AS(decode_wav(make_wav(2, 1, 8000, 16, pcm16({1}))), UnsupportedCodecError);
    CHECK_THROWS_AS(decode_wav(make_wav(1, 1, 8000, 12, pcm16({1}))), UnsupportedCodecError);
    CHECK_THROWS_AS(decode_wav(make_wav(1, 3, 8000, 16, pcm16({1, 2, 3}))),
                    UnsupportedCodecError);
  }
  SUBCASE("empty data chunk") {
    CHECK_THROWS_AS(decode_wav(make_wav(1, 1, 8000, 16, {})), EmptyAudioError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(read_wav("/nonexistent/file.wav"), IoError);
  }
}

TEST_CASE("16-bit encode and decode round-trip is sample-exact") {
  Rng rng(3);
  AudioSegment a;
  a.sample_rate = 16000;
  for (int i = 0; i < 2000; ++i) {
    a.samples.push_back(static_cast<double>(static_cast<int>(rng.below(65536)) - 32768) / 32768.0);
  }
  const auto once = decode_wav(encode_wav16(a));
  CHECK(once.samples == a.samples);
  const auto twice = decode_wav(encode_wav16(once));
  CHECK(twice.samples == once.samples);
}

TEST_CASE("file round trip through write_wav16 and read_wav") {
  const auto path = std::filesystem::temp_directory_path() / "specmer_test_audio.wav";
  const auto a = synth_tone({300.0}, 0.1, 8000, 0.5, 1);
  write_wav16(path, a);
  const auto b = read_wav(path);
  REQUIRE(b.samples.size() == a.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    CHECK(std::abs(b.samples[i] - a.samples[i]) <= 1.0 / 32768.0);
  }
  std::filesystem::remove(path);
}

TEST_CASE("synth_tone") {
  SUBCASE("empty frequency list is pure noise within the peak") {
    const auto a = synth_tone({}, 0.5, 8000, 1.0, 1);
    double peak = 0;
    for (double v : a.samples) peak = std::max(peak, std::abs(v));
    CHECK(peak <= 0.01);
    CHECK(peak > 0.0);
  }
  SUBCASE("noise disabled gives the sinusoid") {
    const auto a = synth_tone({440.0}, 1.0, 8000, 0.9, 1, 0.0);
    REQUIRE(a.samples.size() == 8000);
    for (std::size_t k = 0; k < a.samples.size(); k += 97) {
      CHECK(a.samples[k] == doctest::Approx(0.9 * std::sin(2 * M_PI * 440.0 * k / 8000)).epsilon(1e-12));
    }
  }
  SUBCASE("seeded determinism") {
    CHECK(synth_tone({100, 900}, 0.3, 8000, 0.4, 7).samples ==
          synth_tone({100, 900}, 0.3, 8000, 0.4, 7).samples);
    CHECK(synth_tone({100}, 0.3, 8000, 0.4, 7).samples !=
          synth_tone({100}, 0.3, 8000, 0.4, 8).samples);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(synth_tone({4000.0}, 1.0, 8000, 0.5, 1), AliasingError);
    CHECK_THROWS_AS(synth_tone({100.0, 200.0}, 1.0, 8000, 0.6, 1), RangeError);
    CHECK_THROWS_AS(synth_tone({100.0}, 0.0, 8000, 0.5, 1), RangeError);
  }
  SUBCASE("values stay within [-1, 1]") {
    const auto a = synth_tone({50, 60}, 0.5, 8000, 0.5, 2);
    for (double v : a.samples) CHECK(std::abs(v) <= 1.0);
  }
}

TEST_CASE("noise-free tone power concentrates in the nearest bins") {
  StftConfig cfg{256, Window::rectangular};
  for (double f : {440.0, 1000.0, 2500.0}) {
    const auto a = synth_tone({f}, 1.0, 8192, 0.8, 1, 0.0);
    const auto p = stft_power(a, cfg, 0);
    const long bin = std::lround(f * 256 / 8192);
    double total = 0, near = 0;
    for (std::size_t r = 0; r < p.rows; ++r)
      for (std::size_t c = 0; c < p.cols; ++c) {
        total += p.at(r, c);
        if (std::labs(static_cast<long>(r) - bin) <= 1) near += p.at(r, c);
      }
    CHECK(near / total >= 0.9);
  }
}

TEST_CASE("validate rejects broken segments") {
  AudioSegment a;
  a.sample_rate = 8000;
  CHECK_THROWS(validate(a));
  a.samples = {0.5, 1.5};
  CHECK_THROWS(validate(a));
  a.samples = {0.5, NAN};
  CHECK_THROWS(validate(a));
  a.samples = {0.5};
  a.sample_rate = 0;
  CHECK_THROWS(validate(a));
}
