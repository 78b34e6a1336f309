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

#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "specmer/binary_io.hpp"
#include "specmer/dataset.hpp"
#include "specmer/errors.hpp"

namespace {

using namespace specmer;
namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("specmer_test_dataset_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string error_of(const std::string& text) {
  try {
    parse_manifest(text, "/", false);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("parse_manifest") {
  const std::string header = R"({"tags": ["calm", "happy", "sad"], "sample_rate": 8000})";
  SUBCASE("header only gives an empty list") {
    const auto m = parse_manifest(header + "\n", "/", false);
    CHECK(m.entries.empty());
    CHECK(m.tags.size() == 3);
    CHECK(m.sample_rate == 8000);
  }
  SUBCASE("entries with tags, segments and scores") {
    const auto m = parse_manifest(header + "\n" +
                                      R"({"id": "a", "audio": "a.wav", "tags": ["calm"]})" "\n"
                                      "\n" +
                                      R"({"id": "b", "audio": "/x/b.wav", "start": 1.5, "end": 3.0, "scores": [[5, 1, 1]]})" "\n",
                                  "/base", false);
    REQUIRE(m.entries.size() == 2);
    CHECK(m.entries[0].tags == std::vector<std::string>{"calm"});
    CHECK(m.resolve(m.entries[0]) == fs::path("/base/a.wav"));
    CHECK(m.resolve(m.entries[1]) == fs::path("/x/b.wav"));
    CHECK(*m.entries[1].segment_start_s == 1.5);
    CHECK(m.entries[1].scores->size() == 1);
  }
  SUBCASE("3223 entries") {
    std::string text = header + "\n";
    for (int i = 0; i < 3223; ++i) {
      text += R"({"id": "s)" + std::to_string(i) + R"(", "audio": "x.wav", "tags": ["sad"]})" "\n";
    }
    CHECK(parse_manifest(text, "/", false).entries.size() == 3223);
  }
  SUBCASE("errors carry line numbers") {
    const auto unknown = error_of(header + "\n" + R"({"id": "a", "audio": "a.wav", "tags": ["angry"]})");
    CHECK(unknown.find("line 2") != std::string::npos);
    CHECK(unknown.find("angry") != std::string::npos);
    const auto dup = error_of(header + "\n" + R"({"id": "a", "audio": "a.wav", "tags": ["sad"]})" + "\n" +
                              R"({"id": "a", "audio": "b.wav", "tags": ["sad"]})");
    CHECK(dup.find("line 3") != std::string::npos);
    CHECK(dup.find("duplicate") != std::string::npos);
    CHECK(error_of(header + "\n{not json").find("line 2") != std::string::npos);
    CHECK(error_of(header + "\n" + R"({"id": "a", "audio": "a.wav", "tags": [], "mood": 1})")
              .find("mood") != std::string::npos);
    CHECK(error_of(header + "\n" + R"({"id": "a", "audio": "a.wav", "start": 2, "end": 1, "tags": []})") != "");
    CHECK(error_of(header + "\n" + R"({"id": "a", "audio": "a.wav", "scores": [[1, 2]]})") != "");
    CHECK(error_of(header + "\n" + R"({"id": "a", "audio": "a.wav", "scores": [[1, 2, 6]]})") != "");
    CHECK(error_of(R"({"id": "a"})") != "");
    CHECK(error_of("") != "");
  }
  SUBCASE("missing audio file") {
    try {
      parse_manifest(header + "\n" + R"({"id": "a", "audio": "nope.wav", "tags": ["sad"]})", "/nonexistent", true);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
      CHECK(std::string(e.what()).find("nope.wav") != std::string::npos);
    }
  }
}

TEST_CASE("save then load is the identity on entries") {
  const fs::path dir = scratch("roundtrip");
  Manifest m;
  m.tags = {"a", "b"};
  m.sample_rate = 16000;
  m.entries.push_back({"one", "one.wav", std::nullopt, std::nullopt, {"a", "b"}, std::nullopt});
  m.entries.push_back({"two", "sub/two.wav", 0.25, 2.5, {}, std::vector<std::vector<int>>{{4, 1}, {5, 2}}});
  save_manifest(dir / "m.jsonl", m);
  const auto back = load_manifest(dir / "m.jsonl", false);
  CHECK(back.tags == m.tags);
  CHECK(back.sample_rate == m.sample_rate);
  CHECK(back.entries == m.entries);
  CHECK(manifest_to_jsonl(back) == manifest_to_jsonl(m));
  fs::remove_all(dir);
}

TEST_CASE("derive_labels_from_scores") {
  auto one_tag = [](std::vector<int> s) {
    ScoreAnnotation a{"x", {}};
    for (int v : s) a.scores.push_back({v});
    return derive_labels_from_scores(a)[0];
  };
  CHECK(one_tag({5, 5, 5}) == 1);
  CHECK(one_tag({4, 4, 4, 4, 1}) == 1);
  CHECK(one_tag({4, 4, 4, 1, 1}) == 0);
  CHECK(one_tag({3, 3, 3, 3, 3}) == 0);
  ScoreAnnotation two{"y", {{5, 1}, {4, 2}}};
  CHECK(derive_labels_from_scores(two) == std::vector<std::uint8_t>{1, 0});
  CHECK(derive_labels_from_scores(two, 0.5, 2) == std::vector<std::uint8_t>{1, 1});
  CHECK_THROWS_AS(derive_labels_from_scores(ScoreAnnotation{"z", {}}), AnnotationError);
}

TEST_CASE("slice_segment") {
  AudioSegment a{std::vector<double>(80000, 0.1), 8000, "x"};
  ManifestEntry whole{"x", "x.wav", std::nullopt, std::nullopt, {}, std::nullopt};
  CHECK(slice_segment(a, whole).samples.size() == 80000);
  ManifestEntry full = whole;
  full.segment_start_s = 0.0;
  full.segment_end_s = 10.0;
  CHECK(slice_segment(a, full).samples.size() == 80000);
  ManifestEntry part = whole;
  part.segment_start_s = 2.0;
  part.segment_end_s = 4.5;
  CHECK(slice_segment(a, part).samples.size() == 20000);
  ManifestEntry beyond = whole;
  beyond.segment_start_s = 9.0;
  beyond.segment_end_s = 10.5;
  CHECK_THROWS_AS(slice_segment(a, beyond), RangeError);
}

TEST_CASE("synth_corpus") {
  SUBCASE("zero items") {
    const fs::path dir = scratch("empty");
    const auto m = synth_corpus(0, 4, 1, dir);
    CHECK(m.entries.empty());
    CHECK(load_manifest(dir / "manifest.jsonl").entries.empty());
    fs::remove_all(dir);
  }
  SUBCASE("determinism per seed") {
    const fs::path a = scratch("seed_a"), b = scratch("seed_b");
    const auto ma = synth_corpus(5, 3, 9, a), mb = synth_corpus(5, 3, 9, b);
    CHECK(ma.entries == mb.entries);
    for (const auto& e : ma.entries) {
      CHECK(read_file_bytes(a / e.audio_path) == read_file_bytes(b / e.audio_path));
    }
    fs::remove_all(a);
    fs::remove_all(b);
  }
  SUBCASE("every item has at least one tag and a 16-bit mono WAV") {
    const fs::path dir = scratch("tags");
    const auto m = synth_corpus(30, 6, 2, dir);
    for (const auto& e : m.entries) {
      CHECK(!e.tags.empty());
      const auto audio = read_wav(m.resolve(e));
      CHECK(audio.sample_rate == 8192);
      CHECK(audio.samples.size() == 16384);
    }
    fs::remove_all(dir);
  }
}

TEST_CASE("synthetic tags are recoverable from band energies") {
  const fs::path dir = scratch("recover");
  const int tags = 6;
  const auto m = synth_corpus(60, tags, 4, dir);
  const auto items = load_corpus(m);
  const StftConfig cfg{256, Window::hann};
  const double bin_hz = 8192.0 / 256;
  const double width = synth_band_width(tags, 8192);
  int correct = 0, total = 0;
  bool saw_pair = false;
  for (const auto& item : items) {
    const auto p = stft_power(item.audio, cfg, 0);
    std::vector<double> band(tags, 0.0);
    double all = 0;
    for (std::size_t r = 0; r < p.rows; ++r) {
      double row = 0;
      for (std::size_t c = 0; c < p.cols; ++c) row += p.at(r, c);
      all += row;
      const double f = r * bin_hz;
      for (int j = 0; j < tags; ++j) {
        const double c = synth_band_center(j, tags, 8192);
        if (std::abs(f - c) <= width / 2) band[j] += row;
      }
    }
    for (int j = 0; j < tags; ++j) {
      const bool predicted = band[j] / all > 0.05;
      correct += predicted == (item.labels[j] == 1);
      ++total;
    }
    saw_pair |= item.labels[0] && item.labels[2];
  }
  CHECK(static_cast<double>(correct) / total >= 0.95);
  CHECK(saw_pair);
  fs::remove_all(dir);
}

TEST_CASE("load_corpus drops items without positives and make_examples shapes inputs") {
  const fs::path dir = scratch("corpus");
  const auto synth = synth_corpus(3, 2, 5, dir);
  Manifest m = synth;
  m.entries[1].tags.clear();
  m.entries[1].scores = std::vector<std::vector<int>>{{1, 1}};
  const auto items = load_corpus(m);
  CHECK(items.size() == 2);
  const auto ex = make_examples(items, StftConfig{64});
  REQUIRE(ex.size() == 2);
  CHECK(ex[0].input.shape == std::vector<std::size_t>{1, 33, 33});
  CHECK(ex[0].targets.size() == 2);
  CHECK(entry_labels(m, m.entries[0]).size() == 2);
  fs::remove_all(dir);
}
