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
#include <optional>
#include <string>
#include <vector>

#include "specmer/audio_io.hpp"
#include "specmer/spectrogram.hpp"
#include "specmer/trainer.hpp"

namespace specmer {

// Per-listener integer scores (1..5), listeners x tags.
struct ScoreAnnotation {
  std::string item_id;
  std::vector<std::vector<int>> scores;
};

// One manifest line. Either `tags` (segment-level labels) or
// `scores` (track-level listener ratings) carries the labels.
struct ManifestEntry {
  std::string item_id;
  std::string audio_path;  // as written; relative paths resolve against the manifest
  std::optional<double> segment_start_s;
  std::optional<double> segment_end_s;
  std::vector<std::string> tags;
  std::optional<std::vector<std::vector<int>>> scores;

  bool operator==(const ManifestEntry&) const = default;
};

struct Manifest {
  std::vector<std::string> tags;
  int sample_rate = 0;
  std::vector<ManifestEntry> entries;
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const ManifestEntry& e) const;
};

// JSON-lines: a header {"tags": [...], "sample_rate": n}, then one object per
// entry with "id", "audio", optional "start"/"end" (seconds) and either
// "tags" or "scores". Errors carry the 1-based line number.
Manifest load_manifest(const std::filesystem::path& path, bool check_audio_exists = true);
Manifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir,
                        bool check_audio_exists = true);
std::string manifest_to_jsonl(const Manifest& manifest);
void save_manifest(const std::filesystem::path& path, const Manifest& manifest);

// Tag j is positive iff the fraction of listeners scoring it at least
// `positive_score_min` reaches `agreement`.
std::vector<std::uint8_t> derive_labels_from_scores(const ScoreAnnotation& ann,
                                                    double agreement = 0.8,
                                                    int positive_score_min = 4);

// Samples between the entry's timestamps, rounded to the nearest sample; the
// whole track when it has none.
AudioSegment slice_segment(const AudioSegment& audio, const ManifestEntry& entry);

struct LabelRule {
  double agreement = 0.8;
  int positive_score_min = 4;
};

struct LabeledItem {
  std::string id;
  AudioSegment audio;
  std::vector<std::uint8_t> labels;
};

// Binary labels of one entry over the manifest vocabulary.
std::vector<std::uint8_t> entry_labels(const Manifest& manifest, const ManifestEntry& entry,
                                       const LabelRule& rule = {});

// Decodes and slices every entry. Items whose labels come out empty are
// dropped with a warning on stderr.
std::vector<LabeledItem> load_corpus(const Manifest& manifest, const LabelRule& rule = {});

// Network inputs for every item under `stft`.
std::vector<Example> make_examples(const std::vector<LabeledItem>& items,
                                   const StftConfig& stft);

struct SynthOptions {
  int sample_rate = 8192;
  double duration_s = 2.0;
  double tag_probability = 0.3;
};

// Centre frequency (Hz) of the band bound to tag `tag`. Bands evenly split
// [0.05, 0.45] * sample_rate.
double synth_band_center(int tag, int num_tags, int sample_rate);
double synth_band_width(int num_tags, int sample_rate);

// Writes audio/<id>.wav (16-bit mono) and manifest.jsonl under `out_dir`.
// Every item carries at least one tag; each tag contributes one tone inside
// its band. Deterministic per seed.
Manifest synth_corpus(int num_items, int num_tags, std::uint64_t seed,
                      const std::filesystem::path& out_dir, const SynthOptions& options = {});

}  // namespace specmer
