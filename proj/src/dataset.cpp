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

#include "specmer/dataset.hpp"

#include <cmath>
#include <iostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "specmer/binary_io.hpp"
#include "specmer/errors.hpp"
#include "specmer/model.hpp"
#include "specmer/rng.hpp"

namespace specmer {
namespace {

using OJson = nlohmann::ordered_json;

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
  throw ParseError("manifest line " + std::to_string(line) + ": " + msg);
}

ManifestEntry parse_entry(const nlohmann::json& j, std::size_t line,
                          const std::set<std::string>& vocab) {
  if (!j.is_object()) fail(line, "entry must be a JSON object");
  ManifestEntry e;
  for (const auto& [key, value] : j.items()) {
    if (key != "id" && key != "audio" && key != "start" && key != "end" && key != "tags" &&
        key != "scores") {
      fail(line, "unknown key '" + key + "'");
    }
  }
  try {
    if (!j.contains("id")) fail(line, "missing 'id'");
    if (!j.contains("audio")) fail(line, "missing 'audio'");
    e.item_id = j.at("id").get<std::string>();
    e.audio_path = j.at("audio").get<std::string>();
    if (j.contains("start")) e.segment_start_s = j.at("start").get<double>();
    if (j.contains("end")) e.segment_end_s = j.at("end").get<double>();
    if (j.contains("tags")) e.tags = j.at("tags").get<std::vector<std::string>>();
    if (j.contains("scores")) e.scores = j.at("scores").get<std::vector<std::vector<int>>>();
  } catch (const nlohmann::json::exception& ex) {
    fail(line, std::string("bad field type: ") + ex.what());
  }
  if (e.item_id.empty()) fail(line, "empty 'id'");
  if (e.segment_start_s.has_value() != e.segment_end_s.has_value()) {
    fail(line, "'start' and 'end' must appear together");
  }
  if (e.segment_start_s && !(*e.segment_end_s > *e.segment_start_s)) {
    fail(line, "segment end must be greater than start");
  }
  if (e.segment_start_s && *e.segment_start_s < 0) fail(line, "negative segment start");
  if (j.contains("tags") == e.scores.has_value()) {
    fail(line, "entry needs exactly one of 'tags' or 'scores'");
  }
  for (const auto& t : e.tags) {
    if (!vocab.count(t)) fail(line, "unknown tag '" + t + "'");
  }
  if (e.scores) {
    if (e.scores->empty()) fail(line, "'scores' has no listeners");
    for (const auto& row : *e.scores) {
      if (row.size() != vocab.size()) {
        fail(line, "listener row has " + std::to_string(row.size()) + " scores, vocabulary has " +
                       std::to_string(vocab.size()) + " tags");
      }
      for (int s : row) {
        if (s < 1 || s > 5) fail(line, "score " + std::to_string(s) + " outside 1..5");
      }
    }
  }
  return e;
}

}  // namespace

std::filesystem::path Manifest::resolve(const ManifestEntry& e) const {
  std::filesystem::path p(e.audio_path);
  return p.is_absolute() ? p : base_dir / p;
}

Manifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir,
                        bool check_audio_exists) {
  Manifest m;
  m.base_dir = base_dir;
  std::istringstream in(text);
  std::string raw;
  std::size_t line = 0;
  bool have_header = false;
  std::set<std::string> vocab, ids;
  while (std::getline(in, raw)) {
    ++line;
    if (raw.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::parse_error& ex) {
      fail(line, std::string("malformed JSON: ") + ex.what());
    }
    if (!have_header) {
      if (!j.is_object() || !j.contains("tags")) fail(line, "first line must be the tag header");
      for (const auto& [key, value] : j.items()) {
        if (key != "tags" && key != "sample_rate") fail(line, "unknown header key '" + key + "'");
      }
      try {
        m.tags = j.at("tags").get<std::vector<std::string>>();
        if (j.contains("sample_rate")) m.sample_rate = j.at("sample_rate").get<int>();
      } catch (const nlohmann::json::exception& ex) {
        fail(line, std::string("bad header: ") + ex.what());
      }
      vocab.insert(m.tags.begin(), m.tags.end());
      if (vocab.size() != m.tags.size()) fail(line, "duplicate tag names in header");
      if (m.tags.empty()) fail(line, "empty tag vocabulary");
      have_header = true;
      continue;
    }
    ManifestEntry e = parse_entry(j, line, vocab);
    if (!ids.insert(e.item_id).second) fail(line, "duplicate id '" + e.item_id + "'");
    if (check_audio_exists && !std::filesystem::exists(m.resolve(e))) {
      fail(line, "audio file not found: " + m.resolve(e).string());
    }
    m.entries.push_back(std::move(e));
  }
  if (!have_header) throw ParseError("manifest has no header line");
  return m;
}

Manifest load_manifest(const std::filesystem::path& path, bool check_audio_exists) {
  const auto bytes = read_file_bytes(path);
  return parse_manifest(std::string(bytes.begin(), bytes.end()),
                        path.has_parent_path() ? path.parent_path() : ".", check_audio_exists);
}

std::string manifest_to_jsonl(const Manifest& manifest) {
  OJson header;
  header["tags"] = manifest.tags;
  header["sample_rate"] = manifest.sample_rate;
  std::string out = header.dump() + "\n";
  for (const auto& e : manifest.entries) {
    OJson j;
    j["id"] = e.item_id;
    j["audio"] = e.audio_path;
    if (e.segment_start_s) j["start"] = *e.segment_start_s;
    if (e.segment_end_s) j["end"] = *e.segment_end_s;
    if (e.scores) {
      j["scores"] = *e.scores;
    } else {
      j["tags"] = e.tags;
    }
    out += j.dump() + "\n";
  }
  return out;
}

void save_manifest(const std::filesystem::path& path, const Manifest& manifest) {
  write_file_atomic(path, manifest_to_jsonl(manifest));
}

std::vector<std::uint8_t> derive_labels_from_scores(const ScoreAnnotation& ann,
                                                    double agreement,
                                                    int positive_score_min) {
  if (ann.scores.empty()) {
    throw AnnotationError("item '" + ann.item_id + "' has no listeners");
  }
  const std::size_t tags = ann.scores.front().size();
  std::vector<std::uint8_t> labels(tags, 0);
  const double listeners = static_cast<double>(ann.scores.size());
  for (std::size_t j = 0; j < tags; ++j) {
    std::size_t agree = 0;
    for (const auto& row : ann.scores) {
      if (row.size() != tags) {
        throw AnnotationError("item '" + ann.item_id + "' has ragged listener rows");
      }
      if (row[j] < 1 || row[j] > 5) {
        throw AnnotationError("item '" + ann.item_id + "' has score outside 1..5");
      }
      agree += row[j] >= positive_score_min;
    }
    // Compare counts, not a rounded fraction: 4 of 5 must meet 0.8.
    labels[j] = static_cast<double>(agree) >= agreement * listeners - 1e-9;
  }
  return labels;
}

AudioSegment slice_segment(const AudioSegment& audio, const ManifestEntry& entry) {
  if (!entry.segment_start_s) return audio;
  const double rate = audio.sample_rate;
  const auto n = static_cast<long long>(audio.samples.size());
  const long long begin = std::llround(*entry.segment_start_s * rate);
  const long long end = std::llround(*entry.segment_end_s * rate);
  if (begin < 0 || end > n) {
    throw RangeError("segment [" + std::to_string(*entry.segment_start_s) + ", " +
                     std::to_string(*entry.segment_end_s) + "] s of '" + entry.item_id +
                     "' exceeds the " + std::to_string(audio.duration_s()) + " s track");
  }
  if (end <= begin) throw RangeError("segment of '" + entry.item_id + "' is empty");
  AudioSegment out;
  out.sample_rate = audio.sample_rate;
  out.source_id = audio.source_id + "#" + entry.item_id;
  out.samples.assign(audio.samples.begin() + begin, audio.samples.begin() + end);
  return out;
}

std::vector<std::uint8_t> entry_labels(const Manifest& manifest, const ManifestEntry& entry,
                                       const LabelRule& rule) {
  if (entry.scores) {
    return derive_labels_from_scores({entry.item_id, *entry.scores}, rule.agreement,
                                     rule.positive_score_min);
  }
  std::vector<std::uint8_t> labels(manifest.tags.size(), 0);
  for (const auto& t : entry.tags) {
    const auto it = std::find(manifest.tags.begin(), manifest.tags.end(), t);
    if (it == manifest.tags.end()) throw ParseError("unknown tag '" + t + "'");
    labels[it - manifest.tags.begin()] = 1;
  }
  return labels;
}

std::vector<LabeledItem> load_corpus(const Manifest& manifest, const LabelRule& rule) {
  std::vector<LabeledItem> items;
  for (const auto& e : manifest.entries) {
    auto labels = entry_labels(manifest, e, rule);
    if (std::find(labels.begin(), labels.end(), 1) == labels.end()) {
      std::cerr << "warning: dropping '" << e.item_id << "': no positive tags\n";
      continue;
    }
    AudioSegment audio = slice_segment(read_wav(manifest.resolve(e)), e);
    items.push_back({e.item_id, std::move(audio), std::move(labels)});
  }
  return items;
}

std::vector<Example> make_examples(const std::vector<LabeledItem>& items,
                                   const StftConfig& stft) {
  std::vector<Example> out;
  out.reserve(items.size());
  for (const auto& item : items) {
    Example ex;
    ex.id = item.id;
    ex.input = spectrogram_input(fixed_spectrogram(item.audio, stft));
    ex.targets.assign(item.labels.begin(), item.labels.end());
    out.push_back(std::move(ex));
  }
  return out;
}

double synth_band_width(int num_tags, int sample_rate) {
  return 0.4 * sample_rate / num_tags;
}

double synth_band_center(int tag, int num_tags, int sample_rate) {
  return 0.05 * sample_rate + (tag + 0.5) * synth_band_width(num_tags, sample_rate);
}

Manifest synth_corpus(int num_items, int num_tags, std::uint64_t seed,
                      const std::filesystem::path& out_dir, const SynthOptions& options) {
  if (num_items < 0) throw RangeError("item count must be non-negative");
  if (num_tags < 1) throw RangeError("tag count must be positive");
  Manifest m;
  m.sample_rate = options.sample_rate;
  m.base_dir = out_dir;
  for (int j = 0; j < num_tags; ++j) m.tags.push_back("tag" + std::to_string(j));

  Rng rng(seed);
  const double width = synth_band_width(num_tags, options.sample_rate);
  std::filesystem::create_directories(out_dir / "audio");
  for (int i = 0; i < num_items; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "item_%04d", i);
    std::vector<int> tags;
    for (int j = 0; j < num_tags; ++j) {
      if (rng.bernoulli(options.tag_probability)) tags.push_back(j);
    }
    if (tags.empty()) tags.push_back(static_cast<int>(rng.below(num_tags)));

    std::vector<double> freqs;
    ManifestEntry e;
    e.item_id = id;
    e.audio_path = std::string("audio/") + id + ".wav";
    for (int j : tags) {
      freqs.push_back(synth_band_center(j, num_tags, options.sample_rate) +
                      rng.uniform(-0.25, 0.25) * width);
      e.tags.push_back(m.tags[j]);
    }
    const double amplitude = rng.uniform(0.6, 0.9) / freqs.size();
    AudioSegment audio = synth_tone(freqs, options.duration_s, options.sample_rate, amplitude,
                                    Rng::derive(seed, 1000 + i));
    audio.source_id = id;
    write_wav16(out_dir / e.audio_path, audio);
    m.entries.push_back(std::move(e));
  }
  save_manifest(out_dir / "manifest.jsonl", m);
  return m;
}

}  // namespace specmer
