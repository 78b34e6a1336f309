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

#include "specmer/run_config.hpp"

#include <regex>

#include "specmer/binary_io.hpp"
#include "specmer/errors.hpp"
#include "specmer/json_io.hpp"

namespace specmer {
namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

void RunConfig::finalize() { train.seed = seed; }

std::pair<std::size_t, std::size_t> locate_key(const std::string& text, const std::string& path) {
  // "a.b[2].c" -> {"a", "b", "c"}
  std::vector<std::string> parts;
  std::string cur;
  for (std::size_t i = 0; i < path.size(); ++i) {
    const char c = path[i];
    if (c == '.') {
      if (!cur.empty()) parts.push_back(cur);
      cur.clear();
    } else if (c == '[') {
      if (!cur.empty()) parts.push_back(cur);
      cur.clear();
      while (i < path.size() && path[i] != ']') ++i;
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) parts.push_back(cur);

  std::size_t pos = 0;
  for (const auto& part : parts) {
    const std::regex key_re("\"" + std::regex_replace(part, std::regex(R"([.^$|()\[\]{}*+?\\])"),
                                                      R"(\$&)") +
                            "\"\\s*:");
    std::smatch m;
    std::string::const_iterator start = text.begin() + static_cast<std::ptrdiff_t>(pos);
    if (!std::regex_search(start, text.end(), m, key_re)) break;
    pos = static_cast<std::size_t>(m.position(0)) + pos;
    if (&part != &parts.back()) pos += m.length(0);
  }
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < pos && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir,
                           const std::string& source_name) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(source_name + ": malformed JSON: " + e.what());
  }
  RunConfig rc;
  try {
    StrictObject o(root, "");
    o.read("seed", rc.seed);
    if (o.has("manifest")) rc.manifest = resolve(base_dir, o.raw("manifest").get<std::string>());
    if (o.has("spectrograms")) {
      rc.spectrograms = resolve(base_dir, o.raw("spectrograms").get<std::string>());
    }
    if (o.has("output_dir")) rc.output_dir = resolve(base_dir, o.raw("output_dir").get<std::string>());
    if (o.has("stft")) rc.stft = stft_config_from_json(o.raw("stft"), "stft");
    rc.model = ModelConfig::simple_preset(rc.stft.K());
    if (o.has("model")) {
      const Json& m = o.raw("model");
      rc.model_input_K_set = m.is_object() && m.contains("input_K");
      rc.model = model_config_from_json(m, "model", rc.model);
    }
    if (!rc.model_input_K_set) rc.model.input_K = rc.stft.K();
    if (o.has("train")) rc.train = train_config_from_json(o.raw("train"), "train");
    if (o.has("cv")) {
      StrictObject cv(o.raw("cv"), "cv");
      cv.read("valid_fraction", rc.cv.valid_fraction);
      cv.read("benchmark_epochs", rc.cv.benchmark_epochs);
      cv.read("threads", rc.cv.threads);
      cv.finish();
    }
    if (o.has("labels")) {
      StrictObject lr(o.raw("labels"), "labels");
      lr.read("agreement", rc.labels.agreement);
      lr.read("positive_score_min", rc.labels.positive_score_min);
      lr.finish();
    }
    if (o.has("experiment")) {
      StrictObject ex(o.raw("experiment"), "experiment");
      ex.read("sizes", rc.experiment_sizes);
      ex.read("presets", rc.experiment_presets);
      ex.finish();
    }
    o.finish();
  } catch (const UnknownKeyError& e) {
    const auto [line, col] = locate_key(text, e.path());
    throw ConfigError(source_name + ":" + std::to_string(line) + ":" + std::to_string(col) +
                      ": unknown config key '" + e.path() + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(source_name + ": " + e.what());
  }
  rc.finalize();
  return rc;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return parse_run_config(std::string(bytes.begin(), bytes.end()),
                          path.has_parent_path() ? path.parent_path() : std::filesystem::path(),
                          path.string());
}

}  // namespace specmer
