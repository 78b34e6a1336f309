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

#include "specmer/cv_harness.hpp"
#include "specmer/dataset.hpp"
#include "specmer/model.hpp"
#include "specmer/spectrogram.hpp"
#include "specmer/trainer.hpp"

namespace specmer {

// Everything a CLI run needs. One JSON document; a top-level "seed" feeds
// every stage. Relative paths resolve against the config file's directory.
struct RunConfig {
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> manifest;
  std::optional<std::filesystem::path> spectrograms;  // preprocess output dir
  std::optional<std::filesystem::path> output_dir;
  StftConfig stft;
  ModelConfig model = ModelConfig::simple_preset(StftConfig{}.K());
  bool model_input_K_set = false;
  TrainConfig train;
  CvOptions cv;
  LabelRule labels;
  std::vector<int> experiment_sizes{129, 257, 513, 1025};
  std::vector<std::string> experiment_presets{"simple", "complex"};

  // Copies the run seed into the training config.
  void finalize();
};

// Parses a RunConfig; unknown keys fail with "<file>:<line>:<col>: unknown
// config key '<path>'".
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir,
                           const std::string& source_name = "<config>");
RunConfig load_run_config(const std::filesystem::path& path);

// Line and column (1-based) of the dotted key path inside JSON `text`, found
// by scanning for each quoted component in order.
std::pair<std::size_t, std::size_t> locate_key(const std::string& text, const std::string& path);

}  // namespace specmer
