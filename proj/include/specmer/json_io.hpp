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

#include <set>
#include <string>

#include "json.hpp"
#include "specmer/errors.hpp"
#include "specmer/model.hpp"
#include "specmer/spectrogram.hpp"
#include "specmer/trainer.hpp"

namespace specmer {

using Json = nlohmann::json;

// Raised for keys a config object does not define. `key` is the bare key,
// `path` its dotted location (e.g. "model.conv_layers[1].kernal").
class UnknownKeyError : public ConfigError {
 public:
  UnknownKeyError(std::string key, std::string path)
      : ConfigError("unknown config key '" + path + "'"),
        key_(std::move(key)),
        path_(std::move(path)) {}
  const std::string& key() const { return key_; }
  const std::string& path() const { return path_; }

 private:
  std::string key_;
  std::string path_;
};

// Reads fields of one JSON object, remembering which keys were consumed so
// finish() can reject the rest.
class StrictObject {
 public:
  StrictObject(const Json& obj, std::string path);

  bool has(const std::string& key) const;
  const Json& raw(const std::string& key);

  template <typename T>
  void read(const std::string& key, T& out) {
    if (!has(key)) return;
    try {
      out = raw(key).template get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("config key '" + child(key) + "' has the wrong type");
    }
  }

  std::string child(const std::string& key) const;
  void finish() const;

 private:
  const Json& obj_;
  std::string path_;
  std::set<std::string> used_;
};

Json to_json(const StftConfig& c);
Json to_json(const ModelConfig& c);
Json to_json(const TrainConfig& c);

// Each overlays the fields present in `j` onto `base`; unknown keys throw
// UnknownKeyError.
StftConfig stft_config_from_json(const Json& j, const std::string& path, StftConfig base = {});
ModelConfig model_config_from_json(const Json& j, const std::string& path,
                                   ModelConfig base = {});
TrainConfig train_config_from_json(const Json& j, const std::string& path,
                                   TrainConfig base = {});

}  // namespace specmer
