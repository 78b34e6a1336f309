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

#include "specmer/json_io.hpp"

namespace specmer {

StrictObject::StrictObject(const Json& obj, std::string path)
    : obj_(obj), path_(std::move(path)) {
  if (!obj_.is_object()) {
    throw ConfigError("config section '" + (path_.empty() ? "<root>" : path_) +
                      "' must be a JSON object");
  }
}

bool StrictObject::has(const std::string& key) const { return obj_.contains(key); }

const Json& StrictObject::raw(const std::string& key) {
  used_.insert(key);
  return obj_.at(key);
}

std::string StrictObject::child(const std::string& key) const {
  return path_.empty() ? key : path_ + "." + key;
}

void StrictObject::finish() const {
  for (const auto& [key, value] : obj_.items()) {
    if (!used_.count(key)) throw UnknownKeyError(key, child(key));
  }
}

Json to_json(const StftConfig& c) {
  return Json{{"nfft", c.nfft}, {"window", to_string(c.window)}};
}

Json to_json(const ModelConfig& c) {
  Json conv = Json::array();
  for (const ConvSpec& s : c.conv_layers) {
    conv.push_back({{"filters", s.filters},
                    {"kernel", s.kernel},
                    {"activation", to_string(s.activation)}});
  }
  return Json{{"input_K", c.input_K},
              {"conv_layers", conv},
              {"hidden_sizes", c.hidden_sizes},
              {"hidden_activation", to_string(c.hidden_activation)},
              {"num_tags", c.num_tags},
              {"dropout", c.dropout_p},
              {"head", to_string(c.head)}};
}

Json to_json(const TrainConfig& c) {
  Json j{{"epochs", c.epochs},
         {"batch_size", c.batch_size},
         {"learning_rate", c.learning_rate},
         {"momentum", c.momentum}};
  if (c.threshold) j["threshold"] = *c.threshold;
  if (c.loss) j["loss"] = to_string(*c.loss);
  return j;
}

StftConfig stft_config_from_json(const Json& j, const std::string& path, StftConfig base) {
  StrictObject o(j, path);
  o.read("nfft", base.nfft);
  if (o.has("window")) base.window = window_from_string(o.raw("window").get<std::string>());
  o.finish();
  base.validate();
  return base;
}

ModelConfig model_config_from_json(const Json& j, const std::string& path, ModelConfig base) {
  StrictObject o(j, path);
  if (o.has("preset")) {
    const auto name = o.raw("preset").get<std::string>();
    int K = base.input_K, tags = base.num_tags;
    o.read("input_K", K);
    o.read("num_tags", tags);
    if (name == "simple") {
      base = ModelConfig::simple_preset(K, tags);
    } else if (name == "complex") {
      base = ModelConfig::complex_preset(K, tags);
    } else {
      throw ConfigError("config key '" + o.child("preset") +
                        "' must be 'simple' or 'complex', got '" + name + "'");
    }
  }
  o.read("input_K", base.input_K);
  o.read("num_tags", base.num_tags);
  if (o.has("conv_layers")) {
    const Json& arr = o.raw("conv_layers");
    if (!arr.is_array()) throw ConfigError("'" + o.child("conv_layers") + "' must be an array");
    base.conv_layers.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      StrictObject layer(arr[i], o.child("conv_layers") + "[" + std::to_string(i) + "]");
      ConvSpec s;
      layer.read("filters", s.filters);
      layer.read("kernel", s.kernel);
      if (layer.has("activation")) {
        s.activation = activation_from_string(layer.raw("activation").get<std::string>());
      }
      layer.finish();
      base.conv_layers.push_back(s);
    }
  }
  o.read("hidden_sizes", base.hidden_sizes);
  if (o.has("hidden_activation")) {
    base.hidden_activation = activation_from_string(o.raw("hidden_activation").get<std::string>());
  }
  o.read("dropout", base.dropout_p);
  if (o.has("head")) base.head = head_from_string(o.raw("head").get<std::string>());
  o.finish();
  base.validate();
  return base;
}

TrainConfig train_config_from_json(const Json& j, const std::string& path, TrainConfig base) {
  StrictObject o(j, path);
  o.read("epochs", base.epochs);
  o.read("batch_size", base.batch_size);
  o.read("learning_rate", base.learning_rate);
  o.read("momentum", base.momentum);
  if (o.has("threshold")) base.threshold = o.raw("threshold").get<double>();
  if (o.has("loss")) base.loss = loss_from_string(o.raw("loss").get<std::string>());
  o.finish();
  base.validate();
  return base;
}

}  // namespace specmer
