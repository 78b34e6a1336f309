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

#include "specmer/binary_io.hpp"
#include "specmer/errors.hpp"
#include "specmer/json_io.hpp"
#include "specmer/model.hpp"

namespace specmer {
namespace {

constexpr std::uint32_t kCheckpointVersion = 1;

void put_tensor(std::vector<std::uint8_t>& out, std::span<const std::size_t> shape,
                std::span<const double> data) {
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(shape.size()));
  for (std::size_t d : shape) put_le<std::uint32_t>(out, static_cast<std::uint32_t>(d));
  for (double v : data) put_le<double>(out, v);
}

void get_tensor(ByteReader& r, const std::string& name, std::span<const std::size_t> shape,
                std::span<double> data) {
  const auto rank = r.get_le<std::uint32_t>();
  if (rank != shape.size()) {
    throw FormatError("SMM1: tensor " + name + " has rank " + std::to_string(rank) +
                      ", config implies " + std::to_string(shape.size()));
  }
  for (std::size_t i = 0; i < rank; ++i) {
    const auto d = r.get_le<std::uint32_t>();
    if (d != shape[i]) throw FormatError("SMM1: tensor " + name + " shape mismatch");
  }
  for (double& v : data) v = r.get_le<double>();
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Model& model) {
  std::vector<std::uint8_t> out{'S', 'M', 'M', '1'};
  put_le<std::uint32_t>(out, kCheckpointVersion);
  const std::string config = to_json(model.config).dump();
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(config.size()));
  out.insert(out.end(), config.begin(), config.end());
  put_le<std::uint64_t>(out, model.params.rng_seed);

  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(2 * (model.params.conv.size() +
                                                             model.params.dense.size())));
  for (const auto& c : model.params.conv) {
    put_tensor(out, c.weights.shape, c.weights.data);
    const std::size_t n = c.bias.size();
    put_tensor(out, std::span(&n, 1), c.bias);
  }
  for (const auto& d : model.params.dense) {
    put_tensor(out, d.weights.shape, d.weights.data);
    const std::size_t n = d.bias.size();
    put_tensor(out, std::span(&n, 1), d.bias);
  }
  return out;
}

Model decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes.data(), bytes.size(), "SMM1");
  if (r.get_bytes(4) != "SMM1") throw FormatError("SMM1: bad magic");
  const auto version = r.get_le<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw FormatError("SMM1: unsupported version " + std::to_string(version));
  }
  const auto config_len = r.get_le<std::uint32_t>();
  ModelConfig config;
  try {
    config = model_config_from_json(Json::parse(r.get_bytes(config_len)), "model");
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("SMM1: bad config block: ") + e.what());
  }
  const auto seed = r.get_le<std::uint64_t>();

  // Shapes come from the config; the file's shapes must agree.
  Model model = init_model(config, seed);
  const auto count = r.get_le<std::uint32_t>();
  const auto names = parameter_block_names(model.params);
  if (count != names.size()) {
    throw FormatError("SMM1: " + std::to_string(count) + " tensors, config implies " +
                      std::to_string(names.size()));
  }
  std::size_t b = 0;
  for (auto& c : model.params.conv) {
    get_tensor(r, names[b++], c.weights.shape, c.weights.data);
    const std::size_t n = c.bias.size();
    get_tensor(r, names[b++], std::span(&n, 1), c.bias);
  }
  for (auto& d : model.params.dense) {
    get_tensor(r, names[b++], d.weights.shape, d.weights.data);
    const std::size_t n = d.bias.size();
    get_tensor(r, names[b++], std::span(&n, 1), d.bias);
  }
  if (!r.at_end()) throw FormatError("SMM1: trailing bytes");
  return model;
}

void save_checkpoint(const std::filesystem::path& path, const Model& model) {
  write_file_atomic(path, encode_checkpoint(model));
}

Model load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_file_bytes(path));
}

}  // namespace specmer
