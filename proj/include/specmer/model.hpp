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

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "specmer/layers.hpp"
#include "specmer/loss.hpp"
#include "specmer/rng.hpp"
#include "specmer/spectrogram.hpp"
#include "specmer/tensor.hpp"

namespace specmer {

struct ConvSpec {
  int filters = 8;
  int kernel = 5;  // square kernel side
  Activation activation = Activation::relu;

  bool operator==(const ConvSpec&) const = default;
};

// Network topology: conv + 2x2 max-pool stages, flatten, hidden dense layers
// (each followed by dropout), and a dense output layer of num_tags logits.
struct ModelConfig {
  int input_K = 129;
  std::vector<ConvSpec> conv_layers;
  std::vector<int> hidden_sizes;
  Activation hidden_activation = Activation::relu;
  int num_tags = 18;
  double dropout_p = 0.0;
  HeadKind head = HeadKind::sigmoid_per_tag;

  bool operator==(const ModelConfig&) const = default;

  // Throws ConfigError unless every stage leaves at least a 1x1 map and
  // num_tags >= 2.
  void validate() const;

  // [maps, side, side] after each conv+pool stage, in order.
  std::vector<std::array<std::size_t, 3>> stage_shapes() const;
  std::size_t flat_features() const;

  // Four conv layers of 20/30/40/50 5x5 filters and one hidden layer of 500.
  static ModelConfig simple_preset(int input_K, int num_tags = 18);
  // Four conv layers of 100/150/200/200 5x5 filters and three hidden layers
  // of 200/150/100.
  static ModelConfig complex_preset(int input_K, int num_tags = 18);
};

struct ModelParams {
  std::vector<ConvLayerParams> conv;
  std::vector<DenseLayerParams> dense;  // hidden layers, then the output layer
  std::uint64_t rng_seed = 0;
};

struct Model {
  ModelConfig config;
  ModelParams params;
};

// Glorot-uniform weights, U(-a, a) with a = sqrt(6 / (fan_in + fan_out)),
// zero biases.
Model init_model(const ModelConfig& config, std::uint64_t seed);

// Same layout as `params`, all zeros.
ModelParams zeros_like(const ModelParams& params);

// Every learnable array in a fixed order: per conv layer (weights, bias),
// then per dense layer (weights, bias).
std::vector<std::span<double>> parameter_blocks(ModelParams& params);
std::vector<std::span<const double>> parameter_blocks(const ModelParams& params);
std::vector<std::string> parameter_block_names(const ModelParams& params);
std::size_t parameter_count(const ModelParams& params);

// [1, K, K] network input from a spectrogram.
Tensor spectrogram_input(const Spectrogram& spec);

struct ForwardCache {
  Tensor input;
  std::vector<Tensor> conv_out;                       // post-activation
  std::vector<MaxPoolResult> pool;
  std::vector<Tensor> dense_in;                       // input of each dense layer
  std::vector<Tensor> dense_out;                      // post-activation
  std::vector<std::vector<double>> dropout_mask;      // one per hidden layer
};

struct ForwardResult {
  std::vector<double> logits;
  std::vector<double> scores;
  ForwardCache cache;
};

// Inference unless `training` is set, in which case `rng` drives dropout.
ForwardResult forward(const Model& model, const Tensor& input, bool training = false,
                      Rng* rng = nullptr);

// Reverse-mode gradients of every parameter given dLoss/dLogits.
ModelParams backward(const Model& model, const ForwardCache& cache,
                     std::span<const double> grad_logits);
// As backward(), adding into `grads`.
void backward_accumulate(const Model& model, const ForwardCache& cache,
                         std::span<const double> grad_logits, ModelParams& grads);

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_block;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
};

// Compares every backprop gradient with central differences of step `eps`.
// Relative error: |g_bp - g_fd| / max(1e-8, |g_bp| + |g_fd|).
GradCheckReport grad_check(const Model& model, const Tensor& input,
                           std::span<const double> targets, LossKind loss,
                           double eps = 1e-4);

// SMM1 checkpoints: "SMM1", u32 version, u32-length-prefixed JSON config,
// u64 rng seed, u32 tensor count, then per tensor u32 rank, u32 dims and
// little-endian f64 data.
std::vector<std::uint8_t> encode_checkpoint(const Model& model);
Model decode_checkpoint(const std::vector<std::uint8_t>& bytes);
void save_checkpoint(const std::filesystem::path& path, const Model& model);
Model load_checkpoint(const std::filesystem::path& path);

}  // namespace specmer
