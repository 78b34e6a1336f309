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

#include "specmer/model.hpp"

#include <algorithm>
#include <cmath>

#include "specmer/errors.hpp"

namespace specmer {

void ModelConfig::validate() const {
  if (input_K < 1) throw ConfigError("input_K must be positive");
  if (num_tags < 2) throw ConfigError("num_tags must be at least 2");
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  std::size_t side = static_cast<std::size_t>(input_K);
  for (std::size_t i = 0; i < conv_layers.size(); ++i) {
    const ConvSpec& c = conv_layers[i];
    if (c.filters < 1 || c.kernel < 1) {
      throw ConfigError("conv layer " + std::to_string(i) + ": filters and kernel must be positive");
    }
    const auto k = static_cast<std::size_t>(c.kernel);
    if (side < k || (side - k + 1) < 2) {
      throw ConfigError("conv layer " + std::to_string(i) + ": input side " +
                        std::to_string(side) + " leaves no room for a " +
                        std::to_string(k) + "x" + std::to_string(k) +
                        " kernel followed by 2x2 pooling");
    }
    side = (side - k + 1) / 2;
  }
  for (int h : hidden_sizes) {
    if (h < 1) throw ConfigError("hidden layer sizes must be positive");
  }
}

std::vector<std::array<std::size_t, 3>> ModelConfig::stage_shapes() const {
  validate();
  std::vector<std::array<std::size_t, 3>> shapes;
  std::size_t side = static_cast<std::size_t>(input_K);
  for (const ConvSpec& c : conv_layers) {
    side = (side - static_cast<std::size_t>(c.kernel) + 1) / 2;
    shapes.push_back({static_cast<std::size_t>(c.filters), side, side});
  }
  return shapes;
}

std::size_t ModelConfig::flat_features() const {
  const auto shapes = stage_shapes();
  if (shapes.empty()) return static_cast<std::size_t>(input_K) * input_K;
  const auto& s = shapes.back();
  return s[0] * s[1] * s[2];
}

ModelConfig ModelConfig::simple_preset(int input_K, int num_tags) {
  ModelConfig c;
  c.input_K = input_K;
  c.conv_layers = {{20, 5}, {30, 5}, {40, 5}, {50, 5}};
  c.hidden_sizes = {500};
  c.num_tags = num_tags;
  c.dropout_p = 0.5;
  return c;
}

ModelConfig ModelConfig::complex_preset(int input_K, int num_tags) {
  ModelConfig c;
  c.input_K = input_K;
  c.conv_layers = {{100, 5}, {150, 5}, {200, 5}, {200, 5}};
  c.hidden_sizes = {200, 150, 100};
  c.num_tags = num_tags;
  c.dropout_p = 0.5;
  return c;
}

namespace {

void glorot_fill(std::vector<double>& w, double fan_in, double fan_out, Rng& rng) {
  const double a = std::sqrt(6.0 / (fan_in + fan_out));
  for (double& v : w) v = rng.uniform(-a, a);
}

}  // namespace

Model init_model(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  Model m{config, {}};
  m.params.rng_seed = seed;
  Rng rng(seed);
  std::size_t maps = 1;
  for (const ConvSpec& c : config.conv_layers) {
    const auto F = static_cast<std::size_t>(c.filters);
    const auto k = static_cast<std::size_t>(c.kernel);
    ConvLayerParams layer{Tensor({F, maps, k, k}), std::vector<double>(F, 0.0), c.activation};
    glorot_fill(layer.weights.data, double(maps * k * k), double(F * k * k), rng);
    m.params.conv.push_back(std::move(layer));
    maps = F;
  }
  std::size_t in = config.flat_features();
  auto add_dense = [&](std::size_t out, Activation act) {
    DenseLayerParams layer{Tensor({out, in}), std::vector<double>(out, 0.0), act};
    glorot_fill(layer.weights.data, double(in), double(out), rng);
    m.params.dense.push_back(std::move(layer));
    in = out;
  };
  for (int h : config.hidden_sizes) add_dense(static_cast<std::size_t>(h), config.hidden_activation);
  add_dense(static_cast<std::size_t>(config.num_tags), Activation::linear);
  return m;
}

ModelParams zeros_like(const ModelParams& params) {
  ModelParams z = params;
  for (auto block : parameter_blocks(z)) std::fill(block.begin(), block.end(), 0.0);
  return z;
}

std::vector<std::span<double>> parameter_blocks(ModelParams& params) {
  std::vector<std::span<double>> blocks;
  for (auto& c : params.conv) {
    blocks.emplace_back(c.weights.data);
    blocks.emplace_back(c.bias);
  }
  for (auto& d : params.dense) {
    blocks.emplace_back(d.weights.data);
    blocks.emplace_back(d.bias);
  }
  return blocks;
}

std::vector<std::span<const double>> parameter_blocks(const ModelParams& params) {
  std::vector<std::span<const double>> blocks;
  for (const auto& c : params.conv) {
    blocks.emplace_back(c.weights.data);
    blocks.emplace_back(c.bias);
  }
  for (const auto& d : params.dense) {
    blocks.emplace_back(d.weights.data);
    blocks.emplace_back(d.bias);
  }
  return blocks;
}

std::vector<std::string> parameter_block_names(const ModelParams& params) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < params.conv.size(); ++i) {
    names.push_back("conv" + std::to_string(i) + ".weights");
    names.push_back("conv" + std::to_string(i) + ".bias");
  }
  for (std::size_t i = 0; i < params.dense.size(); ++i) {
    names.push_back("dense" + std::to_string(i) + ".weights");
    names.push_back("dense" + std::to_string(i) + ".bias");
  }
  return names;
}

std::size_t parameter_count(const ModelParams& params) {
  std::size_t n = 0;
  for (auto block : parameter_blocks(params)) n += block.size();
  return n;
}

Tensor spectrogram_input(const Spectrogram& spec) {
  const auto K = static_cast<std::size_t>(spec.K());
  return Tensor({1, K, K}, spec.values);
}

ForwardResult forward(const Model& model, const Tensor& input, bool training, Rng* rng) {
  const auto K = static_cast<std::size_t>(model.config.input_K);
  if (input.shape != std::vector<std::size_t>{1, K, K}) {
    throw ShapeError("model expects input [1, " + std::to_string(K) + ", " +
                     std::to_string(K) + "], got " + input.shape_string());
  }
  if (training && model.config.dropout_p > 0 && rng == nullptr) {
    throw StateError("training forward with dropout needs an rng");
  }
  ForwardResult r;
  ForwardCache& c = r.cache;
  c.input = input;

  const Tensor* x = &c.input;
  for (const ConvLayerParams& layer : model.params.conv) {
    c.conv_out.push_back(conv_forward(*x, layer));
    c.pool.push_back(maxpool_forward(c.conv_out.back()));
    x = &c.pool.back().output;
  }

  Tensor flat({x->size()}, x->data);
  const std::size_t hidden = model.params.dense.size() - 1;
  for (std::size_t j = 0; j < model.params.dense.size(); ++j) {
    c.dense_in.push_back(std::move(flat));
    c.dense_out.push_back(dense_forward(c.dense_in.back(), model.params.dense[j]));
    if (j < hidden) {
      std::vector<double> mask;
      Rng unused(0);
      flat = dropout_apply(c.dense_out.back(), model.config.dropout_p, rng ? *rng : unused,
                           training, &mask);
      c.dropout_mask.push_back(std::move(mask));
    }
  }
  r.logits = c.dense_out.back().data;
  for (double z : r.logits) {
    if (!std::isfinite(z)) throw DivergenceError("non-finite logit in forward pass");
  }
  r.scores = head_forward(r.logits, model.config.head);
  return r;
}

void backward_accumulate(const Model& model, const ForwardCache& cache,
                         std::span<const double> grad_logits, ModelParams& grads) {
  const auto& P = model.params;
  if (cache.conv_out.size() != P.conv.size() || cache.pool.size() != P.conv.size() ||
      cache.dense_in.size() != P.dense.size() || cache.dense_out.size() != P.dense.size() ||
      cache.dropout_mask.size() + 1 != P.dense.size()) {
    throw StateError("forward cache does not match the model's layer structure");
  }
  if (grads.conv.size() != P.conv.size() || grads.dense.size() != P.dense.size()) {
    throw StateError("gradient buffer does not match the model's layer structure");
  }
  if (grad_logits.size() != P.dense.back().out_dim()) {
    throw ShapeError("expected " + std::to_string(P.dense.back().out_dim()) +
                     " logit gradients, got " + std::to_string(grad_logits.size()));
  }

  Tensor g({grad_logits.size()}, std::vector<double>(grad_logits.begin(), grad_logits.end()));
  for (std::size_t j = P.dense.size(); j-- > 0;) {
    if (j + 1 < P.dense.size()) {
      const auto& mask = cache.dropout_mask[j];
      if (mask.size() != g.size()) throw StateError("dropout mask size mismatch");
      for (std::size_t i = 0; i < g.size(); ++i) g.data[i] *= mask[i];
    }
    Tensor gi;
    dense_backward(cache.dense_in[j], P.dense[j], cache.dense_out[j], g, grads.dense[j],
                   (j > 0 || !P.conv.empty()) ? &gi : nullptr);
    g = std::move(gi);
  }
  if (P.conv.empty()) return;

  g.shape = cache.pool.back().output.shape;
  for (std::size_t i = P.conv.size(); i-- > 0;) {
    const Tensor& conv_out = cache.conv_out[i];
    Tensor g_conv = maxpool_backward(g, cache.pool[i].argmax, conv_out.shape);
    const Tensor& in = i == 0 ? cache.input : cache.pool[i - 1].output;
    Tensor gi;
    conv_backward(in, P.conv[i], conv_out, g_conv, grads.conv[i], i > 0 ? &gi : nullptr);
    g = std::move(gi);
  }
}

ModelParams backward(const Model& model, const ForwardCache& cache,
                     std::span<const double> grad_logits) {
  ModelParams grads = zeros_like(model.params);
  backward_accumulate(model, cache, grad_logits, grads);
  return grads;
}

GradCheckReport grad_check(const Model& model, const Tensor& input,
                           std::span<const double> targets, LossKind loss, double eps) {
  const ForwardResult fr = forward(model, input);
  const LossValue lv = loss_and_grad(loss, fr.logits, targets);
  const ModelParams analytic = backward(model, fr.cache, lv.grad_logits);

  Model probe = model;
  auto eval = [&]() { return loss_and_grad(loss, forward(probe, input).logits, targets).loss; };

  GradCheckReport report;
  const auto names = parameter_block_names(model.params);
  auto blocks = parameter_blocks(probe.params);
  const auto grad_blocks = parameter_blocks(analytic);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    for (std::size_t i = 0; i < blocks[b].size(); ++i) {
      const double saved = blocks[b][i];
      blocks[b][i] = saved + eps;
      const double up = eval();
      blocks[b][i] = saved - eps;
      const double down = eval();
      blocks[b][i] = saved;
      const double fd = (up - down) / (2.0 * eps);
      const double bp = grad_blocks[b][i];
      const double rel = std::abs(bp - fd) / std::max(1e-8, std::abs(bp) + std::abs(fd));
      ++report.checked;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_block = names[b];
        report.worst_index = i;
      }
    }
  }
  return report;
}

}  // namespace specmer
