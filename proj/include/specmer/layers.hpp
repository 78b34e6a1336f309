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
#include <span>
#include <string>
#include <vector>

#include "specmer/rng.hpp"
#include "specmer/tensor.hpp"

namespace specmer {

enum class Activation { linear, sigmoid, relu };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

double sigmoid(double z);
void activate_inplace(std::span<double> values, Activation a);
// Multiplies `grad` by the activation derivative, expressed through the
// activation output (sigmoid: y (1 - y); relu: y > 0).
void activation_backward_inplace(std::span<double> grad, std::span<const double> output,
                                 Activation a);

struct ConvLayerParams {
  Tensor weights;             // [filters, in_maps, kernel_h, kernel_w]
  std::vector<double> bias;   // one per filter
  Activation activation = Activation::relu;

  std::size_t filters() const { return weights.dim(0); }
  std::size_t in_maps() const { return weights.dim(1); }
  std::size_t kernel_h() const { return weights.dim(2); }
  std::size_t kernel_w() const { return weights.dim(3); }
};

struct DenseLayerParams {
  Tensor weights;             // [out, in]
  std::vector<double> bias;   // [out]
  Activation activation = Activation::linear;

  std::size_t out_dim() const { return weights.dim(0); }
  std::size_t in_dim() const { return weights.dim(1); }
};

// Valid cross-correlation, stride 1, summed over input maps, then bias and
// activation. input [in_maps, H, W] -> [filters, H - kh + 1, W - kw + 1].
Tensor conv_forward(const Tensor& input, const ConvLayerParams& layer);

// Accumulates weight and bias gradients into `grads` (same shapes as
// `layer`). Writes the input gradient when `grad_input` is non-null.
void conv_backward(const Tensor& input, const ConvLayerParams& layer,
                   const Tensor& output, const Tensor& grad_output,
                   ConvLayerParams& grads, Tensor* grad_input);

struct MaxPoolResult {
  Tensor output;
  // Flat input index of each window's maximum, one per output element.
  std::vector<std::uint32_t> argmax;
};

// Disjoint 2x2 windows, stride 2; an odd trailing row or column is dropped.
MaxPoolResult maxpool_forward(const Tensor& input);
Tensor maxpool_backward(const Tensor& grad_output,
                        std::span<const std::uint32_t> argmax,
                        const std::vector<std::size_t>& input_shape);

// Affine map then activation on a flat input of any shape.
Tensor dense_forward(const Tensor& input, const DenseLayerParams& layer);
void dense_backward(const Tensor& input, const DenseLayerParams& layer,
                    const Tensor& output, const Tensor& grad_output,
                    DenseLayerParams& grads, Tensor* grad_input);

enum class HeadKind { softmax_threshold, sigmoid_per_tag };

std::string to_string(HeadKind h);
HeadKind head_from_string(const std::string& name);

std::vector<double> softmax(std::span<const double> logits);
std::vector<double> head_forward(std::span<const double> logits, HeadKind head);

// Inverted dropout. In training each unit is zeroed with probability p and
// survivors are scaled by 1 / (1 - p); at inference it is the identity. When
// `mask` is given it receives the per-unit multiplier for the backward pass.
Tensor dropout_apply(const Tensor& input, double p, Rng& rng, bool training,
                     std::vector<double>* mask = nullptr);

}  // namespace specmer
