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

#include <algorithm>
#include <vector>

#include "specmer/model.hpp"
#include "specmer/rng.hpp"

namespace specmer::testing {

// A random model on 8x8 input with one or two sigmoid conv stages, an
// optional sigmoid hidden layer, and 2..4 tags, plus a random input and a
// multi-hot target with at least one positive.
struct GradCase {
  Model model;
  Tensor input;
  std::vector<double> targets;
};

inline GradCase random_grad_case(std::uint64_t seed, Activation act = Activation::sigmoid) {
  Rng rng(seed);
  ModelConfig mc;
  mc.input_K = 8;
  mc.num_tags = 2 + static_cast<int>(rng.below(3));
  const int convs = 1 + static_cast<int>(rng.below(2));
  if (convs == 1) {
    mc.conv_layers = {{1 + static_cast<int>(rng.below(3)), 2 + static_cast<int>(rng.below(2)), act}};
  } else {
    mc.conv_layers = {{1 + static_cast<int>(rng.below(3)), 2, act},
                      {1 + static_cast<int>(rng.below(3)), 2, act}};
  }
  if (rng.bernoulli(0.5)) mc.hidden_sizes = {2 + static_cast<int>(rng.below(5))};
  mc.hidden_activation = act;
  GradCase c{init_model(mc, rng.next_u64()), Tensor({1, 8, 8}), {}};
  // Nonzero biases so every block sees a generic point.
  for (auto& l : c.model.params.conv)
    for (double& b : l.bias) b = rng.uniform(-0.5, 0.5);
  for (auto& l : c.model.params.dense)
    for (double& b : l.bias) b = rng.uniform(-0.5, 0.5);
  for (double& v : c.input.data) v = rng.normal();
  c.targets.assign(static_cast<std::size_t>(mc.num_tags), 0.0);
  for (double& t : c.targets) t = rng.bernoulli(0.5) ? 1.0 : 0.0;
  c.targets[rng.below(c.targets.size())] = 1.0;
  return c;
}

// Smallest gap between the largest and second-largest entry of any 2x2
// pooling window. Below ~1e-3 a finite-difference step can flip the argmax,
// which is a kink of the loss rather than a backprop error.
inline double min_pool_gap(const GradCase& c) {
  const auto fr = forward(c.model, c.input);
  double gap = INFINITY;
  for (const Tensor& t : fr.cache.conv_out) {
    for (std::size_t ch = 0; ch < t.dim(0); ++ch)
      for (std::size_t y = 0; y + 1 < t.dim(1); y += 2)
        for (std::size_t x = 0; x + 1 < t.dim(2); x += 2) {
          double v[4] = {t.at(ch, y, x), t.at(ch, y, x + 1), t.at(ch, y + 1, x),
                         t.at(ch, y + 1, x + 1)};
          std::sort(v, v + 4);
          gap = std::min(gap, v[3] - v[2]);
        }
  }
  return gap;
}

constexpr double kPoolKinkMargin = 1e-3;

}  // namespace specmer::testing
