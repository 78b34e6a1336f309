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

#include "specmer/layers.hpp"

namespace specmer {

enum class LossKind {
  // Binary cross-entropy per tag on sigmoid scores, summed over tags.
  per_tag_cross_entropy,
  // Cross-entropy of the softmax against the multi-hot target normalized to
  // sum 1.
  softmax_cross_entropy_multi_hot,
  // 0.5 * sum (logit - target)^2 directly on the logits.
  squared_error,
};

std::string to_string(LossKind k);
LossKind loss_from_string(const std::string& name);

// The loss that pairs with a head when none is configured.
LossKind default_loss(HeadKind head);

struct LossValue {
  double loss = 0.0;
  std::vector<double> grad_logits;
};

// `targets` are 0/1 tag indicators (or real targets for squared_error).
LossValue loss_and_grad(LossKind kind, std::span<const double> logits,
                        std::span<const double> targets);

}  // namespace specmer
