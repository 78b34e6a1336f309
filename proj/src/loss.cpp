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

#include "specmer/loss.hpp"

#include <algorithm>
#include <cmath>

#include "specmer/errors.hpp"

namespace specmer {

std::string to_string(LossKind k) {
  switch (k) {
    case LossKind::per_tag_cross_entropy: return "per_tag_cross_entropy";
    case LossKind::softmax_cross_entropy_multi_hot: return "softmax_cross_entropy_multi_hot";
    case LossKind::squared_error: return "squared_error";
  }
  return "?";
}

LossKind loss_from_string(const std::string& name) {
  if (name == "per_tag_cross_entropy") return LossKind::per_tag_cross_entropy;
  if (name == "softmax_cross_entropy_multi_hot") return LossKind::softmax_cross_entropy_multi_hot;
  if (name == "squared_error") return LossKind::squared_error;
  throw ConfigError("unknown loss '" + name + "'");
}

LossKind default_loss(HeadKind head) {
  return head == HeadKind::softmax_threshold ? LossKind::softmax_cross_entropy_multi_hot
                                             : LossKind::per_tag_cross_entropy;
}

LossValue loss_and_grad(LossKind kind, std::span<const double> logits,
                        std::span<const double> targets) {
  if (logits.size() != targets.size()) {
    throw ShapeError("loss: " + std::to_string(logits.size()) + " logits vs " +
                     std::to_string(targets.size()) + " targets");
  }
  const std::size_t n = logits.size();
  LossValue r;
  r.grad_logits.resize(n);
  switch (kind) {
    case LossKind::per_tag_cross_entropy:
      for (std::size_t j = 0; j < n; ++j) {
        const double z = logits[j], y = targets[j];
        // log(1 + e^z) - z y, written to avoid overflow.
        r.loss += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
        r.grad_logits[j] = sigmoid(z) - y;
      }
      break;
    case LossKind::softmax_cross_entropy_multi_hot: {
      double positives = 0.0;
      for (double y : targets) positives += y;
      if (!(positives > 0)) throw StateError("softmax loss needs at least one positive tag");
      const double mx = *std::max_element(logits.begin(), logits.end());
      double sum = 0.0;
      for (double z : logits) sum += std::exp(z - mx);
      const double log_norm = mx + std::log(sum);
      for (std::size_t j = 0; j < n; ++j) {
        const double t = targets[j] / positives;
        const double p = std::exp(logits[j] - log_norm);
        r.loss -= t * (logits[j] - log_norm);
        r.grad_logits[j] = p - t;
      }
      break;
    }
    case LossKind::squared_error:
      for (std::size_t j = 0; j < n; ++j) {
        const double d = logits[j] - targets[j];
        r.loss += 0.5 * d * d;
        r.grad_logits[j] = d;
      }
      break;
  }
  return r;
}

}  // namespace specmer
