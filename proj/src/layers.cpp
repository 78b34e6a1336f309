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

#include "specmer/layers.hpp"

#include <algorithm>
#include <cmath>

#include "specmer/errors.hpp"

namespace specmer {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::linear: return "linear";
    case Activation::sigmoid: return "sigmoid";
    case Activation::relu: return "relu";
  }
  return "?";
}

Activation activation_from_string(const std::string& name) {
  if (name == "linear") return Activation::linear;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "relu") return Activation::relu;
  throw ConfigError("unknown activation '" + name + "'");
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void activate_inplace(std::span<double> values, Activation a) {
  switch (a) {
    case Activation::linear:
      return;
    case Activation::sigmoid:
      for (double& v : values) v = sigmoid(v);
      return;
    case Activation::relu:
      for (double& v : values) v = v > 0 ? v : 0.0;
      return;
  }
}

void activation_backward_inplace(std::span<double> grad, std::span<const double> output,
                                 Activation a) {
  switch (a) {
    case Activation::linear:
      return;
    case Activation::sigmoid:
      for (std::size_t i = 0; i < grad.size(); ++i) {
        grad[i] *= output[i] * (1.0 - output[i]);
      }
      return;
    case Activation::relu:
      for (std::size_t i = 0; i < grad.size(); ++i) {
        if (!(output[i] > 0)) grad[i] = 0.0;
      }
      return;
  }
}

Tensor conv_forward(const Tensor& input, const ConvLayerParams& layer) {
  if (input.rank() != 3 || layer.weights.rank() != 4) {
    throw ShapeError("conv expects a [maps, H, W] input and 4-D weights, got " +
                     input.shape_string() + " and " + layer.weights.shape_string());
  }
  const std::size_t maps = input.dim(0), H = input.dim(1), W = input.dim(2);
  const std::size_t F = layer.filters(), kh = layer.kernel_h(), kw = layer.kernel_w();
  if (layer.in_maps() != maps) {
    throw ShapeError("conv weights expect " + std::to_string(layer.in_maps()) +
                     " input maps, got " + std::to_string(maps));
  }
  if (H < kh || W < kw) {
    throw ShapeError("conv kernel " + std::to_string(kh) + "x" + std::to_string(kw) +
                     " larger than input " + std::to_string(H) + "x" + std::to_string(W));
  }
  if (layer.bias.size() != F) throw ShapeError("conv bias size mismatch");

  const std::size_t Ho = H - kh + 1, Wo = W - kw + 1;
  Tensor out({F, Ho, Wo});
  const double* in = input.data.data();
  const double* w = layer.weights.data.data();
  for (std::size_t k = 0; k < F; ++k) {
    double* plane = out.data.data() + k * Ho * Wo;
    std::fill(plane, plane + Ho * Wo, layer.bias[k]);
    for (std::size_t m = 0; m < maps; ++m) {
      const double* in_plane = in + m * H * W;
      const double* wk = w + (k * maps + m) * kh * kw;
      for (std::size_t dy = 0; dy < kh; ++dy) {
        for (std::size_t dx = 0; dx < kw; ++dx) {
          const double wv = wk[dy * kw + dx];
          for (std::size_t y = 0; y < Ho; ++y) {
            const double* src = in_plane + (y + dy) * W + dx;
            double* dst = plane + y * Wo;
            for (std::size_t x = 0; x < Wo; ++x) dst[x] += wv * src[x];
          }
        }
      }
    }
  }
  activate_inplace(out.span(), layer.activation);
  return out;
}

void conv_backward(const Tensor& input, const ConvLayerParams& layer,
                   const Tensor& output, const Tensor& grad_output,
                   ConvLayerParams& grads, Tensor* grad_input) {
  const std::size_t maps = input.dim(0), H = input.dim(1), W = input.dim(2);
  const std::size_t F = layer.filters(), kh = layer.kernel_h(), kw = layer.kernel_w();
  const std::size_t Ho = output.dim(1), Wo = output.dim(2);
  if (grad_output.shape != output.shape || grads.weights.shape != layer.weights.shape) {
    throw ShapeError("conv backward: gradient shapes do not match the layer");
  }

  std::vector<double> pre(grad_output.data);
  activation_backward_inplace(pre, output.span(), layer.activation);

  if (grad_input) *grad_input = Tensor(input.shape);
  const double* in = input.data.data();
  for (std::size_t k = 0; k < F; ++k) {
    const double* g = pre.data() + k * Ho * Wo;
    double bsum = 0.0;
    for (std::size_t i = 0; i < Ho * Wo; ++i) bsum += g[i];
    grads.bias[k] += bsum;
    for (std::size_t m = 0; m < maps; ++m) {
      const double* in_plane = in + m * H * W;
      const std::size_t woff = (k * maps + m) * kh * kw;
      for (std::size_t dy = 0; dy < kh; ++dy) {
        for (std::size_t dx = 0; dx < kw; ++dx) {
          double acc = 0.0;
          for (std::size_t y = 0; y < Ho; ++y) {
            const double* src = in_plane + (y + dy) * W + dx;
            const double* gr = g + y * Wo;
            for (std::size_t x = 0; x < Wo; ++x) acc += gr[x] * src[x];
          }
          grads.weights.data[woff + dy * kw + dx] += acc;
          if (grad_input) {
            const double wv = layer.weights.data[woff + dy * kw + dx];
            double* gi_plane = grad_input->data.data() + m * H * W;
            for (std::size_t y = 0; y < Ho; ++y) {
              double* dst = gi_plane + (y + dy) * W + dx;
              const double* gr = g + y * Wo;
              for (std::size_t x = 0; x < Wo; ++x) dst[x] += wv * gr[x];
            }
          }
        }
      }
    }
  }
}

MaxPoolResult maxpool_forward(const Tensor& input) {
  if (input.rank() != 3) throw ShapeError("max-pool expects [maps, H, W]");
  const std::size_t C = input.dim(0), H = input.dim(1), W = input.dim(2);
  if (H < 2 || W < 2) {
    throw ShapeError("max-pool input " + input.shape_string() + " smaller than 2x2");
  }
  const std::size_t Ho = H / 2, Wo = W / 2;
  MaxPoolResult r{Tensor({C, Ho, Wo}), std::vector<std::uint32_t>(C * Ho * Wo)};
  std::size_t o = 0;
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t y = 0; y < Ho; ++y) {
      for (std::size_t x = 0; x < Wo; ++x, ++o) {
        std::size_t best = (c * H + 2 * y) * W + 2 * x;
        for (std::size_t dy = 0; dy < 2; ++dy) {
          for (std::size_t dx = 0; dx < 2; ++dx) {
            const std::size_t idx = (c * H + 2 * y + dy) * W + 2 * x + dx;
            if (input.data[idx] > input.data[best]) best = idx;
          }
        }
        r.output.data[o] = input.data[best];
        r.argmax[o] = static_cast<std::uint32_t>(best);
      }
    }
  }
  return r;
}

Tensor maxpool_backward(const Tensor& grad_output, std::span<const std::uint32_t> argmax,
                        const std::vector<std::size_t>& input_shape) {
  if (argmax.size() != grad_output.size()) {
    throw StateError("max-pool backward: argmax does not match gradient size");
  }
  Tensor grad_input(input_shape);
  for (std::size_t i = 0; i < argmax.size(); ++i) {
    grad_input.data[argmax[i]] += grad_output.data[i];
  }
  return grad_input;
}

Tensor dense_forward(const Tensor& input, const DenseLayerParams& layer) {
  const std::size_t in = layer.in_dim(), out = layer.out_dim();
  if (input.size() != in) {
    throw ShapeError("dense layer expects " + std::to_string(in) + " inputs, got " +
                     std::to_string(input.size()));
  }
  if (layer.bias.size() != out) throw ShapeError("dense bias size mismatch");
  Tensor y({out});
  const double* x = input.data.data();
  for (std::size_t o = 0; o < out; ++o) {
    const double* row = layer.weights.data.data() + o * in;
    double acc = 0.0;
    for (std::size_t i = 0; i < in; ++i) acc += row[i] * x[i];
    y.data[o] = acc + layer.bias[o];
  }
  activate_inplace(y.span(), layer.activation);
  return y;
}

void dense_backward(const Tensor& input, const DenseLayerParams& layer,
                    const Tensor& output, const Tensor& grad_output,
                    DenseLayerParams& grads, Tensor* grad_input) {
  const std::size_t in = layer.in_dim(), out = layer.out_dim();
  if (grad_output.size() != out || input.size() != in) {
    throw ShapeError("dense backward: gradient shapes do not match the layer");
  }
  std::vector<double> pre(grad_output.data);
  activation_backward_inplace(pre, output.span(), layer.activation);
  if (grad_input) *grad_input = Tensor(input.shape);
  const double* x = input.data.data();
  for (std::size_t o = 0; o < out; ++o) {
    const double g = pre[o];
    grads.bias[o] += g;
    if (g == 0.0) continue;
    double* gw = grads.weights.data.data() + o * in;
    for (std::size_t i = 0; i < in; ++i) gw[i] += g * x[i];
    if (grad_input) {
      const double* row = layer.weights.data.data() + o * in;
      double* gi = grad_input->data.data();
      for (std::size_t i = 0; i < in; ++i) gi[i] += g * row[i];
    }
  }
}

std::string to_string(HeadKind h) {
  return h == HeadKind::softmax_threshold ? "softmax_threshold" : "sigmoid_per_tag";
}

HeadKind head_from_string(const std::string& name) {
  if (name == "softmax_threshold") return HeadKind::softmax_threshold;
  if (name == "sigmoid_per_tag") return HeadKind::sigmoid_per_tag;
  throw ConfigError("unknown head '" + name + "'");
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  if (p.empty()) return p;
  const double mx = *std::max_element(p.begin(), p.end());
  double sum = 0.0;
  for (double& v : p) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : p) v /= sum;
  return p;
}

std::vector<double> head_forward(std::span<const double> logits, HeadKind head) {
  if (head == HeadKind::softmax_threshold) return softmax(logits);
  std::vector<double> s(logits.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = sigmoid(logits[i]);
  return s;
}

Tensor dropout_apply(const Tensor& input, double p, Rng& rng, bool training,
                     std::vector<double>* mask) {
  if (!(p >= 0.0 && p < 1.0)) throw ConfigError("dropout p must lie in [0, 1)");
  if (!training || p == 0.0) {
    if (mask) mask->assign(input.size(), 1.0);
    return input;
  }
  const double keep_scale = 1.0 / (1.0 - p);
  Tensor out(input.shape);
  std::vector<double> local;
  std::vector<double>& m = mask ? *mask : local;
  m.resize(input.size());
  for (std::size_t i = 0; i < input.size(); ++i) {
    m[i] = rng.bernoulli(p) ? 0.0 : keep_scale;
    out.data[i] = input.data[i] * m[i];
  }
  return out;
}

}  // namespace specmer
