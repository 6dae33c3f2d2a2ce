// Copyright 2026 The FGRL Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "fgrl/mlp.hpp"

#include <algorithm>
#include <cmath>

#include "fgrl/error.hpp"

namespace fgrl {
namespace {

inline double activate(Activation a, double v) {
  switch (a) {
    case Activation::kTanh: return std::tanh(v);
    case Activation::kRelu: return v > 0.0 ? v : 0.0;
    case Activation::kIdentity: return v;
  }
  return v;
}

}  // namespace

Activation parse_activation(const std::string& name) {
  if (name == "tanh") return Activation::kTanh;
  if (name == "relu") return Activation::kRelu;
  if (name == "identity") return Activation::kIdentity;
  throw Error(ErrorCode::kInvalidConfig, "unknown activation '" + name + "'");
}

const char* to_string(Activation a) {
  switch (a) {
    case Activation::kTanh: return "tanh";
    case Activation::kRelu: return "relu";
    case Activation::kIdentity: return "identity";
  }
  return "identity";
}

void MlpSpec::validate() const {
  if (layer_sizes.size() < 2) throw Error(ErrorCode::kInvalidConfig, "MLP needs at least two layer sizes");
  for (int s : layer_sizes) {
    if (s < 1) throw Error(ErrorCode::kInvalidConfig, "MLP layer sizes must be positive");
  }
}

std::size_t param_count(const MlpSpec& spec) {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < spec.layer_sizes.size(); ++l) {
    const std::size_t in = spec.layer_sizes[l];
    const std::size_t out = spec.layer_sizes[l + 1];
    n += in * out + out;
  }
  return n;
}

void forward(const MlpSpec& spec, std::span<const double> params, std::span<const double> input,
             std::span<double> out) {
  if (params.size() != param_count(spec)) {
    throw Error(ErrorCode::kDimensionMismatch, "MLP expects " + std::to_string(param_count(spec)) +
                                                   " parameters, got " + std::to_string(params.size()));
  }
  if (static_cast<int>(input.size()) != spec.input_size()) {
    throw Error(ErrorCode::kDimensionMismatch, "MLP expects input of size " +
                                                   std::to_string(spec.input_size()) + ", got " +
                                                   std::to_string(input.size()));
  }
  if (static_cast<int>(out.size()) != spec.output_size()) {
    throw Error(ErrorCode::kDimensionMismatch, "MLP output buffer has wrong size");
  }

  thread_local std::vector<double> current;
  thread_local std::vector<double> next;
  current.assign(input.begin(), input.end());

  const double* p = params.data();
  const std::size_t layers = spec.layer_sizes.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const int in = spec.layer_sizes[l];
    const int rows = spec.layer_sizes[l + 1];
    const double* w = p;
    const double* b = p + static_cast<std::size_t>(in) * rows;
    const Activation act = (l + 1 == layers) ? spec.output : spec.hidden;
    next.resize(rows);
    for (int r = 0; r < rows; ++r) {
      const double* wr = w + static_cast<std::size_t>(r) * in;
      double acc = 0.0;
      for (int c = 0; c < in; ++c) acc += wr[c] * current[c];
      next[r] = activate(act, acc + b[r]);
    }
    p = b + rows;
    current.swap(next);
  }
  std::copy(current.begin(), current.end(), out.begin());
}

std::vector<double> forward(const MlpSpec& spec, std::span<const double> params,
                            std::span<const double> input) {
  std::vector<double> out(spec.output_size());
  forward(spec, params, input, out);
  return out;
}

std::vector<DenseLayer> unpack(const MlpSpec& spec, std::span<const double> params) {
  if (params.size() != param_count(spec)) {
    throw Error(ErrorCode::kDimensionMismatch, "parameter vector does not match MLP spec");
  }
  std::vector<DenseLayer> layers;
  auto it = params.begin();
  for (std::size_t l = 0; l + 1 < spec.layer_sizes.size(); ++l) {
    DenseLayer layer;
    layer.cols = spec.layer_sizes[l];
    layer.rows = spec.layer_sizes[l + 1];
    const auto nw = static_cast<std::ptrdiff_t>(layer.rows) * layer.cols;
    layer.weights.assign(it, it + nw);
    it += nw;
    layer.bias.assign(it, it + layer.rows);
    it += layer.rows;
    layers.push_back(std::move(layer));
  }
  return layers;
}

ParamVector pack(const MlpSpec& spec, std::span<const DenseLayer> layers) {
  if (layers.size() + 1 != spec.layer_sizes.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "layer count does not match MLP spec");
  }
  ParamVector out;
  out.reserve(param_count(spec));
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (layer.cols != spec.layer_sizes[l] || layer.rows != spec.layer_sizes[l + 1] ||
        layer.weights.size() != static_cast<std::size_t>(layer.rows) * layer.cols ||
        layer.bias.size() != static_cast<std::size_t>(layer.rows)) {
      throw Error(ErrorCode::kDimensionMismatch, "layer " + std::to_string(l) + " has wrong shape");
    }
    out.insert(out.end(), layer.weights.begin(), layer.weights.end());
    out.insert(out.end(), layer.bias.begin(), layer.bias.end());
  }
  return out;
}

}  // namespace fgrl
