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
#ifndef FGRL_MLP_HPP_
#define FGRL_MLP_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace fgrl {

/// Flat trainable weights of one component. The layout is fixed: for every
/// layer, the out x in weight matrix row-major, then the out biases.
using ParamVector = std::vector<double>;

enum class Activation { kTanh, kRelu, kIdentity };

Activation parse_activation(const std::string& name);
const char* to_string(Activation a);

struct MlpSpec {
  std::vector<int> layer_sizes;  // [d_in, hidden..., d_out]
  Activation hidden = Activation::kTanh;
  Activation output = Activation::kIdentity;

  int input_size() const { return layer_sizes.front(); }
  int output_size() const { return layer_sizes.back(); }
  /// Throws kInvalidConfig unless there are >= 2 layers, all of size >= 1.
  void validate() const;

  bool operator==(const MlpSpec&) const = default;
};

std::size_t param_count(const MlpSpec& spec);

/// Evaluates the network into `out` (size output_size()).
/// Throws kDimensionMismatch on any size disagreement.
void forward(const MlpSpec& spec, std::span<const double> params, std::span<const double> input,
             std::span<double> out);

std::vector<double> forward(const MlpSpec& spec, std::span<const double> params,
                            std::span<const double> input);

struct DenseLayer {
  int rows = 0;  // outputs
  int cols = 0;  // inputs
  std::vector<double> weights;  // rows x cols, row-major
  std::vector<double> bias;
};

std::vector<DenseLayer> unpack(const MlpSpec& spec, std::span<const double> params);
ParamVector pack(const MlpSpec& spec, std::span<const DenseLayer> layers);

/// Row-major dense matrix used for per-node vectors.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

  std::span<double> row(int r) { return {data.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)}; }
  std::span<const double> row(int r) const {
    return {data.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)};
  }
  double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

  bool operator==(const Matrix&) const = default;
};

}  // namespace fgrl

#endif  // FGRL_MLP_HPP_
