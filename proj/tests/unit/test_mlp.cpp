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
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "fgrl/mlp.hpp"
#include "test_support.hpp"

namespace {

using fgrl::Activation;
using fgrl::ErrorCode;
using fgrl::MlpSpec;

double apply(Activation a, double x) {
  switch (a) {
    case Activation::kTanh:
      return std::tanh(x);
    case Activation::kRelu:
      return x > 0.0 ? x : 0.0;
    case Activation::kIdentity:
      break;
  }
  return x;
}

// Dense matrices built explicitly from the documented layout, multiplied
// column by column.
std::vector<double> naive_forward(const MlpSpec& spec, const std::vector<double>& p, std::vector<double> x) {
  std::size_t at = 0;
  const std::size_t layers = spec.layer_sizes.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const int in = spec.layer_sizes[l], out = spec.layer_sizes[l + 1];
    std::vector<std::vector<double>> w(out, std::vector<double>(in));
    for (int r = 0; r < out; ++r) {
      for (int c = 0; c < in; ++c) w[r][c] = p[at++];
    }
    std::vector<double> y(out);
    for (int r = 0; r < out; ++r) y[r] = p[at++];
    for (int r = 0; r < out; ++r) {
      double acc = 0.0;
      for (int c = 0; c < in; ++c) acc += w[r][c] * x[c];
      y[r] = apply(l + 1 == layers ? spec.output : spec.hidden, acc + y[r]);
    }
    x = y;
  }
  return x;
}

}  // namespace

TEST_CASE("param_count examples") {
  CHECK(fgrl::param_count(MlpSpec{{2, 3}}) == 9);
  CHECK(fgrl::param_count(MlpSpec{{4, 8, 2}}) == 58);
  CHECK(fgrl::param_count(MlpSpec{{1, 1}}) == 2);
}

TEST_CASE("identity network passes its input through") {
  const MlpSpec spec{{2, 2}, Activation::kIdentity, Activation::kIdentity};
  const std::vector<double> p{1, 0, 0, 1, 0, 0};
  const std::vector<double> x{0.3, -0.7};
  CHECK(fgrl::forward(spec, p, x) == x);
}

TEST_CASE("zero tanh unit outputs zero") {
  const MlpSpec spec{{1, 1}, Activation::kTanh, Activation::kTanh};
  const std::vector<double> p{0.0, 0.0};
  const std::vector<double> x{5.0};
  CHECK(fgrl::forward(spec, p, x) == std::vector<double>{0.0});
}

TEST_CASE("forward matches a naive dense oracle") {
  std::mt19937_64 rng(42);
  const std::vector<MlpSpec> specs{
      {{3, 4, 2}},
      {{3, 4, 2}, Activation::kRelu, Activation::kTanh},
      {{5, 7, 3, 1}, Activation::kTanh, Activation::kTanh},
      {{1, 16, 6}, Activation::kIdentity, Activation::kIdentity},
  };
  for (const auto& spec : specs) {
    for (int trial = 0; trial < 50; ++trial) {
      const auto p = testing::random_vector(rng, fgrl::param_count(spec));
      const auto x = testing::random_vector(rng, spec.input_size(), 2.0);
      const auto y = fgrl::forward(spec, p, x);
      const auto expected = naive_forward(spec, p, x);
      REQUIRE(y.size() == expected.size());
      CHECK(testing::bit_equal(y, expected));
      CHECK(testing::bit_equal(y, fgrl::forward(spec, p, x)));
    }
  }
}

TEST_CASE("pack and unpack round trip") {
  std::mt19937_64 rng(7);
  const MlpSpec spec{{3, 5, 4, 2}};
  const auto p = testing::random_vector(rng, fgrl::param_count(spec));
  const auto layers = fgrl::unpack(spec, p);
  REQUIRE(layers.size() == 3);
  CHECK(layers[0].rows == 5);
  CHECK(layers[0].cols == 3);
  CHECK(layers[0].weights[1] == p[1]);
  CHECK(layers[0].bias[0] == p[15]);
  CHECK(fgrl::pack(spec, layers) == p);
}

TEST_CASE("linear network with zero biases is linear") {
  std::mt19937_64 rng(9);
  const MlpSpec spec{{4, 6, 3}, Activation::kIdentity, Activation::kIdentity};
  auto layers = fgrl::unpack(spec, testing::random_vector(rng, fgrl::param_count(spec)));
  for (auto& layer : layers) std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
  const auto p = fgrl::pack(spec, layers);
  for (int trial = 0; trial < 100; ++trial) {
    const auto x = testing::random_vector(rng, 4);
    const auto y = testing::random_vector(rng, 4);
    const double a = std::normal_distribution<double>()(rng), b = std::normal_distribution<double>()(rng);
    std::vector<double> mix(4);
    for (int i = 0; i < 4; ++i) mix[i] = a * x[i] + b * y[i];
    const auto fx = fgrl::forward(spec, p, x), fy = fgrl::forward(spec, p, y), fm = fgrl::forward(spec, p, mix);
    for (int i = 0; i < 3; ++i) {
      const double expected = a * fx[i] + b * fy[i];
      CHECK(std::fabs(fm[i] - expected) <= 1e-12 * std::max(1.0, std::fabs(expected)));
    }
  }
}

TEST_CASE("forward rejects mismatched sizes") {
  const MlpSpec spec{{2, 3}};
  const std::vector<double> p(9, 0.0), short_p(8, 0.0);
  const std::vector<double> x{1.0, 2.0}, bad_x{1.0};
  CHECK_ERROR_CODE(fgrl::forward(spec, short_p, x), ErrorCode::kDimensionMismatch);
  CHECK_ERROR_CODE(fgrl::forward(spec, p, bad_x), ErrorCode::kDimensionMismatch);
  std::vector<double> out(2);
  CHECK_ERROR_CODE(fgrl::forward(spec, p, x, out), ErrorCode::kDimensionMismatch);
  CHECK_ERROR_CODE(fgrl::unpack(spec, short_p), ErrorCode::kDimensionMismatch);
}

TEST_CASE("network shape validation and activation names") {
  CHECK_ERROR_CODE(MlpSpec{{3}}.validate(), ErrorCode::kInvalidConfig);
  CHECK_ERROR_CODE((MlpSpec{{3, 0}}.validate()), ErrorCode::kInvalidConfig);
  CHECK(fgrl::parse_activation("relu") == Activation::kRelu);
  CHECK(fgrl::parse_activation(fgrl::to_string(Activation::kTanh)) == Activation::kTanh);
  CHECK_ERROR_CODE(fgrl::parse_activation("softmax"), ErrorCode::kInvalidConfig);
}
