/*
 * Copyright 2026 The cxpred Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace cxpred {

// Named seed derivation: every random stream in the pipeline is a pure
// function of the root seed plus a (stream name, index) label.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream, std::uint64_t index = 0);

// Seeded generator whose variates do not depend on the standard library's
// distribution implementations, so outputs are identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, n); n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n);
  // Uniform on [0, 1) with 53 random bits.
  double uniform01();
  bool bernoulli(double p) { return uniform01() < p; }
  double normal();
  double lognormal(double mu, double sigma);
  double exponential(double rate);
  std::uint64_t poisson(double mean);

 private:
  std::mt19937_64 engine_;
};

// Samples indices proportionally to non-negative weights.
class DiscreteSampler {
 public:
  DiscreteSampler() = default;
  explicit DiscreteSampler(std::span<const double> weights);

  std::size_t sample(Rng& rng) const;
  std::size_t size() const { return cumulative_.size(); }

 private:
  std::vector<double> cumulative_;
};

// Weights 1/(rank+1)^exponent for ranks 0..n-1.
std::vector<double> zipf_weights(std::size_t n, double exponent);

}  // namespace cxpred
