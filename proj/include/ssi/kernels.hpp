// Copyright 2026 The SSI Authors
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

// Temporal weight functions and the two trace accumulators (finite
// convolution over a spike history, and the one-step recursion).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "ssi/common.hpp"

namespace ssi {

enum class KernelFamily { exponential_normalized, discrete_alpha };

inline std::string to_string(KernelFamily f) {
  return f == KernelFamily::exponential_normalized ? "exponential_normalized"
                                                   : "discrete_alpha";
}
inline KernelFamily parse_kernel_family(const std::string& s) {
  if (s == "exponential_normalized") return KernelFamily::exponential_normalized;
  if (s == "discrete_alpha") return KernelFamily::discrete_alpha;
  throw config_error("unknown kernel family '" + s + "'");
}

struct KernelSpec {
  KernelFamily family = KernelFamily::exponential_normalized;
  double decay = 0.5;     // per-step decay of the normalized family
  double a = 0.5;         // trace constant of the alpha family
  double eps_step = 1.0;  // time step (ms)
  std::size_t K = 30;     // horizon
};

/// w[k-1] = exp(−decay·k) / Σ_{m=1..K} exp(−decay·m), k = 1..K.
inline std::vector<double> exponential_normalized(double decay, std::size_t K) {
  if (!(decay > 0.0) || !std::isfinite(decay))
    throw config_error("kernel decay must be positive");
  if (K < 1) throw config_error("kernel horizon K must be >= 1");
  std::vector<double> w(K);
  double total = 0.0;
  for (std::size_t k = 1; k <= K; ++k) {
    w[k - 1] = std::exp(-decay * static_cast<double>(k));
    total += w[k - 1];
  }
  for (auto& v : w) v /= total;
  return w;
}

/// w[k] = a·(1 − a·ε)^k, k = 0..K−1. Requires 0 < a·ε ≤ 1.
inline std::vector<double> discrete_alpha(double a, double eps_step,
                                          std::size_t K) {
  const double ae = a * eps_step;
  if (!(a > 0.0) || !(eps_step > 0.0) || !(ae <= 1.0))
    throw config_error("discrete alpha kernel requires 0 < a*eps_step <= 1");
  if (K < 1) throw config_error("kernel horizon K must be >= 1");
  std::vector<double> w(K);
  const double ratio = 1.0 - ae;
  double value = a;
  for (std::size_t k = 0; k < K; ++k) {
    w[k] = value;
    value *= ratio;
  }
  return w;
}

/// Continuous-time kernel a·exp(−a·τ).
inline double continuous_alpha(double a, double tau) {
  if (tau < 0.0) throw config_error("continuous_alpha requires tau >= 0");
  return a * std::exp(-a * tau);
}

/// Precomputed weights of a KernelSpec. Index 0 weighs the most recent
/// sample. Normalized kernels renormalize by the partial mass during
/// warm-up; the alpha kernel does not, which makes its truncated
/// convolution equal the recursion started from zero.
class Kernel {
 public:
  explicit Kernel(const KernelSpec& spec) : spec_(spec) {
    if (spec.family == KernelFamily::exponential_normalized) {
      weights_ = exponential_normalized(spec.decay, spec.K);
      renormalize_ = true;
    } else {
      weights_ = discrete_alpha(spec.a, spec.eps_step, spec.K);
      renormalize_ = false;
    }
    prefix_.resize(weights_.size() + 1, 0.0);
    for (std::size_t k = 0; k < weights_.size(); ++k)
      prefix_[k + 1] = prefix_[k] + weights_[k];
  }

  const KernelSpec& spec() const noexcept { return spec_; }
  std::span<const double> weights() const noexcept { return weights_; }
  std::size_t horizon() const noexcept { return weights_.size(); }
  bool renormalizes_warmup() const noexcept { return renormalize_; }
  /// Σ of the first `count` weights.
  double partial_mass(std::size_t count) const noexcept {
    return prefix_[count < weights_.size() ? count : weights_.size()];
  }

 private:
  KernelSpec spec_;
  std::vector<double> weights_;
  std::vector<double> prefix_;
  bool renormalize_ = true;
};

/// Ring buffer of the last K samples of one channel. Spike channels use
/// SpikeHistory (entries in {0,1}); the expectation-substituted engine stores
/// real-valued indicator means instead.
template <class T>
class SampleHistory {
 public:
  SampleHistory() = default;
  explicit SampleHistory(std::size_t K) : buf_(K, T{}) {}

  std::size_t capacity() const noexcept { return buf_.size(); }
  std::size_t size() const noexcept { return filled_; }
  /// Number of samples pushed so far.
  std::uint64_t time() const noexcept { return t_; }

  void push(T sample) {
    if (buf_.empty()) return;
    head_ = (head_ + 1) % buf_.size();
    buf_[head_] = sample;
    if (filled_ < buf_.size()) ++filled_;
    ++t_;
  }

  /// Sample `age` steps back; age 0 is the most recent. Requires age < size().
  T recent(std::size_t age) const {
    return buf_[(head_ + buf_.size() - age) % buf_.size()];
  }

  /// Overwrites the whole buffer (used for clamped channels).
  void fill(T sample) {
    for (auto& b : buf_) b = sample;
    filled_ = buf_.size();
  }

 private:
  std::vector<T> buf_;
  std::size_t head_ = 0;
  std::size_t filled_ = 0;
  std::uint64_t t_ = 0;
};

using SpikeHistory = SampleHistory<std::uint8_t>;

/// Σ_k w[k]·x(t−k) over the stored history (most recent first); during
/// warm-up of a normalized kernel the sum is divided by the partial mass.
/// An empty history yields 0.
template <class T>
double convolve_trace(const SampleHistory<T>& history, const Kernel& kernel) {
  const std::size_t count = std::min(history.size(), kernel.horizon());
  if (count == 0) return 0.0;
  const auto w = kernel.weights();
  double sum = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    if constexpr (std::is_same_v<T, std::uint8_t>) {
      if (history.recent(k)) sum += w[k];
    } else {
      sum += w[k] * static_cast<double>(history.recent(k));
    }
  }
  if (kernel.renormalizes_warmup() && count < kernel.horizon())
    sum /= kernel.partial_mass(count);
  return sum;
}

/// y' = (1 − a·ε)·y + a·x.
inline double recursive_trace(double prev, std::uint8_t spike, double a,
                              double eps_step) noexcept {
  return (1.0 - a * eps_step) * prev + (spike ? a : 0.0);
}

}  // namespace ssi
