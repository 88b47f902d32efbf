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

// Discrete-time linear-nonlinear-Bernoulli network:
//
//   λ(t) = σ(W·y(t) + e),  x_i(t) ~ Bernoulli(ε·λ_i(t)),
//   y(t+1) = (1 − aε)·y(t) + a·x(t)
//
// The trace may instead be the finite kernel convolution of the last K
// spikes, which is the form the semi-stochastic engine runs on split
// networks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ssi/common.hpp"
#include "ssi/kernels.hpp"
#include "ssi/network.hpp"
#include "ssi/rng.hpp"

namespace ssi {

struct LnpState {
  std::uint64_t t = 0;
  std::vector<double> y;
  std::vector<double> lambda;  // rate used by the most recent step
  std::vector<std::uint8_t> x;
  std::vector<SpikeHistory> history;  // kernel mode only
};

struct SimulationOptions {
  std::vector<double> y0;                    // default: all zero
  std::vector<std::optional<double>> clamp;  // per neuron, 0 or 1
  std::optional<KernelSpec> kernel;          // convolutional trace if set
  bool record = true;
};

inline LnpState initial_state(const LnpNetwork& net, const SimulationOptions& opt) {
  LnpState s;
  s.y = opt.y0.empty() ? std::vector<double>(net.n, 0.0) : opt.y0;
  if (s.y.size() != net.n) throw config_error("y0 has wrong length");
  s.lambda.assign(net.n, 0.0);
  s.x.assign(net.n, 0);
  if (opt.kernel) s.history.assign(net.n, SpikeHistory(opt.kernel->K));
  if (!opt.clamp.empty()) {
    if (opt.clamp.size() != net.n) throw config_error("clamp has wrong length");
    for (std::size_t i = 0; i < net.n; ++i)
      if (opt.clamp[i]) {
        s.y[i] = *opt.clamp[i];
        s.x[i] = *opt.clamp[i] > 0.5 ? 1 : 0;
        if (opt.kernel) s.history[i].fill(s.x[i]);
      }
  }
  return s;
}

/// Advances one step with the recursive trace. Spike i at step t fires iff
/// the (i, t) uniform is below ε·λ_i.
inline void lnp_step(const LnpNetwork& net, LnpState& s, const StreamRng& rng,
                     std::span<const std::optional<double>> clamp = {}) {
  ++s.t;
  s.lambda = rate(net, s.y);
  for (std::size_t i = 0; i < net.n; ++i) {
    if (!clamp.empty() && clamp[i]) continue;
    s.x[i] = rng.uniform(i, s.t) < net.eps_step * s.lambda[i] ? 1 : 0;
    s.y[i] = recursive_trace(s.y[i], s.x[i], net.a, net.eps_step);
  }
}

/// Advances one step with the trace given by `kernel` over the spike history.
inline void lnp_step(const LnpNetwork& net, LnpState& s, const StreamRng& rng,
                     const Kernel& kernel,
                     std::span<const std::optional<double>> clamp = {}) {
  ++s.t;
  s.lambda = rate(net, s.y);
  for (std::size_t i = 0; i < net.n; ++i) {
    if (!clamp.empty() && clamp[i]) continue;
    s.x[i] = rng.uniform(i, s.t) < net.eps_step * s.lambda[i] ? 1 : 0;
    s.history[i].push(s.x[i]);
    s.y[i] = convolve_trace(s.history[i], kernel);
  }
}

/// Row t−1 holds step t: the rate used, the spike drawn, the trace after.
struct SimulationResult {
  std::size_t n = 0;
  std::uint64_t steps = 0;
  std::vector<std::uint8_t> raster;
  std::vector<double> traces;
  std::vector<double> rates;

  std::uint8_t spike(std::uint64_t t, std::size_t i) const {
    return raster[(t - 1) * n + i];
  }
  double trace(std::uint64_t t, std::size_t i) const {
    return traces[(t - 1) * n + i];
  }
  std::vector<double> trace_series(std::size_t i) const {
    std::vector<double> out(steps);
    for (std::uint64_t t = 1; t <= steps; ++t) out[t - 1] = trace(t, i);
    return out;
  }
};

inline SimulationResult simulate(const LnpNetwork& net, std::uint64_t steps,
                                 std::uint64_t seed,
                                 const SimulationOptions& opt = {}) {
  require_valid(net);
  if (steps < 1) throw config_error("steps must be >= 1");
  if (opt.record && steps > 200'000'000 / std::max<std::size_t>(1, net.n))
    throw capacity_error("simulation too large to record");
  const StreamRng rng(seed);
  LnpState s = initial_state(net, opt);
  std::optional<Kernel> kernel;
  if (opt.kernel) kernel.emplace(*opt.kernel);

  SimulationResult out;
  out.n = net.n;
  for (std::uint64_t k = 0; k < steps; ++k) {
    if (kernel)
      lnp_step(net, s, rng, *kernel, opt.clamp);
    else
      lnp_step(net, s, rng, opt.clamp);
    if (opt.record) {
      out.raster.insert(out.raster.end(), s.x.begin(), s.x.end());
      out.traces.insert(out.traces.end(), s.y.begin(), s.y.end());
      out.rates.insert(out.rates.end(), s.lambda.begin(), s.lambda.end());
      ++out.steps;
    }
  }
  return out;
}

/// Distribution of the number of successes among independent Bernoulli
/// trials with the given probabilities, by dynamic programming.
inline std::vector<double> poisson_binomial(std::span<const double> probs) {
  std::vector<double> dist{1.0};
  dist.reserve(probs.size() + 1);
  for (double p : probs) {
    dist.push_back(0.0);
    for (std::size_t k = dist.size() - 1; k > 0; --k)
      dist[k] = dist[k] * (1.0 - p) + dist[k - 1] * p;
    dist[0] *= 1.0 - p;
    while (dist.size() > 1 && dist.back() == 0.0) dist.pop_back();
  }
  return dist;
}

inline double poisson_pmf(std::uint64_t k, double mean) {
  if (mean == 0.0) return k == 0 ? 1.0 : 0.0;
  const double kd = static_cast<double>(k);
  return std::exp(kd * std::log(mean) - mean - std::lgamma(kd + 1.0));
}

struct LeCamReport {
  double lambda = 0.0;
  double eps = 0.0;
  std::uint64_t steps = 0;
  std::vector<double> counts;   // exact distribution of the spike count
  std::vector<double> poisson;  // Poisson reference on the same support
  double tv = 0.0;
  double bound = 0.0;  // Σ (ελ)²
};

/// Total-variation distance between the per-bin count distribution of
/// a list of spike probabilities and the Poisson law with the same mean.
inline double poisson_tv(std::span<const double> counts, double mean,
                         std::vector<double>* poisson_out = nullptr) {
  double covered = 0.0;
  double diff = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const double pk = poisson_pmf(k, mean);
    if (poisson_out) poisson_out->push_back(pk);
    covered += pk;
    diff += std::abs(counts[k] - pk);
  }
  return 0.5 * (diff + std::max(0.0, 1.0 - covered));
}

inline constexpr std::uint64_t kMaxLeCamSteps = 100'000;

inline LeCamReport lecam_check(double lambda_const, double eps_step,
                               std::uint64_t interval_steps) {
  const double p = eps_step * lambda_const;
  if (!(p >= 0.0 && p <= 1.0))
    throw config_error("eps_step*lambda must lie in [0,1]");
  if (interval_steps > kMaxLeCamSteps)
    throw capacity_error("LeCam interval limited to 1e5 steps");
  LeCamReport r;
  r.lambda = lambda_const;
  r.eps = eps_step;
  r.steps = interval_steps;
  const std::vector<double> probs(interval_steps, p);
  r.counts = poisson_binomial(probs);
  r.tv = poisson_tv(r.counts, static_cast<double>(interval_steps) * p, &r.poisson);
  r.bound = static_cast<double>(interval_steps) * p * p;
  return r;
}

}  // namespace ssi
