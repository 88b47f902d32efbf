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

// Gibbs sampling, mean-field variational updates and semi-stochastic
// inference over event channels.
//
// Every engine works on an EventGraph: channels c with incoming edges and a
// bias, proposal φ_c = σ(Σ_src W·θ_src − bias_c). Channels are grouped into
// update units. A paired unit holds the complementary (A,B) channels of one
// softmax unit and draws a single categorical sample; an unpaired unit holds
// independent event neurons, each drawing its own Bernoulli.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ssi/bm_model.hpp"
#include "ssi/common.hpp"
#include "ssi/kernels.hpp"
#include "ssi/network.hpp"
#include "ssi/rng.hpp"

namespace ssi {

enum class Algorithm { gibbs, variational, ssi, ssi_expected };
enum class ScheduleKind {
  sequential_cyclic,
  sequential_random_scan,
  parallel_synchronized
};
enum class InitKind { uniform_random, constant_half, user_vector };

inline std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::gibbs: return "gibbs";
    case Algorithm::variational: return "variational";
    case Algorithm::ssi: return "ssi";
    case Algorithm::ssi_expected: return "ssi_expected";
  }
  return "?";
}
inline std::string to_string(ScheduleKind s) {
  switch (s) {
    case ScheduleKind::sequential_cyclic: return "sequential_cyclic";
    case ScheduleKind::sequential_random_scan: return "sequential_random_scan";
    case ScheduleKind::parallel_synchronized: return "parallel_synchronized";
  }
  return "?";
}
inline std::string to_string(InitKind k) {
  switch (k) {
    case InitKind::uniform_random: return "uniform_random";
    case InitKind::constant_half: return "constant_half";
    case InitKind::user_vector: return "user_vector";
  }
  return "?";
}

struct RunConfig {
  Algorithm algorithm = Algorithm::ssi;
  ScheduleKind schedule = ScheduleKind::parallel_synchronized;
  std::uint64_t steps = 100;
  std::uint64_t seed = 0;
  KernelSpec kernel{};
  InitKind init = InitKind::uniform_random;
  std::vector<double> init_theta;  // one entry per channel (user_vector)
  bool record = true;
};

struct UpdateUnit {
  std::vector<std::size_t> channels;  // paired: {A channel, B channel}
  bool paired = false;
};

struct EventGraph {
  std::vector<std::vector<Edge>> rows;  // incoming edges, ascending source
  std::vector<double> bias;
  std::vector<UpdateUnit> units;
  std::vector<std::optional<double>> clamp;  // per channel, 0 or 1
  std::vector<std::size_t> unit_label;       // per channel, for output
  std::vector<std::string> channel_label;    // per channel, for output

  std::size_t channels() const noexcept { return rows.size(); }

  bool unit_is_hidden(std::size_t u) const {
    for (auto c : units[u].channels)
      if (clamp[c]) return false;
    return true;
  }
  std::vector<std::size_t> hidden_units() const {
    std::vector<std::size_t> h;
    for (std::size_t u = 0; u < units.size(); ++u)
      if (unit_is_hidden(u)) h.push_back(u);
    return h;
  }
};

/// Graph of the softmax model: unit i owns the paired channels (2i, 2i+1).
/// Observed units are clamped to their indicator values.
inline EventGraph event_graph(const PairwiseParams& p,
                              const Observation& observed = {}) {
  EventGraph g;
  const std::size_t n = p.size();
  g.rows.resize(2 * n);
  g.bias = p.biases();
  g.clamp.assign(2 * n, std::nullopt);
  for (std::size_t c = 0; c < 2 * n; ++c) {
    g.rows[c] = p.row(c);
    g.unit_label.push_back(c / 2);
    g.channel_label.emplace_back(1, symbol(state_of(c % 2)));
  }
  for (std::size_t i = 0; i < n; ++i)
    g.units.push_back({{channel_of(i, State::A), channel_of(i, State::B)}, true});
  for (const auto& [i, s] : observed) {
    if (i >= n) throw config_error("observed unit out of range");
    g.clamp[channel_of(i, State::A)] = s == State::A ? 1.0 : 0.0;
    g.clamp[channel_of(i, State::B)] = s == State::B ? 1.0 : 0.0;
  }
  return g;
}

/// Graph of a neuron network: every neuron is an event channel with bias −e.
/// `groups` optionally lists neurons updated together in sequential
/// schedules (default: one neuron per update unit).
inline EventGraph event_graph(const LnpNetwork& net,
                              const std::vector<std::optional<double>>& clamp = {},
                              const std::vector<std::vector<std::size_t>>& groups = {}) {
  require_valid(net);
  EventGraph g;
  g.rows.resize(net.n);
  g.bias.resize(net.n);
  for (std::size_t i = 0; i < net.n; ++i) {
    const auto r = net.row(i);
    for (std::size_t j = 0; j < net.n; ++j)
      if (r[j] != 0.0) g.rows[i].push_back({j, r[j]});
    g.bias[i] = -net.e[i];
    g.unit_label.push_back(i);
    g.channel_label.emplace_back("x");
  }
  g.clamp = clamp.empty() ? std::vector<std::optional<double>>(net.n) : clamp;
  if (g.clamp.size() != net.n) throw config_error("clamp vector has wrong length");
  if (groups.empty()) {
    for (std::size_t i = 0; i < net.n; ++i) g.units.push_back({{i}, false});
  } else {
    std::vector<int> seen(net.n, 0);
    for (const auto& grp : groups) {
      for (auto c : grp) {
        if (c >= net.n) throw config_error("group references unknown neuron");
        ++seen[c];
      }
      g.units.push_back({grp, false});
    }
    if (std::any_of(seen.begin(), seen.end(), [](int s) { return s != 1; }))
      throw config_error("update groups must partition the neurons");
  }
  return g;
}

/// φ_c = σ(Σ W·θ_src − bias_c).
inline double proposal(const EventGraph& g, std::span<const double> theta,
                       std::size_t channel) {
  double drive = 0.0;
  for (const auto& e : g.rows[channel]) drive += e.weight * theta[e.src];
  return logistic(drive - g.bias[channel]);
}

/// (φ_iA, φ_iB) of softmax unit i; theta is indexed by channel.
inline std::array<double, 2> proposal(const PairwiseParams& p,
                                      std::span<const double> theta,
                                      std::size_t i) {
  std::array<double, 2> out{};
  for (State u : {State::A, State::B}) {
    const std::size_t c = channel_of(i, u);
    double drive = 0.0;
    for (const auto& e : p.row(c)) drive += e.weight * theta[e.src];
    out[index_of(u)] = logistic(drive - p.b(i, u));
  }
  return out;
}

struct InferenceState {
  std::uint64_t t = 0;
  std::vector<double> theta;
  std::vector<double> phi;
  std::vector<std::uint8_t> x;
  std::vector<SpikeHistory> history;
  std::vector<SampleHistory<double>> mean_history;  // ssi_expected only
};

namespace detail {

/// Probability that a paired unit emits A, after renormalizing the pair.
inline double pair_probability(double phi_a, double phi_b) {
  const double total = phi_a + phi_b;
  return total > 0.0 ? phi_a / total : 0.5;
}

inline std::vector<std::size_t> touched_channels(
    const EventGraph& g, std::span<const std::size_t> units) {
  std::vector<std::size_t> chans;
  for (auto u : units)
    for (auto c : g.units.at(u).channels) chans.push_back(c);
  return chans;
}

/// Proposals for all channels of `units`, read from one snapshot of `input`.
inline void compute_proposals(const EventGraph& g, std::span<const double> input,
                              std::span<const std::size_t> units,
                              std::vector<double>& phi) {
  const auto chans = touched_channels(g, units);
  std::vector<double> fresh(chans.size());
  for (std::size_t k = 0; k < chans.size(); ++k)
    fresh[k] = proposal(g, input, chans[k]);
  for (std::size_t k = 0; k < chans.size(); ++k) phi[chans[k]] = fresh[k];
}

/// Draw r ~ U[0,1) from the stream of the unit's first channel; emit A iff
/// r < p_A. Unpaired channels draw independently: spike iff r < φ_c.
inline void sample_unit(const UpdateUnit& unit, std::span<const double> phi,
                        std::uint64_t t, const StreamRng& rng,
                        std::vector<std::uint8_t>& x) {
  if (unit.paired) {
    const auto ca = unit.channels[0];
    const auto cb = unit.channels[1];
    const bool is_a = rng.uniform(ca, t) < pair_probability(phi[ca], phi[cb]);
    x[ca] = is_a ? 1 : 0;
    x[cb] = is_a ? 0 : 1;
  } else {
    for (auto c : unit.channels) x[c] = rng.uniform(c, t) < phi[c] ? 1 : 0;
  }
}

}  // namespace detail

/// One Gibbs step: proposals from the indicator values of the previous
/// sample, then a fresh sample for every listed unit.
inline void gibbs_step(const EventGraph& g, InferenceState& s,
                       std::span<const std::size_t> units, const StreamRng& rng) {
  ++s.t;
  std::vector<double> indicators(s.x.begin(), s.x.end());
  detail::compute_proposals(g, indicators, units, s.phi);
  for (auto u : units) {
    detail::sample_unit(g.units[u], s.phi, s.t, rng, s.x);
    for (auto c : g.units[u].channels) s.theta[c] = s.x[c];
  }
}

/// One variational step: θ ← φ on every listed unit.
inline void variational_step(const EventGraph& g, InferenceState& s,
                             std::span<const std::size_t> units) {
  ++s.t;
  detail::compute_proposals(g, s.theta, units, s.phi);
  for (auto c : detail::touched_channels(g, units)) s.theta[c] = s.phi[c];
}

/// One semi-stochastic step: proposal from θ, sample, then θ becomes the
/// kernel-weighted sum of the unit's most recent samples.
inline void ssi_step(const EventGraph& g, InferenceState& s,
                     std::span<const std::size_t> units, const Kernel& kernel,
                     const StreamRng& rng) {
  ++s.t;
  detail::compute_proposals(g, s.theta, units, s.phi);
  for (auto u : units) {
    detail::sample_unit(g.units[u], s.phi, s.t, rng, s.x);
    for (auto c : g.units[u].channels) {
      s.history[c].push(s.x[c]);
      s.theta[c] = convolve_trace(s.history[c], kernel);
    }
  }
}

/// SSI with each draw replaced by its expectation (a damped variational
/// update with the kernel as memory).
inline void ssi_expected_step(const EventGraph& g, InferenceState& s,
                              std::span<const std::size_t> units,
                              const Kernel& kernel) {
  ++s.t;
  detail::compute_proposals(g, s.theta, units, s.phi);
  for (auto u : units) {
    const auto& unit = g.units[u];
    if (unit.paired) {
      const double pa = detail::pair_probability(s.phi[unit.channels[0]],
                                                 s.phi[unit.channels[1]]);
      s.mean_history[unit.channels[0]].push(pa);
      s.mean_history[unit.channels[1]].push(1.0 - pa);
    } else {
      for (auto c : unit.channels) s.mean_history[c].push(s.phi[c]);
    }
    for (auto c : unit.channels)
      s.theta[c] = convolve_trace(s.mean_history[c], kernel);
  }
}

/// max over hidden channels of |θ_c − φ_c(θ)|.
inline double fixed_point_residual(const EventGraph& g,
                                   std::span<const double> theta) {
  double worst = 0.0;
  for (auto u : g.hidden_units())
    for (auto c : g.units[u].channels)
      worst = std::max(worst, std::abs(theta[c] - proposal(g, theta, c)));
  return worst;
}

/// Per-step record of every channel. Row t−1 holds step t (t = 1..steps).
struct Trajectory {
  std::size_t channels = 0;
  std::uint64_t steps = 0;
  std::vector<double> theta;
  std::vector<double> phi;
  std::vector<std::uint8_t> x;
  std::vector<std::size_t> unit_label;
  std::vector<std::string> channel_label;

  double theta_at(std::uint64_t t, std::size_t c) const {
    return theta[(t - 1) * channels + c];
  }
  double phi_at(std::uint64_t t, std::size_t c) const {
    return phi[(t - 1) * channels + c];
  }
  std::uint8_t x_at(std::uint64_t t, std::size_t c) const {
    return x[(t - 1) * channels + c];
  }
  /// θ series of one channel.
  std::vector<double> theta_series(std::size_t c) const {
    std::vector<double> out(steps);
    for (std::uint64_t t = 1; t <= steps; ++t) out[t - 1] = theta_at(t, c);
    return out;
  }
  std::vector<double> x_series(std::size_t c) const {
    std::vector<double> out(steps);
    for (std::uint64_t t = 1; t <= steps; ++t) out[t - 1] = x_at(t, c);
    return out;
  }
  std::vector<double> final_theta() const {
    return {theta.end() - static_cast<std::ptrdiff_t>(channels), theta.end()};
  }
};

inline constexpr std::uint64_t kMaxRecordedValues = 200'000'000;

/// Owns one inference run: state, schedule and random streams.
class Engine {
 public:
  Engine(EventGraph graph, RunConfig config)
      : graph_(std::move(graph)),
        config_(std::move(config)),
        rng_(config_.seed),
        kernel_(kernel_for(config_)),
        hidden_(graph_.hidden_units()) {
    if (config_.steps < 1) throw config_error("steps must be >= 1");
    initialize();
  }

  const EventGraph& graph() const noexcept { return graph_; }
  const RunConfig& config() const noexcept { return config_; }
  const InferenceState& state() const noexcept { return state_; }
  const std::vector<std::size_t>& hidden_units() const noexcept { return hidden_; }

  /// Units touched at step t under the configured schedule.
  std::vector<std::size_t> schedule(std::uint64_t t) const {
    if (hidden_.empty()) return {};
    switch (config_.schedule) {
      case ScheduleKind::sequential_cyclic:
        return {hidden_[(t - 1) % hidden_.size()]};
      case ScheduleKind::sequential_random_scan:
        return {hidden_[rng_.below(hidden_.size(), 0, t, Lane::schedule)]};
      case ScheduleKind::parallel_synchronized:
        return hidden_;
    }
    return {};
  }

  void step() {
    const auto units = schedule(state_.t + 1);
    switch (config_.algorithm) {
      case Algorithm::gibbs: gibbs_step(graph_, state_, units, rng_); break;
      case Algorithm::variational: variational_step(graph_, state_, units); break;
      case Algorithm::ssi: ssi_step(graph_, state_, units, kernel_, rng_); break;
      case Algorithm::ssi_expected:
        ssi_expected_step(graph_, state_, units, kernel_);
        break;
    }
  }

  Trajectory run() {
    Trajectory tr;
    tr.channels = graph_.channels();
    tr.unit_label = graph_.unit_label;
    tr.channel_label = graph_.channel_label;
    if (config_.record) {
      if (config_.steps > kMaxRecordedValues / std::max<std::size_t>(1, tr.channels))
        throw capacity_error("trajectory too large to record");
      const auto total = static_cast<std::size_t>(config_.steps) * tr.channels;
      tr.theta.reserve(total);
      tr.phi.reserve(total);
      tr.x.reserve(total);
    }
    for (std::uint64_t k = 0; k < config_.steps; ++k) {
      step();
      if (config_.record) {
        tr.theta.insert(tr.theta.end(), state_.theta.begin(), state_.theta.end());
        tr.phi.insert(tr.phi.end(), state_.phi.begin(), state_.phi.end());
        tr.x.insert(tr.x.end(), state_.x.begin(), state_.x.end());
        ++tr.steps;
      }
    }
    return tr;
  }

 private:
  static Kernel kernel_for(const RunConfig& cfg) {
    if (cfg.algorithm == Algorithm::ssi || cfg.algorithm == Algorithm::ssi_expected)
      return Kernel(cfg.kernel);
    return Kernel(KernelSpec{});
  }

  void initialize() {
    const std::size_t m = graph_.channels();
    state_.theta.assign(m, 0.5);
    state_.phi.assign(m, 0.0);
    state_.x.assign(m, 0);
    state_.history.assign(m, SpikeHistory(kernel_.horizon()));
    if (config_.algorithm == Algorithm::ssi_expected)
      state_.mean_history.assign(m, SampleHistory<double>(kernel_.horizon()));

    switch (config_.init) {
      case InitKind::constant_half: break;
      case InitKind::user_vector:
        if (config_.init_theta.size() != m)
          throw config_error("init vector needs one entry per channel");
        for (double v : config_.init_theta)
          if (!(v >= 0.0 && v <= 1.0))
            throw config_error("init vector entries must lie in [0,1]");
        state_.theta = config_.init_theta;
        break;
      case InitKind::uniform_random:
        for (const auto& unit : graph_.units) {
          if (unit.paired) {
            const double ra = open_uniform(unit.channels[0]);
            const double rb = open_uniform(unit.channels[1]);
            state_.theta[unit.channels[0]] = ra / (ra + rb);
            state_.theta[unit.channels[1]] = 1.0 - ra / (ra + rb);
          } else {
            for (auto c : unit.channels) state_.theta[c] = open_uniform(c);
          }
        }
        break;
    }
    if (config_.algorithm == Algorithm::gibbs) {
      for (const auto& unit : graph_.units)
        detail::sample_unit(unit, state_.theta, 0, rng_, state_.x);
      for (std::size_t c = 0; c < m; ++c) state_.theta[c] = state_.x[c];
    }
    for (std::size_t c = 0; c < m; ++c) {
      if (!graph_.clamp[c]) continue;
      const double v = *graph_.clamp[c];
      state_.theta[c] = v;
      state_.phi[c] = v;
      state_.x[c] = v > 0.5 ? 1 : 0;
      state_.history[c].fill(state_.x[c]);
      if (!state_.mean_history.empty()) state_.mean_history[c].fill(v);
    }
  }

  double open_uniform(std::size_t channel) const {
    return rng_.uniform(channel, 0, Lane::init) + 0x1.0p-54;
  }

  EventGraph graph_;
  RunConfig config_;
  StreamRng rng_;
  Kernel kernel_;
  std::vector<std::size_t> hidden_;
  InferenceState state_;
};

inline Trajectory run(const EventGraph& graph, const RunConfig& config) {
  return Engine(graph, config).run();
}
inline Trajectory run(const PairwiseParams& params, const Observation& observed,
                      const RunConfig& config) {
  return run(event_graph(params, observed), config);
}
inline Trajectory run(const LnpNetwork& net, const RunConfig& config) {
  return run(event_graph(net), config);
}

/// Variational free energy E_q[energy] − H(q) of the factorized q given by
/// θ (indexed by channel). Equals KL(q‖p) − log Z.
inline double free_energy(const BoltzmannMachine& bm, std::span<const double> theta) {
  if (theta.size() != 2 * bm.size())
    throw config_error("theta needs one entry per channel");
  for (double v : theta)
    if (!(v >= 0.0 && v <= 1.0)) throw config_error("theta entries must lie in [0,1]");
  double pair = 0.0;
  for (const auto& [k, value] : bm.couplings())
    pair += value * theta[channel_of(k.i, k.u)] * theta[channel_of(k.j, k.v)];
  double field = 0.0;
  double entropy = 0.0;
  for (std::size_t i = 0; i < bm.size(); ++i)
    for (State u : {State::A, State::B}) {
      const double q = theta[channel_of(i, u)];
      field += bm.bias(i, u) * q;
      if (q > 0.0) entropy -= q * std::log(q);
    }
  return -0.5 * pair + field - entropy;
}

}  // namespace ssi
