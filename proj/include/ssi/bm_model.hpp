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

// Softmax-unit Boltzmann machine over the alphabet {A,B}:
//
//   p(y) ∝ exp( ½ Σ_{i≠j,u,v} [y_i=u][y_j=v] V(iu,jv) − Σ_{i,u} [y_i=u] c(iu) )
//
// together with its event-space parameterization
//   W(iu,jv) = V(iu,jv) − V(iū,jv),   b(iu) = c(iu) − c(iū)
// and brute-force enumeration oracles for small n.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "ssi/common.hpp"

namespace ssi {

inline constexpr std::size_t kMaxEnumerationUnits = 20;
inline constexpr std::size_t kMaxDenseUnits = 4096;

/// Event channel (i,u) is addressed as 2i+u throughout the library.
inline constexpr std::size_t channel_of(std::size_t unit, State s) noexcept {
  return 2 * unit + index_of(s);
}

using Assignment = std::vector<State>;
/// Observed unit → clamped state.
using Observation = std::map<std::size_t, State>;

struct Diagnostic {
  std::string code;  // "symmetry", "self_coupling", "non_finite", ...
  std::string message;
};

struct CouplingKey {
  std::size_t i;
  State u;
  std::size_t j;
  State v;
  auto operator<=>(const CouplingKey&) const = default;
};

class BoltzmannMachine {
 public:
  BoltzmannMachine() = default;
  explicit BoltzmannMachine(std::size_t n) : n_(n), c_(n, {0.0, 0.0}) {}

  std::size_t size() const noexcept { return n_; }

  /// Stores one directed entry V(iu,jv). Callers normally want
  /// set_symmetric_coupling; this exists so invalid models can be built
  /// and diagnosed.
  void set_coupling(std::size_t i, State u, std::size_t j, State v,
                    double value) {
    check_unit(i);
    check_unit(j);
    couplings_[{i, u, j, v}] = value;
  }
  void set_symmetric_coupling(std::size_t i, State u, std::size_t j, State v,
                              double value) {
    set_coupling(i, u, j, v, value);
    set_coupling(j, v, i, u, value);
  }
  void set_bias(std::size_t i, State u, double value) {
    check_unit(i);
    c_[i][index_of(u)] = value;
  }
  void set_visible(std::set<std::size_t> visible) {
    for (auto i : visible) check_unit(i);
    visible_ = std::move(visible);
  }
  /// Optional layer metadata (bottom layer first).
  void set_layers(std::vector<std::vector<std::size_t>> layers) {
    for (const auto& layer : layers)
      for (auto i : layer) check_unit(i);
    layers_ = std::move(layers);
  }

  double coupling(std::size_t i, State u, std::size_t j, State v) const {
    auto it = couplings_.find({i, u, j, v});
    return it == couplings_.end() ? 0.0 : it->second;
  }
  double bias(std::size_t i, State u) const { return c_.at(i)[index_of(u)]; }
  const std::map<CouplingKey, double>& couplings() const noexcept {
    return couplings_;
  }
  const std::set<std::size_t>& visible() const noexcept { return visible_; }
  bool is_visible(std::size_t i) const { return visible_.count(i) != 0; }
  const std::vector<std::vector<std::size_t>>& layers() const noexcept {
    return layers_;
  }

  std::vector<std::size_t> hidden() const {
    std::vector<std::size_t> h;
    for (std::size_t i = 0; i < n_; ++i)
      if (!is_visible(i)) h.push_back(i);
    return h;
  }

 private:
  void check_unit(std::size_t i) const {
    if (i >= n_)
      throw config_error("unit index " + std::to_string(i) +
                         " out of range for n=" + std::to_string(n_));
  }

  std::size_t n_ = 0;
  std::map<CouplingKey, double> couplings_;
  std::vector<std::array<double, 2>> c_;
  std::set<std::size_t> visible_;
  std::vector<std::vector<std::size_t>> layers_;
};

inline std::string describe(const CouplingKey& k) {
  return "V[" + std::to_string(k.i) + "," + symbol(k.u) + "," +
         std::to_string(k.j) + "," + symbol(k.v) + "]";
}

/// Reports every invariant violation; an empty list means the model is valid.
inline std::vector<Diagnostic> validate(const BoltzmannMachine& bm,
                                        const Observation& observed = {}) {
  std::vector<Diagnostic> out;
  for (const auto& [key, value] : bm.couplings()) {
    if (key.i == key.j) {
      out.push_back({"self_coupling", describe(key) + " couples a unit to itself"});
      continue;
    }
    if (!std::isfinite(value)) {
      out.push_back({"non_finite", describe(key) + " is not finite"});
      continue;
    }
    const CouplingKey mirror{key.j, key.v, key.i, key.u};
    // Report each asymmetric pair once, from its lexicographically smaller side.
    const double other_value = bm.coupling(mirror.i, mirror.u, mirror.j, mirror.v);
    if (other_value != value && (key < mirror || !bm.couplings().count(mirror))) {
      out.push_back({"symmetry", describe(key) + "=" + std::to_string(value) +
                                     " but " + describe(mirror) + "=" +
                                     std::to_string(other_value)});
    }
  }
  for (std::size_t i = 0; i < bm.size(); ++i)
    for (State u : {State::A, State::B})
      if (!std::isfinite(bm.bias(i, u)))
        out.push_back({"non_finite", "c[" + std::to_string(i) + "," + symbol(u) +
                                         "] is not finite"});
  for (const auto& [i, s] : observed) {
    if (!bm.is_visible(i))
      out.push_back({"observation", "observed unit " + std::to_string(i) +
                                        " is not visible"});
  }
  return out;
}

inline void require_valid(const BoltzmannMachine& bm) {
  auto diags = validate(bm);
  if (!diags.empty()) {
    std::string msg = "invalid model:";
    for (const auto& d : diags) msg += " [" + d.code + "] " + d.message + ";";
    throw validation_error(msg);
  }
}

/// Incoming event-space edge: weight from channel `src` into the row's channel.
struct Edge {
  std::size_t src;
  double weight;
};

/// Event-space parameters W(iu,jv), b(iu) and Markov blankets M(i).
/// Row `channel_of(i,u)` lists the incoming W(iu,·) entries sorted by source.
class PairwiseParams {
 public:
  PairwiseParams() = default;
  explicit PairwiseParams(std::size_t n)
      : n_(n), rows_(2 * n), bias_(2 * n, 0.0) {}

  std::size_t size() const noexcept { return n_; }
  std::size_t channels() const noexcept { return 2 * n_; }

  double W(std::size_t i, State u, std::size_t j, State v) const {
    const auto& row = rows_.at(channel_of(i, u));
    auto it = find(row, channel_of(j, v));
    return it != row.end() && it->src == channel_of(j, v) ? it->weight : 0.0;
  }
  double b(std::size_t i, State u) const { return bias_.at(channel_of(i, u)); }

  void set_W(std::size_t i, State u, std::size_t j, State v, double value) {
    auto& row = rows_.at(channel_of(i, u));
    const std::size_t src = channel_of(j, v);
    auto it = find(row, src);
    if (it != row.end() && it->src == src)
      it->weight = value;
    else
      row.insert(it, Edge{src, value});
  }
  void set_b(std::size_t i, State u, double value) {
    bias_.at(channel_of(i, u)) = value;
  }

  const std::vector<Edge>& row(std::size_t channel) const {
    return rows_.at(channel);
  }
  const std::vector<double>& biases() const noexcept { return bias_; }

  /// M(i): units j ≠ i with a stored W(i·,j·) entry, ascending.
  std::vector<std::size_t> blanket(std::size_t i) const {
    std::set<std::size_t> units;
    for (State u : {State::A, State::B})
      for (const auto& e : rows_.at(channel_of(i, u))) units.insert(e.src / 2);
    units.erase(i);
    return {units.begin(), units.end()};
  }

  /// Dense 2n×2n row-major W (target channel major).
  std::vector<double> dense() const {
    if (n_ > kMaxDenseUnits)
      throw capacity_error("dense materialization limited to n <= 4096");
    const std::size_t m = channels();
    std::vector<double> d(m * m, 0.0);
    for (std::size_t r = 0; r < m; ++r)
      for (const auto& e : rows_[r]) d[r * m + e.src] = e.weight;
    return d;
  }

  bool operator==(const PairwiseParams& o) const {
    if (n_ != o.n_ || bias_ != o.bias_) return false;
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      if (rows_[r].size() != o.rows_[r].size()) return false;
      for (std::size_t k = 0; k < rows_[r].size(); ++k)
        if (rows_[r][k].src != o.rows_[r][k].src ||
            rows_[r][k].weight != o.rows_[r][k].weight)
          return false;
    }
    return true;
  }

 private:
  static std::vector<Edge>::iterator find(std::vector<Edge>& row,
                                          std::size_t src) {
    return std::lower_bound(row.begin(), row.end(), src,
                            [](const Edge& e, std::size_t s) { return e.src < s; });
  }
  static std::vector<Edge>::const_iterator find(const std::vector<Edge>& row,
                                                std::size_t src) {
    return std::lower_bound(row.begin(), row.end(), src,
                            [](const Edge& e, std::size_t s) { return e.src < s; });
  }

  std::size_t n_ = 0;
  std::vector<std::vector<Edge>> rows_;
  std::vector<double> bias_;
};

inline PairwiseParams derive_pairwise(const BoltzmannMachine& bm) {
  require_valid(bm);
  const std::size_t n = bm.size();
  PairwiseParams p(n);
  std::map<std::pair<std::size_t, std::size_t>, double> w;  // (dst, src) channels
  for (const auto& [k, value] : bm.couplings()) {
    w[{channel_of(k.i, k.u), channel_of(k.j, k.v)}] += value;
    w[{channel_of(k.i, other(k.u)), channel_of(k.j, k.v)}] -= value;
  }
  for (const auto& [key, value] : w) {
    if (value == 0.0) continue;
    const auto [dst, src] = key;
    p.set_W(dst / 2, state_of(dst % 2), src / 2, state_of(src % 2), value);
  }
  for (std::size_t i = 0; i < n; ++i)
    for (State u : {State::A, State::B})
      p.set_b(i, u, bm.bias(i, u) - bm.bias(i, other(u)));
  return p;
}

/// Negated exponent of the Boltzmann density: p(y) ∝ exp(−energy(y)).
inline double energy(const BoltzmannMachine& bm, const Assignment& y) {
  if (y.size() != bm.size())
    throw config_error("assignment covers " + std::to_string(y.size()) +
                       " of " + std::to_string(bm.size()) + " units");
  double pair = 0.0;
  for (const auto& [k, value] : bm.couplings())
    if (y[k.i] == k.u && y[k.j] == k.v) pair += value;
  double field = 0.0;
  for (std::size_t i = 0; i < bm.size(); ++i) field += bm.bias(i, y[i]);
  return -0.5 * pair + field;
}

/// Unit i takes bit i of `index` (A=0, B=1).
inline Assignment assignment_from_index(std::uint64_t index, std::size_t n) {
  Assignment y(n);
  for (std::size_t i = 0; i < n; ++i)
    y[i] = ((index >> i) & 1u) ? State::B : State::A;
  return y;
}

namespace detail {
inline void require_enumerable(std::size_t units) {
  if (units > kMaxEnumerationUnits)
    throw capacity_error("exact enumeration limited to " +
                         std::to_string(kMaxEnumerationUnits) + " units, got " +
                         std::to_string(units));
}

inline std::vector<double> normalize_log_weights(std::vector<double> logw) {
  const double top = *std::max_element(logw.begin(), logw.end());
  double total = 0.0;
  for (auto& v : logw) {
    v = std::exp(v - top);
    total += v;
  }
  for (auto& v : logw) v /= total;
  return logw;
}
}  // namespace detail

/// Probability of every assignment, indexed as in assignment_from_index.
inline std::vector<double> exact_joint(const BoltzmannMachine& bm) {
  detail::require_enumerable(bm.size());
  require_valid(bm);
  const std::uint64_t count = std::uint64_t{1} << bm.size();
  std::vector<double> logw(count);
  for (std::uint64_t s = 0; s < count; ++s)
    logw[s] = -energy(bm, assignment_from_index(s, bm.size()));
  return detail::normalize_log_weights(std::move(logw));
}

/// Marginal (p_A, p_B) for one unit.
using Marginal = std::array<double, 2>;

/// Posterior marginals of every hidden unit given an observation of all
/// visible units, by clamped enumeration over the hidden units.
inline std::map<std::size_t, Marginal> exact_posterior_marginals(
    const BoltzmannMachine& bm, const Observation& observed) {
  require_valid(bm);
  for (auto i : bm.visible())
    if (!observed.count(i))
      throw config_error("observation does not cover visible unit " +
                         std::to_string(i));
  auto diags = validate(bm, observed);
  if (!diags.empty()) throw config_error(diags.front().message);

  const auto hidden = bm.hidden();
  detail::require_enumerable(hidden.size());
  Assignment y(bm.size(), State::A);
  for (const auto& [i, s] : observed) y[i] = s;

  const std::uint64_t count = std::uint64_t{1} << hidden.size();
  std::vector<double> logw(count);
  for (std::uint64_t s = 0; s < count; ++s) {
    for (std::size_t h = 0; h < hidden.size(); ++h)
      y[hidden[h]] = ((s >> h) & 1u) ? State::B : State::A;
    logw[s] = -energy(bm, y);
  }
  const auto p = detail::normalize_log_weights(std::move(logw));

  std::map<std::size_t, Marginal> out;
  for (std::size_t h = 0; h < hidden.size(); ++h) {
    double pb = 0.0;
    for (std::uint64_t s = 0; s < count; ++s)
      if ((s >> h) & 1u) pb += p[s];
    out[hidden[h]] = {1.0 - pb, pb};
  }
  return out;
}

}  // namespace ssi
