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

// Network rewrites that keep the inference algorithm unchanged:
//
//  * shift / remove_biases: add C to b(iu), W(iu,jv) and W(iu,jv̄); exact
//    whenever θ_jA + θ_jB = 1.
//  * event_split: one neuron per event [y_i = u].
//  * dale_split: duplicate mixed-sign neurons into an excitatory and an
//    inhibitory copy sharing the incoming row.
//
// Each rewrite returns a TransformRecord so trajectories on the rewritten
// network can be read back in the original coordinates.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ssi/bm_model.hpp"
#include "ssi/common.hpp"
#include "ssi/inference.hpp"
#include "ssi/network.hpp"

namespace ssi {

enum class TransformKind { bias_removal, event_split, dale_split };
enum class Role { event_A, event_B, excitatory_copy, inhibitory_copy, identity };

inline std::string to_string(TransformKind k) {
  switch (k) {
    case TransformKind::bias_removal: return "bias_removal";
    case TransformKind::event_split: return "event_split";
    case TransformKind::dale_split: return "dale_split";
  }
  return "?";
}
inline TransformKind parse_transform_kind(const std::string& s) {
  if (s == "bias_removal") return TransformKind::bias_removal;
  if (s == "event_split") return TransformKind::event_split;
  if (s == "dale_split") return TransformKind::dale_split;
  throw config_error("unknown transform kind '" + s + "'");
}
inline std::string to_string(Role r) {
  switch (r) {
    case Role::event_A: return "event_A";
    case Role::event_B: return "event_B";
    case Role::excitatory_copy: return "excitatory_copy";
    case Role::inhibitory_copy: return "inhibitory_copy";
    case Role::identity: return "identity";
  }
  return "?";
}
inline Role parse_role(const std::string& s) {
  for (Role r : {Role::event_A, Role::event_B, Role::excitatory_copy,
                 Role::inhibitory_copy, Role::identity})
    if (to_string(r) == s) return r;
  throw config_error("unknown role '" + s + "'");
}

struct TransformRecord {
  TransformKind kind = TransformKind::bias_removal;
  /// old index → new indices
  std::vector<std::vector<std::size_t>> forward;
  /// new index → (old index, role)
  std::vector<std::pair<std::size_t, Role>> inverse;

  std::size_t old_size() const noexcept { return forward.size(); }
  std::size_t new_size() const noexcept { return inverse.size(); }

  /// forward and inverse describe the same bijection-with-copies.
  bool consistent() const {
    std::vector<int> hits(inverse.size(), 0);
    for (std::size_t o = 0; o < forward.size(); ++o)
      for (auto nidx : forward[o]) {
        if (nidx >= inverse.size() || inverse[nidx].first != o) return false;
        ++hits[nidx];
      }
    for (int h : hits)
      if (h != 1) return false;
    return true;
  }
};

inline TransformRecord identity_record(TransformKind kind, std::size_t size) {
  TransformRecord r{kind, {}, {}};
  for (std::size_t k = 0; k < size; ++k) {
    r.forward.push_back({k});
    r.inverse.emplace_back(k, Role::identity);
  }
  return r;
}

/// b(iu) += C, W(iu,jv) += C, W(iu,jv̄) += C. Requires j ∈ M(i).
inline PairwiseParams shift(PairwiseParams p, std::size_t i, std::size_t j,
                            State u, State v, double C) {
  const auto blanket = p.blanket(i);
  if (std::find(blanket.begin(), blanket.end(), j) == blanket.end())
    throw config_error("shift: unit " + std::to_string(j) +
                       " is not in the Markov blanket of unit " + std::to_string(i));
  p.set_b(i, u, p.b(i, u) + C);
  p.set_W(i, u, j, v, p.W(i, u, j, v) + C);
  p.set_W(i, u, j, other(v), p.W(i, u, j, other(v)) + C);
  return p;
}

/// Absorbs every bias into the incoming weights: |M(i)| shifts with
/// C = −b(iu)/|M(i)|, after which b(iu) is exactly 0.
inline std::pair<PairwiseParams, TransformRecord> remove_biases(PairwiseParams p) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto blanket = p.blanket(i);
    for (State u : {State::A, State::B}) {
      const double b = p.b(i, u);
      if (b == 0.0) continue;
      if (blanket.empty())
        throw config_error("remove_biases: unit " + std::to_string(i) +
                           " has a bias but an empty Markov blanket");
      const double C = -b / static_cast<double>(blanket.size());
      for (auto j : blanket) p = shift(std::move(p), i, j, u, State::A, C);
      p.set_b(i, u, 0.0);
    }
  }
  return {std::move(p), identity_record(TransformKind::bias_removal, 2 * p.size())};
}

enum class BiasMode {
  require_zero,  // biases must have been removed
  into_input     // e(iu) = −b(iu)
};

/// One neuron per event channel: neuron 2i+u receives W(iu,jv) from 2j+v.
inline std::pair<LnpNetwork, TransformRecord> event_split(
    const PairwiseParams& p, BiasMode mode = BiasMode::require_zero,
    double a = 1.0, double eps_step = 1.0) {
  const std::size_t m = p.channels();
  LnpNetwork net(m, a, eps_step);
  for (std::size_t c = 0; c < m; ++c) {
    const double b = p.biases()[c];
    if (b != 0.0 && mode == BiasMode::require_zero)
      throw config_error("event_split: nonzero bias on channel " + std::to_string(c) +
                         " (remove biases first or carry them into e)");
    net.e[c] = -b;
    for (const auto& e : p.row(c)) net.w(c, e.src) = e.weight;
  }
  TransformRecord rec{TransformKind::event_split, {}, {}};
  for (std::size_t c = 0; c < m; ++c) {
    rec.forward.push_back({c});
    rec.inverse.emplace_back(c, c % 2 == 0 ? Role::event_A : Role::event_B);
  }
  return {std::move(net), std::move(rec)};
}

/// Splits each neuron whose outgoing weights carry both signs into an
/// excitatory copy (positive outgoing weights) and an inhibitory copy
/// (negative ones); both inherit the full incoming row.
inline std::pair<LnpNetwork, TransformRecord> dale_split(const LnpNetwork& net) {
  require_valid(net);
  const std::size_t n = net.n;
  std::vector<bool> has_pos(n, false), has_neg(n, false);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (net.w(i, j) > 0.0) has_pos[j] = true;
      if (net.w(i, j) < 0.0) has_neg[j] = true;
    }

  TransformRecord rec{TransformKind::dale_split, {}, {}};
  std::vector<int> sign;
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t k = rec.inverse.size();
    if (has_pos[j] && has_neg[j]) {
      rec.forward.push_back({k, k + 1});
      rec.inverse.emplace_back(j, Role::excitatory_copy);
      rec.inverse.emplace_back(j, Role::inhibitory_copy);
      sign.push_back(1);
      sign.push_back(-1);
    } else {
      rec.forward.push_back({k});
      rec.inverse.emplace_back(j, Role::identity);
      sign.push_back(has_pos[j] ? 1 : (has_neg[j] ? -1 : 0));
    }
  }

  LnpNetwork out(rec.new_size(), net.a, net.eps_step);
  for (std::size_t p = 0; p < out.n; ++p) {
    const std::size_t i = rec.inverse[p].first;
    out.e[p] = net.e[i];
    for (std::size_t j = 0; j < n; ++j) {
      const double v = net.w(i, j);
      if (v == 0.0) continue;
      const auto& copies = rec.forward[j];
      const std::size_t q = copies.size() == 2 ? (v > 0.0 ? copies[0] : copies[1])
                                               : copies[0];
      out.w(p, q) = v;
    }
  }
  out.sign = std::move(sign);
  return {std::move(out), std::move(rec)};
}

/// Pushes per-index values of the original coordinates through a chain of
/// records (copies inherit the value of their origin).
template <class T>
std::vector<T> map_forward(const std::vector<TransformRecord>& chain,
                           std::vector<T> values) {
  for (const auto& rec : chain) {
    if (values.size() != rec.old_size())
      throw config_error("record chain does not match value vector");
    std::vector<T> next(rec.new_size());
    for (std::size_t nidx = 0; nidx < rec.new_size(); ++nidx)
      next[nidx] = values[rec.inverse[nidx].first];
    values = std::move(next);
  }
  return values;
}

/// New-network indices that descend from each original index.
inline std::vector<std::vector<std::size_t>> descendants(
    const std::vector<TransformRecord>& chain, std::size_t original_size) {
  std::vector<std::vector<std::size_t>> groups(original_size);
  for (std::size_t k = 0; k < original_size; ++k) groups[k] = {k};
  std::size_t width = original_size;
  for (const auto& rec : chain) {
    if (rec.old_size() != width)
      throw config_error("record chain is not contiguous");
    width = rec.new_size();
    for (auto& g : groups) {
      std::vector<std::size_t> next;
      for (auto idx : g)
        for (auto nidx : rec.forward[idx]) next.push_back(nidx);
      g = std::move(next);
    }
  }
  return groups;
}

/// Update groups of a split network that reproduce the per-unit schedule of
/// the original softmax model with n units.
inline std::vector<std::vector<std::size_t>> unit_groups(
    const std::vector<TransformRecord>& chain, std::size_t units) {
  auto per_channel = descendants(chain, 2 * units);
  std::vector<std::vector<std::size_t>> groups(units);
  for (std::size_t i = 0; i < units; ++i) {
    groups[i] = per_channel[2 * i];
    groups[i].insert(groups[i].end(), per_channel[2 * i + 1].begin(),
                     per_channel[2 * i + 1].end());
  }
  return groups;
}

/// Clamp vector of the split network for an observation of the original model.
inline std::vector<std::optional<double>> map_observation(
    const std::vector<TransformRecord>& chain, std::size_t units,
    const Observation& observed) {
  std::vector<std::optional<double>> clamp(2 * units);
  for (const auto& [i, s] : observed) {
    clamp[channel_of(i, State::A)] = s == State::A ? 1.0 : 0.0;
    clamp[channel_of(i, State::B)] = s == State::B ? 1.0 : 0.0;
  }
  return map_forward(chain, std::move(clamp));
}

struct ReadbackResult {
  std::size_t channels = 0;  // original channel count (2n for a softmax model)
  std::uint64_t steps = 0;
  std::vector<double> theta;  // steps × channels
  /// θ_A + θ_B − 1 per unit (steps × units), present after an event split.
  std::vector<double> event_residual;
  std::size_t event_units = 0;
  /// excitatory − inhibitory copy per split neuron (steps × pairs).
  std::vector<double> dale_residual;
  std::vector<std::size_t> dale_pairs;  // original neuron index of each pair

  double theta_at(std::uint64_t t, std::size_t c) const {
    return theta[(t - 1) * channels + c];
  }
  std::vector<double> event_residual_series(std::size_t unit) const {
    std::vector<double> out(steps);
    for (std::uint64_t t = 0; t < steps; ++t)
      out[t] = event_residual[t * event_units + unit];
    return out;
  }
  std::vector<double> dale_residual_series(std::size_t pair) const {
    std::vector<double> out(steps);
    for (std::uint64_t t = 0; t < steps; ++t)
      out[t] = dale_residual[t * dale_pairs.size() + pair];
    return out;
  }
};

/// Maps θ recorded on the transformed network back to the original
/// coordinates: Dale copies are averaged, event neurons return to their
/// (θ_A, θ_B) channels. Records are given in the order they were applied.
inline ReadbackResult readback(const Trajectory& tr,
                               const std::vector<TransformRecord>& chain) {
  std::size_t width = tr.channels;
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    if (it->new_size() != width || !it->consistent())
      throw config_error("readback: record does not match the trajectory");
    width = it->old_size();
  }

  ReadbackResult out;
  out.steps = tr.steps;
  out.channels = width;
  out.theta.reserve(tr.steps * width);

  // Dale pairs are reported once, for the last Dale split in the chain.
  const TransformRecord* dale = nullptr;
  for (auto it = chain.rbegin(); it != chain.rend(); ++it)
    if (it->kind == TransformKind::dale_split) {
      dale = &*it;
      break;
    }
  if (dale)
    for (std::size_t o = 0; o < dale->old_size(); ++o)
      if (dale->forward[o].size() == 2) out.dale_pairs.push_back(o);
  bool has_event = false;
  for (const auto& rec : chain) has_event |= rec.kind == TransformKind::event_split;
  if (has_event) out.event_units = width / 2;

  std::vector<double> values;
  for (std::uint64_t t = 1; t <= tr.steps; ++t) {
    values.assign(tr.theta.begin() + static_cast<std::ptrdiff_t>((t - 1) * tr.channels),
                  tr.theta.begin() + static_cast<std::ptrdiff_t>(t * tr.channels));
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      const auto& rec = *it;
      if (&rec == dale)
        for (auto o : out.dale_pairs)
          out.dale_residual.push_back(values[rec.forward[o][0]] -
                                      values[rec.forward[o][1]]);
      std::vector<double> prev(rec.old_size(), 0.0);
      for (std::size_t o = 0; o < rec.old_size(); ++o) {
        double sum = 0.0;
        for (auto nidx : rec.forward[o]) sum += values[nidx];
        prev[o] = sum / static_cast<double>(rec.forward[o].size());
      }
      values = std::move(prev);
    }
    if (has_event)
      for (std::size_t i = 0; i < out.event_units; ++i)
        out.event_residual.push_back(values[2 * i] + values[2 * i + 1] - 1.0);
    out.theta.insert(out.theta.end(), values.begin(), values.end());
  }
  return out;
}

}  // namespace ssi
