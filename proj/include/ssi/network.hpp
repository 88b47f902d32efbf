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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ssi/bm_model.hpp"
#include "ssi/common.hpp"

namespace ssi {

/// Neuron-level network. Row i of W holds the incoming weights of neuron i;
/// rate λ_i = σ(Σ_j W_ij·y_j + e_i).
struct LnpNetwork {
  std::size_t n = 0;
  std::vector<double> W;  // n×n row-major
  std::vector<double> e;
  double a = 1.0;
  double eps_step = 1.0;
  /// Optional outgoing sign per neuron: +1 excitatory, −1 inhibitory,
  /// 0 no outgoing synapses.
  std::optional<std::vector<int>> sign;

  LnpNetwork() = default;
  LnpNetwork(std::size_t size, double a_, double eps_)
      : n(size), W(size * size, 0.0), e(size, 0.0), a(a_), eps_step(eps_) {
    if (size > kMaxDenseUnits)
      throw capacity_error("network size " + std::to_string(size) +
                           " exceeds dense limit");
  }

  double& w(std::size_t i, std::size_t j) { return W[i * n + j]; }
  double w(std::size_t i, std::size_t j) const { return W[i * n + j]; }
  std::span<const double> row(std::size_t i) const {
    return {W.data() + i * n, n};
  }
};

inline std::vector<Diagnostic> validate(const LnpNetwork& net) {
  std::vector<Diagnostic> out;
  if (net.W.size() != net.n * net.n)
    out.push_back({"shape", "W must be n×n"});
  if (net.e.size() != net.n) out.push_back({"shape", "e must have n entries"});
  const double ae = net.a * net.eps_step;
  if (!(net.a > 0.0) || !(net.eps_step > 0.0) || !(ae <= 1.0))
    out.push_back({"trace_constant", "a*eps_step must lie in (0,1]"});
  for (double v : net.W)
    if (!std::isfinite(v)) {
      out.push_back({"non_finite", "W has a non-finite entry"});
      break;
    }
  for (double v : net.e)
    if (!std::isfinite(v)) {
      out.push_back({"non_finite", "e has a non-finite entry"});
      break;
    }
  if (net.sign && out.empty()) {
    if (net.sign->size() != net.n) {
      out.push_back({"shape", "sign must have n entries"});
    } else {
      for (std::size_t j = 0; j < net.n; ++j) {
        const int s = (*net.sign)[j];
        for (std::size_t i = 0; i < net.n; ++i) {
          const double v = net.w(i, j);
          if ((v > 0.0 && s != 1) || (v < 0.0 && s != -1)) {
            out.push_back({"dale", "neuron " + std::to_string(j) +
                                       " has an outgoing weight violating its sign tag"});
            break;
          }
        }
      }
    }
  }
  return out;
}

inline void require_valid(const LnpNetwork& net) {
  auto diags = validate(net);
  if (!diags.empty()) {
    std::string msg = "invalid network:";
    for (const auto& d : diags) msg += " [" + d.code + "] " + d.message + ";";
    throw validation_error(msg);
  }
}

/// λ = σ(W·y + e). Row sums run in ascending source order.
inline std::vector<double> rate(const LnpNetwork& net, std::span<const double> y) {
  if (y.size() != net.n) throw config_error("trace vector has wrong length");
  std::vector<double> lambda(net.n);
  for (std::size_t i = 0; i < net.n; ++i) {
    double drive = 0.0;
    const auto r = net.row(i);
    for (std::size_t j = 0; j < net.n; ++j)
      if (r[j] != 0.0) drive += r[j] * y[j];
    lambda[i] = logistic(drive + net.e[i]);
  }
  return lambda;
}

/// The two-neuron bistable example: W=[[0,20],[15,0]], e=(−15,−10), a=0.5, ε=1.
inline LnpNetwork two_neuron_bistable() {
  LnpNetwork net(2, 0.5, 1.0);
  net.w(0, 1) = 20.0;
  net.w(1, 0) = 15.0;
  net.e = {-15.0, -10.0};
  return net;
}

}  // namespace ssi
