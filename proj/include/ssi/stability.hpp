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

// Fixed points of the deterministic trace dynamics
//   y' = (1 − aε)·y + aε·σ(W·y + e),
// their linear stability, and ensemble statistics of the stochastic network
// around them.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "ssi/common.hpp"
#include "ssi/lnp_sim.hpp"
#include "ssi/network.hpp"
#include "ssi/rng.hpp"

namespace ssi {

inline std::vector<double> deterministic_step(const LnpNetwork& net,
                                              std::span<const double> y) {
  const double ae = net.a * net.eps_step;
  auto out = rate(net, y);
  for (std::size_t i = 0; i < net.n; ++i) out[i] = (1.0 - ae) * y[i] + ae * out[i];
  return out;
}

/// ‖y − σ(W·y + e)‖∞
inline double fixed_point_residual(const LnpNetwork& net, std::span<const double> y) {
  const auto lambda = rate(net, y);
  double worst = 0.0;
  for (std::size_t i = 0; i < net.n; ++i)
    worst = std::max(worst, std::abs(y[i] - lambda[i]));
  return worst;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

enum class Stability { stable, unstable };

inline std::string to_string(Stability s) {
  return s == Stability::stable ? "stable" : "unstable";
}

struct Classification {
  Stability stability = Stability::stable;
  double spectral_radius = 0.0;
};

/// Jacobian of the deterministic map at y.
inline Eigen::MatrixXd jacobian(const LnpNetwork& net, std::span<const double> y) {
  const double ae = net.a * net.eps_step;
  const auto lambda = rate(net, y);
  Eigen::MatrixXd J = Eigen::MatrixXd::Identity(net.n, net.n) * (1.0 - ae);
  for (std::size_t i = 0; i < net.n; ++i) {
    const double slope = lambda[i] * (1.0 - lambda[i]);
    for (std::size_t j = 0; j < net.n; ++j)
      J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) +=
          ae * slope * net.w(i, j);
  }
  return J;
}

inline Classification classify(const LnpNetwork& net, std::span<const double> y_star,
                               double residual_tol = 1e-6) {
  if (y_star.size() != net.n) throw config_error("fixed point has wrong length");
  if (fixed_point_residual(net, y_star) > residual_tol)
    throw config_error("classify: input is not a fixed point");
  const Eigen::MatrixXd J = jacobian(net, y_star);
  const Eigen::EigenSolver<Eigen::MatrixXd> solver(J, false);
  double radius = 0.0;
  for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k)
    radius = std::max(radius, std::abs(solver.eigenvalues()[k]));
  return {radius < 1.0 ? Stability::stable : Stability::unstable, radius};
}

struct FixedPoint {
  std::vector<double> y;
  double residual = 0.0;
  Stability classification = Stability::stable;
  double spectral_radius = 0.0;
};

struct FixedPointReport {
  std::vector<FixedPoint> points;
  std::size_t seeds_used = 0;
  std::vector<std::string> diagnostics;
};

struct FixedPointOptions {
  std::size_t grid_density = 11;     // per dimension, grid mode (n ≤ 6)
  std::size_t random_seeds = 1000;   // multi-start mode (n > 6)
  double tol = 1e-10;                // step-size convergence threshold
  std::size_t max_iters = 100'000;
  double dedup_radius = 1e-4;
  double verify_tol = 1e-8;          // residual required of reported points
  bool newton = true;                // also search with damped Newton
  std::uint64_t seed = 0;
};

namespace detail {

inline std::vector<std::vector<double>> start_points(const LnpNetwork& net,
                                                     const FixedPointOptions& opt) {
  std::vector<std::vector<double>> seeds;
  if (net.n <= 6) {
    if (opt.grid_density < 2) throw config_error("grid density must be >= 2");
    std::size_t total = 1;
    for (std::size_t d = 0; d < net.n; ++d) total *= opt.grid_density;
    for (std::size_t k = 0; k < total; ++k) {
      std::vector<double> y(net.n);
      std::size_t rest = k;
      for (std::size_t d = 0; d < net.n; ++d) {
        y[d] = static_cast<double>(rest % opt.grid_density) /
               static_cast<double>(opt.grid_density - 1);
        rest /= opt.grid_density;
      }
      seeds.push_back(std::move(y));
    }
  } else {
    const StreamRng rng(opt.seed);
    for (std::size_t k = 0; k < opt.random_seeds; ++k) {
      std::vector<double> y(net.n);
      for (std::size_t d = 0; d < net.n; ++d) y[d] = rng.uniform(d, k, Lane::init);
      seeds.push_back(std::move(y));
    }
  }
  return seeds;
}

inline std::optional<std::vector<double>> iterate_forward(
    const LnpNetwork& net, std::vector<double> y, const FixedPointOptions& opt) {
  for (std::size_t it = 0; it < opt.max_iters; ++it) {
    auto next = deterministic_step(net, y);
    const double moved = max_abs_diff(next, y);
    y = std::move(next);
    if (moved <= opt.tol) return y;
  }
  return std::nullopt;
}

/// Damped Newton on F(y) = y − σ(W·y + e); finds saddles that forward
/// iteration cannot reach.
inline std::optional<std::vector<double>> newton_solve(const LnpNetwork& net,
                                                       std::vector<double> y) {
  const auto n = static_cast<Eigen::Index>(net.n);
  auto residual_vec = [&](const std::vector<double>& v) {
    const auto lambda = rate(net, v);
    Eigen::VectorXd F(n);
    for (Eigen::Index i = 0; i < n; ++i)
      F(i) = v[static_cast<std::size_t>(i)] - lambda[static_cast<std::size_t>(i)];
    return F;
  };
  Eigen::VectorXd F = residual_vec(y);
  for (int it = 0; it < 200; ++it) {
    if (F.lpNorm<Eigen::Infinity>() <= 1e-14) return y;
    const auto lambda = rate(net, y);
    Eigen::MatrixXd JF = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double slope = lambda[static_cast<std::size_t>(i)] *
                           (1.0 - lambda[static_cast<std::size_t>(i)]);
      for (Eigen::Index j = 0; j < n; ++j)
        JF(i, j) -= slope * net.w(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    }
    const Eigen::VectorXd delta = JF.fullPivLu().solve(-F);
    if (!delta.allFinite()) return std::nullopt;
    double step = 1.0;
    bool improved = false;
    for (int halving = 0; halving < 40; ++halving, step *= 0.5) {
      std::vector<double> trial(y);
      for (Eigen::Index i = 0; i < n; ++i) {
        auto& v = trial[static_cast<std::size_t>(i)];
        v = std::clamp(v + step * delta(i), 0.0, 1.0);
      }
      const Eigen::VectorXd Ft = residual_vec(trial);
      if (Ft.lpNorm<Eigen::Infinity>() < F.lpNorm<Eigen::Infinity>()) {
        y = std::move(trial);
        F = Ft;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  if (F.lpNorm<Eigen::Infinity>() <= 1e-12) return y;
  return std::nullopt;
}

}  // namespace detail

inline FixedPointReport find_fixed_points(const LnpNetwork& net,
                                          const FixedPointOptions& opt = {}) {
  require_valid(net);
  FixedPointReport report;
  const auto seeds = detail::start_points(net, opt);
  report.seeds_used = seeds.size();

  std::vector<std::vector<double>> candidates;
  std::size_t failed = 0;
  for (const auto& s : seeds) {
    if (auto y = detail::iterate_forward(net, s, opt))
      candidates.push_back(std::move(*y));
    else
      ++failed;
    if (opt.newton)
      if (auto y = detail::newton_solve(net, s)) candidates.push_back(std::move(*y));
  }
  if (failed)
    report.diagnostics.push_back(std::to_string(failed) +
                                 " forward iterations did not converge");

  for (auto& y : candidates) {
    const double res = fixed_point_residual(net, y);
    if (res > opt.verify_tol) continue;
    auto same = std::find_if(report.points.begin(), report.points.end(),
                             [&](const FixedPoint& p) {
                               return max_abs_diff(p.y, y) <= opt.dedup_radius;
                             });
    if (same == report.points.end()) {
      report.points.push_back({y, res, Stability::stable, 0.0});
    } else if (res < same->residual) {
      same->y = y;
      same->residual = res;
    }
  }
  for (auto& p : report.points) {
    const auto c = classify(net, p.y);
    p.classification = c.stability;
    p.spectral_radius = c.spectral_radius;
  }
  std::sort(report.points.begin(), report.points.end(),
            [](const FixedPoint& a, const FixedPoint& b) { return a.y > b.y; });
  if (report.points.empty()) report.diagnostics.push_back("no convergent seed");
  return report;
}

struct EnsembleOptions {
  std::size_t trials = 1000;
  std::uint64_t steps = 2000;
  std::uint64_t seed = 0;
  std::vector<std::vector<double>> fixed_points;
  std::vector<double> radii;                // per fixed point; default 0.05
  std::uint64_t terminal_window = 100;
  std::optional<std::vector<double>> start;  // default: uniform random
  std::size_t workers = 0;                   // 0: hardware concurrency
};

struct EnsembleStats {
  std::size_t trials = 0;
  std::uint64_t steps = 0;
  std::vector<std::size_t> basin_counts;
  /// Per fixed point, first step at which a trajectory that had entered the
  /// ball (t = 0 counts) was outside it again.
  std::vector<std::vector<std::uint64_t>> escape_times;
  std::vector<std::size_t> entries;
  std::vector<double> occupancy;
  std::size_t unresolved = 0;
};

inline EnsembleStats ensemble(const LnpNetwork& net, const EnsembleOptions& opt) {
  require_valid(net);
  const std::size_t P = opt.fixed_points.size();
  if (P == 0) throw config_error("ensemble needs at least one fixed point");
  std::vector<double> radii = opt.radii.empty() ? std::vector<double>(P, 0.05) : opt.radii;
  if (radii.size() != P) throw config_error("one radius per fixed point required");
  if (opt.steps < 1 || opt.terminal_window < 1 || opt.terminal_window > opt.steps)
    throw config_error("terminal window must lie in [1, steps]");
  if (opt.start && opt.start->size() != net.n) throw config_error("start has wrong length");

  struct TrialResult {
    std::optional<std::size_t> basin;
    std::vector<std::optional<std::uint64_t>> entry, exit;
    std::vector<std::uint64_t> inside;
  };
  std::vector<TrialResult> results(opt.trials);
  const StreamRng base(opt.seed);

  auto run_trial = [&](std::size_t trial) {
    const StreamRng rng = base.derive(trial);
    LnpState s;
    s.y.resize(net.n);
    for (std::size_t i = 0; i < net.n; ++i)
      s.y[i] = opt.start ? (*opt.start)[i] : rng.uniform(i, 0, Lane::init);
    s.lambda.assign(net.n, 0.0);
    s.x.assign(net.n, 0);
    TrialResult r;
    r.entry.assign(P, std::nullopt);
    r.exit.assign(P, std::nullopt);
    r.inside.assign(P, 0);
    std::vector<double> terminal(net.n, 0.0);
    auto observe = [&](std::uint64_t t) {
      for (std::size_t p = 0; p < P; ++p) {
        const bool in = max_abs_diff(s.y, opt.fixed_points[p]) <= radii[p];
        if (in) {
          ++r.inside[p];
          if (!r.entry[p]) r.entry[p] = t;
        } else if (r.entry[p] && !r.exit[p]) {
          r.exit[p] = t;
        }
      }
    };
    observe(0);
    for (std::uint64_t t = 1; t <= opt.steps; ++t) {
      lnp_step(net, s, rng);
      observe(t);
      if (t > opt.steps - opt.terminal_window)
        for (std::size_t i = 0; i < net.n; ++i) terminal[i] += s.y[i];
    }
    for (auto& v : terminal) v /= static_cast<double>(opt.terminal_window);
    for (std::size_t p = 0; p < P; ++p)
      if (max_abs_diff(terminal, opt.fixed_points[p]) <= radii[p]) {
        r.basin = p;
        break;
      }
    results[trial] = std::move(r);
  };

  std::size_t workers = opt.workers ? opt.workers
                                    : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, std::max<std::size_t>(1, opt.trials));
  if (workers <= 1) {
    for (std::size_t k = 0; k < opt.trials; ++k) run_trial(k);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t k = w; k < opt.trials; k += workers) run_trial(k);
      });
    for (auto& th : pool) th.join();
  }

  EnsembleStats stats;
  stats.trials = opt.trials;
  stats.steps = opt.steps;
  stats.basin_counts.assign(P, 0);
  stats.escape_times.assign(P, {});
  stats.entries.assign(P, 0);
  stats.occupancy.assign(P, 0.0);
  for (const auto& r : results) {
    if (r.basin)
      ++stats.basin_counts[*r.basin];
    else
      ++stats.unresolved;
    for (std::size_t p = 0; p < P; ++p) {
      if (r.entry[p]) ++stats.entries[p];
      if (r.exit[p]) stats.escape_times[p].push_back(*r.exit[p]);
      stats.occupancy[p] += static_cast<double>(r.inside[p]);
    }
  }
  const double samples = static_cast<double>(opt.trials) * static_cast<double>(opt.steps + 1);
  for (auto& o : stats.occupancy) o /= samples;
  return stats;
}

struct RegionViolation {
  std::uint64_t t;
  std::size_t neuron;
  double value;
};

/// Trace values strictly inside (1 − a, a) at any recorded step t ≥ 1.
inline std::vector<RegionViolation> excluded_region_check(double a,
                                                          const SimulationResult& run) {
  if (!(a > 0.5)) throw config_error("excluded region requires a > 0.5");
  std::vector<RegionViolation> out;
  const double lo = 1.0 - a;
  for (std::uint64_t t = 1; t <= run.steps; ++t)
    for (std::size_t i = 0; i < run.n; ++i) {
      const double v = run.trace(t, i);
      if (v > lo && v < a) out.push_back({t, i, v});
    }
  return out;
}

struct FieldSample {
  double y1, y2, sqnorm, v1, v2;
};

/// ‖y − λ(y)‖² and −(y − λ(y)) at one point of a two-neuron network.
inline FieldSample field_at(const LnpNetwork& net, double y1, double y2) {
  const std::vector<double> y{y1, y2};
  const auto lambda = rate(net, y);
  const double d1 = y1 - lambda[0];
  const double d2 = y2 - lambda[1];
  return {y1, y2, d1 * d1 + d2 * d2, -d1, -d2};
}

/// Uniform grid over [0,1]² with `resolution` nodes per axis (endpoints
/// included), y1 varying slowest.
inline std::vector<FieldSample> field_export(const LnpNetwork& net,
                                             std::size_t resolution) {
  if (net.n != 2) throw config_error("field export requires a two-neuron network");
  if (resolution < 2) throw config_error("field resolution must be >= 2");
  std::vector<FieldSample> out;
  out.reserve(resolution * resolution);
  const double step = 1.0 / static_cast<double>(resolution - 1);
  for (std::size_t a = 0; a < resolution; ++a)
    for (std::size_t b = 0; b < resolution; ++b)
      out.push_back(field_at(net, static_cast<double>(a) * step,
                             static_cast<double>(b) * step));
  return out;
}

}  // namespace ssi
