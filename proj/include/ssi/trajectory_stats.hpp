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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ssi/common.hpp"
#include "ssi/inference.hpp"
#include "ssi/transforms.hpp"

namespace ssi {

/// Arithmetic mean with one refinement pass, so a constant series returns
/// exactly its value.
inline double mean_of(std::span<const double> v) {
  if (v.empty()) return 0.0;
  const double n = static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += x;
  const double m = s / n;
  double r = 0.0;
  for (double x : v) r += x - m;
  return m + r / n;
}

/// Sample standard deviation (n − 1 denominator; 0 for fewer than 2 values).
inline double stddev_of(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

/// Trailing moving average; the first window−1 entries average what exists.
/// Each window is summed afresh (no running sum to drift).
inline std::vector<double> moving_average(std::span<const double> v, std::size_t window) {
  if (window < 1) throw config_error("moving-average window must be >= 1");
  std::vector<double> out(v.size());
  for (std::size_t t = 0; t < v.size(); ++t) {
    const std::size_t first = t + 1 >= window ? t + 1 - window : 0;
    double sum = 0.0;
    for (std::size_t k = first; k <= t; ++k) sum += v[k];
    out[t] = sum / static_cast<double>(t + 1 - first);
  }
  return out;
}

/// Linear-interpolated quantile, q ∈ [0,1].
inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

struct ChannelSummary {
  double mean = 0.0;
  double std = 0.0;
  double terminal_mean = 0.0;
  std::vector<double> moving_average;
};

struct TrajectorySummary {
  std::vector<ChannelSummary> channels;
};

inline constexpr std::size_t kDefaultMovingWindow = 30;
inline constexpr std::size_t kDefaultTerminalWindow = 50;

inline ChannelSummary summarize_series(std::span<const double> series,
                                       std::size_t window,
                                       std::size_t terminal_window) {
  if (window < 1 || terminal_window < 1 || window > series.size() ||
      terminal_window > series.size())
    throw config_error("summary windows must lie in [1, trajectory length]");
  ChannelSummary s;
  s.mean = mean_of(series);
  s.std = stddev_of(series);
  s.terminal_mean = mean_of(series.subspan(series.size() - terminal_window));
  s.moving_average = moving_average(series, window);
  return s;
}

/// Per-channel statistics of the θ series of a trajectory.
inline TrajectorySummary summarize(const Trajectory& tr,
                                   std::size_t window = kDefaultMovingWindow,
                                   std::size_t terminal_window = kDefaultTerminalWindow) {
  TrajectorySummary out;
  for (std::size_t c = 0; c < tr.channels; ++c)
    out.channels.push_back(summarize_series(tr.theta_series(c), window, terminal_window));
  return out;
}

struct ScatterPoint {
  std::size_t channel;
  double x;  // SSI trajectory mean
  double y;  // converged variational value
};

struct ScatterReport {
  std::vector<ScatterPoint> pairs;
  double max_abs_deviation = 0.0;
  double mean_abs_deviation = 0.0;
};

/// SSI terminal-window means against the final variational θ, per channel.
inline ScatterReport scatter_mean_vs_var(const Trajectory& ssi_run,
                                         const Trajectory& var_run,
                                         std::span<const std::size_t> channels,
                                         std::uint64_t terminal_window) {
  if (ssi_run.channels != var_run.channels ||
      ssi_run.unit_label != var_run.unit_label ||
      ssi_run.channel_label != var_run.channel_label)
    throw config_error("scatter: runs are on different models");
  if (terminal_window < 1 || terminal_window > ssi_run.steps || var_run.steps < 1)
    throw config_error("scatter: terminal window out of range");
  ScatterReport r;
  const auto var_final = var_run.final_theta();
  for (auto c : channels) {
    if (c >= ssi_run.channels) throw config_error("scatter: channel out of range");
    const auto series = ssi_run.theta_series(c);
    const double m = mean_of(std::span<const double>(series).subspan(
        series.size() - terminal_window));
    r.pairs.push_back({c, m, var_final[c]});
    const double dev = std::abs(m - var_final[c]);
    r.max_abs_deviation = std::max(r.max_abs_deviation, dev);
    r.mean_abs_deviation += dev;
  }
  if (!r.pairs.empty()) r.mean_abs_deviation /= static_cast<double>(r.pairs.size());
  return r;
}

struct MeanStd {
  double mean;
  double std;
};

struct StdMeanReport {
  std::vector<MeanStd> pairs;
  /// mean std over channels with mean in [0,0.1] ∪ [0.9,1]
  double extreme_std = 0.0;
  std::size_t extreme_count = 0;
  /// mean std over channels with mean in [0.4,0.6]
  double center_std = 0.0;
  std::size_t center_count = 0;
};

inline StdMeanReport std_vs_mean(const std::vector<std::vector<double>>& series) {
  StdMeanReport r;
  for (const auto& s : series) {
    const MeanStd p{mean_of(s), stddev_of(s)};
    r.pairs.push_back(p);
    if (p.mean <= 0.1 || p.mean >= 0.9) {
      r.extreme_std += p.std;
      ++r.extreme_count;
    } else if (p.mean >= 0.4 && p.mean <= 0.6) {
      r.center_std += p.std;
      ++r.center_count;
    }
  }
  if (r.extreme_count) r.extreme_std /= static_cast<double>(r.extreme_count);
  if (r.center_count) r.center_std /= static_cast<double>(r.center_count);
  return r;
}

/// (mean, std) of the θ series of the given channels over the last `window`
/// steps (the whole run when window is 0).
inline StdMeanReport std_vs_mean(const Trajectory& tr,
                                 std::span<const std::size_t> channels,
                                 std::uint64_t window = 0) {
  if (window > tr.steps) throw config_error("std_vs_mean: window too long");
  std::vector<std::vector<double>> series;
  for (auto c : channels) {
    auto s = tr.theta_series(c);
    if (window) s.erase(s.begin(), s.end() - static_cast<std::ptrdiff_t>(window));
    series.push_back(std::move(s));
  }
  return std_vs_mean(series);
}

struct SplitResiduals {
  std::vector<double> event_std;  // std over time of θ_A + θ_B − 1, per unit
  std::vector<double> dale_std;   // std over time of excit − inhib, per pair
  double event_median = 0.0, event_q90 = 0.0, event_max = 0.0;
  double dale_median = 0.0, dale_q90 = 0.0, dale_max = 0.0;
};

/// Residual spread of the identities a split network should preserve.
inline SplitResiduals split_residuals(const ReadbackResult& rb, std::uint64_t burn_in = 0) {
  if (burn_in >= rb.steps && rb.steps > 0)
    throw config_error("split_residuals: burn-in covers the whole run");
  auto tail = [&](std::vector<double> s) {
    s.erase(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(burn_in));
    return s;
  };
  SplitResiduals r;
  for (std::size_t i = 0; i < rb.event_units; ++i)
    r.event_std.push_back(stddev_of(tail(rb.event_residual_series(i))));
  for (std::size_t k = 0; k < rb.dale_pairs.size(); ++k)
    r.dale_std.push_back(stddev_of(tail(rb.dale_residual_series(k))));
  auto fill = [](const std::vector<double>& v, double& med, double& q90, double& mx) {
    med = quantile(v, 0.5);
    q90 = quantile(v, 0.9);
    mx = v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
  };
  fill(r.event_std, r.event_median, r.event_q90, r.event_max);
  fill(r.dale_std, r.dale_median, r.dale_q90, r.dale_max);
  return r;
}

struct HistogramBin {
  double lo, hi;
  std::size_t count;
};

/// Equal-width bins over [lo, hi]; values outside are clamped to the edge bins.
inline std::vector<HistogramBin> histogram(std::span<const double> values,
                                           std::size_t bins, double lo, double hi) {
  if (bins < 1 || !(hi > lo)) throw config_error("histogram needs bins >= 1 and hi > lo");
  std::vector<HistogramBin> out(bins);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t b = 0; b < bins; ++b)
    out[b] = {lo + width * static_cast<double>(b), lo + width * static_cast<double>(b + 1), 0};
  for (double v : values) {
    auto b = static_cast<std::ptrdiff_t>(std::floor((v - lo) / width));
    b = std::clamp<std::ptrdiff_t>(b, 0, static_cast<std::ptrdiff_t>(bins) - 1);
    ++out[static_cast<std::size_t>(b)].count;
  }
  return out;
}

}  // namespace ssi
