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

// ssi: command-line front end. Every output file carries the seed, a hash
// of the invocation and the tool version; results go to files, progress to
// stdout, diagnostics to stderr as one JSON object per line.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ssi/bm_model.hpp"
#include "ssi/inference.hpp"
#include "ssi/io.hpp"
#include "ssi/lnp_sim.hpp"
#include "ssi/stability.hpp"
#include "ssi/trajectory_stats.hpp"
#include "ssi/transforms.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ssi;

namespace {

bool quiet = false;

void progress(const std::string& msg) {
  if (!quiet) std::cout << msg << '\n';
}

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::config: return 2;
    case ErrorKind::validation: return 3;
    case ErrorKind::capacity: return 4;
  }
  return 1;
}

void diagnose(const char* kind, const std::string& message) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << '\n';
}

std::string kind_name(ErrorKind k) {
  return k == ErrorKind::config ? "config" : k == ErrorKind::validation ? "validation" : "capacity";
}

// ------------------------------------------------------------- parsing

Algorithm parse_algorithm(const std::string& s) {
  if (s == "gibbs") return Algorithm::gibbs;
  if (s == "var") return Algorithm::variational;
  if (s == "ssi") return Algorithm::ssi;
  throw config_error("unknown algorithm '" + s + "' (gibbs|var|ssi)");
}

ScheduleKind parse_schedule(const std::string& s) {
  if (s == "seq-cyclic") return ScheduleKind::sequential_cyclic;
  if (s == "seq-random") return ScheduleKind::sequential_random_scan;
  if (s == "parallel") return ScheduleKind::parallel_synchronized;
  throw config_error("unknown schedule '" + s + "' (seq-cyclic|seq-random|parallel)");
}

InitKind parse_init(const std::string& s) {
  if (s == "random") return InitKind::uniform_random;
  if (s == "half") return InitKind::constant_half;
  throw config_error("unknown init '" + s + "' (random|half)");
}

double parse_number(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw config_error("bad " + what + " '" + s + "'");
}

/// "exp:DECAY:K" or "alpha:A:EPS:K".
KernelSpec parse_kernel(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  KernelSpec k;
  if (parts.size() == 3 && parts[0] == "exp") {
    k.family = KernelFamily::exponential_normalized;
    k.decay = parse_number(parts[1], "kernel decay");
    k.K = static_cast<std::size_t>(parse_number(parts[2], "kernel horizon"));
  } else if (parts.size() == 4 && parts[0] == "alpha") {
    k.family = KernelFamily::discrete_alpha;
    k.a = parse_number(parts[1], "kernel a");
    k.eps_step = parse_number(parts[2], "kernel eps");
    k.K = static_cast<std::size_t>(parse_number(parts[3], "kernel horizon"));
  } else {
    throw config_error("kernel spec must be exp:DECAY:K or alpha:A:EPS:K");
  }
  Kernel check(k);
  return k;
}

/// A model file holds a softmax model; a file with "W" holds a neuron network.
using Loaded = std::variant<BoltzmannMachine, LnpNetwork>;

Loaded load_model(const json& j) {
  if (j.is_object() && j.contains("W")) return io::network_from_json(j);
  return io::model_from_json(j);
}

struct Output {
  fs::path dir;
  io::Provenance prov;

  void json_file(const std::string& name, json body) const {
    body["provenance"] = prov.to_json();
    io::write_text_file((dir / name).string(), body.dump(2) + "\n");
    progress("wrote " + (dir / name).string());
  }
  void text_file(const std::string& name, const std::string& body) const {
    io::write_text_file((dir / name).string(), prov.csv_comment() + body);
    progress("wrote " + (dir / name).string());
  }
};

Output prepare_output(const std::string& dir, std::uint64_t seed, const json& config) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw config_error("cannot create output directory '" + dir + "'");
  return {dir, {seed, io::config_hash(config), kVersion}};
}

// ---------------------------------------------------------------- infer

struct InferArgs {
  std::string model, algorithm = "ssi", schedule = "parallel", kernel = "exp:0.5:30";
  std::string observe, out, init = "random";
  std::uint64_t steps = 1000, seed = 0;
  std::size_t window = kDefaultMovingWindow, terminal = kDefaultTerminalWindow;
};

int cmd_infer(const InferArgs& a) {
  if (a.steps < 1) throw config_error("--steps must be >= 1");
  const json model_json = io::read_json_file(a.model);
  const Loaded loaded = load_model(model_json);

  RunConfig cfg;
  cfg.algorithm = parse_algorithm(a.algorithm);
  cfg.schedule = parse_schedule(a.schedule);
  cfg.steps = a.steps;
  cfg.seed = a.seed;
  cfg.kernel = parse_kernel(a.kernel);
  cfg.init = parse_init(a.init);

  Observation obs;
  json obs_json = nullptr;
  if (!a.observe.empty()) {
    obs_json = io::read_json_file(a.observe);
    obs = io::observation_from_json(obs_json);
  }

  EventGraph graph;
  const BoltzmannMachine* bm = std::get_if<BoltzmannMachine>(&loaded);
  if (bm) {
    for (const auto& [i, s] : obs)
      if (i >= bm->size()) throw config_error("observed unit out of range");
    graph = event_graph(derive_pairwise(*bm), obs);
  } else {
    if (!obs.empty()) throw config_error("--observe applies to softmax models only");
    graph = event_graph(std::get<LnpNetwork>(loaded));
  }

  const json config{{"command", "infer"}, {"model", model_json}, {"observe", obs_json},
                    {"run", io::run_config_to_json(cfg)}, {"window", a.window},
                    {"terminal_window", a.terminal}};
  const Output out = prepare_output(a.out, a.seed, config);

  progress("running " + to_string(cfg.algorithm) + " for " + std::to_string(a.steps) + " steps");
  const Trajectory tr = run(graph, cfg);
  io::write_text_file((out.dir / "trajectory.csv").string(), io::trajectory_csv(tr, out.prov));
  progress("wrote " + (out.dir / "trajectory.csv").string());

  const auto window = std::min<std::uint64_t>(a.window, tr.steps);
  const auto terminal = std::min<std::uint64_t>(a.terminal, tr.steps);
  const auto summary = summarize(tr, window, terminal);
  json channels = json::array();
  for (std::size_t c = 0; c < tr.channels; ++c) {
    const auto& s = summary.channels[c];
    channels.push_back({{"channel", c},
                        {"unit", tr.unit_label[c]},
                        {"label", tr.channel_label[c]},
                        {"mean", s.mean},
                        {"std", s.std},
                        {"terminal_mean", s.terminal_mean},
                        {"final_moving_average", s.moving_average.back()},
                        {"final_theta", tr.theta_at(tr.steps, c)}});
  }
  const auto final_theta = tr.final_theta();
  json body{{"config", config["run"]},
            {"moving_window", window},
            {"terminal_window", terminal},
            {"channels", channels},
            {"residual", fixed_point_residual(graph, final_theta)}};
  if (bm) body["free_energy"] = free_energy(*bm, final_theta);
  out.json_file("summary.json", body);
  return 0;
}

// ------------------------------------------------------------ transform

struct TransformArgs {
  std::string model, ops, out;
  bool bias_to_e = false;
  double a = 1.0, eps = 1.0;
};

json params_json(const PairwiseParams& p) {
  json W = json::array();
  for (std::size_t c = 0; c < p.channels(); ++c)
    for (const auto& e : p.row(c)) W.push_back({{"i", c}, {"j", e.src}, {"value", e.weight}});
  return {{"units", p.size()}, {"W", W}, {"b", p.biases()}};
}

int cmd_transform(const TransformArgs& a) {
  std::vector<std::string> ops;
  {
    std::stringstream ss(a.ops);
    for (std::string op; std::getline(ss, op, ',');)
      if (!op.empty()) ops.push_back(op);
  }
  // Validate the chain before touching any file.
  bool removed = false, split = false, dale = false;
  for (const auto& op : ops) {
    if (op == "remove-bias") {
      if (removed || split) throw config_error("remove-bias must come once, before event-split");
      removed = true;
    } else if (op == "event-split") {
      if (split) throw config_error("event-split given twice");
      if (!removed && !a.bias_to_e)
        throw config_error("event-split needs remove-bias earlier in the chain or --bias-to-e");
      split = true;
    } else if (op == "dale-split") {
      if (!split || dale) throw config_error("dale-split must follow event-split, once");
      dale = true;
    } else {
      throw config_error("unknown op '" + op + "' (remove-bias|event-split|dale-split)");
    }
  }

  const json model_json = io::read_json_file(a.model);
  const BoltzmannMachine bm = io::model_from_json(model_json);
  const json config{{"command", "transform"}, {"model", model_json}, {"ops", ops},
                    {"bias_to_e", a.bias_to_e}, {"a", a.a}, {"eps_step", a.eps}};
  const Output out = prepare_output(a.out, 0, config);

  std::vector<TransformRecord> chain;
  PairwiseParams params = derive_pairwise(bm);
  std::optional<LnpNetwork> net;
  for (const auto& op : ops) {
    if (op == "remove-bias") {
      auto [p, r] = remove_biases(params);
      params = std::move(p);
      chain.push_back(std::move(r));
    } else if (op == "event-split") {
      auto [n, r] = event_split(params, removed ? BiasMode::require_zero : BiasMode::into_input,
                                a.a, a.eps);
      net = std::move(n);
      chain.push_back(std::move(r));
    } else {
      auto [n, r] = dale_split(*net);
      net = std::move(n);
      chain.push_back(std::move(r));
    }
    progress("applied " + op);
  }

  json records = json::array();
  for (const auto& r : chain) records.push_back(io::record_to_json(r));
  out.json_file("records.json", {{"units", bm.size()}, {"chain", records}});
  if (net) {
    require_valid(*net);  // includes the sign scan of a Dale-split network
    out.json_file("network.json", io::network_to_json(*net));
  } else if (removed) {
    out.json_file("params.json", params_json(params));
  } else {
    out.json_file("model.json", io::model_to_json(bm));
  }
  return 0;
}

// ------------------------------------------------------------ stability

struct StabilityArgs {
  std::string net, out;
  bool fixed_points = false;
  std::vector<std::uint64_t> ensemble;
  std::size_t field = 0, workers = 0;
  std::uint64_t seed = 0;
};

json fixed_points_json(const FixedPointReport& r) {
  json pts = json::array();
  for (const auto& p : r.points)
    pts.push_back({{"y", p.y},
                   {"residual", p.residual},
                   {"classification", to_string(p.classification)},
                   {"spectral_radius", p.spectral_radius}});
  return {{"points", pts}, {"seeds_used", r.seeds_used}, {"diagnostics", r.diagnostics}};
}

int cmd_stability(const StabilityArgs& a) {
  if (!a.fixed_points && a.ensemble.empty() && a.field == 0)
    throw config_error("choose at least one of --fixed-points, --ensemble, --field");
  if (!a.ensemble.empty() && (a.ensemble.size() != 2 || a.ensemble[0] < 1 || a.ensemble[1] < 1))
    throw config_error("--ensemble takes TRIALS STEPS, both >= 1");
  if (a.field == 1) throw config_error("--field resolution must be >= 2");

  const json net_json = io::read_json_file(a.net);
  const LnpNetwork net = io::network_from_json(net_json);
  const json config{{"command", "stability"}, {"network", net_json},
                    {"fixed_points", a.fixed_points}, {"ensemble", a.ensemble},
                    {"field", a.field}, {"seed", a.seed}};
  const Output out = prepare_output(a.out, a.seed, config);

  std::optional<FixedPointReport> report;
  if (a.fixed_points || !a.ensemble.empty()) {
    FixedPointOptions fo;
    fo.seed = a.seed;
    report = find_fixed_points(net, fo);
    progress("found " + std::to_string(report->points.size()) + " fixed points");
  }
  if (a.fixed_points) out.json_file("fixed_points.json", fixed_points_json(*report));

  if (!a.ensemble.empty()) {
    EnsembleOptions eo;
    eo.trials = a.ensemble[0];
    eo.steps = a.ensemble[1];
    eo.seed = a.seed;
    eo.workers = a.workers;
    eo.terminal_window = std::min<std::uint64_t>(100, eo.steps);
    for (const auto& p : report->points)
      if (p.classification == Stability::stable) eo.fixed_points.push_back(p.y);
    if (eo.fixed_points.empty()) throw config_error("network has no stable fixed point");
    const auto s = ensemble(net, eo);
    json basins = json::array();
    for (std::size_t k = 0; k < eo.fixed_points.size(); ++k) {
      std::vector<double> esc(s.escape_times[k].begin(), s.escape_times[k].end());
      basins.push_back({{"fixed_point", eo.fixed_points[k]},
                        {"radius", 0.05},
                        {"terminal_count", s.basin_counts[k]},
                        {"terminal_fraction", static_cast<double>(s.basin_counts[k]) /
                                                  static_cast<double>(s.trials)},
                        {"entries", s.entries[k]},
                        {"occupancy", s.occupancy[k]},
                        {"escapes", esc.size()},
                        {"median_escape_step", esc.empty() ? json(nullptr) : json(quantile(esc, 0.5))}});
    }
    out.json_file("ensemble.json", {{"trials", s.trials}, {"steps", s.steps},
                                    {"terminal_window", eo.terminal_window},
                                    {"basins", basins}, {"unresolved", s.unresolved}});
  }

  if (a.field) {
    std::string csv = "y1,y2,sqnorm,v1,v2\n";
    for (const auto& f : field_export(net, a.field)) {
      for (double v : {f.y1, f.y2, f.sqnorm, f.v1}) csv += io::format_double(v) + ",";
      csv += io::format_double(f.v2) + "\n";
    }
    out.text_file("field.csv", csv);
  }
  return 0;
}

// ---------------------------------------------------------- reconstruct

struct ReconstructArgs {
  std::string model, input, algorithm = "ssi", out;
  std::uint64_t up = 200, down = 200, seed = 0;
  std::size_t terminal = kDefaultTerminalWindow;
};

std::vector<int> read_bits(const json& j) {
  const json& arr = j.is_object() && j.contains("bits") ? j.at("bits") : j;
  if (!arr.is_array()) throw config_error("input file must hold a bit array or {\"bits\": [...]}");
  std::vector<int> bits;
  for (const auto& b : arr) {
    if (!b.is_number_integer() || (b.get<int>() != 0 && b.get<int>() != 1))
      throw config_error("input bits must be 0 or 1");
    bits.push_back(b.get<int>());
  }
  return bits;
}

int cmd_reconstruct(const ReconstructArgs& a) {
  if (a.up < 1 || a.down < 1) throw config_error("--up-steps and --down-steps must be >= 1");
  if (a.terminal < 1) throw config_error("--terminal-window must be >= 1");
  const json model_json = io::read_json_file(a.model);
  const BoltzmannMachine bm = io::model_from_json(model_json);
  const auto& layers = bm.layers();
  if (layers.size() < 2) throw config_error("model needs 'layers' metadata with at least two layers");
  const auto& bottom = layers.front();
  const auto& top = layers.back();
  const json input_json = io::read_json_file(a.input);
  const auto bits = read_bits(input_json);
  if (bits.size() != bottom.size())
    throw config_error("input has " + std::to_string(bits.size()) + " bits, bottom layer has " +
                       std::to_string(bottom.size()) + " units");

  const Algorithm alg = parse_algorithm(a.algorithm);
  if (alg == Algorithm::gibbs) throw config_error("reconstruct supports var and ssi");
  const json config{{"command", "reconstruct"}, {"model", model_json}, {"input", input_json},
                    {"algorithm", a.algorithm}, {"up_steps", a.up}, {"down_steps", a.down},
                    {"terminal_window", a.terminal}, {"seed", a.seed}};
  const Output out = prepare_output(a.out, a.seed, config);
  const auto params = derive_pairwise(bm);

  // Activation of state A: terminal-window mean for SSI, last value for var.
  auto activation = [&](const Trajectory& tr, std::size_t unit) {
    const std::size_t c = channel_of(unit, State::A);
    if (alg == Algorithm::variational) return tr.theta_at(tr.steps, c);
    const auto s = tr.theta_series(c);
    const auto w = std::min<std::size_t>(a.terminal, s.size());
    return mean_of(std::span<const double>(s).subspan(s.size() - w));
  };
  auto config_for = [&](std::uint64_t steps, std::uint64_t seed) {
    RunConfig c;
    c.algorithm = alg;
    c.schedule = ScheduleKind::parallel_synchronized;
    c.steps = steps;
    c.seed = seed;
    return c;
  };

  Observation up_obs;
  for (std::size_t k = 0; k < bottom.size(); ++k) up_obs[bottom[k]] = bits[k] ? State::A : State::B;
  const auto up = run(params, up_obs, config_for(a.up, a.seed));
  std::vector<double> top_activation;
  std::vector<int> top_code;
  Observation down_obs;
  for (auto u : top) {
    top_activation.push_back(activation(up, u));
    top_code.push_back(top_activation.back() >= 0.5 ? 1 : 0);
    down_obs[u] = top_code.back() ? State::A : State::B;
  }
  progress("top-layer code fixed; running the downward pass");

  const auto down = run(params, down_obs, config_for(a.down, a.seed + 1));
  std::vector<double> visible;
  std::vector<int> rounded;
  for (auto u : bottom) {
    visible.push_back(activation(down, u));
    rounded.push_back(visible.back() >= 0.5 ? 1 : 0);
  }
  out.json_file("reconstruction.json", {{"input", bits},
                                        {"top_activation", top_activation},
                                        {"top_code", top_code},
                                        {"visible_activation", visible},
                                        {"visible_bits", rounded},
                                        {"matches_input", rounded == bits}});
  return 0;
}

// --------------------------------------------------------------- oracle

struct OracleArgs {
  std::string model, observe, theta, out;
};

int cmd_oracle(const OracleArgs& a) {
  const json model_json = io::read_json_file(a.model);
  if (model_json.is_object() && model_json.contains("n") && model_json["n"].is_number_unsigned() &&
      model_json["n"].get<std::size_t>() > kMaxEnumerationUnits)
    throw config_error("oracle enumerates at most " + std::to_string(kMaxEnumerationUnits) +
                       " units");
  const BoltzmannMachine bm = io::model_from_json(model_json);
  Observation obs;
  json obs_json = nullptr, theta_json = nullptr;
  if (!a.observe.empty()) {
    obs_json = io::read_json_file(a.observe);
    obs = io::observation_from_json(obs_json);
  }
  if (!a.theta.empty()) theta_json = io::read_json_file(a.theta);
  const json config{{"command", "oracle"}, {"model", model_json}, {"observe", obs_json},
                    {"theta", theta_json}};
  const Output out = prepare_output(a.out, 0, config);

  json marginals = json::array();
  for (const auto& [i, m] : exact_posterior_marginals(bm, obs))
    marginals.push_back({{"unit", i}, {"pA", m[0]}, {"pB", m[1]}});
  json body{{"marginals", marginals}};
  if (!theta_json.is_null()) {
    const json& arr = theta_json.is_object() ? theta_json.at("theta") : theta_json;
    const auto theta = arr.get<std::vector<double>>();
    if (theta.size() != 2 * bm.size()) throw config_error("theta needs 2n entries");
    body["free_energy"] = free_energy(bm, theta);
  }
  out.json_file("marginals.json", body);
  return 0;
}

// ------------------------------------------------------ lecam, simulate

int cmd_lecam(double lambda, double eps, std::uint64_t steps, const std::string& dir) {
  const json config{{"command", "lecam"}, {"lambda", lambda}, {"eps_step", eps}, {"steps", steps}};
  const Output out = prepare_output(dir, 0, config);
  const auto r = lecam_check(lambda, eps, steps);
  out.json_file("lecam.json", {{"lambda", r.lambda}, {"eps_step", r.eps}, {"steps", r.steps},
                               {"tv", r.tv}, {"bound", r.bound}, {"within_bound", r.tv <= r.bound},
                               {"counts", r.counts}, {"poisson", r.poisson}});
  return r.tv <= r.bound ? 0 : 3;
}

int cmd_simulate(const std::string& path, std::uint64_t steps, std::uint64_t seed,
                 const std::string& dir) {
  if (steps < 1) throw config_error("--steps must be >= 1");
  const json net_json = io::read_json_file(path);
  const LnpNetwork net = io::network_from_json(net_json);
  const json config{{"command", "simulate"}, {"network", net_json}, {"steps", steps}, {"seed", seed}};
  const Output out = prepare_output(dir, seed, config);
  const auto res = simulate(net, steps, seed);
  std::string csv = "t,neuron,spike,trace,rate\n";
  for (std::uint64_t t = 1; t <= steps; ++t)
    for (std::size_t i = 0; i < net.n; ++i) {
      const std::size_t k = (t - 1) * net.n + i;
      csv += std::to_string(t) + "," + std::to_string(i) + "," + (res.raster[k] ? "1" : "0") +
             "," + io::format_double(res.traces[k]) + "," + io::format_double(res.rates[k]) + "\n";
    }
  out.text_file("raster.csv", csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sampling, variational and spiking inference for softmax Boltzmann machines"};
  app.set_version_flag("--version", std::string(kVersion));
  app.add_flag("-q,--quiet", quiet, "suppress progress output");
  app.require_subcommand(1);

  InferArgs ia;
  auto* infer = app.add_subcommand("infer", "run an inference engine on a model or network");
  infer->add_option("model", ia.model, "model or network JSON")->required();
  infer->add_option("--algorithm", ia.algorithm, "gibbs | var | ssi");
  infer->add_option("--schedule", ia.schedule, "seq-cyclic | seq-random | parallel");
  infer->add_option("--steps", ia.steps, "number of steps");
  infer->add_option("--seed", ia.seed, "64-bit seed");
  infer->add_option("--kernel", ia.kernel, "exp:DECAY:K or alpha:A:EPS:K");
  infer->add_option("--init", ia.init, "random | half");
  infer->add_option("--observe", ia.observe, "observation JSON");
  infer->add_option("--window", ia.window, "moving-average window");
  infer->add_option("--terminal-window", ia.terminal, "terminal-mean window");
  infer->add_option("--out", ia.out, "output directory")->required();

  TransformArgs ta;
  auto* transform = app.add_subcommand("transform", "rewrite a model into a neuron network");
  transform->add_option("model", ta.model, "model JSON")->required();
  transform->add_option("--ops", ta.ops, "comma list of remove-bias,event-split,dale-split");
  transform->add_flag("--bias-to-e", ta.bias_to_e, "event-split keeps biases as external input");
  transform->add_option("--a", ta.a, "trace constant of the produced network");
  transform->add_option("--eps", ta.eps, "time step of the produced network");
  transform->add_option("--out", ta.out, "output directory")->required();

  StabilityArgs sa;
  auto* stability = app.add_subcommand("stability", "fixed points, basins and vector field");
  stability->add_option("net", sa.net, "network JSON")->required();
  stability->add_flag("--fixed-points", sa.fixed_points, "locate and classify fixed points");
  stability->add_option("--ensemble", sa.ensemble, "TRIALS STEPS")->expected(2);
  stability->add_option("--field", sa.field, "grid resolution per axis (two-neuron nets)");
  stability->add_option("--workers", sa.workers, "ensemble threads (0: all cores)");
  stability->add_option("--seed", sa.seed, "64-bit seed");
  stability->add_option("--out", sa.out, "output directory")->required();

  ReconstructArgs ra;
  auto* reconstruct = app.add_subcommand("reconstruct", "clamp, infer up, freeze top, infer down");
  reconstruct->add_option("model", ra.model, "layered model JSON")->required();
  reconstruct->add_option("--input", ra.input, "bit vector JSON")->required();
  reconstruct->add_option("--up-steps", ra.up, "steps of the upward pass");
  reconstruct->add_option("--down-steps", ra.down, "steps of the downward pass");
  reconstruct->add_option("--algorithm", ra.algorithm, "var | ssi");
  reconstruct->add_option("--terminal-window", ra.terminal, "SSI averaging window");
  reconstruct->add_option("--seed", ra.seed, "64-bit seed");
  reconstruct->add_option("--out", ra.out, "output directory")->required();

  OracleArgs oa;
  auto* oracle = app.add_subcommand("oracle", "exact posterior marginals by enumeration");
  oracle->add_option("model", oa.model, "model JSON")->required();
  oracle->add_option("--observe", oa.observe, "observation JSON");
  oracle->add_option("--theta", oa.theta, "θ vector JSON whose free energy to report");
  oracle->add_option("--out", oa.out, "output directory")->required();

  double lambda = 0.0, eps = 1.0;
  std::uint64_t lecam_steps = 100;
  std::string lecam_out;
  auto* lecam = app.add_subcommand("lecam", "Bernoulli spike count against its Poisson limit");
  lecam->add_option("--lambda", lambda, "constant rate")->required();
  lecam->add_option("--eps", eps, "time step");
  lecam->add_option("--steps", lecam_steps, "interval length in steps");
  lecam->add_option("--out", lecam_out, "output directory")->required();

  std::string sim_net, sim_out;
  std::uint64_t sim_steps = 1000, sim_seed = 0;
  auto* sim = app.add_subcommand("simulate", "spike raster of a neuron network");
  sim->add_option("net", sim_net, "network JSON")->required();
  sim->add_option("--steps", sim_steps, "number of steps");
  sim->add_option("--seed", sim_seed, "64-bit seed");
  sim->add_option("--out", sim_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*infer) return cmd_infer(ia);
    if (*transform) return cmd_transform(ta);
    if (*stability) return cmd_stability(sa);
    if (*reconstruct) return cmd_reconstruct(ra);
    if (*oracle) return cmd_oracle(oa);
    if (*lecam) return cmd_lecam(lambda, eps, lecam_steps, lecam_out);
    if (*sim) return cmd_simulate(sim_net, sim_steps, sim_seed, sim_out);
  } catch (const Error& e) {
    diagnose(kind_name(e.kind()).c_str(), e.what());
    return exit_code(e.kind());
  } catch (const json::exception& e) {
    diagnose("config", e.what());
    return 2;
  } catch (const std::exception& e) {
    diagnose("internal", e.what());
    return 1;
  }
  return 2;
}
