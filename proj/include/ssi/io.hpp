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

// JSON and CSV file formats. Numbers are written in shortest round-trip
// form so repeated runs produce byte-identical files.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "ssi/bm_model.hpp"
#include "ssi/inference.hpp"
#include "ssi/kernels.hpp"
#include "ssi/network.hpp"
#include "ssi/transforms.hpp"

namespace ssi::io {

using nlohmann::json;

inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

/// FNV-1a over the canonical (sorted-key) JSON dump, as 16 hex digits.
inline std::string config_hash(const json& config) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : config.dump()) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

/// Provenance block embedded in every output file.
struct Provenance {
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string version = kVersion;

  json to_json() const {
    return {{"seed", seed}, {"config_hash", config_hash}, {"tool_version", version}};
  }
  std::string csv_comment() const {
    return "# ssi version=" + version + " seed=" + std::to_string(seed) +
           " config_hash=" + config_hash + "\n";
  }
};

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw config_error("cannot parse '" + path + "': " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error("cannot write '" + path + "'");
  out << text;
}

namespace detail {
template <class T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) throw config_error(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw config_error(std::string("bad field '") + key + "': " + e.what());
  }
}
}  // namespace detail

// ---------------------------------------------------------------- models

inline BoltzmannMachine model_from_json(const json& j) {
  using detail::field;
  if (!j.is_object()) throw config_error("model file must hold a JSON object");
  const auto n = field<std::size_t>(j, "n");
  BoltzmannMachine bm(n);
  std::set<CouplingKey> seen;
  if (j.contains("V")) {
    for (const auto& e : j.at("V")) {
      const CouplingKey key{field<std::size_t>(e, "i"), parse_state(field<std::string>(e, "u")),
                            field<std::size_t>(e, "j"), parse_state(field<std::string>(e, "v"))};
      if (key.i >= n || key.j >= n) throw config_error("coupling index out of range");
      if (!seen.insert(key).second)
        throw validation_error("duplicate coupling entry " + describe(key));
      bm.set_coupling(key.i, key.u, key.j, key.v, field<double>(e, "value"));
    }
  }
  std::set<std::pair<std::size_t, State>> seen_bias;
  if (j.contains("c")) {
    for (const auto& e : j.at("c")) {
      const auto i = field<std::size_t>(e, "i");
      const auto u = parse_state(field<std::string>(e, "u"));
      if (i >= n) throw config_error("bias index out of range");
      if (!seen_bias.insert({i, u}).second)
        throw validation_error("duplicate bias entry for unit " + std::to_string(i));
      bm.set_bias(i, u, field<double>(e, "value"));
    }
  }
  if (j.contains("visible")) {
    const auto vis = field<std::vector<std::size_t>>(j, "visible");
    for (auto i : vis)
      if (i >= n) throw config_error("visible index out of range");
    bm.set_visible({vis.begin(), vis.end()});
  }
  if (j.contains("layers")) {
    const auto layers = field<std::vector<std::vector<std::size_t>>>(j, "layers");
    for (const auto& l : layers)
      for (auto i : l)
        if (i >= n) throw config_error("layer index out of range");
    bm.set_layers(layers);
  }
  require_valid(bm);
  return bm;
}

inline json model_to_json(const BoltzmannMachine& bm) {
  json j;
  j["n"] = bm.size();
  j["visible"] = std::vector<std::size_t>(bm.visible().begin(), bm.visible().end());
  json V = json::array();
  for (const auto& [k, value] : bm.couplings())
    V.push_back({{"i", k.i}, {"u", std::string(1, symbol(k.u))},
                 {"j", k.j}, {"v", std::string(1, symbol(k.v))}, {"value", value}});
  j["V"] = V;
  json c = json::array();
  for (std::size_t i = 0; i < bm.size(); ++i)
    for (State u : {State::A, State::B})
      if (bm.bias(i, u) != 0.0)
        c.push_back({{"i", i}, {"u", std::string(1, symbol(u))}, {"value", bm.bias(i, u)}});
  j["c"] = c;
  if (!bm.layers().empty()) j["layers"] = bm.layers();
  return j;
}

/// {"observed": [{"i": 0, "state": "A"}, ...]}
inline Observation observation_from_json(const json& j) {
  Observation obs;
  if (!j.contains("observed")) throw config_error("observation file needs 'observed'");
  for (const auto& e : j.at("observed")) {
    const auto i = detail::field<std::size_t>(e, "i");
    if (!obs.emplace(i, parse_state(detail::field<std::string>(e, "state"))).second)
      throw config_error("unit " + std::to_string(i) + " observed twice");
  }
  return obs;
}

inline json observation_to_json(const Observation& obs) {
  json arr = json::array();
  for (const auto& [i, s] : obs) arr.push_back({{"i", i}, {"state", std::string(1, symbol(s))}});
  return {{"observed", arr}};
}

// -------------------------------------------------------------- networks

/// W is either a dense array of rows or a list of {"i","j","value"} triplets.
inline LnpNetwork network_from_json(const json& j) {
  using detail::field;
  const auto n = field<std::size_t>(j, "n");
  LnpNetwork net(n, field<double>(j, "a"), field<double>(j, "eps_step"));
  const auto& W = j.at("W");
  if (!W.is_array()) throw config_error("W must be an array");
  if (!W.empty() && W.front().is_array()) {
    if (W.size() != n) throw config_error("dense W needs n rows");
    for (std::size_t i = 0; i < n; ++i) {
      if (W[i].size() != n) throw config_error("dense W needs n columns");
      for (std::size_t k = 0; k < n; ++k) net.w(i, k) = W[i][k].get<double>();
    }
  } else {
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& e : W) {
      const auto i = field<std::size_t>(e, "i");
      const auto k = field<std::size_t>(e, "j");
      if (i >= n || k >= n) throw config_error("W triplet index out of range");
      if (!seen.insert({i, k}).second) throw validation_error("duplicate W triplet");
      net.w(i, k) = field<double>(e, "value");
    }
  }
  if (j.contains("e")) {
    net.e = field<std::vector<double>>(j, "e");
    if (net.e.size() != n) throw config_error("e needs n entries");
  }
  if (j.contains("sign") && !j.at("sign").is_null()) net.sign = field<std::vector<int>>(j, "sign");
  require_valid(net);
  return net;
}

inline json network_to_json(const LnpNetwork& net) {
  json W = json::array();
  for (std::size_t i = 0; i < net.n; ++i) {
    const auto r = net.row(i);
    W.push_back(std::vector<double>(r.begin(), r.end()));
  }
  json j{{"n", net.n}, {"W", W}, {"e", net.e}, {"a", net.a}, {"eps_step", net.eps_step}};
  if (net.sign) j["sign"] = *net.sign;
  return j;
}

inline json record_to_json(const TransformRecord& r) {
  json inv = json::array();
  for (const auto& [old, role] : r.inverse) inv.push_back({{"old", old}, {"role", to_string(role)}});
  return {{"kind", to_string(r.kind)}, {"forward", r.forward}, {"inverse", inv}};
}

inline TransformRecord record_from_json(const json& j) {
  TransformRecord r;
  r.kind = parse_transform_kind(detail::field<std::string>(j, "kind"));
  r.forward = detail::field<std::vector<std::vector<std::size_t>>>(j, "forward");
  for (const auto& e : j.at("inverse"))
    r.inverse.emplace_back(detail::field<std::size_t>(e, "old"),
                           parse_role(detail::field<std::string>(e, "role")));
  if (!r.consistent()) throw validation_error("transform record is inconsistent");
  return r;
}

// --------------------------------------------------------------- configs

inline json kernel_to_json(const KernelSpec& k) {
  return {{"family", to_string(k.family)}, {"decay", k.decay}, {"a", k.a},
          {"eps_step", k.eps_step}, {"K", k.K}};
}

inline KernelSpec kernel_from_json(const json& j) {
  KernelSpec k;
  if (j.contains("family")) k.family = parse_kernel_family(j.at("family").get<std::string>());
  if (j.contains("decay")) k.decay = j.at("decay").get<double>();
  if (j.contains("a")) k.a = j.at("a").get<double>();
  if (j.contains("eps_step")) k.eps_step = j.at("eps_step").get<double>();
  if (j.contains("K")) k.K = j.at("K").get<std::size_t>();
  Kernel check(k);  // throws on invalid parameters
  return k;
}

inline json run_config_to_json(const RunConfig& c) {
  json j{{"algorithm", to_string(c.algorithm)},
         {"schedule", to_string(c.schedule)},
         {"steps", c.steps},
         {"seed", c.seed},
         {"kernel", kernel_to_json(c.kernel)},
         {"init", to_string(c.init)}};
  if (c.init == InitKind::user_vector) j["init_theta"] = c.init_theta;
  return j;
}

// ------------------------------------------------------------------ CSV

/// `t,unit,channel,theta,phi,x`, one row per (step, channel).
inline std::string trajectory_csv(const Trajectory& tr, const Provenance& prov) {
  std::string out = prov.csv_comment();
  out += "t,unit,channel,theta,phi,x\n";
  for (std::uint64_t t = 1; t <= tr.steps; ++t)
    for (std::size_t c = 0; c < tr.channels; ++c) {
      out += std::to_string(t);
      out += ',';
      out += std::to_string(tr.unit_label[c]);
      out += ',';
      out += tr.channel_label[c];
      out += ',';
      out += format_double(tr.theta_at(t, c));
      out += ',';
      out += format_double(tr.phi_at(t, c));
      out += ',';
      out += tr.x_at(t, c) ? '1' : '0';
      out += '\n';
    }
  return out;
}

}  // namespace ssi::io
