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
#include <stdexcept>
#include <string>

namespace ssi {

inline constexpr const char* kVersion = "0.3.0";

/// Failure category. The CLI maps these onto its exit codes.
enum class ErrorKind { config, validation, capacity };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error config_error(const std::string& what) {
  return {ErrorKind::config, what};
}
inline Error validation_error(const std::string& what) {
  return {ErrorKind::validation, what};
}
inline Error capacity_error(const std::string& what) {
  return {ErrorKind::capacity, what};
}

/// Two-symbol unit alphabet. Encoded A=0, B=1.
enum class State : std::uint8_t { A = 0, B = 1 };

inline constexpr State other(State s) noexcept {
  return s == State::A ? State::B : State::A;
}
inline constexpr std::size_t index_of(State s) noexcept {
  return static_cast<std::size_t>(s);
}
inline constexpr State state_of(std::size_t u) noexcept {
  return u == 0 ? State::A : State::B;
}
inline constexpr char symbol(State s) noexcept {
  return s == State::A ? 'A' : 'B';
}
inline State parse_state(const std::string& s) {
  if (s == "A") return State::A;
  if (s == "B") return State::B;
  throw config_error("unknown state symbol '" + s + "' (expected \"A\" or \"B\")");
}

/// Logistic function, evaluated without overflow for large |x|.
inline double logistic(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double z = std::exp(x);
  return z / (1.0 + z);
}

}  // namespace ssi
