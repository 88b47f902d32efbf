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

#include "ssi/bm_model.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "test_support.hpp"

using namespace ssi;
using Catch::Approx;
using ssi::testing::random_model;
using ssi::testing::sigmoid;

namespace {

/// Exponent of the unnormalized density, summed over unordered pairs i<j
/// (the symmetric double count cancels the ½).
double log_weight_by_pairs(const BoltzmannMachine& bm, const Assignment& y) {
  double s = 0.0;
  for (std::size_t j = bm.size(); j-- > 0;)
    for (std::size_t i = 0; i < j; ++i) s += bm.coupling(i, y[i], j, y[j]);
  for (std::size_t i = bm.size(); i-- > 0;) s -= bm.bias(i, y[i]);
  return s;
}

}  // namespace

TEST_CASE("validate reports each invariant violation", "[bm_model]") {
  BoltzmannMachine ok(2);
  ok.set_symmetric_coupling(0, State::A, 1, State::A, 1.0);
  CHECK(validate(ok).empty());

  BoltzmannMachine asym(3);
  asym.set_coupling(1, State::A, 2, State::A, 1.0);
  auto d = validate(asym);
  REQUIRE(d.size() == 1);
  CHECK(d[0].code == "symmetry");

  BoltzmannMachine mismatched(3);
  mismatched.set_coupling(1, State::A, 2, State::B, 1.0);
  mismatched.set_coupling(2, State::B, 1, State::A, 2.0);
  d = validate(mismatched);
  REQUIRE(d.size() == 1);
  CHECK(d[0].code == "symmetry");

  BoltzmannMachine self(2);
  self.set_coupling(1, State::A, 1, State::B, 0.5);
  d = validate(self);
  REQUIRE(d.size() == 1);
  CHECK(d[0].code == "self_coupling");

  BoltzmannMachine nonfinite(2);
  nonfinite.set_bias(0, State::A, std::nan(""));
  d = validate(nonfinite);
  REQUIRE(d.size() == 1);
  CHECK(d[0].code == "non_finite");

  BoltzmannMachine vis(2);
  vis.set_visible({0});
  CHECK(validate(vis, {{0, State::A}}).empty());
  d = validate(vis, {{1, State::A}});
  REQUIRE(d.size() == 1);
  CHECK(d[0].code == "observation");
}

TEST_CASE("derive_pairwise subtracts the complementary entries", "[bm_model]") {
  SECTION("single entry") {
    BoltzmannMachine bm(3);
    bm.set_symmetric_coupling(1, State::A, 2, State::A, 1.0);
    const auto p = derive_pairwise(bm);
    CHECK(p.W(1, State::A, 2, State::A) == 1.0);
    CHECK(p.W(1, State::B, 2, State::A) == -1.0);
    CHECK(p.blanket(1) == std::vector<std::size_t>{2});
    CHECK(p.blanket(0).empty());
  }
  SECTION("zero model") {
    const auto p = derive_pairwise(BoltzmannMachine(3));
    for (std::size_t c = 0; c < 6; ++c) {
      CHECK(p.row(c).empty());
      CHECK(p.biases()[c] == 0.0);
    }
    for (std::size_t i = 0; i < 3; ++i) CHECK(p.blanket(i).empty());
  }
  SECTION("random 3-unit model against the definition") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto bm = random_model(3, seed);
      const auto p = derive_pairwise(bm);
      for (std::size_t i = 0; i < 3; ++i)
        for (State u : {State::A, State::B}) {
          CHECK(p.b(i, u) == bm.bias(i, u) - bm.bias(i, other(u)));
          for (std::size_t j = 0; j < 3; ++j)
            for (State v : {State::A, State::B})
              CHECK(p.W(i, u, j, v) ==
                    Approx(ssi::testing::W_by_definition(bm, i, u, j, v)).margin(1e-15));
        }
    }
  }
  SECTION("invalid model is rejected") {
    BoltzmannMachine bad(2);
    bad.set_coupling(0, State::A, 1, State::A, 1.0);
    CHECK_THROWS_AS(derive_pairwise(bad), Error);
  }
}

TEST_CASE("energy is the negated exponent of the model density", "[bm_model]") {
  CHECK(energy(BoltzmannMachine(3), {State::A, State::B, State::A}) == 0.0);

  BoltzmannMachine two(2);
  two.set_symmetric_coupling(0, State::A, 1, State::A, 2.0);
  CHECK(energy(two, {State::A, State::A}) == -2.0);
  CHECK(energy(two, {State::A, State::B}) == 0.0);

  for (std::uint64_t seed = 10; seed < 15; ++seed) {
    const auto bm = random_model(3, seed);
    for (std::uint64_t s = 0; s < 8; ++s) {
      const auto y = assignment_from_index(s, 3);
      CHECK(energy(bm, y) == Approx(-log_weight_by_pairs(bm, y)).margin(1e-12));
    }
  }
  CHECK_THROWS_AS(energy(two, {State::A}), Error);
}

TEST_CASE("exact_joint enumerates a normalized distribution", "[bm_model]") {
  const auto uniform = exact_joint(BoltzmannMachine(2));
  REQUIRE(uniform.size() == 4);
  for (double p : uniform) CHECK(p == Approx(0.25).margin(1e-15));

  // b(A) = c(A) − c(B) = −β favors A by β.
  BoltzmannMachine single(1);
  const double beta = 1.3;
  single.set_bias(0, State::A, -beta);
  const auto p1 = exact_joint(single);
  CHECK(p1[0] == Approx(sigmoid(beta)).margin(1e-14));

  for (std::uint64_t seed = 20; seed < 25; ++seed) {
    const auto bm = random_model(3, seed, 2.0, 1.0);
    const auto p = exact_joint(bm);
    double total = 0.0;
    for (double v : p) total += v;
    CHECK(total == Approx(1.0).margin(1e-12));
    std::size_t argmax = 0, argmin = 0;
    for (std::size_t s = 0; s < p.size(); ++s) {
      if (p[s] > p[argmax]) argmax = s;
      if (energy(bm, assignment_from_index(s, 3)) <
          energy(bm, assignment_from_index(argmin, 3)))
        argmin = s;
    }
    CHECK(argmax == argmin);
  }
  CHECK_THROWS_AS(exact_joint(BoltzmannMachine(21)), Error);
  try {
    exact_joint(BoltzmannMachine(21));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::capacity);
  }
}

TEST_CASE("exact_posterior_marginals by clamped enumeration", "[bm_model]") {
  SECTION("factorized model ignores the observation") {
    BoltzmannMachine bm(3);
    bm.set_bias(0, State::A, 0.7);
    bm.set_bias(1, State::B, -1.1);
    bm.set_bias(2, State::A, 0.2);
    bm.set_visible({2});
    for (State obs : {State::A, State::B}) {
      const auto m = exact_posterior_marginals(bm, {{2, obs}});
      REQUIRE(m.size() == 2);
      const auto p = derive_pairwise(bm);
      // p(A) = σ(−b(A)).
      CHECK(m.at(0)[0] == Approx(sigmoid(-p.b(0, State::A))).margin(1e-14));
      CHECK(m.at(1)[0] == Approx(sigmoid(-p.b(1, State::A))).margin(1e-14));
      CHECK(m.at(0)[0] + m.at(0)[1] == Approx(1.0).margin(1e-15));
    }
  }
  SECTION("observing an unconnected unit leaves the others at their prior") {
    auto bm = random_model(3, 5);
    BoltzmannMachine ext(4);
    for (const auto& [k, v] : bm.couplings()) ext.set_coupling(k.i, k.u, k.j, k.v, v);
    for (std::size_t i = 0; i < 3; ++i)
      for (State u : {State::A, State::B}) ext.set_bias(i, u, bm.bias(i, u));
    ext.set_bias(3, State::A, 0.9);
    ext.set_visible({3});
    const auto joint = exact_joint(bm);
    const auto m = exact_posterior_marginals(ext, {{3, State::B}});
    for (std::size_t i = 0; i < 3; ++i) {
      double pa = 0.0;
      for (std::uint64_t s = 0; s < 8; ++s)
        if (!((s >> i) & 1u)) pa += joint[s];
      CHECK(m.at(i)[0] == Approx(pa).margin(1e-13));
    }
  }
  SECTION("4-unit chain against a hand-rolled sum over 2^3 hidden states") {
    BoltzmannMachine chain(4);
    std::mt19937_64 gen(99);
    std::uniform_real_distribution<double> d(-1.5, 1.5);
    for (std::size_t i = 0; i + 1 < 4; ++i)
      for (State u : {State::A, State::B})
        for (State v : {State::A, State::B})
          chain.set_symmetric_coupling(i, u, i + 1, v, d(gen));
    for (std::size_t i = 0; i < 4; ++i) chain.set_bias(i, State::B, d(gen));
    chain.set_visible({0});
    const auto m = exact_posterior_marginals(chain, {{0, State::B}});

    std::array<double, 3> mass_b{};
    double Z = 0.0;
    for (int h1 = 0; h1 < 2; ++h1)
      for (int h2 = 0; h2 < 2; ++h2)
        for (int h3 = 0; h3 < 2; ++h3) {
          const Assignment y{State::B, state_of(h1), state_of(h2), state_of(h3)};
          const double w = std::exp(log_weight_by_pairs(chain, y));
          Z += w;
          if (h1) mass_b[0] += w;
          if (h2) mass_b[1] += w;
          if (h3) mass_b[2] += w;
        }
    for (std::size_t k = 0; k < 3; ++k)
      CHECK(m.at(k + 1)[1] == Approx(mass_b[k] / Z).margin(1e-13));
  }
  SECTION("observation must cover the visible units") {
    auto bm = random_model(3, 2);
    bm.set_visible({0, 1});
    CHECK_THROWS_AS(exact_posterior_marginals(bm, {{0, State::A}}), Error);
  }
}

TEST_CASE("model properties hold on random instances", "[bm_model][property]") {
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    const std::size_t n = 2 + seed % 5;
    const auto bm = random_model(n, seed, 1.5, 1.5);

    // Joint sums to one.
    double total = 0.0;
    for (double v : exact_joint(bm)) total += v;
    CHECK(total == Approx(1.0).margin(1e-12));

    // Shifting both c(i,A) and c(i,B) by one constant leaves W and b unchanged.
    auto shifted = bm;
    const std::size_t i = seed % n;
    shifted.set_bias(i, State::A, bm.bias(i, State::A) + 3.25);
    shifted.set_bias(i, State::B, bm.bias(i, State::B) + 3.25);
    const auto p = derive_pairwise(bm);
    const auto q = derive_pairwise(shifted);
    for (std::size_t k = 0; k < n; ++k)
      for (State u : {State::A, State::B}) {
        CHECK(q.b(k, u) == Approx(p.b(k, u)).margin(1e-12));
        for (std::size_t j = 0; j < n; ++j)
          for (State v : {State::A, State::B})
            CHECK(q.W(k, u, j, v) == p.W(k, u, j, v));
      }

    // A single-unit flip changes the energy by the Gibbs logit.
    for (std::uint64_t s = 0; s < (1u << n); ++s) {
      auto y = assignment_from_index(s, n);
      for (std::size_t k = 0; k < n; ++k) {
        const State u = y[k];
        double logit = -p.b(k, u);
        for (auto j : p.blanket(k))
          for (State v : {State::A, State::B})
            if (y[j] == v) logit += p.W(k, u, j, v);
        auto flipped = y;
        flipped[k] = other(u);
        CHECK(energy(bm, flipped) - energy(bm, y) == Approx(logit).margin(1e-12));
      }
    }
  }
}
