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

#include "ssi/inference.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "ssi/stability.hpp"
#include "test_support.hpp"

using namespace ssi;
using Catch::Approx;
using ssi::testing::random_model;
using ssi::testing::sigmoid;

namespace {

RunConfig config(Algorithm alg, ScheduleKind sched, std::uint64_t steps,
                 std::uint64_t seed = 1) {
  RunConfig c;
  c.algorithm = alg;
  c.schedule = sched;
  c.steps = steps;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("proposal evaluates the logistic of the local field", "[inference]") {
  SECTION("zero model") {
    const auto p = derive_pairwise(BoltzmannMachine(3));
    const std::vector<double> theta(6, 0.3);
    const auto phi = proposal(p, theta, 1);
    CHECK(phi[0] == 0.5);
    CHECK(phi[1] == 0.5);
  }
  SECTION("saturated bias") {
    BoltzmannMachine bm(1);
    bm.set_bias(0, State::A, 50.0);
    const auto p = derive_pairwise(bm);
    const std::vector<double> theta(2, 0.5);
    CHECK(proposal(p, theta, 0)[0] < 1e-20);
  }
  SECTION("two units by hand") {
    BoltzmannMachine bm(2);
    bm.set_symmetric_coupling(0, State::A, 1, State::A, 1.5);
    bm.set_symmetric_coupling(0, State::B, 1, State::B, -0.5);
    bm.set_bias(0, State::A, 0.25);
    const auto p = derive_pairwise(bm);
    const std::vector<double> theta{0.5, 0.5, 0.8, 0.2};
    // W(0A,1A) = 1.5, W(0A,1B) = 0 − (−0.5) = 0.5, b(0A) = 0.25.
    const double xa = 1.5 * 0.8 + 0.5 * 0.2 - 0.25;
    const auto phi = proposal(p, theta, 0);
    CHECK(phi[0] == Approx(sigmoid(xa)).margin(1e-15));
    CHECK(phi[1] == Approx(sigmoid(-xa)).margin(1e-15));
    const auto g = event_graph(p);
    CHECK(proposal(g, theta, 0) == phi[0]);
  }
}

TEST_CASE("gibbs_step samples the conditional", "[inference]") {
  const int draws = 100000;
  for (double delta : {0.0, 0.8, -2.0}) {
    BoltzmannMachine bm(1);
    bm.set_bias(0, State::A, delta);
    const auto g = event_graph(derive_pairwise(bm));
    const double p = sigmoid(-delta);
    InferenceState s;
    s.theta.assign(2, 0.5);
    s.phi.assign(2, 0.0);
    s.x = {1, 0};
    const StreamRng rng(42);
    const std::vector<std::size_t> units{0};
    int count_a = 0;
    for (int k = 0; k < draws; ++k) {
      gibbs_step(g, s, units, rng);
      count_a += s.x[0];
      REQUIRE(s.x[0] + s.x[1] == 1);
    }
    const double sd = std::sqrt(p * (1 - p) / draws);
    CHECK(std::abs(count_a / double(draws) - p) <= 3 * sd);
  }
}

TEST_CASE("Gibbs marginals converge to the exact posterior", "[inference]") {
  auto bm = random_model(3, 77, 1.0, 0.5);
  const auto exact = exact_posterior_marginals(bm, {});
  const auto p = derive_pairwise(bm);
  auto cfg = config(Algorithm::gibbs, ScheduleKind::sequential_random_scan, 1'000'000, 5);
  cfg.record = false;
  Engine engine(event_graph(p), cfg);
  std::vector<double> counts(6, 0.0);
  for (std::uint64_t t = 0; t < cfg.steps; ++t) {
    engine.step();
    for (std::size_t c = 0; c < 6; ++c) counts[c] += engine.state().x[c];
  }
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(std::abs(counts[2 * i] / cfg.steps - exact.at(i)[0]) <= 0.01);
}

TEST_CASE("variational_step assigns the proposal", "[inference]") {
  const auto g = event_graph(derive_pairwise(BoltzmannMachine(2)));
  InferenceState s;
  s.theta = {0.9, 0.1, 0.3, 0.7};
  s.phi.assign(4, 0.0);
  s.x.assign(4, 0);
  const std::vector<std::size_t> one{0};
  variational_step(g, s, one);
  CHECK(s.theta == std::vector<double>{0.5, 0.5, 0.3, 0.7});
  CHECK(s.t == 1);

  SECTION("fixed point is preserved") {
    const auto bm = random_model(3, 3, 0.5);
    const auto graph = event_graph(derive_pairwise(bm));
    auto cfg = config(Algorithm::variational, ScheduleKind::parallel_synchronized, 500);
    const auto tr = run(graph, cfg);
    auto theta = tr.final_theta();
    REQUIRE(fixed_point_residual(graph, theta) < 1e-14);
    InferenceState st;
    st.theta = theta;
    st.phi.assign(6, 0.0);
    st.x.assign(6, 0);
    const std::vector<std::size_t> all{0, 1, 2};
    variational_step(graph, st, all);
    for (std::size_t c = 0; c < 6; ++c) CHECK(std::abs(st.theta[c] - theta[c]) <= 1e-15);
  }
}

TEST_CASE("variational runs on the bistable network", "[inference]") {
  const auto net = two_neuron_bistable();
  const auto graph = event_graph(net);
  FixedPointOptions fpo;
  fpo.random_seeds = 200;
  const auto fps = find_fixed_points(net, fpo);
  const auto nearest = [&](const std::vector<double>& theta) {
    double d = 1e9;
    for (const auto& fp : fps.points) d = std::min(d, max_abs_diff(fp.y, theta));
    return d;
  };

  SECTION("sequential updates settle on a fixed point from random starts") {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
      const auto tr =
          run(graph, config(Algorithm::variational, ScheduleKind::sequential_cyclic, 400, seed));
      const auto theta = tr.final_theta();
      CHECK(fixed_point_residual(graph, theta) <= 1e-8);
      CHECK(nearest(theta) <= 1e-6);
    }
  }
  SECTION("parallel updates from the centre reach the quiet fixed point") {
    auto cfg = config(Algorithm::variational, ScheduleKind::parallel_synchronized, 200);
    cfg.init = InitKind::constant_half;
    const auto theta = run(graph, cfg).final_theta();
    CHECK(fixed_point_residual(graph, theta) <= 1e-8);
    CHECK(max_abs_diff(theta, fps.points.back().y) <= 1e-9);
  }
  SECTION("one parallel update equals the deterministic step at a*eps = 1") {
    auto unit_net = net;
    unit_net.a = 1.0;
    auto cfg = config(Algorithm::variational, ScheduleKind::parallel_synchronized, 1, 4);
    cfg.init = InitKind::user_vector;
    cfg.init_theta = {0.37, 0.81};
    const auto theta = run(graph, cfg).final_theta();
    const auto det = deterministic_step(unit_net, cfg.init_theta);
    CHECK(max_abs_diff(theta, det) <= 1e-12);
  }
  SECTION("parallel updates can oscillate with period two") {
    auto cfg = config(Algorithm::variational, ScheduleKind::parallel_synchronized, 200);
    cfg.init = InitKind::user_vector;
    cfg.init_theta = {1.0, 0.0};
    const auto tr = run(graph, cfg);
    CHECK(fixed_point_residual(graph, tr.final_theta()) > 0.9);
    CHECK(tr.theta_at(200, 0) == Approx(tr.theta_at(198, 0)).margin(1e-12));
    CHECK(std::abs(tr.theta_at(200, 0) - tr.theta_at(199, 0)) > 0.9);
  }
}

TEST_CASE("SSI with a one-step kernel reproduces Gibbs", "[inference]") {
  const auto bm = random_model(4, 8, 1.5, 1.0, {0});
  const auto g = event_graph(derive_pairwise(bm), {{0, State::B}});
  for (auto sched : {ScheduleKind::sequential_cyclic, ScheduleKind::sequential_random_scan,
                     ScheduleKind::parallel_synchronized}) {
    auto gibbs = config(Algorithm::gibbs, sched, 300, 9);
    gibbs.init = InitKind::user_vector;
    gibbs.init_theta = {0, 1, 1, 0, 0, 1, 1, 0};
    auto ssi = gibbs;
    ssi.algorithm = Algorithm::ssi;
    ssi.kernel.K = 1;
    const auto a = run(g, gibbs);
    const auto b = run(g, ssi);
    CHECK(a.theta == b.theta);
    CHECK(a.phi == b.phi);
    // SSI records no sample for a unit until it is first touched.
    const std::size_t settle = 3 * g.channels();
    CHECK(std::equal(a.x.begin() + settle, a.x.end(), b.x.begin() + settle));
  }
}

TEST_CASE("SSI expected update matches the Monte Carlo mean", "[inference]") {
  auto bm = random_model(3, 21, 1.0, 1.0);
  const auto g = event_graph(derive_pairwise(bm));
  const Kernel kernel(KernelSpec{});
  InferenceState frozen;
  frozen.theta = {0.7, 0.3, 0.2, 0.8, 0.55, 0.45};
  frozen.phi.assign(6, 0.0);
  frozen.x.assign(6, 0);
  frozen.history.assign(6, SpikeHistory(30));
  const std::vector<std::uint8_t> past{1, 0, 0, 1, 1, 1, 0, 1, 0, 0, 1, 0,
                                       1, 1, 1, 0, 0, 0, 1, 0, 1, 1, 0, 0,
                                       1, 0, 1, 0, 1, 1, 0, 1, 0, 1, 1};
  for (auto bit : past) {
    for (std::size_t i = 0; i < 3; ++i) {
      frozen.history[2 * i].push(bit);
      frozen.history[2 * i + 1].push(1 - bit);
    }
  }
  const std::vector<std::size_t> unit{1};
  const auto phi = proposal(derive_pairwise(bm), frozen.theta, 1);
  const double pa = phi[0] / (phi[0] + phi[1]);
  const auto w = kernel.weights();
  double shifted = 0.0;  // mass of the surviving samples, ages 1..K−1
  for (std::size_t k = 1; k < 30; ++k) shifted += w[k] * frozen.history[2].recent(k - 1);
  const double expected = shifted + w[0] * pa;

  const int reps = 100000;
  double sum = 0.0, sumsq = 0.0;
  for (int r = 0; r < reps; ++r) {
    auto s = frozen;
    ssi_step(g, s, unit, kernel, StreamRng(1000 + r));
    sum += s.theta[2];
    sumsq += s.theta[2] * s.theta[2];
    REQUIRE(std::abs(s.theta[2] + s.theta[3] - 1.0) <= 1e-12);
  }
  const double mean = sum / reps;
  const double sd = std::sqrt((sumsq / reps - mean * mean) / reps);
  CHECK(std::abs(mean - expected) <= 3 * sd);

  SECTION("the expectation-substituted step hits it exactly") {
    auto s = frozen;
    s.mean_history.assign(6, SampleHistory<double>(30));
    for (std::size_t c = 0; c < 6; ++c)
      for (std::size_t k = 30; k-- > 0;)
        s.mean_history[c].push(frozen.history[c].recent(k));
    ssi_expected_step(g, s, unit, kernel);
    CHECK(s.theta[2] == Approx(expected).margin(1e-14));
  }
}

TEST_CASE("SSI keeps complementary channels and clamps observations",
          "[inference][property]") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto bm = random_model(5, seed, 2.0, 1.0, {1, 3});
    const Observation obs{{1, State::A}, {3, State::B}};
    for (auto sched : {ScheduleKind::sequential_cyclic, ScheduleKind::parallel_synchronized}) {
      for (auto alg : {Algorithm::ssi, Algorithm::gibbs}) {
        const auto tr = run(derive_pairwise(bm), obs, config(alg, sched, 200, seed));
        for (std::uint64_t t = 1; t <= tr.steps; ++t) {
          for (std::size_t i = 0; i < 5; ++i)
            REQUIRE(std::abs(tr.theta_at(t, 2 * i) + tr.theta_at(t, 2 * i + 1) - 1.0) <=
                    1e-12);
          REQUIRE(tr.theta_at(t, 2) == 1.0);
          REQUIRE(tr.theta_at(t, 3) == 0.0);
          REQUIRE(tr.theta_at(t, 6) == 0.0);
          REQUIRE(tr.theta_at(t, 7) == 1.0);
        }
      }
    }
  }
}

TEST_CASE("SSI tracks the variational fixed point on weak models", "[inference]") {
  const auto bm = random_model(4, 31, 0.5, 0.5);
  const auto p = derive_pairwise(bm);
  const auto g = event_graph(p);
  const auto ref =
      run(g, config(Algorithm::variational, ScheduleKind::parallel_synchronized, 2000))
          .final_theta();
  REQUIRE(fixed_point_residual(g, ref) < 1e-12);
  const auto tr = run(g, config(Algorithm::ssi, ScheduleKind::parallel_synchronized, 5000, 3));
  for (std::size_t c = 0; c < 8; c += 2) {
    double mean = 0.0;
    for (std::uint64_t t = 3001; t <= 5000; ++t) mean += tr.theta_at(t, c);
    mean /= 2000.0;
    CHECK(std::abs(mean - ref[c]) <= 0.05);
  }
}

TEST_CASE("run contract", "[inference]") {
  const auto p = derive_pairwise(random_model(3, 4));
  SECTION("steps must be positive") {
    CHECK_THROWS_AS(run(p, {}, config(Algorithm::ssi, ScheduleKind::sequential_cyclic, 0)),
                    Error);
  }
  SECTION("identical configurations give identical trajectories") {
    for (auto alg : {Algorithm::gibbs, Algorithm::variational, Algorithm::ssi}) {
      const auto cfg = config(alg, ScheduleKind::sequential_random_scan, 400, 17);
      const auto a = run(p, {}, cfg);
      const auto b = run(p, {}, cfg);
      CHECK(a.theta == b.theta);
      CHECK(a.x == b.x);
    }
    const auto c = run(p, {}, config(Algorithm::ssi, ScheduleKind::parallel_synchronized, 100, 1));
    const auto d = run(p, {}, config(Algorithm::ssi, ScheduleKind::parallel_synchronized, 100, 2));
    CHECK(c.theta != d.theta);
  }
  SECTION("trajectory length equals steps") {
    const auto tr = run(p, {}, config(Algorithm::ssi, ScheduleKind::sequential_cyclic, 37));
    CHECK(tr.steps == 37);
    CHECK(tr.theta.size() == 37 * 6);
  }
  SECTION("sequential schedules touch one unit, parallel touches all") {
    Engine seq(event_graph(p), config(Algorithm::ssi, ScheduleKind::sequential_cyclic, 10));
    CHECK(seq.schedule(1) == std::vector<std::size_t>{0});
    CHECK(seq.schedule(5) == std::vector<std::size_t>{1});
    Engine rs(event_graph(p), config(Algorithm::ssi, ScheduleKind::sequential_random_scan, 10));
    for (std::uint64_t t = 1; t < 50; ++t) CHECK(rs.schedule(t).size() == 1);
    Engine par(event_graph(p), config(Algorithm::ssi, ScheduleKind::parallel_synchronized, 10));
    CHECK(par.schedule(3) == std::vector<std::size_t>{0, 1, 2});
  }
  SECTION("user vector must match the channel count") {
    auto cfg = config(Algorithm::variational, ScheduleKind::sequential_cyclic, 5);
    cfg.init = InitKind::user_vector;
    cfg.init_theta = {0.5, 0.5};
    CHECK_THROWS_AS(run(p, {}, cfg), Error);
  }
  SECTION("uniform init is pair-normalized") {
    Engine e(event_graph(p), config(Algorithm::variational, ScheduleKind::sequential_cyclic, 5, 8));
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(e.state().theta[2 * i] > 0.0);
      CHECK(e.state().theta[2 * i] + e.state().theta[2 * i + 1] == Approx(1.0).margin(1e-15));
    }
  }
}

TEST_CASE("free_energy", "[inference]") {
  const std::vector<double> half(6, 0.5);
  CHECK(free_energy(BoltzmannMachine(3), half) == Approx(-3 * std::log(2.0)).margin(1e-14));

  const auto bm = random_model(3, 12);
  for (std::uint64_t s = 0; s < 8; ++s) {
    const auto y = assignment_from_index(s, 3);
    std::vector<double> theta(6, 0.0);
    for (std::size_t i = 0; i < 3; ++i) theta[channel_of(i, y[i])] = 1.0;
    CHECK(free_energy(bm, theta) == Approx(energy(bm, y)).margin(1e-12));
  }
  std::vector<double> bad(6, 0.5);
  bad[2] = 1.2;
  CHECK_THROWS_AS(free_energy(bm, bad), Error);

  SECTION("free energy bounds -log Z from above") {
    const auto joint_bm = random_model(3, 13);
    double log_z = 0.0;
    {
      double z = 0.0;
      for (std::uint64_t s = 0; s < 8; ++s)
        z += std::exp(-energy(joint_bm, assignment_from_index(s, 3)));
      log_z = std::log(z);
    }
    const std::vector<double> q{0.3, 0.7, 0.6, 0.4, 0.5, 0.5};
    CHECK(free_energy(joint_bm, q) >= -log_z - 1e-12);
  }
}

TEST_CASE("sequential variational updates descend the free energy",
          "[inference][property]") {
  for (std::uint64_t seed = 40; seed < 50; ++seed) {
    const auto bm = random_model(4, seed, 2.0, 1.0);
    Engine e(event_graph(derive_pairwise(bm)),
             config(Algorithm::variational, ScheduleKind::sequential_cyclic, 200, seed));
    double prev = free_energy(bm, e.state().theta);
    for (int t = 0; t < 200; ++t) {
      e.step();
      const double f = free_energy(bm, e.state().theta);
      REQUIRE(f <= prev + 1e-10);
      prev = f;
    }
  }
}

TEST_CASE("algorithm and schedule names", "[inference]") {
  CHECK(to_string(Algorithm::ssi) == "ssi");
  CHECK(to_string(ScheduleKind::parallel_synchronized) == "parallel_synchronized");
  CHECK(to_string(InitKind::constant_half) == "constant_half");
}
