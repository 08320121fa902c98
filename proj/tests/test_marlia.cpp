//------------------------------------------------------------------------------
//
//   Copyright 2026 The admarket Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------

#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "admarket/marlia.hpp"
#include "fixtures.hpp"

using namespace admarket;

TEST_CASE("build_observation extracts the documented features") {
    SECTION("episode start") {
        Day day;
        day.horizon = 96;
        day.impressions = {Impression{0, 1, 0.5, 0.4, {0.1, 0.2}}};
        const std::vector<Contract> cs{Contract{0, 30, 0.0, 0.8, 0.5},
                                       Contract{1, 10, 0.0, 0.4, 0.5}};
        Episode ep(day, cs);
        ep.alphas() = {0.2, 0.3};
        const auto obs = build_observation(ep, 0, 1);
        CHECK(obs[0] == Catch::Approx(1.0 / 96));
        CHECK(obs[1] == 0.0);
        CHECK(obs[2] == 0.0);
        CHECK(obs[3] == Catch::Approx(1.0 / 96));
        CHECK(obs[4] == Catch::Approx(0.2 / 0.8));
        CHECK(obs[5] == 0.0);
        CHECK(obs[6] == 0.0);
        CHECK(obs[7] == Catch::Approx(30.0 / 40.0));
    }
    SECTION("fully delivered contract reports fulfillment 1") {
        Day day;
        day.horizon = 2;
        day.impressions = {Impression{0, 1, 0.1, 0.0, {1.0}}};
        const std::vector<Contract> cs{Contract{0, 1, 0.0, 1.0, 1.0}};
        Episode ep(day, cs);
        ep.alphas() = {0.5};
        ep.run_step();
        REQUIRE(ep.state().delivered[0] == 1);
        const auto obs = build_observation(ep, 0, 2);
        CHECK(obs[1] == 1.0);
    }
    SECTION("golden mid-episode vector") {
        // Two contracts, horizon 4. Step 1 carries three impressions:
        // contract 0 wins two (quality 1.0 and 0.8), RTB takes one.
        Day day;
        day.horizon = 4;
        day.impressions = {Impression{0, 1, 0.3, 0.2, {1.0, 0.0}},
                           Impression{1, 1, 0.3, 0.2, {0.8, 0.0}},
                           Impression{2, 1, 9.0, 9.0, {0.0, 0.0}},
                           Impression{3, 2, 0.3, 0.2, {0.5, 0.5}}};
        const std::vector<Contract> cs{Contract{0, 8, 0.0, 1.0, 1.0},
                                       Contract{1, 4, 0.0, 0.5, 1.0}};
        Episode ep(day, cs);
        ep.alphas() = {0.1, -1.0};
        ep.run_step();
        REQUIRE(ep.state().delivered == std::vector<std::int64_t>{2, 0});
        const auto obs = build_observation(ep, 0, 2);
        const Observation expected{
            2.0 / 4.0,              // t/T
            2.0 / 8.0,              // e/d
            2.0 / (8.0 / 4.0),      // last-step wins over fair share
            2.0 / 4.0 - 2.0 / 8.0,  // pacing gap
            0.1 / 1.0,              // alpha/p
            (2.0 / 8.0 + 0.0) / 2,  // mean fulfillment
            1.0 / 3.0,              // RTB win rate
            8.0 / 12.0,             // demand share
        };
        for (std::size_t k = 0; k < expected.size(); ++k) {
            CHECK(obs[k] == Catch::Approx(expected[k]).margin(1e-15));
        }
    }
    SECTION("steps outside the horizon are rejected") {
        Day day;
        day.horizon = 4;
        const std::vector<Contract> cs{Contract{0, 1, 0.0, 1.0, 1.0}};
        Episode ep(day, cs);
        CHECK_THROWS_AS(build_observation(ep, 0, 5), std::invalid_argument);
    }
}

TEST_CASE("apply_action clamps above at the penalty only") {
    CHECK(apply_action(0.5, 0.1, 1.0) == Catch::Approx(0.6));
    CHECK(apply_action(1.0, 0.1, 1.0) == 1.0);
    CHECK(apply_action(0.5, -0.1, 1.0) == Catch::Approx(0.4));
    CHECK_THROWS_AS(apply_action(0.5, 0.11, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(apply_action(0.5, -0.2, 1.0), std::invalid_argument);
}

TEST_CASE("rollout_value replays the remainder with frozen offsets") {
    SECTION("worked instance from the start") {
        const auto day = fixtures::worked_day();
        const std::vector<Contract> cs{fixtures::worked_contract(0.0)};
        Episode ep(day, cs);
        const std::vector<Money> frozen{0.3};
        CHECK(rollout_value(ep, frozen) == Catch::Approx(0.8));
        // The snapshot itself is untouched.
        CHECK(ep.state().step == 0);
    }
    SECTION("finished episode rolls out to zero") {
        const auto day = fixtures::worked_day();
        const std::vector<Contract> cs{fixtures::worked_contract(0.0)};
        Episode ep(day, cs);
        ep.alphas() = {0.3};
        Money terminal_reward = 0.0;
        while (!ep.done()) terminal_reward = ep.run_step();
        CHECK(rollout_value(ep, ep.state().alphas) == 0.0);
        // v at t = T is just the final step's reward, penalty included.
        CHECK(terminal_reward == Catch::Approx(0.6));
    }
    SECTION("zero contracts roll out to the remaining RTB revenue") {
        std::mt19937_64 rng(3);
        const auto day = fixtures::random_day(rng, 30, 0, 4);
        Episode ep(day, {});
        ep.run_step();
        Money remaining = 0.0;
        for (const auto& imp : ep.remaining_impressions()) remaining += imp.second_bid;
        CHECK(rollout_value(ep, {}) == Catch::Approx(remaining));
    }
}

TEST_CASE("freezing at the sub-problem optimum reproduces its r_star") {
    std::mt19937_64 rng(52);
    for (int rep = 0; rep < 4; ++rep) {
        const auto inst = fixtures::random_mid(rng, 600, 3, 12);
        Episode ep(inst.day, inst.contracts);
        ep.alphas().assign(3, 0.05);
        std::uniform_int_distribution<int> cut(1, 8);
        const int t_cut = cut(rng);
        for (int t = 0; t < t_cut; ++t) ep.run_step();

        const auto remaining = ep.remaining_impressions();
        if (remaining.empty()) continue;
        const auto sub = solve_subproblem(remaining, inst.contracts,
                                          ep.state().delivered);
        const Money v = rollout_value(ep, sub.alphas);
        Money residual_prepaid = 0.0;
        for (std::size_t j = 0; j < inst.contracts.size(); ++j) {
            const auto d_res = std::max<std::int64_t>(
                0, inst.contracts[j].demand - ep.state().delivered[j]);
            residual_prepaid +=
                inst.contracts[j].unit_price * static_cast<Money>(d_res);
        }
        const double scale = std::max(1.0, std::abs(sub.r_star));
        CHECK(std::abs(v + residual_prepaid - sub.r_star) <= 1e-6 * scale);
    }
}

TEST_CASE("replay memory is a fixed-capacity ring with oldest-first eviction") {
    ReplayMemory mem(5);
    for (int k = 0; k < 8; ++k) {
        Transition t;
        t.action = static_cast<double>(k);
        mem.push(t);
    }
    CHECK(mem.size() == 5);
    CHECK(mem.capacity() == 5);
    for (int k = 0; k < 5; ++k) {
        CHECK(mem.at(static_cast<std::size_t>(k)).action == Catch::Approx(3.0 + k));
    }
    std::mt19937_64 rng(1);
    const auto batch = mem.sample(32, rng);
    CHECK(batch.size() == 32);
    for (const auto& t : batch) {
        CHECK(t.action >= 3.0);
        CHECK(t.action <= 7.0);
    }
    ReplayMemory empty(4);
    CHECK(empty.sample(8, rng).empty());
}

TEST_CASE("critic regression against rollout values") {
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Mlp critic({kObservationDim + 1, 16, 16, 1}, Mlp::Head::kLinear, 1.0, rng);

    std::vector<Transition> batch(32);
    for (auto& t : batch) {
        for (auto& o : t.observation) o = u(rng);
        t.action = 0.1 * u(rng);
    }

    SECTION("a perfect critic has zero loss and takes no step") {
        for (auto& t : batch) {
            std::vector<double> in;
            critic_input(t.observation, t.action, in);
            t.value = critic.value(in) * 2.5;  // value_scale below
        }
        const Mlp before = critic;
        const double loss = critic_update(critic, batch, 1e-3, 2.5);
        CHECK(loss == Catch::Approx(0.0).margin(1e-20));
        for (std::size_t l = 0; l < critic.layers().size(); ++l) {
            CHECK(critic.layers()[l].w == before.layers()[l].w);
        }
    }
    SECTION("repeated steps on one constant-value batch reduce the loss") {
        for (auto& t : batch) t.value = 0.7;
        std::vector<double> losses;
        for (int k = 0; k < 200; ++k) {
            losses.push_back(critic_update(critic, batch, 1e-2, 1.0));
        }
        for (std::size_t k = 1; k < losses.size(); ++k) {
            CHECK(losses[k] <= losses[k - 1] + 1e-12);
        }
        CHECK(losses.back() < 0.05 * losses.front());
    }
    SECTION("an empty batch is a no-op") {
        CHECK(critic_update(critic, {}, 1e-3, 1.0) == 0.0);
    }
}

TEST_CASE("deterministic policy gradient against a planted critic") {
    std::mt19937_64 rng(62);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Mlp actor({kObservationDim, 16, 16, 1}, Mlp::Head::kTanhScaled, 0.1, rng);
    std::vector<Observation> batch(16);
    for (auto& o : batch) {
        for (auto& v : o) v = u(rng);
    }

    SECTION("outputs climb toward the planted optimum 0.05") {
        // Q(o, delta) = -(delta - 0.05)^2, so dQ/ddelta = -2 (delta - 0.05).
        auto grad = [](const Observation&, double delta) {
            return -2.0 * (delta - 0.05);
        };
        for (int k = 0; k < 20000; ++k) actor_update(actor, batch, grad, 2e-2);
        for (const auto& o : batch) {
            CHECK(actor.value(o) == Catch::Approx(0.05).margin(0.005));
        }
    }
    SECTION("a zero critic produces a zero gradient") {
        const Mlp before = actor;
        const double norm = actor_update(
            actor, batch, [](const Observation&, double) { return 0.0; }, 1e-2);
        CHECK(norm == 0.0);
        for (std::size_t l = 0; l < actor.layers().size(); ++l) {
            CHECK(actor.layers()[l].w == before.layers()[l].w);
        }
    }
    SECTION("agents share one parameter set") {
        Observation other{};
        other.fill(0.123);
        const double before = actor.value(other);
        // Update with one agent's observations only.
        actor_update(actor, std::span<const Observation>(batch.data(), 1),
                     [](const Observation&, double) { return 1.0; }, 1e-2);
        CHECK(actor.value(other) != before);
    }
}

TEST_CASE("critic_action_gradient matches finite differences") {
    std::mt19937_64 rng(63);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Mlp critic({kObservationDim + 1, 16, 16, 1}, Mlp::Head::kLinear, 1.0, rng);
    Observation obs{};
    for (auto& v : obs) v = u(rng);
    const double a = 0.03;
    const double analytic = critic_action_gradient(critic, obs, a);
    std::vector<double> in;
    critic_input(obs, a + 1e-6, in);
    const double up = critic.value(in);
    critic_input(obs, a - 1e-6, in);
    const double down = critic.value(in);
    CHECK(analytic == Catch::Approx((up - down) / 2e-6).epsilon(1e-4));
}

TEST_CASE("training on a small stationary day") {
    std::mt19937_64 rng(64);

    SECTION("zero contracts evaluate at ratio 1 with no learning") {
        const auto day = fixtures::random_day(rng, 50, 0, 8);
        TrainConfig cfg;
        cfg.episodes = 5;
        const auto result = train(day, {}, cfg);
        REQUIRE(result.log.size() == 1);
        CHECK(result.best_ratio == Catch::Approx(1.0).epsilon(1e-9));
    }
    SECTION("single contract reaches 0.95 quickly and logs every episode") {
        fixtures::Instance inst;
        inst.contracts = {Contract{0, 60, 0.5, 0.9, 0.6}};
        inst.day = fixtures::random_day(rng, 800, 1, 16);
        TrainConfig cfg;
        cfg.episodes = 300;
        cfg.stop_ratio = 0.95;
        cfg.seed = 11;
        cfg.validation_volume = 1.0;  // stationary day: select on the day itself
        cfg.validation_price = 1.0;
        const auto result = train(inst.day, inst.contracts, cfg);
        CHECK(result.best_ratio >= 0.95);
        CHECK(static_cast<int>(result.log.size()) <= 300);
        for (std::size_t k = 0; k < result.log.size(); ++k) {
            CHECK(result.log[k].episode == static_cast<int>(k) + 1);
            CHECK(result.log[k].r_star > 0.0);
        }
    }
    SECTION("absurd learning rates abort with a divergence error") {
        fixtures::Instance inst;
        inst.contracts = {Contract{0, 20, 0.5, 0.9, 0.6}};
        inst.day = fixtures::random_day(rng, 200, 1, 8);
        TrainConfig cfg;
        cfg.episodes = 50;
        cfg.critic_lr = 1e9;
        CHECK_THROWS_AS(train(inst.day, inst.contracts, cfg), DivergenceError);
    }
}
