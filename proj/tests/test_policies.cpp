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

#include "admarket/lp.hpp"
#include "admarket/policies.hpp"
#include "fixtures.hpp"

using namespace admarket;

TEST_CASE("fp policy holds the trained offsets for the whole episode") {
    std::mt19937_64 rng(8);
    const auto inst = fixtures::random_mid(rng, 300, 3, 8);
    const auto sol = solve_dual(inst.day.impressions, inst.contracts);

    SECTION("train day replay is exact") {
        auto policy = fp_policy(sol.alphas);
        const auto report = run_episode(inst.day, inst.contracts, *policy);
        CHECK(report.total / sol.r_star == Catch::Approx(1.0).epsilon(1e-6));
    }
    SECTION("offsets never change across steps") {
        auto policy = fp_policy(sol.alphas);
        Episode ep(inst.day, inst.contracts);
        policy->begin_episode(ep, ep.alphas());
        const auto initial = ep.state().alphas;
        for (int t = 1; t <= ep.horizon(); ++t) {
            policy->begin_step(t, ep, ep.alphas());
            CHECK(ep.state().alphas == initial);
            ep.run_step();
        }
    }
}

TEST_CASE("msvv effective bids follow the exponential discount") {
    Contract c{0, 10, 0.0, 1.0, 1.0};
    CHECK(msvv_bid(c, 0.0, 0.0) == Catch::Approx(1.0 - std::exp(-1.0)));
    CHECK(msvv_bid(c, 0.0, 1.0) == 0.0);
    CHECK(msvv_rtb_scale(1.0) == Catch::Approx(1.0 - std::exp(-1.0)));

    SECTION("bids are non-increasing in the spent fraction") {
        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> q_dist(0.0, 1.0);
        for (int rep = 0; rep < 20; ++rep) {
            const double q = q_dist(rng);
            double prev = msvv_bid(c, q, 0.0);
            for (int k = 1; k <= 10; ++k) {
                const double cur = msvv_bid(c, q, k / 10.0);
                CHECK(cur <= prev);
                prev = cur;
            }
            CHECK(prev == 0.0);
        }
    }
}

TEST_CASE("msvv policy self-caps at the demand and ties go to RTB") {
    SECTION("stops bidding once the budget is spent") {
        Day day;
        day.horizon = 1;
        day.impressions = {Impression{0, 1, 0.6, 0.5, {0.0}},
                           Impression{1, 1, 0.6, 0.5, {0.0}}};
        const std::vector<Contract> cs{Contract{0, 1, 0.0, 1.0, 0.0}};
        MsvvPolicy policy;
        const auto report = run_episode(day, cs, policy);
        // First impression: contract 1*(1-e^-1) beats RTB 0.5*(1-e^-1).
        // Then x = 1 kills the bid and the second impression sells via RTB.
        CHECK(report.delivered == std::vector<std::int64_t>{1});
        CHECK(report.r_rtb == Catch::Approx(0.5));
    }
    SECTION("equal effective bids sell through RTB") {
        Day day;
        day.horizon = 1;
        day.impressions = {Impression{0, 1, 1.0, 1.0, {0.0}}};
        const std::vector<Contract> cs{Contract{0, 1, 0.0, 1.0, 0.0}};
        MsvvPolicy policy;
        const auto report = run_episode(day, cs, policy);
        CHECK(report.delivered == std::vector<std::int64_t>{0});
        CHECK(report.r_rtb == 1.0);
    }
    SECTION("an RTB win still pays the true second bid, not the scaled one") {
        Day day;
        day.horizon = 1;
        day.impressions = {Impression{0, 1, 0.9, 0.8, {0.1}}};
        const std::vector<Contract> cs{Contract{0, 1, 0.0, 0.2, 0.2}};
        MsvvPolicy policy;
        const auto report = run_episode(day, cs, policy);
        CHECK(report.r_rtb == 0.8);
    }
}

namespace {

// A one-contract day whose single impression per step never meets the
// contract bid, so delivery stays at zero and PID errors are predictable.
fixtures::Instance pid_probe_instance() {
    fixtures::Instance inst;
    inst.contracts = {Contract{0, 2, 0.0, 1.0, 0.0}};
    inst.day.horizon = 4;
    for (int t = 1; t <= 4; ++t) {
        inst.day.impressions.push_back(Impression{t, t, 5.0, 5.0, {0.0}});
    }
    return inst;
}

}  // namespace

TEST_CASE("pid controller arithmetic") {
    SECTION("on-pace contract leaves the offset unchanged") {
        auto inst = pid_probe_instance();
        // Force a win in step 1 so fulfillment is 0.5, and target 0.5.
        inst.day.impressions[0].second_bid = 0.0;
        inst.day.impressions[0].first_bid = 0.0;
        inst.day.impressions[0].quality[0] = 1.0;
        inst.contracts[0].quality_weight = 1.0;
        PidPolicy policy({0.5}, {0.5, 0.75, 1.0, 1.0}, PidGains{1.0, 0.0, 0.0});
        Episode ep(inst.day, inst.contracts);
        policy.begin_episode(ep, ep.alphas());
        policy.begin_step(1, ep, ep.alphas());
        ep.run_step();
        REQUIRE(ep.state().delivered[0] == 1);
        policy.begin_step(2, ep, ep.alphas());
        CHECK(ep.state().alphas[0] == 0.5);
    }
    SECTION("behind pace raises the offset by kp * error * p") {
        const auto inst = pid_probe_instance();
        PidPolicy policy({-1.0}, {0.1, 0.2, 0.3, 1.0}, PidGains{1.0, 0.0, 0.0});
        Episode ep(inst.day, inst.contracts);
        policy.begin_episode(ep, ep.alphas());
        policy.begin_step(1, ep, ep.alphas());
        ep.run_step();
        policy.begin_step(2, ep, ep.alphas());
        // error = 0.1 - 0, signal = 0.1, p = 1.
        CHECK(ep.state().alphas[0] == Catch::Approx(-0.9));
    }
    SECTION("the offset clamps at the penalty") {
        const auto inst = pid_probe_instance();
        PidPolicy policy({1.0}, {0.9, 0.95, 1.0, 1.0}, PidGains{5.0, 0.0, 0.0});
        Episode ep(inst.day, inst.contracts);
        policy.begin_episode(ep, ep.alphas());
        policy.begin_step(1, ep, ep.alphas());
        ep.run_step();
        policy.begin_step(2, ep, ep.alphas());
        CHECK(ep.state().alphas[0] == 1.0);  // p_j
    }
    SECTION("offsets stay below the penalty for a whole random episode") {
        std::mt19937_64 rng(17);
        const auto inst = fixtures::random_mid(rng, 400, 3, 12);
        std::vector<Money> init(3, 0.0);
        PidPolicy policy(init, target_curve_from_day(inst.day));
        Episode ep(inst.day, inst.contracts);
        policy.begin_episode(ep, ep.alphas());
        for (int t = 1; t <= ep.horizon(); ++t) {
            policy.begin_step(t, ep, ep.alphas());
            for (std::size_t j = 0; j < inst.contracts.size(); ++j) {
                CHECK(ep.state().alphas[j] <= inst.contracts[j].penalty);
            }
            ep.run_step();
        }
    }
}

TEST_CASE("target curve paces like the day's volume") {
    Day day;
    day.horizon = 4;
    day.impressions = {Impression{0, 1, 1, 1, {}}, Impression{1, 1, 1, 1, {}},
                       Impression{2, 3, 1, 1, {}}, Impression{3, 4, 1, 1, {}}};
    const auto curve = target_curve_from_day(day);
    REQUIRE(curve.size() == 4);
    CHECK(curve[0] == Catch::Approx(0.5));
    CHECK(curve[1] == Catch::Approx(0.5));
    CHECK(curve[2] == Catch::Approx(0.75));
    CHECK(curve[3] == Catch::Approx(1.0));

    Day empty;
    empty.horizon = 4;
    const auto uniform = target_curve_from_day(empty);
    CHECK(uniform == std::vector<double>{0.25, 0.5, 0.75, 1.0});
}
