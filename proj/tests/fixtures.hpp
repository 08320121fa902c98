#pragma once
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

#include <algorithm>
#include <random>
#include <vector>

#include "admarket/market.hpp"

namespace fixtures {

using admarket::Contract;
using admarket::Day;
using admarket::Impression;

// Hand-solved single-contract, two-impression instance. With alpha = 0.3
// the contract wins impression 0 only; the optimal outcome is
// 0.8 + unit_price, the dual minimum is -0.1, and the optimal offset set
// is the interval [0.1, 0.5] (midpoint 0.3).
inline Contract worked_contract(double unit_price = 1.0) {
    Contract c;
    c.id = 0;
    c.demand = 1;
    c.unit_price = unit_price;
    c.penalty = 0.5;
    c.quality_weight = 1.0;
    return c;
}

inline Day worked_day() {
    Day day;
    day.horizon = 2;
    day.impressions = {
        Impression{0, 1, 0.3, 0.3, {0.2}},
        Impression{1, 2, 0.6, 0.6, {0.1}},
    };
    return day;
}

struct Instance {
    std::vector<Contract> contracts;
    Day day;
};

inline std::vector<Contract> random_contracts(std::mt19937_64& rng, int m,
                                              std::int64_t max_demand = 4) {
    std::uniform_real_distribution<double> penalty(0.1, 1.2);
    std::uniform_real_distribution<double> weight(0.0, 1.2);
    std::uniform_real_distribution<double> price(0.0, 1.0);
    std::uniform_int_distribution<std::int64_t> demand(1, max_demand);
    std::vector<Contract> cs(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
        auto& c = cs[static_cast<std::size_t>(j)];
        c.id = j;
        c.demand = demand(rng);
        c.unit_price = price(rng);
        c.penalty = penalty(rng);
        c.quality_weight = weight(rng);
    }
    return cs;
}

inline Day random_day(std::mt19937_64& rng, int n, int m, int horizon) {
    std::uniform_real_distribution<double> b2_dist(0.05, 1.5);
    std::uniform_real_distribution<double> gap(0.0, 0.5);
    std::uniform_real_distribution<double> q_dist(0.0, 1.0);
    std::uniform_int_distribution<int> step_dist(1, horizon);
    Day day;
    day.horizon = horizon;
    day.impressions.resize(static_cast<std::size_t>(n));
    std::vector<int> steps(static_cast<std::size_t>(n));
    for (auto& s : steps) s = step_dist(rng);
    std::sort(steps.begin(), steps.end());
    for (int i = 0; i < n; ++i) {
        auto& imp = day.impressions[static_cast<std::size_t>(i)];
        imp.id = i;
        imp.step = steps[static_cast<std::size_t>(i)];
        imp.second_bid = b2_dist(rng);
        imp.first_bid = imp.second_bid + gap(rng);
        imp.quality.resize(static_cast<std::size_t>(m));
        for (auto& q : imp.quality) q = q_dist(rng);
    }
    return day;
}

inline Instance random_tiny(std::mt19937_64& rng, int max_n = 8, int max_m = 2) {
    std::uniform_int_distribution<int> n_dist(1, max_n);
    std::uniform_int_distribution<int> m_dist(1, max_m);
    const int n = n_dist(rng);
    const int m = m_dist(rng);
    Instance inst;
    inst.contracts = random_contracts(rng, m);
    inst.day = random_day(rng, n, m, 4);
    return inst;
}

inline Instance random_mid(std::mt19937_64& rng, int n, int m, int horizon) {
    Instance inst;
    inst.contracts = random_contracts(rng, m, std::max<std::int64_t>(2, n / (3 * m)));
    inst.day = random_day(rng, n, m, horizon);
    return inst;
}

}  // namespace fixtures
