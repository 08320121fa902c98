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
//
// Synthetic train/test day pairs with controllable day-over-day drift in
// traffic volume and market price. Prices are heavy-tailed: the top two
// RTB bids per impression are the order statistics of i.i.d. lognormal
// draws, which guarantees b1 >= b2. All draws come from a seeded generator
// and are reproducible bit for bit.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "admarket/market.hpp"
#include "admarket/rng.hpp"

namespace admarket {

struct DriftConfig {
    double volume_multiplier = 1.0;  ///< test-day impression count scale
    double price_multiplier = 1.0;   ///< test-day mean price scale
};

struct TrafficConfig {
    std::int64_t n_impressions = 100000;
    int m_contracts = 20;
    int horizon = 96;
    double demand_ratio = 0.39;        ///< total demand as a fraction of volume
    double price_log_mean = -0.6931471805599453;  // ln 0.5
    double price_log_sigma = 0.45;
    int rtb_bidders = 5;
    double quality_alpha = 2.0;        ///< beta-shaped quality draws
    double quality_beta = 5.0;
    double quality_mixture = 0.0;      ///< cross-contract quality correlation knob
    double penalty_min = 0.3;
    double penalty_max = 1.3;
    double lambda_min = 0.2;
    double lambda_max = 0.9;
    double unit_price_min = 0.5;
    double unit_price_max = 1.0;
    std::vector<double> diurnal;       ///< per-step volume weights; empty = default
    DriftConfig drift;                 ///< applied when generating the test day
    std::uint64_t seed = 1;
};

inline void validate_traffic_config(const TrafficConfig& cfg) {
    if (cfg.n_impressions <= 0 || cfg.m_contracts < 0 || cfg.horizon < 1) {
        throw DataError("traffic config: need n > 0, m >= 0, horizon >= 1");
    }
    if (!(cfg.demand_ratio > 0.0 && cfg.demand_ratio < 1.0)) {
        throw DataError("traffic config: demand_ratio must be in (0, 1)");
    }
    if (cfg.rtb_bidders < 2) {
        throw DataError("traffic config: need at least two RTB bidders");
    }
    if (!(cfg.price_log_sigma > 0.0) || !(cfg.quality_alpha > 0.0) ||
        !(cfg.quality_beta > 0.0)) {
        throw DataError("traffic config: distribution parameters must be positive");
    }
    if (!(cfg.drift.volume_multiplier > 0.0) || !(cfg.drift.price_multiplier > 0.0)) {
        throw DataError("traffic config: drift multipliers must be positive");
    }
    if (!cfg.diurnal.empty() &&
        cfg.diurnal.size() != static_cast<std::size_t>(cfg.horizon)) {
        throw DataError("traffic config: diurnal curve length must equal the horizon");
    }
}

/// Smooth two-peak intraday volume curve.
inline std::vector<double> default_diurnal(int horizon) {
    std::vector<double> w(static_cast<std::size_t>(horizon));
    for (int t = 0; t < horizon; ++t) {
        const double x = (t + 0.5) / static_cast<double>(horizon);
        w[static_cast<std::size_t>(t)] =
            0.45 + std::exp(-std::pow((x - 0.42) / 0.18, 2)) +
            0.75 * std::exp(-std::pow((x - 0.82) / 0.1, 2));
    }
    return w;
}

/// Demands sum exactly to round(demand_ratio * n) via largest-remainder
/// rounding of random per-contract shares.
inline std::vector<Contract> generate_contracts(const TrafficConfig& cfg,
                                                std::mt19937_64& rng) {
    validate_traffic_config(cfg);
    const int m = cfg.m_contracts;
    std::vector<Contract> contracts(static_cast<std::size_t>(m));
    if (m == 0) return contracts;

    const auto total = static_cast<std::int64_t>(
        std::llround(cfg.demand_ratio * static_cast<double>(cfg.n_impressions)));
    std::uniform_real_distribution<double> share(0.5, 1.5);
    std::vector<double> weights(static_cast<std::size_t>(m));
    double wsum = 0.0;
    for (auto& w : weights) wsum += (w = share(rng));

    std::vector<double> exact(static_cast<std::size_t>(m));
    std::vector<std::int64_t> demand(static_cast<std::size_t>(m));
    std::int64_t assigned = 0;
    for (int j = 0; j < m; ++j) {
        exact[static_cast<std::size_t>(j)] =
            static_cast<double>(total) * weights[static_cast<std::size_t>(j)] / wsum;
        demand[static_cast<std::size_t>(j)] =
            static_cast<std::int64_t>(exact[static_cast<std::size_t>(j)]);
        assigned += demand[static_cast<std::size_t>(j)];
    }
    std::vector<int> idx(static_cast<std::size_t>(m));
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        const double ra = exact[static_cast<std::size_t>(a)] -
                          std::floor(exact[static_cast<std::size_t>(a)]);
        const double rb = exact[static_cast<std::size_t>(b)] -
                          std::floor(exact[static_cast<std::size_t>(b)]);
        if (ra != rb) return ra > rb;
        return a < b;
    });
    for (std::int64_t k = 0; assigned < total; ++k, ++assigned) {
        ++demand[static_cast<std::size_t>(idx[static_cast<std::size_t>(k % m)])];
    }

    std::uniform_real_distribution<double> penalty(cfg.penalty_min, cfg.penalty_max);
    std::uniform_real_distribution<double> lambda(cfg.lambda_min, cfg.lambda_max);
    std::uniform_real_distribution<double> price(cfg.unit_price_min, cfg.unit_price_max);
    for (int j = 0; j < m; ++j) {
        auto& c = contracts[static_cast<std::size_t>(j)];
        c.id = j;
        c.demand = std::max<std::int64_t>(1, demand[static_cast<std::size_t>(j)]);
        c.penalty = penalty(rng);
        c.quality_weight = lambda(rng);
        c.unit_price = price(rng);
    }
    return contracts;
}

/**
 * Draws one day of impressions. The top two of `rtb_bidders` i.i.d.
 * lognormal price draws become (b1, b2); qualities are beta-distributed,
 * optionally blended with a shared per-impression latent when the mixture
 * knob is on; steps follow the diurnal weights. Drift multipliers scale
 * the impression count and the price log-location.
 */
inline Day generate_day(const TrafficConfig& cfg, std::mt19937_64& rng,
                        double volume_multiplier = 1.0, double price_multiplier = 1.0) {
    validate_traffic_config(cfg);
    const auto n = static_cast<std::int64_t>(
        std::llround(static_cast<double>(cfg.n_impressions) * volume_multiplier));
    const int m = cfg.m_contracts;

    Day day;
    day.horizon = cfg.horizon;
    day.impressions.resize(static_cast<std::size_t>(n));

    const auto weights = cfg.diurnal.empty() ? default_diurnal(cfg.horizon) : cfg.diurnal;
    std::discrete_distribution<int> step_dist(weights.begin(), weights.end());
    std::lognormal_distribution<double> price(
        cfg.price_log_mean + std::log(price_multiplier), cfg.price_log_sigma);
    std::gamma_distribution<double> ga(cfg.quality_alpha, 1.0);
    std::gamma_distribution<double> gb(cfg.quality_beta, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<double> bids(static_cast<std::size_t>(cfg.rtb_bidders));
    for (std::int64_t i = 0; i < n; ++i) {
        auto& imp = day.impressions[static_cast<std::size_t>(i)];
        imp.id = i;
        imp.step = step_dist(rng) + 1;
        for (auto& b : bids) b = price(rng);
        std::partial_sort(bids.begin(), bids.begin() + 2, bids.end(),
                          std::greater<double>());
        imp.first_bid = bids[0];
        imp.second_bid = bids[1];
        imp.quality.resize(static_cast<std::size_t>(m));
        const double latent = unit(rng);
        for (auto& q : imp.quality) {
            const double x = ga(rng);
            const double y = gb(rng);
            const double beta = x / (x + y);
            q = (1.0 - cfg.quality_mixture) * beta + cfg.quality_mixture * latent;
        }
    }
    std::stable_sort(day.impressions.begin(), day.impressions.end(),
                     [](const Impression& a, const Impression& b) {
                         return a.step < b.step;
                     });
    return day;
}

struct DayPair {
    std::vector<Contract> contracts;
    Day train;
    Day test;
};

/// A train/test pair sharing one contract book: the train day is the base
/// draw, the test day applies the configured drift.
inline DayPair generate_pair(const TrafficConfig& cfg) {
    DayPair pair;
    auto contracts_rng = substream(cfg.seed, "contracts");
    pair.contracts = generate_contracts(cfg, contracts_rng);
    auto train_rng = substream(cfg.seed, "train-day");
    pair.train = generate_day(cfg, train_rng);
    auto test_rng = substream(cfg.seed, "test-day");
    pair.test = generate_day(cfg, test_rng, cfg.drift.volume_multiplier,
                             cfg.drift.price_multiplier);
    return pair;
}

inline TrafficConfig traffic_config_from_json(const nlohmann::json& j) {
    TrafficConfig cfg;
    cfg.n_impressions = j.value("n_impressions", cfg.n_impressions);
    cfg.m_contracts = j.value("m_contracts", cfg.m_contracts);
    cfg.horizon = j.value("horizon", cfg.horizon);
    cfg.demand_ratio = j.value("demand_ratio", cfg.demand_ratio);
    cfg.price_log_mean = j.value("price_log_mean", cfg.price_log_mean);
    cfg.price_log_sigma = j.value("price_log_sigma", cfg.price_log_sigma);
    cfg.rtb_bidders = j.value("rtb_bidders", cfg.rtb_bidders);
    cfg.quality_alpha = j.value("quality_alpha", cfg.quality_alpha);
    cfg.quality_beta = j.value("quality_beta", cfg.quality_beta);
    cfg.quality_mixture = j.value("quality_mixture", cfg.quality_mixture);
    cfg.penalty_min = j.value("penalty_min", cfg.penalty_min);
    cfg.penalty_max = j.value("penalty_max", cfg.penalty_max);
    cfg.lambda_min = j.value("lambda_min", cfg.lambda_min);
    cfg.lambda_max = j.value("lambda_max", cfg.lambda_max);
    cfg.unit_price_min = j.value("unit_price_min", cfg.unit_price_min);
    cfg.unit_price_max = j.value("unit_price_max", cfg.unit_price_max);
    if (j.contains("diurnal")) cfg.diurnal = j.at("diurnal").get<std::vector<double>>();
    cfg.drift.volume_multiplier = j.value("volume_multiplier", 1.0);
    cfg.drift.price_multiplier = j.value("price_multiplier", 1.0);
    cfg.seed = j.value("seed", cfg.seed);
    return cfg;
}

}  // namespace admarket
