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
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "admarket/errors.hpp"

namespace admarket {

/// Money amounts are plain doubles and all comparisons are exact (no
/// epsilon), so the deterministic tie rules below are well defined.
using Money = double;

/// A guaranteed-delivery line item.
struct Contract {
    std::int64_t id = 0;
    std::int64_t demand = 0;      ///< d_j, impressions owed
    Money unit_price = 0.0;       ///< c_j, prepaid price per impression
    Money penalty = 0.0;          ///< p_j, charge per undelivered impression
    Money quality_weight = 0.0;   ///< converts one unit of quality into money
};

/// One auction opportunity. `quality` holds one predicted-quality entry
/// (e.g. CTR) per contract; `first_bid >= second_bid >= 0`.
struct Impression {
    std::int64_t id = 0;
    int step = 1;                 ///< 1-based time step within the horizon
    Money first_bid = 0.0;
    Money second_bid = 0.0;
    std::vector<double> quality;
};

/// One day of impressions, sorted by step.
struct Day {
    std::vector<Impression> impressions;
    int horizon = 96;
};

/// Sentinel target meaning "sold through RTB".
inline constexpr int kRtb = -1;

struct AllocationDecision {
    int target = kRtb;            ///< contract index, or kRtb
    Money payment = 0.0;          ///< second RTB bid when RTB wins, else 0
    bool is_rtb() const { return target == kRtb; }
};

struct OutcomeReport {
    Money r_gc = 0.0;             ///< contract revenue net of penalties
    Money r_rtb = 0.0;            ///< RTB revenue
    Money q_gc = 0.0;             ///< money-equivalent contract quality
    Money total = 0.0;            ///< r_gc + r_rtb + q_gc
    std::vector<std::int64_t> shortfalls;  ///< y_j = max(0, d_j - e_j)
    std::vector<std::int64_t> delivered;   ///< e_j
};

/// The contract bidding function: quality value plus the contract's offset.
inline Money contract_bid(const Contract& contract, double quality, Money alpha) {
    return contract.quality_weight * quality + alpha;
}

/**
 * Runs one auction between the contracts and RTB.
 *
 * Every contract bids contract_bid(j, q_ij, alpha_j). The best contract
 * wins only if its bid strictly exceeds the second RTB bid; otherwise the
 * impression is sold through RTB at that second bid. Ties between the best
 * contract bid and the RTB price go to RTB, and ties among contracts break
 * toward the lowest contract index, so replays are deterministic.
 */
inline AllocationDecision allocate(const Impression& imp,
                                   std::span<const Contract> contracts,
                                   std::span<const Money> alphas) {
    if (alphas.size() != contracts.size() || imp.quality.size() != contracts.size()) {
        throw std::invalid_argument(
            "allocate: alpha/quality dimension does not match contract count");
    }
    int best = kRtb;
    Money best_bid = 0.0;
    for (std::size_t j = 0; j < contracts.size(); ++j) {
        const Money b = contract_bid(contracts[j], imp.quality[j], alphas[j]);
        if (best == kRtb || b > best_bid) {
            best = static_cast<int>(j);
            best_bid = b;
        }
    }
    if (best != kRtb && best_bid > imp.second_bid) {
        return {best, 0.0};
    }
    return {kRtb, imp.second_bid};
}

/**
 * Reward produced by one step's auctions: RTB revenue plus quality value
 * of contract wins, minus the under-delivery penalty at the terminal step.
 * The prepaid sum(c_j * d_j) is a constant and is excluded here; it is
 * added back in OutcomeReport::r_gc.
 */
inline Money step_reward(std::span<const Impression> impressions,
                         std::span<const AllocationDecision> decisions,
                         std::span<const Contract> contracts,
                         bool is_terminal,
                         std::span<const std::int64_t> shortfalls = {}) {
    if (impressions.size() != decisions.size()) {
        throw std::invalid_argument("step_reward: impression/decision size mismatch");
    }
    Money r = 0.0;
    for (std::size_t k = 0; k < impressions.size(); ++k) {
        const auto& d = decisions[k];
        if (d.is_rtb()) {
            r += impressions[k].second_bid;
        } else {
            const auto j = static_cast<std::size_t>(d.target);
            r += contracts[j].quality_weight * impressions[k].quality[j];
        }
    }
    if (is_terminal) {
        if (shortfalls.size() != contracts.size()) {
            throw std::invalid_argument("step_reward: terminal step needs shortfalls");
        }
        for (std::size_t j = 0; j < contracts.size(); ++j) {
            r -= contracts[j].penalty * static_cast<Money>(shortfalls[j]);
        }
    }
    return r;
}

struct IcProbeResult {
    bool won = false;
    Money payment = 0.0;
};

/**
 * Replays one auction from the point of view of an RTB bidder who replaces
 * the top RTB bid with `probe_bid`. The remaining known RTB competition is
 * the original second bid. The probed bidder wins when it tops the other
 * RTB bid and no contract outbids the RTB price; the payment is the other
 * RTB bid (contract bids never enter the price). Used by the
 * incentive-compatibility property tests.
 */
inline IcProbeResult ic_probe(const Impression& imp,
                              std::span<const Contract> contracts,
                              std::span<const Money> alphas,
                              Money probe_bid) {
    if (probe_bid < 0.0) {
        throw std::invalid_argument("ic_probe: probe bid must be non-negative");
    }
    if (alphas.size() != contracts.size() || imp.quality.size() != contracts.size()) {
        throw std::invalid_argument("ic_probe: dimension mismatch");
    }
    const Money other = imp.second_bid;
    Money best_contract = 0.0;
    bool have_contract = false;
    for (std::size_t j = 0; j < contracts.size(); ++j) {
        const Money b = contract_bid(contracts[j], imp.quality[j], alphas[j]);
        if (!have_contract || b > best_contract) {
            best_contract = b;
            have_contract = true;
        }
    }
    // The probe wins iff it is the top RTB bid and the impression goes to
    // RTB, i.e. no contract bid strictly exceeds the RTB second price.
    const bool rtb_gets_it = !(have_contract && best_contract > other);
    const bool won = probe_bid > other && rtb_gets_it;
    return {won, won ? other : 0.0};
}

/// Validates the invariants of a day of impressions against m contracts.
/// Throws DataError naming the first offending impression index.
inline void validate_day(const Day& day, std::size_t num_contracts) {
    int prev_step = 1;
    for (std::size_t i = 0; i < day.impressions.size(); ++i) {
        const auto& imp = day.impressions[i];
        const std::string where = "impression " + std::to_string(i);
        if (imp.step < 1 || imp.step > day.horizon) {
            throw DataError(where + ": step " + std::to_string(imp.step) +
                            " outside horizon [1, " + std::to_string(day.horizon) + "]");
        }
        if (imp.step < prev_step) {
            throw DataError(where + ": stream not sorted by step");
        }
        prev_step = imp.step;
        if (!(imp.first_bid >= imp.second_bid) || !(imp.second_bid >= 0.0)) {
            throw DataError(where + ": bids must satisfy b1 >= b2 >= 0");
        }
        if (imp.quality.size() != num_contracts) {
            throw DataError(where + ": quality vector length " +
                            std::to_string(imp.quality.size()) + " != contract count " +
                            std::to_string(num_contracts));
        }
        for (double q : imp.quality) {
            if (!(q >= 0.0 && q <= 1.0)) {
                throw DataError(where + ": quality outside [0, 1]");
            }
        }
    }
}

inline void validate_contracts(std::span<const Contract> contracts) {
    for (std::size_t j = 0; j < contracts.size(); ++j) {
        const auto& c = contracts[j];
        if (c.demand <= 0 || !(c.penalty > 0.0) || c.quality_weight < 0.0 ||
            c.unit_price < 0.0) {
            throw DataError("contract " + std::to_string(j) +
                            ": requires d > 0, p > 0, lambda >= 0, c >= 0");
        }
    }
}

}  // namespace admarket
