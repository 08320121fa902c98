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
#include <cmath>
#include <memory>
#include <span>
#include <vector>

#include "admarket/episode.hpp"
#include "admarket/market.hpp"

namespace admarket {

/// Fixed Parameter baseline: bids with the training day's optimal offsets
/// at every step of the test day.
inline std::unique_ptr<Policy> fp_policy(std::vector<Money> alpha_star) {
    return std::make_unique<ConstantPolicy>(std::move(alpha_star));
}

/// Spent fraction used by the MSVV discount, capped at 1.
inline double msvv_spent_fraction(std::int64_t delivered, std::int64_t demand) {
    if (demand <= 0) return 1.0;
    return std::min(1.0, static_cast<double>(delivered) / static_cast<double>(demand));
}

/// MSVV effective bid of a contract with spent fraction x:
/// (p_j + lambda_j q_ij) * (1 - e^(x - 1)). Zero at x = 1, so budgets
/// self-cap.
inline Money msvv_bid(const Contract& contract, double quality, double spent_fraction) {
    return (contract.penalty + contract.quality_weight * quality) *
           (1.0 - std::exp(spent_fraction - 1.0));
}

/// RTB's effective bid under the same discount: b_i2 * (1 - e^-1).
inline Money msvv_rtb_scale(Money second_bid) {
    return second_bid * (1.0 - std::exp(-1.0));
}

/**
 * MSVV online-allocation baseline. Ignores the offset mechanism entirely:
 * each impression goes to the highest effective bid, with ties to RTB and
 * contract ties to the lowest index. An RTB win still pays b_i2.
 */
class MsvvPolicy : public Policy {
public:
    AllocationDecision decide(const Impression& imp, const Episode& ep) const override {
        const auto contracts = ep.contracts();
        const auto& delivered = ep.state().delivered;
        int best = kRtb;
        Money best_bid = 0.0;
        for (std::size_t j = 0; j < contracts.size(); ++j) {
            const double x = msvv_spent_fraction(delivered[j], contracts[j].demand);
            const Money b = msvv_bid(contracts[j], imp.quality[j], x);
            if (best == kRtb || b > best_bid) {
                best = static_cast<int>(j);
                best_bid = b;
            }
        }
        if (best != kRtb && best_bid > msvv_rtb_scale(imp.second_bid)) {
            return {best, 0.0};
        }
        return {kRtb, imp.second_bid};
    }
};

struct PidGains {
    double kp = 0.5;
    double ki = 0.05;
    double kd = 0.1;
};

/// Cumulative expected delivery fraction per step, paced like the given
/// day's impression volume. Falls back to uniform pacing on an empty day.
inline std::vector<double> target_curve_from_day(const Day& day) {
    std::vector<double> curve(static_cast<std::size_t>(day.horizon), 0.0);
    for (const auto& imp : day.impressions) {
        curve[static_cast<std::size_t>(imp.step - 1)] += 1.0;
    }
    const double total = static_cast<double>(day.impressions.size());
    double acc = 0.0;
    for (std::size_t t = 0; t < curve.size(); ++t) {
        if (total > 0.0) {
            acc += curve[t] / total;
            curve[t] = acc;
        } else {
            curve[t] = static_cast<double>(t + 1) / static_cast<double>(day.horizon);
        }
    }
    return curve;
}

/**
 * PID pacing baseline. At each step boundary the per-contract error is the
 * target delivery fraction so far minus the actual fulfillment; the
 * control signal scales by p_j and the offset clamps at p_j:
 *
 *   alpha_{j,t+1} = min(alpha_{j,t} + (kp e + ki sum(e) + kd de) p_j, p_j)
 *
 * Offsets start at the training day's optimum and the integral state
 * resets at episode start.
 */
class PidPolicy : public Policy {
public:
    PidPolicy(std::vector<Money> alpha_init, std::vector<double> target_curve,
              PidGains gains = {})
        : alpha_init_(std::move(alpha_init)),
          curve_(std::move(target_curve)),
          gains_(gains) {}

    void begin_episode(const Episode& ep, std::vector<Money>& alphas) override {
        if (curve_.size() + 1 < static_cast<std::size_t>(ep.horizon())) {
            throw std::invalid_argument("pid: target curve shorter than the horizon");
        }
        const auto contracts = ep.contracts();
        alphas = alpha_init_;
        for (std::size_t j = 0; j < alphas.size(); ++j) {
            alphas[j] = std::min(alphas[j], contracts[j].penalty);
        }
        integral_.assign(contracts.size(), 0.0);
        prev_error_.assign(contracts.size(), 0.0);
    }

    void begin_step(int t, const Episode& ep, std::vector<Money>& alphas) override {
        if (t <= 1) return;  // nothing delivered yet; alphas hold the init
        const auto contracts = ep.contracts();
        const auto& delivered = ep.state().delivered;
        // Target fraction through the previous step.
        const double target = curve_[static_cast<std::size_t>(t - 2)];
        for (std::size_t j = 0; j < contracts.size(); ++j) {
            const double fulfilled = static_cast<double>(delivered[j]) /
                                     static_cast<double>(contracts[j].demand);
            const double error = target - fulfilled;
            integral_[j] += error;
            const double derivative = error - prev_error_[j];
            prev_error_[j] = error;
            const double signal =
                gains_.kp * error + gains_.ki * integral_[j] + gains_.kd * derivative;
            alphas[j] = std::min(alphas[j] + signal * contracts[j].penalty,
                                 contracts[j].penalty);
        }
    }

private:
    std::vector<Money> alpha_init_;
    std::vector<double> curve_;
    PidGains gains_;
    std::vector<double> integral_;
    std::vector<double> prev_error_;
};

}  // namespace admarket
