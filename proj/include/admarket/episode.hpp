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

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "admarket/market.hpp"

namespace admarket {

/// Mutable per-episode bookkeeping. Cheap to copy, which is how rollouts
/// snapshot an episode mid-flight.
struct EpisodeState {
    std::vector<Money> alphas;                  ///< current bid offsets
    std::vector<std::int64_t> delivered;        ///< e_j
    std::vector<std::int64_t> prev_step_wins;   ///< per-contract wins in the last step
    std::int64_t rtb_wins = 0;
    std::int64_t impressions_seen = 0;
    int step = 0;                               ///< last completed step
    Money rtb_revenue = 0.0;
    Money quality_value = 0.0;
};

/**
 * Deterministic replay of one day of impressions against a set of
 * contracts, advanced one step at a time. Contracts keep bidding after
 * their demand is met; throttling over-delivery is the controller's job.
 *
 * The Episode holds references to the day and the contracts, which must
 * outlive it. Copying an Episode copies only the state, so cloned episodes
 * can be run independently over the same read-only data.
 */
class Episode {
public:
    Episode(const Day& day, std::span<const Contract> contracts)
        : day_(&day), contracts_(contracts) {
        if (day.horizon < 1) {
            throw DataError("episode: horizon must be >= 1");
        }
        validate_day(day, contracts.size());
        step_begin_.assign(static_cast<std::size_t>(day.horizon) + 2, 0);
        std::size_t i = 0;
        for (int t = 1; t <= day.horizon + 1; ++t) {
            while (i < day.impressions.size() && day.impressions[i].step < t) ++i;
            step_begin_[static_cast<std::size_t>(t)] = i;
        }
        const auto m = contracts.size();
        state_.alphas.assign(m, 0.0);
        state_.delivered.assign(m, 0);
        state_.prev_step_wins.assign(m, 0);
    }

    const Day& day() const { return *day_; }
    std::span<const Contract> contracts() const { return contracts_; }
    int horizon() const { return day_->horizon; }
    bool done() const { return state_.step >= day_->horizon; }
    const EpisodeState& state() const { return state_; }
    std::vector<Money>& alphas() { return state_.alphas; }

    std::span<const Impression> step_impressions(int t) const {
        const auto b = step_begin_[static_cast<std::size_t>(t)];
        const auto e = step_begin_[static_cast<std::size_t>(t) + 1];
        return std::span<const Impression>(day_->impressions).subspan(b, e - b);
    }

    /// Impressions of the steps not yet run.
    std::span<const Impression> remaining_impressions() const {
        const auto b = step_begin_[static_cast<std::size_t>(state_.step) + 1];
        return std::span<const Impression>(day_->impressions).subspan(b);
    }

    /// Runs the auctions of the next step. `decide` maps an impression to an
    /// AllocationDecision; the default uses allocate() with current alphas.
    /// Returns the step reward (terminal penalty included on the last step).
    template <class DecideFn>
    Money run_step(DecideFn&& decide) {
        if (done()) {
            throw std::logic_error("episode: run_step past the horizon");
        }
        const int t = state_.step + 1;
        const auto imps = step_impressions(t);
        decisions_.clear();
        decisions_.reserve(imps.size());
        step_wins_.assign(contracts_.size(), 0);
        for (const auto& imp : imps) {
            AllocationDecision d = decide(imp);
            if (d.is_rtb()) {
                ++state_.rtb_wins;
                state_.rtb_revenue += imp.second_bid;
            } else {
                const auto j = static_cast<std::size_t>(d.target);
                ++state_.delivered[j];
                ++step_wins_[j];
                state_.quality_value +=
                    contracts_[j].quality_weight * imp.quality[j];
            }
            ++state_.impressions_seen;
            decisions_.push_back(d);
        }
        state_.prev_step_wins = step_wins_;
        state_.step = t;
        const bool terminal = t == day_->horizon;
        std::vector<std::int64_t> shortfalls;
        if (terminal) shortfalls = compute_shortfalls();
        return step_reward(imps, decisions_, contracts_, terminal, shortfalls);
    }

    Money run_step() {
        return run_step([this](const Impression& imp) {
            return allocate(imp, contracts_, state_.alphas);
        });
    }

    /// Decisions made during the most recent step, for observers.
    std::span<const AllocationDecision> last_decisions() const { return decisions_; }

    std::vector<std::int64_t> compute_shortfalls() const {
        std::vector<std::int64_t> y(contracts_.size());
        for (std::size_t j = 0; j < contracts_.size(); ++j) {
            y[j] = std::max<std::int64_t>(0, contracts_[j].demand - state_.delivered[j]);
        }
        return y;
    }

    /// Outcome accounting for a finished episode.
    OutcomeReport report() const {
        if (!done()) {
            throw std::logic_error("episode: report requested before the horizon");
        }
        OutcomeReport r;
        r.delivered = state_.delivered;
        r.shortfalls = compute_shortfalls();
        r.r_rtb = state_.rtb_revenue;
        r.q_gc = state_.quality_value;
        for (std::size_t j = 0; j < contracts_.size(); ++j) {
            r.r_gc += contracts_[j].unit_price * static_cast<Money>(contracts_[j].demand);
            r.r_gc -= contracts_[j].penalty * static_cast<Money>(r.shortfalls[j]);
        }
        r.total = r.r_gc + r.r_rtb + r.q_gc;
        return r;
    }

private:
    const Day* day_;
    std::span<const Contract> contracts_;
    std::vector<std::size_t> step_begin_;  // first impression index per step
    EpisodeState state_;
    std::vector<AllocationDecision> decisions_;
    std::vector<std::int64_t> step_wins_;
};

/// A per-step bid-offset controller (or per-impression override, for
/// policies that bypass the offset mechanism entirely).
class Policy {
public:
    virtual ~Policy() = default;

    /// Called once before step 1 with zero-initialized alphas.
    virtual void begin_episode(const Episode& /*ep*/, std::vector<Money>& /*alphas*/) {}

    /// Called at each step boundary before the step's auctions run.
    virtual void begin_step(int /*t*/, const Episode& /*ep*/,
                            std::vector<Money>& /*alphas*/) {}

    virtual AllocationDecision decide(const Impression& imp, const Episode& ep) const {
        return allocate(imp, ep.contracts(), ep.state().alphas);
    }
};

/// Constant bid offsets for the whole episode.
class ConstantPolicy : public Policy {
public:
    explicit ConstantPolicy(std::vector<Money> alphas) : alphas_(std::move(alphas)) {}
    void begin_episode(const Episode&, std::vector<Money>& alphas) override {
        alphas = alphas_;
    }

private:
    std::vector<Money> alphas_;
};

using StepObserver = std::function<void(int step, std::span<const Impression>,
                                        std::span<const AllocationDecision>)>;

/**
 * Replays a full day under the given policy and returns the outcome
 * report. The policy hook fires at each of the horizon's step boundaries;
 * the optional observer sees every step's impressions and decisions.
 */
inline OutcomeReport run_episode(const Day& day, std::span<const Contract> contracts,
                                 Policy& policy, const StepObserver& observer = {}) {
    Episode ep(day, contracts);
    policy.begin_episode(ep, ep.alphas());
    for (int t = 1; t <= ep.horizon(); ++t) {
        policy.begin_step(t, ep, ep.alphas());
        ep.run_step([&](const Impression& imp) { return policy.decide(imp, ep); });
        if (observer) observer(t, ep.step_impressions(t), ep.last_decisions());
    }
    return ep.report();
}

}  // namespace admarket
