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
// Solves the day-level outcome-maximization program and its dual.
//
// Primal (per day): choose an assignment of impressions to contracts (at
// most one winner per impression, at most d_j per contract, leftovers go
// to RTB) maximizing contract revenue net of penalties + RTB revenue +
// quality value. The dual reduces, after eliminating the per-impression
// shadow prices analytically, to minimizing the piecewise-linear convex
//
//   g(alpha) = sum_i max(0, max_j(lambda_j q_ij + alpha_j - b_i2))
//            - sum_j alpha_j d_j           over the box alpha_j <= p_j.
//
// solve_dual runs an optional projected-subgradient stage and then an
// exact primal-dual stage: the variable part of the primal is a
// transportation problem (assign impression i to contract j with utility
// u_ij = lambda_j q_ij + p_j - b_i2), solved by successive shortest
// augmenting paths over a compact contract graph. Optimal offsets come
// from the terminal node potentials, then each coordinate is re-centered
// at the midpoint of its exact flat interval so that replays stay away
// from knife-edge ties.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "admarket/market.hpp"

namespace admarket {

struct DualSolution {
    std::vector<Money> alphas;
    std::optional<std::vector<Money>> betas;
    Money r_star = 0.0;          ///< optimal total outcome, constants included
    Money dual_objective = 0.0;  ///< g at the returned alphas
    int iters = 0;
    bool converged = true;
};

struct PrimalSolution {
    std::vector<int> assignment;           ///< per impression: kRtb or contract index
    std::vector<std::int64_t> shortfalls;  ///< y_j
    Money objective = 0.0;                 ///< R_GC + R_RTB + Q_GC
};

struct DualSolveConfig {
    double tol = 1e-6;              ///< relative tolerance on the dual objective
    int max_iters = 5000;           ///< subgradient iteration cap
    bool subgradient_only = false;  ///< skip the exact matching stage
    double step_scale = 0.0;        ///< subgradient step constant c (0 = auto)
    std::vector<double>* trace = nullptr;  ///< best-so-far g per subgradient iter
    std::function<void(std::span<const Money>, double)> on_iterate;  ///< test hook
    bool with_betas = false;
};

namespace detail {

inline std::vector<std::int64_t> demand_vector(std::span<const Contract> contracts,
                                               std::span<const std::int64_t> override_d) {
    if (!override_d.empty()) {
        return {override_d.begin(), override_d.end()};
    }
    std::vector<std::int64_t> d(contracts.size());
    for (std::size_t j = 0; j < contracts.size(); ++j) d[j] = contracts[j].demand;
    return d;
}

}  // namespace detail

/// Evaluates g(alpha) with the shadow prices eliminated analytically:
/// g = sum_i max(0, max_j(lambda_j q_ij + alpha_j - b_i2)) - sum_j alpha_j d_j.
/// Rejects infeasible offsets (alpha_j > p_j).
inline Money dual_objective(std::span<const Money> alphas,
                            std::span<const Impression> impressions,
                            std::span<const Contract> contracts,
                            std::span<const std::int64_t> demands = {}) {
    const std::size_t m = contracts.size();
    if (alphas.size() != m) {
        throw std::invalid_argument("dual_objective: alpha dimension mismatch");
    }
    for (std::size_t j = 0; j < m; ++j) {
        if (alphas[j] > contracts[j].penalty) {
            throw std::invalid_argument("dual_objective: alpha_j exceeds penalty p_j");
        }
    }
    const auto d = detail::demand_vector(contracts, demands);
    Money g = 0.0;
    for (const auto& imp : impressions) {
        Money best = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            const Money v = contracts[j].quality_weight * imp.quality[j] + alphas[j] -
                            imp.second_bid;
            if (v > best) best = v;
        }
        g += best;
    }
    for (std::size_t j = 0; j < m; ++j) {
        g -= alphas[j] * static_cast<Money>(d[j]);
    }
    return g;
}

/// The tight shadow prices implied by a set of offsets.
inline std::vector<Money> dual_betas(std::span<const Money> alphas,
                                     std::span<const Impression> impressions,
                                     std::span<const Contract> contracts) {
    std::vector<Money> betas;
    betas.reserve(impressions.size());
    for (const auto& imp : impressions) {
        Money best = 0.0;
        for (std::size_t j = 0; j < contracts.size(); ++j) {
            const Money v = contracts[j].quality_weight * imp.quality[j] + alphas[j] -
                            imp.second_bid;
            if (v > best) best = v;
        }
        betas.push_back(best);
    }
    return betas;
}

/**
 * Exhaustive oracle for tiny instances: maximizes the full outcome over
 * all integral assignments with the per-contract cap sum_i x_ij <= d_j.
 * Enumeration is (m+1)^n, so instances are limited to n <= 10, m <= 3.
 */
inline PrimalSolution brute_force_primal(std::span<const Impression> impressions,
                                         std::span<const Contract> contracts,
                                         std::span<const std::int64_t> demands = {}) {
    const std::size_t n = impressions.size();
    const std::size_t m = contracts.size();
    if (n > 10 || m > 3) {
        throw std::invalid_argument("brute_force_primal: instance too large (n <= 10, m <= 3)");
    }
    const auto d = detail::demand_vector(contracts, demands);

    Money prepaid = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        prepaid += contracts[j].unit_price * static_cast<Money>(d[j]);
    }

    std::vector<int> choice(n, kRtb);
    std::vector<std::int64_t> counts(m, 0);
    PrimalSolution best;
    best.objective = -std::numeric_limits<Money>::infinity();

    auto evaluate = [&]() {
        Money obj = prepaid;
        for (std::size_t i = 0; i < n; ++i) {
            if (choice[i] == kRtb) {
                obj += impressions[i].second_bid;
            } else {
                const auto j = static_cast<std::size_t>(choice[i]);
                obj += contracts[j].quality_weight * impressions[i].quality[j];
            }
        }
        for (std::size_t j = 0; j < m; ++j) {
            obj -= contracts[j].penalty * static_cast<Money>(d[j] - counts[j]);
        }
        if (obj > best.objective) {
            best.objective = obj;
            best.assignment = choice;
            best.shortfalls.assign(m, 0);
            for (std::size_t j = 0; j < m; ++j) best.shortfalls[j] = d[j] - counts[j];
        }
    };

    std::function<void(std::size_t)> rec = [&](std::size_t i) {
        if (i == n) {
            evaluate();
            return;
        }
        rec(i + 1);  // RTB
        for (std::size_t j = 0; j < m; ++j) {
            if (counts[j] < d[j]) {
                choice[i] = static_cast<int>(j);
                ++counts[j];
                rec(i + 1);
                --counts[j];
                choice[i] = kRtb;
            }
        }
    };
    rec(0);
    return best;
}

namespace detail {

/// A lower bound on alpha_j that provably never cuts off the optimal set:
/// at this offset the contract's bid is at most -max_i b_i2 <= 0, so it
/// can never win, and g is strictly decreasing in alpha_j below any
/// never-winning point.
inline std::vector<Money> alpha_lower_bounds(std::span<const Impression> impressions,
                                             std::span<const Contract> contracts) {
    Money max_b2 = 0.0;
    for (const auto& imp : impressions) max_b2 = std::max(max_b2, imp.second_bid);
    std::vector<Money> lo(contracts.size());
    for (std::size_t j = 0; j < contracts.size(); ++j) {
        lo[j] = -(contracts[j].quality_weight + max_b2) - 1.0;
    }
    return lo;
}

struct SubgradientResult {
    std::vector<Money> alphas;
    Money objective = 0.0;
    int iters = 0;
    bool converged = false;
};

/// Projected subgradient descent on g with step c / sqrt(k), tracking the
/// best iterate. Stops early once the best value stops improving.
inline SubgradientResult subgradient_stage(std::span<const Impression> impressions,
                                           std::span<const Contract> contracts,
                                           std::span<const std::int64_t> demands,
                                           const DualSolveConfig& cfg) {
    const std::size_t m = contracts.size();
    const auto lo = alpha_lower_bounds(impressions, contracts);

    std::vector<Money> alpha(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        alpha[j] = std::clamp(alpha[j], lo[j], contracts[j].penalty);
    }
    std::vector<Money> grad(m, 0.0);

    auto eval = [&](std::span<const Money> a, std::vector<Money>& sub) {
        std::fill(sub.begin(), sub.end(), 0.0);
        Money g = 0.0;
        for (const auto& imp : impressions) {
            Money best = 0.0;
            int arg = -1;
            for (std::size_t j = 0; j < m; ++j) {
                const Money v = contracts[j].quality_weight * imp.quality[j] + a[j] -
                                imp.second_bid;
                if (v > best) {
                    best = v;
                    arg = static_cast<int>(j);
                }
            }
            g += best;
            if (arg >= 0) sub[static_cast<std::size_t>(arg)] += 1.0;
        }
        for (std::size_t j = 0; j < m; ++j) {
            g -= a[j] * static_cast<Money>(demands[j]);
            sub[j] -= static_cast<Money>(demands[j]);
        }
        return g;
    };

    double width2 = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const double w = contracts[j].penalty - lo[j];
        width2 += w * w;
    }
    const double c = cfg.step_scale > 0.0 ? cfg.step_scale : 0.5 * std::sqrt(width2);

    SubgradientResult res;
    res.alphas = alpha;
    res.objective = eval(alpha, grad);
    Money window_best = res.objective;
    constexpr int kWindow = 50;

    for (int k = 1; k <= cfg.max_iters; ++k) {
        double norm = 0.0;
        for (double v : grad) norm += v * v;
        norm = std::sqrt(norm);
        if (norm == 0.0) {
            res.converged = true;
            res.iters = k - 1;
            break;
        }
        const double step = c / (std::sqrt(static_cast<double>(k)) * norm);
        for (std::size_t j = 0; j < m; ++j) {
            alpha[j] = std::clamp(alpha[j] - step * grad[j], lo[j], contracts[j].penalty);
        }
        const Money g = eval(alpha, grad);
        if (g < res.objective) {
            res.objective = g;
            res.alphas = alpha;
        }
        res.iters = k;
        if (cfg.trace) cfg.trace->push_back(res.objective);
        if (cfg.on_iterate) cfg.on_iterate(alpha, g);
        if (k % kWindow == 0) {
            if (window_best - res.objective <= cfg.tol * (std::abs(res.objective) + 1.0)) {
                res.converged = true;
                break;
            }
            window_best = res.objective;
        }
    }
    return res;
}

/// Exact transportation solve of the variable part: successive shortest
/// augmenting paths over a compact graph with one node per contract plus a
/// sink. Returns the matched utility and the shortest residual distances
/// to the sink, from which optimal offsets are read off.
struct MatchingResult {
    Money matched_utility = 0.0;           ///< sum of u over assigned pairs
    int augmentations = 0;
    std::vector<double> dist_to_sink;      ///< per contract, +inf if cut off
};

inline MatchingResult solve_matching(std::span<const Impression> impressions,
                                     std::span<const Contract> contracts,
                                     std::span<const std::int64_t> demands) {
    const std::size_t n = impressions.size();
    const std::size_t m = contracts.size();
    const double inf = std::numeric_limits<double>::infinity();
    MatchingResult out;
    out.dist_to_sink.assign(m, inf);
    if (m == 0) return out;

    // u[i*m + j]: utility of giving impression i to contract j.
    std::vector<double> u(n * m);
    double u_scale = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const double v = contracts[j].quality_weight * impressions[i].quality[j] +
                             contracts[j].penalty - impressions[i].second_bid;
            u[i * m + j] = v;
            u_scale = std::max(u_scale, std::abs(v));
        }
    }
    const double eps = 1e-12 * u_scale;

    // Per-contract preference order over impressions, best utility first.
    std::vector<std::vector<std::uint32_t>> order(m);
    std::vector<std::size_t> ptr(m, 0);
    for (std::size_t j = 0; j < m; ++j) {
        order[j].resize(n);
        std::iota(order[j].begin(), order[j].end(), 0u);
        std::sort(order[j].begin(), order[j].end(), [&](std::uint32_t a, std::uint32_t b) {
            const double ua = u[a * m + j], ub = u[b * m + j];
            if (ua != ub) return ua > ub;
            return a < b;
        });
    }

    std::vector<int> owner(n, -1);
    std::vector<std::vector<std::uint32_t>> assigned(m);
    std::vector<std::size_t> pos_in_owner(n, 0);

    // W[j][k]: cheapest cost of contract j stealing one impression from k.
    std::vector<std::vector<double>> W(m, std::vector<double>(m, inf));
    std::vector<std::vector<std::int64_t>> Warg(m, std::vector<std::int64_t>(m, -1));

    auto best_free = [&](std::size_t j) -> std::int64_t {
        auto& p = ptr[j];
        while (p < n && owner[order[j][p]] != -1) ++p;
        return p < n ? static_cast<std::int64_t>(order[j][p]) : -1;
    };

    auto recompute_column = [&](std::size_t jj, std::size_t k) {
        double best = inf;
        std::int64_t arg = -1;
        for (std::uint32_t i : assigned[k]) {
            const double w = u[i * m + k] - u[i * m + jj];
            if (w < best) {
                best = w;
                arg = i;
            }
        }
        W[jj][k] = best;
        Warg[jj][k] = arg;
    };

    auto attach = [&](std::uint32_t i, std::size_t k) {
        owner[i] = static_cast<int>(k);
        pos_in_owner[i] = assigned[k].size();
        assigned[k].push_back(i);
        for (std::size_t j = 0; j < m; ++j) {
            if (j == k) continue;
            const double w = u[i * m + k] - u[i * m + j];
            if (w < W[j][k]) {
                W[j][k] = w;
                Warg[j][k] = i;
            }
        }
    };

    auto detach = [&](std::uint32_t i, std::size_t k) {
        auto& vec = assigned[k];
        const std::size_t pos = pos_in_owner[i];
        vec[pos] = vec.back();
        pos_in_owner[vec[pos]] = pos;
        vec.pop_back();
        owner[i] = -1;
        for (std::size_t j = 0; j < m; ++j) {
            if (j != k && Warg[j][k] == static_cast<std::int64_t>(i)) {
                recompute_column(j, k);
            }
        }
    };

    const std::size_t sink = m;
    std::vector<double> phi(m + 1, 0.0);
    // With an empty assignment the only arcs are S->j (cost 0) and j->T
    // (cost -u_ij); seeding the sink potential at -max u makes every
    // reduced cost non-negative, which Dijkstra requires throughout.
    double max_u = 0.0;
    for (double v : u) max_u = std::max(max_u, v);
    phi[sink] = -max_u;
    std::vector<double> dist(m + 1);
    std::vector<char> settled(m + 1);
    std::vector<int> par_node(m + 1);
    std::vector<std::int64_t> par_imp(m + 1);

    while (true) {
        std::fill(dist.begin(), dist.end(), inf);
        std::fill(settled.begin(), settled.end(), 0);
        std::fill(par_node.begin(), par_node.end(), -1);
        std::fill(par_imp.begin(), par_imp.end(), -1);
        bool any_source = false;
        for (std::size_t j = 0; j < m; ++j) {
            if (static_cast<std::int64_t>(assigned[j].size()) < demands[j]) {
                dist[j] = 0.0;
                any_source = true;
            }
        }
        if (!any_source) break;

        for (std::size_t round = 0; round <= m; ++round) {
            std::size_t v = m + 1;
            double dv = inf;
            for (std::size_t x = 0; x <= m; ++x) {
                if (!settled[x] && dist[x] < dv) {
                    dv = dist[x];
                    v = x;
                }
            }
            if (v == m + 1) break;
            settled[v] = 1;
            if (v == sink) continue;
            const std::int64_t bf = best_free(v);
            if (bf >= 0) {
                const double w = -u[static_cast<std::size_t>(bf) * m + v] + phi[v] - phi[sink];
                if (dv + w < dist[sink]) {
                    dist[sink] = dv + w;
                    par_node[sink] = static_cast<int>(v);
                    par_imp[sink] = bf;
                }
            }
            for (std::size_t k = 0; k < m; ++k) {
                if (k == v || settled[k] || assigned[k].empty()) continue;
                const double w = W[v][k] + phi[v] - phi[k];
                if (dv + w < dist[k]) {
                    dist[k] = dv + w;
                    par_node[k] = static_cast<int>(v);
                    par_imp[k] = Warg[v][k];
                }
            }
        }

        if (dist[sink] == inf) break;
        const double true_cost = dist[sink] + phi[sink];
        if (true_cost >= -eps) break;

        // Walk the augmenting path back from the sink, moving impressions.
        std::size_t v = sink;
        while (par_node[v] != -1) {
            const auto from = static_cast<std::size_t>(par_node[v]);
            const auto i = static_cast<std::uint32_t>(par_imp[v]);
            if (v != sink) {
                detach(i, v);
                out.matched_utility -= u[i * m + v];
            }
            out.matched_utility += u[i * m + from];
            attach(i, from);
            v = from;
        }
        ++out.augmentations;

        const double dcap = dist[sink];
        for (std::size_t x = 0; x <= m; ++x) {
            phi[x] += std::min(dist[x], dcap);
        }
    }

    // Shortest true-cost distances to the sink over the residual graph
    // (Bellman-Ford over the compact nodes; no negative cycles at optimum).
    std::vector<double> pi(m + 1, inf);
    pi[sink] = 0.0;
    for (std::size_t round = 0; round <= m; ++round) {
        bool changed = false;
        for (std::size_t j = 0; j < m; ++j) {
            const std::int64_t bf = best_free(j);
            if (bf >= 0) {
                const double cand = -u[static_cast<std::size_t>(bf) * m + j];
                if (cand < pi[j]) {
                    pi[j] = cand;
                    changed = true;
                }
            }
            for (std::size_t k = 0; k < m; ++k) {
                if (k == j || assigned[k].empty() || pi[k] == inf) continue;
                const double cand = W[j][k] + pi[k];
                if (cand < pi[j]) {
                    pi[j] = cand;
                    changed = true;
                }
            }
        }
        if (!changed) break;
    }
    for (std::size_t j = 0; j < m; ++j) out.dist_to_sink[j] = pi[j];
    return out;
}

/// Re-centers each offset at the midpoint of its exact flat interval with
/// the other coordinates held fixed. Each move is an exact 1-D minimization
/// of g, so the objective never increases; iterating to a fixed point both
/// polishes the optimum and keeps replays away from knife-edge ties.
inline void midpoint_polish(std::vector<Money>& alpha,
                            std::span<const Impression> impressions,
                            std::span<const Contract> contracts,
                            std::span<const std::int64_t> demands,
                            std::span<const Money> lo) {
    const std::size_t n = impressions.size();
    const std::size_t m = contracts.size();
    std::vector<double> theta(n);
    constexpr int kMaxSweeps = 50;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double moved = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            for (std::size_t i = 0; i < n; ++i) {
                const auto& imp = impressions[i];
                Money h = 0.0;
                for (std::size_t k = 0; k < m; ++k) {
                    if (k == j) continue;
                    const Money v = contracts[k].quality_weight * imp.quality[k] +
                                    alpha[k] - imp.second_bid;
                    if (v > h) h = v;
                }
                theta[i] = imp.second_bid + h -
                           contracts[j].quality_weight * imp.quality[j];
            }
            const auto d = static_cast<std::size_t>(std::max<std::int64_t>(0, demands[j]));
            const Money p = contracts[j].penalty;
            Money lo_int, hi_int;
            if (d == 0) {
                lo_int = lo[j];
                hi_int = n > 0 ? *std::min_element(theta.begin(), theta.end()) : p;
            } else if (d > n) {
                lo_int = p;
                hi_int = p;
            } else if (d == n) {
                lo_int = *std::max_element(theta.begin(), theta.end());
                hi_int = p;
            } else {
                std::nth_element(theta.begin(), theta.begin() + static_cast<long>(d),
                                 theta.end());
                hi_int = theta[d];
                lo_int = *std::max_element(theta.begin(), theta.begin() + static_cast<long>(d));
            }
            Money a = std::clamp(lo_int, lo[j], p);
            Money b = std::clamp(hi_int, lo[j], p);
            if (b < a) b = a;  // optimal interval lies outside the box: pin to edge
            const Money next = 0.5 * (a + b);
            moved = std::max(moved, std::abs(next - alpha[j]));
            alpha[j] = next;
        }
        if (moved < 1e-13) break;
    }
}

}  // namespace detail

/**
 * Computes optimal bid offsets alpha*, the optimal outcome R*, and the
 * dual objective for a complete impression set.
 *
 * The default pipeline is the subgradient stage (only when a trace is
 * requested) followed by the exact matching stage plus the midpoint
 * polish; `subgradient_only` restricts it to the first stage. R* is
 * reconstructed as g(alpha*) plus the constant terms sum_i b_i2 and
 * sum_j c_j d_j.
 */
inline DualSolution solve_dual(std::span<const Impression> impressions,
                               std::span<const Contract> contracts,
                               const DualSolveConfig& cfg = {},
                               std::span<const std::int64_t> demands_override = {}) {
    if (impressions.empty()) {
        throw std::invalid_argument("solve_dual: empty impression set");
    }
    const std::size_t m = contracts.size();
    const auto demands = detail::demand_vector(contracts, demands_override);

    Money const_b2 = 0.0;
    for (const auto& imp : impressions) const_b2 += imp.second_bid;
    Money const_cd = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const_cd += contracts[j].unit_price * static_cast<Money>(demands[j]);
    }

    DualSolution sol;
    if (m == 0) {
        sol.r_star = const_b2;
        return sol;
    }

    const auto lo = detail::alpha_lower_bounds(impressions, contracts);
    int iters = 0;
    std::vector<Money> alpha;
    bool converged = true;

    if (cfg.subgradient_only || cfg.trace || cfg.on_iterate) {
        auto sg = detail::subgradient_stage(impressions, contracts, demands, cfg);
        iters = sg.iters;
        alpha = std::move(sg.alphas);
        converged = sg.converged;
    }

    if (!cfg.subgradient_only) {
        auto match = detail::solve_matching(impressions, contracts, demands);
        iters += match.augmentations;
        alpha.assign(m, 0.0);
        for (std::size_t j = 0; j < m; ++j) {
            const double pi = match.dist_to_sink[j];
            const Money gamma = std::isinf(pi) ? 0.0 : std::max(0.0, -pi);
            alpha[j] = std::clamp(contracts[j].penalty - gamma, lo[j], contracts[j].penalty);
        }
        detail::midpoint_polish(alpha, impressions, contracts, demands, lo);

        // Certify against the exact primal: strong duality must hold.
        Money primal_net = match.matched_utility;
        for (std::size_t j = 0; j < m; ++j) {
            primal_net -= contracts[j].penalty * static_cast<Money>(demands[j]);
        }
        const Money g = dual_objective(alpha, impressions, contracts, demands);
        const Money scale = std::abs(g) + const_b2 + std::abs(const_cd) + 1.0;
        converged = std::abs(g - primal_net) <= cfg.tol * scale;
    }

    sol.alphas = std::move(alpha);
    sol.dual_objective = dual_objective(sol.alphas, impressions, contracts, demands);
    sol.r_star = sol.dual_objective + const_b2 + const_cd;
    sol.iters = iters;
    sol.converged = converged;
    if (cfg.with_betas) {
        sol.betas = dual_betas(sol.alphas, impressions, contracts);
    }
    return sol;
}

/**
 * Mid-episode sub-problem: re-solves the dual on the remaining impressions
 * with residual demands d'_j = max(0, d_j - e_j). Over-delivered contracts
 * clamp to zero residual demand. R* of the sub-problem uses the residual
 * prepaid revenue sum_j c_j d'_j.
 */
inline DualSolution solve_subproblem(std::span<const Impression> remaining,
                                     std::span<const Contract> contracts,
                                     std::span<const std::int64_t> delivered,
                                     const DualSolveConfig& cfg = {}) {
    if (delivered.size() != contracts.size()) {
        throw std::invalid_argument("solve_subproblem: delivered size mismatch");
    }
    std::vector<std::int64_t> residual(contracts.size());
    for (std::size_t j = 0; j < contracts.size(); ++j) {
        residual[j] = std::max<std::int64_t>(0, contracts[j].demand - delivered[j]);
    }
    return solve_dual(remaining, contracts, cfg, residual);
}

}  // namespace admarket
