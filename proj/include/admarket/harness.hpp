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
// The experiment workflow behind the CLI: generate a drifted day pair,
// solve the oracle, replay a policy on a train/test pair, train the
// controller, and aggregate metric reports.
//
// Exit codes: 0 success, 2 bad arguments, 3 bad data, 4 training
// divergence.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "admarket/dataset_io.hpp"
#include "admarket/episode.hpp"
#include "admarket/lp.hpp"
#include "admarket/marlia.hpp"
#include "admarket/market.hpp"
#include "admarket/mlp.hpp"
#include "admarket/policies.hpp"
#include "admarket/traffic.hpp"

namespace admarket {

inline constexpr int kExitOk = 0;
inline constexpr int kExitBadArgs = 2;
inline constexpr int kExitBadData = 3;
inline constexpr int kExitDiverged = 4;

struct MetricsRow {
    std::string policy;
    Money r = 0.0;
    Money r_star = 0.0;
    double ratio = 0.0;
    double r_gc_ratio = 0.0;
    double r_rtb_ratio = 0.0;
    double q_gc_ratio = 0.0;
    double wall_ms = 0.0;
};

/// The ratio is defined as the sum of its components, so the
/// decomposition identity holds exactly in every row.
inline MetricsRow make_metrics_row(const std::string& policy, const OutcomeReport& rep,
                                   Money r_star, double wall_ms) {
    MetricsRow row;
    row.policy = policy;
    row.r = rep.total;
    row.r_star = r_star;
    row.r_gc_ratio = rep.r_gc / r_star;
    row.r_rtb_ratio = rep.r_rtb / r_star;
    row.q_gc_ratio = rep.q_gc / r_star;
    row.ratio = row.r_gc_ratio + row.r_rtb_ratio + row.q_gc_ratio;
    row.wall_ms = wall_ms;
    return row;
}

struct HarnessConfig {
    TrafficConfig traffic;
    PidGains pid;
    TrainConfig train;
};

inline HarnessConfig load_config(const std::string& path) {
    HarnessConfig cfg;
    if (path.empty()) return cfg;
    std::ifstream in(path);
    if (!in) throw DataError(path + ": cannot open config");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
    if (j.contains("traffic")) cfg.traffic = traffic_config_from_json(j.at("traffic"));
    if (j.contains("pid")) {
        const auto& p = j.at("pid");
        cfg.pid.kp = p.value("kp", cfg.pid.kp);
        cfg.pid.ki = p.value("ki", cfg.pid.ki);
        cfg.pid.kd = p.value("kd", cfg.pid.kd);
    }
    if (j.contains("train")) {
        const auto& t = j.at("train");
        cfg.train.episodes = t.value("episodes", cfg.train.episodes);
        cfg.train.batch_size = t.value("batch_size", cfg.train.batch_size);
        cfg.train.replay_capacity = t.value("replay_capacity", cfg.train.replay_capacity);
        cfg.train.actor_lr = t.value("actor_lr", cfg.train.actor_lr);
        cfg.train.critic_lr = t.value("critic_lr", cfg.train.critic_lr);
        cfg.train.noise_sigma = t.value("noise_sigma", cfg.train.noise_sigma);
        cfg.train.subsample = t.value("subsample", cfg.train.subsample);
        cfg.train.stop_ratio = t.value("stop_ratio", cfg.train.stop_ratio);
        cfg.train.hidden_units = t.value("hidden_units", cfg.train.hidden_units);
        cfg.train.action_grad_clip =
            t.value("action_grad_clip", cfg.train.action_grad_clip);
        cfg.train.actor_warmup_episodes =
            t.value("actor_warmup_episodes", cfg.train.actor_warmup_episodes);
        cfg.train.actor_weight_decay =
            t.value("actor_weight_decay", cfg.train.actor_weight_decay);
        cfg.train.counterfactual_probes =
            t.value("counterfactual_probes", cfg.train.counterfactual_probes);
        cfg.train.critic_updates_per_step =
            t.value("critic_updates_per_step", cfg.train.critic_updates_per_step);
        cfg.train.collapse_margin = t.value("collapse_margin", cfg.train.collapse_margin);
        cfg.train.validation_volume =
            t.value("validation_volume", cfg.train.validation_volume);
        cfg.train.validation_price =
            t.value("validation_price", cfg.train.validation_price);
    }
    return cfg;
}

inline void write_checkpoint(const Mlp& actor, const Mlp& critic, double value_scale,
                             const std::string& path) {
    nlohmann::json j;
    j["actor"] = actor.to_json();
    j["critic"] = critic.to_json();
    j["value_scale"] = value_scale;
    auto out = detail::open_for_write(path);
    out << j.dump() << "\n";
}

struct Checkpoint {
    Mlp actor;
    Mlp critic;
    double value_scale = 1.0;
};

inline Checkpoint read_checkpoint(const std::string& path) {
    auto in = detail::open_for_read(path);
    nlohmann::json j;
    try {
        in >> j;
        Checkpoint ck;
        ck.actor = Mlp::from_json(j.at("actor"));
        ck.critic = Mlp::from_json(j.at("critic"));
        ck.value_scale = j.at("value_scale").get<double>();
        return ck;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
}

namespace detail {

inline void check_pairing(const Day& day, std::span<const Contract> contracts,
                          const std::string& what) {
    for (const auto& imp : day.impressions) {
        if (imp.quality.size() != contracts.size()) {
            throw DataError(what + ": impression quality width " +
                            std::to_string(imp.quality.size()) +
                            " does not match contract count " +
                            std::to_string(contracts.size()));
        }
    }
}

inline void append_metrics_csv(const std::string& path, const std::string& dataset,
                               const MetricsRow& row) {
    const bool fresh = !std::filesystem::exists(path);
    std::ofstream out(path, std::ios::app);
    if (!out) throw DataError(path + ": cannot open for writing");
    if (fresh) {
        out << "dataset,policy,R,R_star,ratio,r_gc_ratio,r_rtb_ratio,q_gc_ratio,"
               "wall_ms\n";
    }
    out << dataset << ',' << row.policy << ',' << fmt_double(row.r) << ','
        << fmt_double(row.r_star) << ',' << fmt_double(row.ratio) << ','
        << fmt_double(row.r_gc_ratio) << ',' << fmt_double(row.r_rtb_ratio) << ','
        << fmt_double(row.q_gc_ratio) << ',' << fmt_double(row.wall_ms) << "\n";
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    return fields;
}

}  // namespace detail

struct GenOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
};

inline int cmd_gen(const GenOptions& opt) {
    auto cfg = load_config(opt.config).traffic;
    if (opt.seed) cfg.seed = *opt.seed;
    std::filesystem::create_directories(opt.out_dir);
    const auto pair = generate_pair(cfg);
    const auto dir = std::filesystem::path(opt.out_dir);
    write_contracts(pair.contracts, (dir / "contracts.jsonl").string());
    write_day(pair.train, (dir / "train_impressions.jsonl").string());
    write_day(pair.test, (dir / "test_impressions.jsonl").string());
    std::cout << "generated " << pair.train.impressions.size() << " train / "
              << pair.test.impressions.size() << " test impressions, "
              << pair.contracts.size() << " contracts -> " << opt.out_dir << "\n";
    return kExitOk;
}

struct SolveOptions {
    std::string data;
    std::string contracts;
    int horizon = 96;
    std::string out;
};

inline int cmd_solve(const SolveOptions& opt) {
    const auto day = read_day(opt.data, opt.horizon);
    const auto contracts = read_contracts(opt.contracts);
    detail::check_pairing(day, contracts, opt.data);
    const auto sol = solve_dual(day.impressions, contracts);
    write_dual_solution(sol, opt.out);
    std::cout << "r_star " << sol.r_star << " dual " << sol.dual_objective << " iters "
              << sol.iters << (sol.converged ? "" : " (not converged)") << "\n";
    return sol.converged ? kExitOk : kExitBadData;
}

struct RunOptions {
    std::string policy;
    std::string train_data;
    std::string test_data;
    std::string contracts;
    std::string config;
    std::string model;
    std::string label;
    int horizon = 96;
    std::string out;
};

inline int cmd_run(const RunOptions& opt) {
    const auto cfg = load_config(opt.config);
    const auto train_day = read_day(opt.train_data, opt.horizon);
    const auto test_day = read_day(opt.test_data, opt.horizon);
    const auto contracts = read_contracts(opt.contracts);
    detail::check_pairing(train_day, contracts, opt.train_data);
    detail::check_pairing(test_day, contracts, opt.test_data);

    // Offsets initialize from the training day's optimum for every policy
    // that uses the offset mechanism.
    const auto train_sol = solve_dual(train_day.impressions, contracts);
    const auto test_sol = solve_dual(test_day.impressions, contracts);

    std::unique_ptr<Policy> policy;
    if (opt.policy == "fp") {
        policy = fp_policy(train_sol.alphas);
    } else if (opt.policy == "msvv") {
        policy = std::make_unique<MsvvPolicy>();
    } else if (opt.policy == "pid") {
        policy = std::make_unique<PidPolicy>(train_sol.alphas,
                                             target_curve_from_day(train_day), cfg.pid);
    } else if (opt.policy == "marlia") {
        if (opt.model.empty()) {
            std::cerr << "marlia runs need --model\n";
            return kExitBadArgs;
        }
        auto ck = read_checkpoint(opt.model);
        policy = std::make_unique<MarliaPolicy>(std::move(ck.actor), train_sol.alphas);
    } else {
        std::cerr << "unknown policy: " << opt.policy << "\n";
        return kExitBadArgs;
    }

    const auto t0 = std::chrono::steady_clock::now();
    const auto report = run_episode(test_day, contracts, *policy);
    const double wall_ms = std::chrono::duration<double, std::milli>(
                               std::chrono::steady_clock::now() - t0)
                               .count();
    const auto row = make_metrics_row(opt.policy, report, test_sol.r_star, wall_ms);
    const std::string dataset =
        opt.label.empty() ? std::filesystem::path(opt.test_data).stem().string()
                          : opt.label;
    detail::append_metrics_csv(opt.out, dataset, row);
    std::cout << opt.policy << " R/R* " << row.ratio << " (R " << row.r << ", R* "
              << row.r_star << ")\n";
    return kExitOk;
}

struct TrainOptions {
    std::string train_data;
    std::string contracts;
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> episodes;
    int horizon = 96;
    std::string out_dir;
};

inline int cmd_train(const TrainOptions& opt) {
    const auto cfg = load_config(opt.config);
    const auto day = read_day(opt.train_data, opt.horizon);
    const auto contracts = read_contracts(opt.contracts);
    detail::check_pairing(day, contracts, opt.train_data);

    TrainConfig tc = cfg.train;
    if (opt.seed) tc.seed = *opt.seed;
    if (opt.episodes) tc.episodes = *opt.episodes;

    const auto result = train(day, contracts, tc);

    std::filesystem::create_directories(opt.out_dir);
    const auto dir = std::filesystem::path(opt.out_dir);
    write_checkpoint(result.actor, result.critic, result.value_scale,
                     (dir / "checkpoint.json").string());
    std::ofstream log((dir / "train_log.csv").string(), std::ios::trunc);
    log << "episode,R,R_star,ratio,critic_loss,wall_ms\n";
    for (const auto& row : result.log) {
        log << row.episode << ',' << detail::fmt_double(row.outcome) << ','
            << detail::fmt_double(row.r_star) << ',' << detail::fmt_double(row.ratio)
            << ',' << detail::fmt_double(row.critic_loss) << ','
            << detail::fmt_double(row.wall_ms) << "\n";
    }
    std::cout << "best R/R* " << result.best_ratio << " at episode "
              << result.best_episode << " (" << result.log.size() << " episodes)\n";
    return kExitOk;
}

struct ReportOptions {
    std::string metrics;
    std::string out;
    std::vector<std::string> train_logs;
    std::string convergence_out;
};

/// Aggregates a metrics CSV into one row per policy (mean over datasets)
/// and prints a dataset x policy ratio table. Training logs, when given,
/// merge into a long-format convergence CSV.
inline int cmd_report(const ReportOptions& opt) {
    auto in = detail::open_for_read(opt.metrics);
    std::string line;
    if (!std::getline(in, line)) throw DataError(opt.metrics + ": empty metrics file");
    std::map<std::string, std::vector<MetricsRow>> by_policy;
    std::map<std::string, std::map<std::string, double>> table;  // dataset -> policy -> ratio
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = detail::split_csv_line(line);
        if (f.size() != 9) {
            throw DataError(opt.metrics + ":" + std::to_string(lineno) +
                            ": expected 9 columns");
        }
        MetricsRow row;
        row.policy = f[1];
        try {
            row.r = std::stod(f[2]);
            row.r_star = std::stod(f[3]);
            row.ratio = std::stod(f[4]);
            row.r_gc_ratio = std::stod(f[5]);
            row.r_rtb_ratio = std::stod(f[6]);
            row.q_gc_ratio = std::stod(f[7]);
            row.wall_ms = std::stod(f[8]);
        } catch (const std::exception&) {
            throw DataError(opt.metrics + ":" + std::to_string(lineno) +
                            ": bad numeric field");
        }
        by_policy[row.policy].push_back(row);
        table[f[0]][row.policy] = row.ratio;
    }

    std::ofstream out(opt.out, std::ios::trunc);
    if (!out) throw DataError(opt.out + ": cannot open for writing");
    out << "policy,R,R_star,ratio,r_gc_ratio,r_rtb_ratio,q_gc_ratio,datasets\n";
    for (const auto& [policy, rows] : by_policy) {
        MetricsRow mean;
        for (const auto& r : rows) {
            mean.r += r.r;
            mean.r_star += r.r_star;
            mean.ratio += r.ratio;
            mean.r_gc_ratio += r.r_gc_ratio;
            mean.r_rtb_ratio += r.r_rtb_ratio;
            mean.q_gc_ratio += r.q_gc_ratio;
        }
        const auto k = static_cast<double>(rows.size());
        out << policy << ',' << detail::fmt_double(mean.r / k) << ','
            << detail::fmt_double(mean.r_star / k) << ','
            << detail::fmt_double(mean.ratio / k) << ','
            << detail::fmt_double(mean.r_gc_ratio / k) << ','
            << detail::fmt_double(mean.r_rtb_ratio / k) << ','
            << detail::fmt_double(mean.q_gc_ratio / k) << ',' << rows.size() << "\n";
    }

    // Dataset-by-policy ratio table on stdout.
    std::vector<std::string> policies;
    for (const auto& [policy, rows] : by_policy) policies.push_back(policy);
    std::cout << "dataset";
    for (const auto& p : policies) std::cout << '\t' << p;
    std::cout << "\n";
    for (const auto& [dataset, cols] : table) {
        std::cout << dataset;
        for (const auto& p : policies) {
            auto it = cols.find(p);
            if (it != cols.end()) {
                std::cout << '\t' << it->second;
            } else {
                std::cout << "\t-";
            }
        }
        std::cout << "\n";
    }

    if (!opt.train_logs.empty()) {
        if (opt.convergence_out.empty()) {
            std::cerr << "--train-log needs --convergence\n";
            return kExitBadArgs;
        }
        std::ofstream conv(opt.convergence_out, std::ios::trunc);
        if (!conv) throw DataError(opt.convergence_out + ": cannot open for writing");
        conv << "dataset,episode,ratio\n";
        for (const auto& log_path : opt.train_logs) {
            auto log_in = detail::open_for_read(log_path);
            std::string header;
            std::getline(log_in, header);
            const auto label = std::filesystem::path(log_path).stem().string();
            while (std::getline(log_in, line)) {
                if (line.empty()) continue;
                const auto f = detail::split_csv_line(line);
                if (f.size() < 4) throw DataError(log_path + ": bad training log row");
                conv << label << ',' << f[0] << ',' << f[3] << "\n";
            }
        }
    }
    return kExitOk;
}

}  // namespace admarket
