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

#include <CLI11.hpp>

#include <iostream>

#include "admarket/harness.hpp"

using namespace admarket;

int main(int argc, char** argv) {
    CLI::App app{"impression allocation lab: guaranteed contracts vs in-house RTB"};
    app.require_subcommand(1);

    GenOptions gen;
    std::uint64_t gen_seed = 0;
    auto* gen_cmd = app.add_subcommand("gen", "generate a synthetic train/test day pair");
    gen_cmd->add_option("--config", gen.config, "JSON config file");
    auto* gen_seed_opt = gen_cmd->add_option("--seed", gen_seed, "override the config seed");
    gen_cmd->add_option("--out", gen.out_dir, "output directory")->required();

    SolveOptions solve;
    auto* solve_cmd = app.add_subcommand("solve", "solve the dual oracle for a day");
    solve_cmd->add_option("--data", solve.data, "impressions JSONL")->required();
    solve_cmd->add_option("--contracts", solve.contracts, "contracts JSONL")->required();
    solve_cmd->add_option("--horizon", solve.horizon, "time steps per day");
    solve_cmd->add_option("--out", solve.out, "dual solution JSON")->required();

    RunOptions run;
    auto* run_cmd = app.add_subcommand("run", "replay a policy on a train/test pair");
    run_cmd->add_option("--policy", run.policy, "fp|msvv|pid|marlia")
        ->required()
        ->check(CLI::IsMember({"fp", "msvv", "pid", "marlia"}));
    run_cmd->add_option("--train-data", run.train_data, "training day JSONL")->required();
    run_cmd->add_option("--test-data", run.test_data, "test day JSONL")->required();
    run_cmd->add_option("--contracts", run.contracts, "contracts JSONL")->required();
    run_cmd->add_option("--config", run.config, "JSON config file");
    run_cmd->add_option("--model", run.model, "MARLIA checkpoint JSON");
    run_cmd->add_option("--label", run.label, "dataset label for the metrics row");
    run_cmd->add_option("--horizon", run.horizon, "time steps per day");
    run_cmd->add_option("--out", run.out, "metrics CSV to append to")->required();

    TrainOptions tr;
    std::uint64_t train_seed = 0;
    int episodes = 0;
    auto* train_cmd = app.add_subcommand("train", "train the MARLIA controller");
    train_cmd->add_option("--train-data", tr.train_data, "training day JSONL")->required();
    train_cmd->add_option("--contracts", tr.contracts, "contracts JSONL")->required();
    train_cmd->add_option("--config", tr.config, "JSON config file");
    auto* train_seed_opt = train_cmd->add_option("--seed", train_seed, "RNG seed");
    auto* episodes_opt = train_cmd->add_option("--episodes", episodes, "episode cap");
    train_cmd->add_option("--horizon", tr.horizon, "time steps per day");
    train_cmd->add_option("--out", tr.out_dir, "output directory")->required();

    ReportOptions rep;
    auto* report_cmd = app.add_subcommand("report", "aggregate metrics across policies");
    report_cmd->add_option("--metrics", rep.metrics, "metrics CSV from `run`")->required();
    report_cmd->add_option("--out", rep.out, "per-policy report CSV")->required();
    report_cmd->add_option("--train-log", rep.train_logs, "training log CSV (repeatable)");
    report_cmd->add_option("--convergence", rep.convergence_out, "convergence CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitBadArgs;
    }

    try {
        if (gen_cmd->parsed()) {
            if (gen_seed_opt->count() > 0) gen.seed = gen_seed;
            return cmd_gen(gen);
        }
        if (solve_cmd->parsed()) return cmd_solve(solve);
        if (run_cmd->parsed()) return cmd_run(run);
        if (train_cmd->parsed()) {
            if (train_seed_opt->count() > 0) tr.seed = train_seed;
            if (episodes_opt->count() > 0) tr.episodes = episodes;
            return cmd_train(tr);
        }
        if (report_cmd->parsed()) return cmd_report(rep);
    } catch (const DivergenceError& e) {
        std::cerr << "training diverged: " << e.what() << "\n";
        return kExitDiverged;
    } catch (const DataError& e) {
        std::cerr << "bad data: " << e.what() << "\n";
        return kExitBadData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadData;
    }
    return kExitBadArgs;
}
