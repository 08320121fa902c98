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

#include <filesystem>
#include <fstream>

#include "admarket/harness.hpp"
#include "fixtures.hpp"

using namespace admarket;

namespace {

std::filesystem::path test_dir() {
    static int counter = 0;
    auto dir = std::filesystem::temp_directory_path() /
               ("admarket_harness_" + std::to_string(++counter));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) rows.push_back(detail::split_csv_line(line));
    }
    return rows;
}

// Small pipeline fixture shared by the CLI-facing tests.
struct Workspace {
    std::filesystem::path dir = test_dir();
    std::string config_path;
    std::string train_path;
    std::string test_path;
    std::string contracts_path;

    Workspace() {
        config_path = (dir / "config.json").string();
        std::ofstream cfg(config_path);
        cfg << R"({
          "traffic": {"n_impressions": 1200, "m_contracts": 3, "horizon": 12,
                      "seed": 31, "volume_multiplier": 0.96,
                      "price_multiplier": 1.04},
          "train": {"episodes": 3, "subsample": 1.0}
        })";
        cfg.close();
        GenOptions gen;
        gen.config = config_path;
        gen.out_dir = dir.string();
        REQUIRE(cmd_gen(gen) == kExitOk);
        train_path = (dir / "train_impressions.jsonl").string();
        test_path = (dir / "test_impressions.jsonl").string();
        contracts_path = (dir / "contracts.jsonl").string();
    }
};

}  // namespace

TEST_CASE("metrics rows decompose exactly") {
    OutcomeReport rep;
    rep.r_gc = 0.31;
    rep.r_rtb = 0.47;
    rep.q_gc = 0.12;
    rep.total = rep.r_gc + rep.r_rtb + rep.q_gc;
    const auto row = make_metrics_row("fp", rep, 1.1, 3.0);
    CHECK(row.ratio == row.r_gc_ratio + row.r_rtb_ratio + row.q_gc_ratio);
}

TEST_CASE("cmd_solve writes the worked instance solution") {
    const auto dir = test_dir();
    const auto day = fixtures::worked_day();
    const std::vector<Contract> cs{fixtures::worked_contract(1.0)};
    const auto imps = (dir / "worked.jsonl").string();
    const auto contracts = (dir / "contracts.jsonl").string();
    write_day(day, imps);
    write_contracts(cs, contracts);

    SolveOptions opt;
    opt.data = imps;
    opt.contracts = contracts;
    opt.horizon = 2;
    opt.out = (dir / "dual.json").string();
    REQUIRE(cmd_solve(opt) == kExitOk);

    const auto sol = read_dual_solution(opt.out);
    REQUIRE(sol.alphas.size() == 1);
    CHECK(sol.alphas[0] == Catch::Approx(0.3).margin(1e-9));
    CHECK(sol.r_star == Catch::Approx(1.8).margin(1e-9));
    CHECK(sol.dual_objective == Catch::Approx(-0.1).margin(1e-9));
}

TEST_CASE("cmd_run on identical train and test days is exact for fp") {
    Workspace ws;
    RunOptions run;
    run.policy = "fp";
    run.train_data = ws.train_path;
    run.test_data = ws.train_path;  // same day
    run.contracts = ws.contracts_path;
    run.horizon = 12;
    run.label = "selftest";
    run.out = (ws.dir / "metrics.csv").string();
    REQUIRE(cmd_run(run) == kExitOk);

    const auto rows = read_csv(run.out);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0][0] == "dataset");
    CHECK(rows[1][0] == "selftest");
    CHECK(rows[1][1] == "fp");
    const double ratio = std::stod(rows[1][4]);
    CHECK(ratio == Catch::Approx(1.0).epsilon(1e-6));
    // Component decomposition survives the CSV round trip bit-exactly.
    const double sum = std::stod(rows[1][5]) + std::stod(rows[1][6]) +
                       std::stod(rows[1][7]);
    CHECK(sum == ratio);
}

TEST_CASE("the full pipeline runs every policy and reports per-policy rows") {
    Workspace ws;
    const auto metrics = (ws.dir / "metrics.csv").string();

    TrainOptions tr;
    tr.train_data = ws.train_path;
    tr.contracts = ws.contracts_path;
    tr.config = ws.config_path;
    tr.horizon = 12;
    tr.seed = 5;
    tr.out_dir = (ws.dir / "model").string();
    REQUIRE(cmd_train(tr) == kExitOk);
    REQUIRE(std::filesystem::exists(ws.dir / "model" / "checkpoint.json"));
    REQUIRE(std::filesystem::exists(ws.dir / "model" / "train_log.csv"));

    for (const std::string policy : {"fp", "msvv", "pid", "marlia"}) {
        RunOptions run;
        run.policy = policy;
        run.train_data = ws.train_path;
        run.test_data = ws.test_path;
        run.contracts = ws.contracts_path;
        run.config = ws.config_path;
        run.horizon = 12;
        if (policy == "marlia") {
            run.model = (ws.dir / "model" / "checkpoint.json").string();
        }
        run.out = metrics;
        REQUIRE(cmd_run(run) == kExitOk);
    }

    ReportOptions rep;
    rep.metrics = metrics;
    rep.out = (ws.dir / "report.csv").string();
    rep.train_logs = {(ws.dir / "model" / "train_log.csv").string()};
    rep.convergence_out = (ws.dir / "convergence.csv").string();
    REQUIRE(cmd_report(rep) == kExitOk);

    const auto report = read_csv(rep.out);
    REQUIRE(report.size() == 5);  // header + 4 policies
    CHECK(report[0][0] == "policy");
    std::vector<std::string> policies;
    for (std::size_t r = 1; r < report.size(); ++r) policies.push_back(report[r][0]);
    CHECK(std::find(policies.begin(), policies.end(), "fp") != policies.end());
    CHECK(std::find(policies.begin(), policies.end(), "msvv") != policies.end());
    CHECK(std::find(policies.begin(), policies.end(), "pid") != policies.end());
    CHECK(std::find(policies.begin(), policies.end(), "marlia") != policies.end());

    const auto conv = read_csv(rep.convergence_out);
    REQUIRE(conv.size() >= 2);
    CHECK(conv[0] == std::vector<std::string>{"dataset", "episode", "ratio"});

    // The training log has the documented shape.
    const auto log = read_csv((ws.dir / "model" / "train_log.csv").string());
    CHECK(log[0] == std::vector<std::string>{"episode", "R", "R_star", "ratio",
                                             "critic_loss", "wall_ms"});
    CHECK(log.size() >= 2);
}

TEST_CASE("metric csv output is deterministic apart from wall time") {
    Workspace ws;
    const auto run_once = [&](const std::string& out) {
        RunOptions run;
        run.policy = "pid";
        run.train_data = ws.train_path;
        run.test_data = ws.test_path;
        run.contracts = ws.contracts_path;
        run.horizon = 12;
        run.out = out;
        REQUIRE(cmd_run(run) == kExitOk);
    };
    const auto a = (ws.dir / "a.csv").string();
    const auto b = (ws.dir / "b.csv").string();
    run_once(a);
    run_once(b);
    const auto ra = read_csv(a);
    const auto rb = read_csv(b);
    REQUIRE(ra.size() == rb.size());
    for (std::size_t r = 0; r < ra.size(); ++r) {
        for (std::size_t c = 0; c + 1 < ra[r].size(); ++c) {  // all but wall_ms
            CHECK(ra[r][c] == rb[r][c]);
        }
    }
}

TEST_CASE("error paths map to the documented exit codes") {
    Workspace ws;
    SECTION("unknown policy is a usage error") {
        RunOptions run;
        run.policy = "dqn";
        run.train_data = ws.train_path;
        run.test_data = ws.test_path;
        run.contracts = ws.contracts_path;
        run.out = (ws.dir / "m.csv").string();
        CHECK(cmd_run(run) == kExitBadArgs);
    }
    SECTION("marlia without a model is a usage error") {
        RunOptions run;
        run.policy = "marlia";
        run.train_data = ws.train_path;
        run.test_data = ws.test_path;
        run.contracts = ws.contracts_path;
        run.out = (ws.dir / "m.csv").string();
        CHECK(cmd_run(run) == kExitBadArgs);
    }
    SECTION("missing data files raise DataError (exit 3 in the CLI)") {
        SolveOptions opt;
        opt.data = (ws.dir / "missing.jsonl").string();
        opt.contracts = ws.contracts_path;
        opt.out = (ws.dir / "dual.json").string();
        CHECK_THROWS_AS(cmd_solve(opt), DataError);
    }
    SECTION("mismatched contract width is bad data") {
        const auto extra = (ws.dir / "extra_contracts.jsonl").string();
        auto contracts = read_contracts(ws.contracts_path);
        contracts.push_back(Contract{99, 10, 0.5, 0.5, 0.5});
        write_contracts(contracts, extra);
        SolveOptions opt;
        opt.data = ws.train_path;
        opt.contracts = extra;
        opt.horizon = 12;
        opt.out = (ws.dir / "dual.json").string();
        CHECK_THROWS_AS(cmd_solve(opt), DataError);
    }
    SECTION("diverging training raises DivergenceError (exit 4 in the CLI)") {
        const auto cfg_path = (ws.dir / "bad_train.json").string();
        std::ofstream cfg(cfg_path);
        cfg << R"({"train": {"episodes": 20, "critic_lr": 1e9}})";
        cfg.close();
        TrainOptions tr;
        tr.train_data = ws.train_path;
        tr.contracts = ws.contracts_path;
        tr.config = cfg_path;
        tr.horizon = 12;
        tr.out_dir = (ws.dir / "bad_model").string();
        CHECK_THROWS_AS(cmd_train(tr), DivergenceError);
    }
}
