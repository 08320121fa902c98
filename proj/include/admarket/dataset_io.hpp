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
// JSONL dataset files: one impression or contract object per line.
// Impressions: {"id", "step", "b1", "b2", "q": [...]}
// Contracts:   {"id", "demand", "unit_price", "penalty", "quality_weight"}
// Doubles are written with 17 significant digits so read(write(x)) == x.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "admarket/errors.hpp"
#include "admarket/lp.hpp"
#include "admarket/market.hpp"

namespace admarket {

namespace detail {

inline std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::ifstream open_for_read(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError(path + ": cannot open for reading");
    return in;
}

inline std::ofstream open_for_write(const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError(path + ": cannot open for writing");
    return out;
}

inline nlohmann::json parse_line(const std::string& path, std::size_t lineno,
                                 const std::string& line) {
    try {
        return nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
}

}  // namespace detail

inline void write_day(const Day& day, const std::string& path) {
    auto out = detail::open_for_write(path);
    for (const auto& imp : day.impressions) {
        out << "{\"id\":" << imp.id << ",\"step\":" << imp.step
            << ",\"b1\":" << detail::fmt_double(imp.first_bid)
            << ",\"b2\":" << detail::fmt_double(imp.second_bid) << ",\"q\":[";
        for (std::size_t j = 0; j < imp.quality.size(); ++j) {
            if (j) out << ',';
            out << detail::fmt_double(imp.quality[j]);
        }
        out << "]}\n";
    }
}

/// Reads an impression stream. Empty files yield an empty day; malformed
/// lines and out-of-order steps are rejected with the line number.
inline Day read_day(const std::string& path, int horizon = 96) {
    auto in = detail::open_for_read(path);
    Day day;
    day.horizon = horizon;
    std::string line;
    std::size_t lineno = 0;
    int prev_step = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto j = detail::parse_line(path, lineno, line);
        Impression imp;
        try {
            imp.id = j.at("id").get<std::int64_t>();
            imp.step = j.at("step").get<int>();
            imp.first_bid = j.at("b1").get<double>();
            imp.second_bid = j.at("b2").get<double>();
            imp.quality = j.at("q").get<std::vector<double>>();
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (imp.step < prev_step) {
            throw DataError(path + ":" + std::to_string(lineno) +
                            ": steps out of order");
        }
        prev_step = imp.step;
        day.impressions.push_back(std::move(imp));
    }
    validate_day(day, day.impressions.empty() ? 0 : day.impressions[0].quality.size());
    return day;
}

inline void write_contracts(std::span<const Contract> contracts,
                            const std::string& path) {
    auto out = detail::open_for_write(path);
    for (const auto& c : contracts) {
        out << "{\"id\":" << c.id << ",\"demand\":" << c.demand
            << ",\"unit_price\":" << detail::fmt_double(c.unit_price)
            << ",\"penalty\":" << detail::fmt_double(c.penalty)
            << ",\"quality_weight\":" << detail::fmt_double(c.quality_weight) << "}\n";
    }
}

inline std::vector<Contract> read_contracts(const std::string& path) {
    auto in = detail::open_for_read(path);
    std::vector<Contract> contracts;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto j = detail::parse_line(path, lineno, line);
        Contract c;
        try {
            c.id = j.at("id").get<std::int64_t>();
            c.demand = j.at("demand").get<std::int64_t>();
            c.unit_price = j.at("unit_price").get<double>();
            c.penalty = j.at("penalty").get<double>();
            c.quality_weight = j.at("quality_weight").get<double>();
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        contracts.push_back(c);
    }
    validate_contracts(contracts);
    return contracts;
}

/// DualSolution JSON: {"alphas": [...], "r_star", "dual_objective", "iters"}.
inline void write_dual_solution(const DualSolution& sol, const std::string& path) {
    auto out = detail::open_for_write(path);
    out << "{\"alphas\":[";
    for (std::size_t j = 0; j < sol.alphas.size(); ++j) {
        if (j) out << ',';
        out << detail::fmt_double(sol.alphas[j]);
    }
    out << "],\"r_star\":" << detail::fmt_double(sol.r_star)
        << ",\"dual_objective\":" << detail::fmt_double(sol.dual_objective)
        << ",\"iters\":" << sol.iters << "}\n";
}

inline DualSolution read_dual_solution(const std::string& path) {
    auto in = detail::open_for_read(path);
    std::stringstream ss;
    ss << in.rdbuf();
    const auto j = detail::parse_line(path, 1, ss.str());
    DualSolution sol;
    try {
        sol.alphas = j.at("alphas").get<std::vector<double>>();
        sol.r_star = j.at("r_star").get<double>();
        sol.dual_objective = j.at("dual_objective").get<double>();
        sol.iters = j.at("iters").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
    return sol;
}

}  // namespace admarket
