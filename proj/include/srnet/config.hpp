/*
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "srnet/baselines.hpp"
#include "srnet/error.hpp"
#include "srnet/scenario.hpp"
#include "srnet/training.hpp"

namespace srnet {

using KeyValues = std::map<std::string, std::string>;

/// Flat "key = value" text, '#' starts a comment.
inline KeyValues parse_key_values(std::istream& is)
{
    KeyValues kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos)
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            fail(ErrorCode::Parse, "config line " + std::to_string(line_no) + ": expected key = value");
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        if (key.empty())
            fail(ErrorCode::Parse, "config line " + std::to_string(line_no) + ": empty key");
        kv[key] = trim(line.substr(eq + 1));
    }
    return kv;
}

inline KeyValues load_key_values(const std::string& path)
{
    std::ifstream is(path);
    if (!is)
        fail(ErrorCode::InvalidArgument, "cannot open config '" + path + "'");
    return parse_key_values(is);
}

namespace detail {

inline double to_double(const KeyValues& kv, const std::string& key)
{
    try {
        std::size_t used = 0;
        const std::string& s = kv.at(key);
        const double v = std::stod(s, &used);
        if (used == s.size())
            return v;
    } catch (const std::exception&) {
    }
    fail(ErrorCode::Parse, "config key '" + key + "' is not a number");
}

inline long to_long(const KeyValues& kv, const std::string& key)
{
    const double v = to_double(kv, key);
    if (v != static_cast<double>(static_cast<long>(v)))
        fail(ErrorCode::Parse, "config key '" + key + "' is not an integer");
    return static_cast<long>(v);
}

inline std::vector<double> to_list(const std::string& s)
{
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (tok.find_first_not_of(" \t", used) == std::string::npos)
                continue;
        } catch (const std::exception&) {
        }
        fail(ErrorCode::Parse, "bad list entry '" + tok + "'");
    }
    return out;
}

} // namespace detail

/// Training keys: iterations, batch_size, learning_rate, beta1, beta2, adam_epsilon,
/// seed, hidden (comma list), bn_momentum, lr_decay_every, lr_decay, preset (desk|full).
inline TrainConfig train_config_from(const KeyValues& kv, TrainConfig cfg = {})
{
    if (auto it = kv.find("preset"); it != kv.end()) {
        if (it->second == "full")
            cfg = TrainConfig::full_scale();
        else if (it->second == "desk")
            cfg = TrainConfig::desk_scale();
        else
            fail(ErrorCode::Parse, "unknown preset '" + it->second + "'");
    }
    if (kv.count("iterations"))
        cfg.iterations = detail::to_long(kv, "iterations");
    if (kv.count("batch_size"))
        cfg.batch_size = static_cast<int>(detail::to_long(kv, "batch_size"));
    if (kv.count("learning_rate"))
        cfg.adam.learning_rate = detail::to_double(kv, "learning_rate");
    if (kv.count("beta1"))
        cfg.adam.beta1 = detail::to_double(kv, "beta1");
    if (kv.count("beta2"))
        cfg.adam.beta2 = detail::to_double(kv, "beta2");
    if (kv.count("adam_epsilon"))
        cfg.adam.epsilon = detail::to_double(kv, "adam_epsilon");
    if (kv.count("seed"))
        cfg.seed = static_cast<std::uint64_t>(detail::to_long(kv, "seed"));
    if (kv.count("bn_momentum"))
        cfg.bn_momentum = detail::to_double(kv, "bn_momentum");
    if (kv.count("lr_decay_every"))
        cfg.lr_decay_every = detail::to_long(kv, "lr_decay_every");
    if (kv.count("lr_decay"))
        cfg.lr_decay = detail::to_double(kv, "lr_decay");
    if (auto it = kv.find("hidden"); it != kv.end()) {
        cfg.hidden.clear();
        for (double h : detail::to_list(it->second))
            cfg.hidden.push_back(static_cast<int>(h));
    }
    return cfg;
}

/// Penalty keys: penalty_weights (comma list), validation_fraction, ensemble_size.
inline PenaltyConfig penalty_config_from(const KeyValues& kv, PenaltyConfig cfg = {})
{
    if (auto it = kv.find("penalty_weights"); it != kv.end())
        cfg.weight_grid = detail::to_list(it->second);
    if (kv.count("validation_fraction"))
        cfg.validation_fraction = detail::to_double(kv, "validation_fraction");
    if (kv.count("ensemble_size"))
        cfg.ensemble_size = static_cast<int>(detail::to_long(kv, "ensemble_size"));
    return cfg;
}

/// Scenario keys: cells, cell_radius, pmax_dbm, sigma2_dbm, shadowing_std_db,
/// min_distance_m, attempt_cap, yield_floor.
inline DatasetConfig dataset_config_from(const KeyValues& kv, DatasetConfig cfg = {})
{
    auto& sc = cfg.scenario;
    if (kv.count("cells"))
        sc.cell_count = static_cast<int>(detail::to_long(kv, "cells"));
    if (kv.count("cell_radius"))
        sc.cell_radius = detail::to_double(kv, "cell_radius");
    if (kv.count("pmax_dbm"))
        sc.pmax_dbm = detail::to_double(kv, "pmax_dbm");
    if (kv.count("sigma2_dbm"))
        sc.sigma2_dbm = detail::to_double(kv, "sigma2_dbm");
    if (kv.count("shadowing_std_db"))
        sc.shadowing_std_db = detail::to_double(kv, "shadowing_std_db");
    if (kv.count("min_distance_m"))
        sc.min_distance_m = detail::to_double(kv, "min_distance_m");
    if (kv.count("attempt_cap"))
        sc.attempt_cap = detail::to_long(kv, "attempt_cap");
    if (kv.count("yield_floor"))
        cfg.yield_floor = detail::to_double(kv, "yield_floor");
    return cfg;
}

} // namespace srnet
