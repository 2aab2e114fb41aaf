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

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "srnet/error.hpp"
#include "srnet/scenario.hpp"

namespace srnet {

// Dataset file layout:
//   line 1  K,rho_min,rho_max,rate_spec,seed,count,sigma2_dBm,pmax_dBm
//   line 2  the values of those fields
//   line 3  "# key=value ..." generation statistics (optional on load)
//   then one record per sample: K*K normalised gains (row-major) followed by
//   K SINR targets, all printed with 17 significant digits.

inline constexpr const char* kDatasetHeader = "K,rho_min,rho_max,rate_spec,seed,count,sigma2_dBm,pmax_dBm";

inline std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_dataset(std::ostream& os, const Dataset& ds)
{
    const auto& m = ds.meta;
    os << kDatasetHeader << '\n';
    os << m.cell_count << ',' << format_double(m.rho_min_db) << ',' << format_double(m.rho_max_db) << ','
       << m.rate.to_string() << ',' << m.seed << ',' << ds.samples.size() << ',' << format_double(m.sigma2_dbm)
       << ',' << format_double(m.pmax_dbm) << '\n';
    os << "# distance_unit=" << m.distance_unit << " attempts=" << m.attempts << " infeasible=" << m.infeasible
       << " degenerate=" << m.degenerate << '\n';
    const int k = m.cell_count;
    std::string line;
    for (const auto& ch : ds.samples) {
        line.clear();
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) {
                line += format_double(ch.gains(i, j));
                line += ',';
            }
        for (int i = 0; i < k; ++i) {
            line += format_double(ch.gamma_min(i));
            line += (i + 1 < k) ? ',' : '\n';
        }
        os << line;
    }
}

inline void save_dataset(const Dataset& ds, const std::string& path)
{
    std::ofstream os(path);
    if (!os)
        fail(ErrorCode::InvalidArgument, "cannot open '" + path + "' for writing");
    write_dataset(os, ds);
    if (!os)
        fail(ErrorCode::InvalidArgument, "write to '" + path + "' failed");
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ','))
        fields.push_back(field);
    if (!line.empty() && line.back() == ',')
        fields.emplace_back();
    return fields;
}

inline double parse_double(const std::string& text, std::size_t line_no)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used == text.size() && std::isfinite(v))
            return v;
    } catch (const std::exception&) {
    }
    fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": bad number '" + text + "'");
}

inline std::uint64_t parse_uint(const std::string& text, std::size_t line_no)
{
    try {
        std::size_t used = 0;
        const auto v = std::stoull(text, &used);
        if (used == text.size() && !text.empty() && text[0] != '-')
            return v;
    } catch (const std::exception&) {
    }
    fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": bad integer '" + text + "'");
}

inline void parse_stats(const std::string& line, DatasetMeta& meta)
{
    std::istringstream ss(line.substr(1));
    std::string token;
    while (ss >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos)
            continue;
        const std::string key = token.substr(0, eq);
        const std::string value = token.substr(eq + 1);
        try {
            if (key == "distance_unit")
                meta.distance_unit = value;
            else if (key == "attempts")
                meta.attempts = std::stoull(value);
            else if (key == "infeasible")
                meta.infeasible = std::stoull(value);
            else if (key == "degenerate")
                meta.degenerate = std::stoull(value);
        } catch (const std::exception&) {
        }
    }
}

} // namespace detail

/// Reads a dataset. A first record whose field count corresponds to a different
/// cell count raises a schema error; other malformed or missing records raise a
/// parse error naming the line.
inline Dataset read_dataset(std::istream& is)
{
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(is, line))
        fail(ErrorCode::Parse, "line 1: empty file");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != kDatasetHeader)
        fail(ErrorCode::Parse, "line 1: unexpected header '" + line + "'");

    ++line_no;
    if (!std::getline(is, line))
        fail(ErrorCode::Parse, "line 2: missing metadata record");
    const auto head = detail::split_csv(line);
    if (head.size() != 8)
        fail(ErrorCode::Parse, "line 2: expected 8 metadata fields, got " + std::to_string(head.size()));

    Dataset ds;
    auto& m = ds.meta;
    m.cell_count = static_cast<int>(detail::parse_uint(head[0], line_no));
    if (m.cell_count < 1)
        fail(ErrorCode::Schema, "line 2: cell count must be positive");
    m.rho_min_db = detail::parse_double(head[1], line_no);
    m.rho_max_db = detail::parse_double(head[2], line_no);
    try {
        m.rate = RateSpec::parse(head[3]);
    } catch (const Error&) {
        fail(ErrorCode::Parse, "line 2: bad rate spec '" + head[3] + "'");
    }
    m.seed = detail::parse_uint(head[4], line_no);
    m.count = detail::parse_uint(head[5], line_no);
    m.sigma2_dbm = detail::parse_double(head[6], line_no);
    m.pmax_dbm = detail::parse_double(head[7], line_no);

    const int k = m.cell_count;
    const std::size_t fields = static_cast<std::size_t>(k) * k + k;
    const double p_max = dbm_to_watts(m.pmax_dbm);
    ds.samples.reserve(m.count);
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        if (line[0] == '#') {
            detail::parse_stats(line, m);
            continue;
        }
        const auto cells = detail::split_csv(line);
        if (cells.size() != fields) {
            const auto n = cells.size();
            const auto other_k = static_cast<std::size_t>(std::llround((std::sqrt(4.0 * n + 1.0) - 1.0) / 2.0));
            if (ds.samples.empty() && other_k >= 1 && other_k * other_k + other_k == n)
                fail(ErrorCode::Schema, "line " + std::to_string(line_no) + ": record has " + std::to_string(n) +
                                            " fields (K=" + std::to_string(other_k) + ") but header says K=" +
                                            std::to_string(k));
            fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": expected " + std::to_string(fields) +
                                       " fields, got " + std::to_string(n));
        }
        ChannelRealization ch;
        ch.gains.resize(k, k);
        ch.gamma_min.resize(k);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j)
                ch.gains(i, j) = detail::parse_double(cells[static_cast<std::size_t>(i * k + j)], line_no);
        for (int i = 0; i < k; ++i)
            ch.gamma_min(i) = detail::parse_double(cells[static_cast<std::size_t>(k * k + i)], line_no);
        ch.noise_power = 1.0;
        ch.p_max = p_max;
        try {
            ch.validate();
        } catch (const Error& e) {
            fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": " + e.what());
        }
        ds.samples.push_back(std::move(ch));
    }
    if (ds.samples.size() != m.count)
        fail(ErrorCode::Parse, "file truncated: header promises " + std::to_string(m.count) + " records, found " +
                                   std::to_string(ds.samples.size()));
    return ds;
}

inline Dataset load_dataset(const std::string& path)
{
    std::ifstream is(path);
    if (!is)
        fail(ErrorCode::InvalidArgument, "cannot open '" + path + "'");
    return read_dataset(is);
}

} // namespace srnet
