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

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "srnet/baselines.hpp"
#include "srnet/checkpoint.hpp"
#include "srnet/dataset_io.hpp"
#include "srnet/geometry.hpp"
#include "srnet/parallel.hpp"
#include "srnet/training.hpp"

namespace srnet {

inline constexpr int kReportSchemaVersion = 1;
/// Relative slack used when reporting rate-constraint satisfaction.
inline constexpr double kSatisfactionTolerance = 1e-8;

/// A method under evaluation: a checkpoint, an ensemble of penalty checkpoints,
/// or one of the built-ins "p0" and "local-opt[:starts]".
struct Method {
    enum class Kind { Model, Ensemble, P0, LocalOpt };
    std::string label;
    Kind kind = Kind::P0;
    std::vector<MlpModel> models;
    int starts = 8;
    bool fallback = true;
};

inline Method parse_method(const std::string& spec)
{
    Method m;
    m.label = spec;
    if (spec == "p0") {
        m.kind = Method::Kind::P0;
    } else if (spec.rfind("local-opt", 0) == 0) {
        m.kind = Method::Kind::LocalOpt;
        if (spec.size() > 9) {
            if (spec[9] != ':')
                fail(ErrorCode::InvalidArgument, "bad method '" + spec + "'");
            m.starts = std::stoi(spec.substr(10));
            require(m.starts >= 1, "local-opt needs at least one start");
        }
    } else if (spec.rfind("ensemble:", 0) == 0) {
        m.kind = Method::Kind::Ensemble;
        std::stringstream ss(spec.substr(9));
        std::string path;
        while (std::getline(ss, path, ','))
            if (!path.empty())
                m.models.push_back(load_checkpoint(path));
        require(!m.models.empty(), "ensemble needs at least one checkpoint");
        for (const auto& model : m.models)
            require(!is_projected(model.variant), "ensemble members must be penalty networks");
    } else {
        m.kind = Method::Kind::Model;
        m.models.push_back(load_checkpoint(spec));
    }
    return m;
}

struct MethodReport {
    std::string label;
    std::string kind;
    double mean_sum_rate = 0.0;
    double satisfaction_raw = 0.0;
    double satisfaction = 0.0;
    double fallback_rate = 0.0;
    double mean_time_us = 0.0;
    std::size_t sample_count = 0;
};

struct SampleRow {
    std::size_t sample = 0;
    std::string method;
    double sum_rate = 0.0;
    double min_rate_margin = 0.0;
    double time_us = 0.0;
};

struct EvalReport {
    std::vector<MethodReport> methods;
    std::vector<SampleRow> rows;
    nlohmann::json config;
    std::uint64_t seed = 0;
};

struct MethodOutput {
    Vec p;
    bool raw_ok = true;
    bool fell_back = false;
};

/// Runs one method on one instance. Everything inside this call is what the
/// timing covers: featurisation, forward pass and projection (or the solver).
inline MethodOutput run_method(const Method& method, const ChannelRealization& ch, const ConstraintSet& cs, Rng& rng)
{
    MethodOutput out;
    switch (method.kind) {
    case Method::Kind::P0: out.p = baseline_p0(cs); break;
    case Method::Kind::LocalOpt: out.p = multistart_local_opt(cs, ch, method.starts, rng).p; break;
    case Method::Kind::Model: {
        const MlpModel& model = method.models.front();
        if (is_projected(model.variant)) {
            out.p = infer_one(model, ch, cs);
        } else {
            out.p = infer_one(model, ch, cs);
            out.raw_ok = meets_rate_constraints(cs, out.p);
            if (!out.raw_ok && method.fallback) {
                out.p = cs.p0;
                out.fell_back = true;
            }
        }
        break;
    }
    case Method::Kind::Ensemble: {
        double best = -std::numeric_limits<double>::infinity();
        bool any_raw = false;
        for (const auto& model : method.models) {
            bool ok = false;
            Vec p = penalty_with_fallback(model, ch, cs, &ok);
            any_raw = any_raw || ok;
            const double r = sum_rate(ch, p);
            if (r > best) {
                best = r;
                out.p = std::move(p);
            }
        }
        out.raw_ok = any_raw;
        out.fell_back = !any_raw;
        break;
    }
    }
    return out;
}

inline std::string kind_name(Method::Kind k)
{
    switch (k) {
    case Method::Kind::Model: return "model";
    case Method::Kind::Ensemble: return "ensemble";
    case Method::Kind::P0: return "p0";
    case Method::Kind::LocalOpt: return "local-opt";
    }
    return "?";
}

/// Minimum over users of achieved rate minus required rate (bit/s/Hz).
inline double min_rate_margin(const ChannelRealization& ch, const Vec& p)
{
    const Vec r = rates(ch, p);
    double margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < r.size(); ++i)
        margin = std::min(margin, r(i) - std::log2(1.0 + ch.gamma_min(i)));
    return margin;
}

/// Metrics of every method over the whole test set. Raw satisfaction is
/// measured before any p0 fallback, `satisfaction` after it.
inline EvalReport evaluate(std::vector<Method>& methods, const Dataset& test, std::uint64_t seed, int workers = 1)
{
    require(test.size() > 0, "test set is empty");
    const auto constraints = build_all_constraints(test.samples);
    EvalReport report;
    report.seed = seed;
    const std::size_t n = test.size();
    for (auto& method : methods) {
        struct Slot {
            MethodOutput out;
            double us = 0.0;
        };
        std::vector<Slot> slots(n);
        parallel_for(n, workers, [&](std::size_t m) {
            Rng rng = stream_rng(seed, m);
            const auto t0 = std::chrono::steady_clock::now();
            slots[m].out = run_method(method, test.samples[m], constraints[m], rng);
            const auto t1 = std::chrono::steady_clock::now();
            slots[m].us = std::chrono::duration<double, std::micro>(t1 - t0).count();
        });
        MethodReport mr;
        mr.label = method.label;
        mr.kind = kind_name(method.kind);
        mr.sample_count = n;
        std::size_t raw_ok = 0, ok = 0, fell = 0;
        double rate_sum = 0.0, time_sum = 0.0;
        for (std::size_t m = 0; m < n; ++m) {
            const auto& s = slots[m];
            const bool satisfied = meets_rate_constraints(constraints[m], s.out.p, kSatisfactionTolerance);
            const bool raw_satisfied = s.out.raw_ok && (s.out.fell_back ? false : satisfied);
            raw_ok += raw_satisfied ? 1 : 0;
            ok += satisfied ? 1 : 0;
            fell += s.out.fell_back ? 1 : 0;
            const double rate = sum_rate(test.samples[m], s.out.p);
            rate_sum += rate;
            time_sum += s.us;
            report.rows.push_back({m, method.label, rate, min_rate_margin(test.samples[m], s.out.p), s.us});
        }
        const double dn = static_cast<double>(n);
        mr.mean_sum_rate = rate_sum / dn;
        mr.satisfaction_raw = static_cast<double>(raw_ok) / dn;
        mr.satisfaction = static_cast<double>(ok) / dn;
        mr.fallback_rate = static_cast<double>(fell) / dn;
        mr.mean_time_us = time_sum / dn;
        report.methods.push_back(mr);
    }
    return report;
}

inline nlohmann::json to_json(const EvalReport& report)
{
    nlohmann::json j;
    j["schema_version"] = kReportSchemaVersion;
    j["seed"] = report.seed;
    j["config"] = report.config;
    j["methods"] = nlohmann::json::array();
    for (const auto& m : report.methods)
        j["methods"].push_back({{"label", m.label},
                                {"kind", m.kind},
                                {"mean_sum_rate", m.mean_sum_rate},
                                {"satisfaction_raw", m.satisfaction_raw},
                                {"satisfaction", m.satisfaction},
                                {"fallback_rate", m.fallback_rate},
                                {"mean_time_us", m.mean_time_us},
                                {"sample_count", m.sample_count}});
    return j;
}

inline void write_sample_csv(std::ostream& os, const EvalReport& report)
{
    os << "sample,method,sum_rate,min_rate_margin,time_us\n";
    for (const auto& r : report.rows)
        os << r.sample << ',' << r.method << ',' << format_double(r.sum_rate) << ','
           << format_double(r.min_rate_margin) << ',' << format_double(r.time_us) << '\n';
}

struct BenchRow {
    std::string label;
    double mean_us = 0.0;
    double total_ms_per_10k = 0.0;
};

/// Mean single-worker wall time per instance, after a warm-up pass over up to
/// 100 instances. Excludes dataset loading and model deserialisation.
inline std::vector<BenchRow> benchmark(const std::vector<Method>& methods, const Dataset& test, int repeats,
                                       std::uint64_t seed)
{
    require(repeats >= 1, "repeats must be at least 1");
    require(test.size() > 0, "test set is empty");
    const auto constraints = build_all_constraints(test.samples);
    std::vector<BenchRow> rows;
    volatile double sink = 0.0;
    for (const auto& method : methods) {
        Rng rng = stream_rng(seed, 0);
        for (std::size_t m = 0; m < std::min<std::size_t>(100, test.size()); ++m)
            sink = sink + run_method(method, test.samples[m], constraints[m], rng).p(0);
        const auto t0 = std::chrono::steady_clock::now();
        for (int r = 0; r < repeats; ++r)
            for (std::size_t m = 0; m < test.size(); ++m)
                sink = sink + run_method(method, test.samples[m], constraints[m], rng).p(0);
        const auto t1 = std::chrono::steady_clock::now();
        const double us = std::chrono::duration<double, std::micro>(t1 - t0).count() /
                          (static_cast<double>(repeats) * static_cast<double>(test.size()));
        rows.push_back({method.label, us, us * 1e4 / 1e3});
    }
    return rows;
}

inline void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows)
{
    os << "method,mean_us_per_instance,ms_per_10000\n";
    for (const auto& r : rows)
        os << r.label << ',' << format_double(r.mean_us) << ',' << format_double(r.total_ms_per_10k) << '\n';
}

} // namespace srnet
