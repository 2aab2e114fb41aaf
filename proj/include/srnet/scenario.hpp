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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "srnet/channel.hpp"
#include "srnet/error.hpp"
#include "srnet/geometry.hpp"
#include "srnet/parallel.hpp"
#include "srnet/random.hpp"

namespace srnet {

using Point2 = std::array<double, 2>;

inline double distance(const Point2& a, const Point2& b) { return std::hypot(a[0] - b[0], a[1] - b[1]); }

/// Hexagonal cells of circumradius cell_radius, one BS at each cell centre.
/// Adjacent centres are sqrt(3) * radius apart.
struct NetworkLayout {
    int cell_count = 3;
    double cell_radius = 250.0;
    std::vector<Point2> bs_positions;

    bool contains(int cell, const Point2& p) const
    {
        const double apothem = cell_radius * std::sqrt(3.0) / 2.0;
        const double dx = p[0] - bs_positions[cell][0];
        const double dy = p[1] - bs_positions[cell][1];
        for (int s = 0; s < 3; ++s) {
            const double angle = s * std::numbers::pi / 3.0;
            if (std::abs(dx * std::cos(angle) + dy * std::sin(angle)) > apothem)
                return false;
        }
        return true;
    }
};

/// First K centres of the hexagonal lattice ordered by ring then angle, so
/// K = 3 gives three mutually adjacent cells (an equilateral triangle of BSs).
inline NetworkLayout make_layout(int cell_count = 3, double cell_radius = 250.0)
{
    require(cell_count >= 2, "layout needs at least two cells");
    require(cell_radius > 0.0, "cell radius must be positive");
    const double spacing = cell_radius * std::sqrt(3.0);
    struct Candidate {
        double dist;
        double angle;
        Point2 pos;
    };
    std::vector<Candidate> lattice;
    const int span = 2 + static_cast<int>(std::ceil(std::sqrt(static_cast<double>(cell_count))));
    for (int a = -span; a <= span; ++a)
        for (int b = -span; b <= span; ++b) {
            const Point2 pos{spacing * (a + 0.5 * b), spacing * (std::sqrt(3.0) / 2.0) * b};
            const double r = std::hypot(pos[0], pos[1]);
            double angle = std::atan2(pos[1], pos[0]);
            if (angle < -1e-9)
                angle += 2.0 * std::numbers::pi;
            lattice.push_back({std::round(r / spacing * 1e6) / 1e6, angle, pos});
        }
    std::sort(lattice.begin(), lattice.end(), [](const Candidate& x, const Candidate& y) {
        return x.dist != y.dist ? x.dist < y.dist : x.angle < y.angle;
    });
    NetworkLayout layout;
    layout.cell_count = cell_count;
    layout.cell_radius = cell_radius;
    for (int i = 0; i < cell_count; ++i)
        layout.bs_positions.push_back(lattice[i].pos);
    return layout;
}

/// Pathloss in dB at a distance in metres.
inline double pathloss_db(double distance_m)
{
    require(distance_m > 0.0, "pathloss distance must be positive");
    return 36.3 + 37.6 * std::log10(distance_m);
}

struct CellEdgeRegion {
    double rho_min_db = 0.0;
    double rho_max_db = 3.0;

    bool contains(double gap_db) const { return rho_min_db <= gap_db && gap_db < rho_max_db; }
};

/// Minimum rate per UE: a fixed lambda, or drawn per UE from {0.1, ..., 1.0}.
struct RateSpec {
    bool random = false;
    double lambda = 0.1;

    std::string to_string() const;
    static RateSpec parse(const std::string& text);
};

inline std::string RateSpec::to_string() const
{
    if (random)
        return "random";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", lambda);
    return buf;
}

inline RateSpec RateSpec::parse(const std::string& text)
{
    if (text == "random")
        return RateSpec{true, 0.0};
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used == text.size() && v >= 0.0)
            return RateSpec{false, v};
    } catch (const std::exception&) {
    }
    fail(ErrorCode::InvalidArgument, "bad rate spec '" + text + "'");
}

struct ScenarioConfig {
    int cell_count = 3;
    double cell_radius = 250.0;
    CellEdgeRegion region;
    RateSpec rate;
    double pmax_dbm = 46.0;
    double sigma2_dbm = -92.0;
    double shadowing_std_db = 8.0;
    /// UEs closer than this to any BS are redrawn; keeps the pathloss model in range.
    double min_distance_m = 1.0;
    std::int64_t attempt_cap = 1000000;
};

struct UeDrop {
    std::vector<Point2> positions;
    /// shadowing_db(i, j): shadowing on the link BS j -> UE i.
    Mat shadowing_db;
    /// alpha_db(i, j) = -pathloss(|UE_i - BS_j|) + shadowing_db(i, j).
    Mat alpha_db;
};

/// Serving-minus-strongest-interferer large-scale gain gap of UE i, in dB.
inline double cell_edge_gap_db(const Mat& alpha_db, int i)
{
    double strongest = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < alpha_db.cols(); ++j)
        if (j != i)
            strongest = std::max(strongest, alpha_db(i, j));
    return alpha_db(i, i) - strongest;
}

/// Drops each UE uniformly in its own cell, redrawing position and shadowing
/// together until the UE lands in the requested cell-edge region.
inline UeDrop sample_ue_positions(const NetworkLayout& layout, const CellEdgeRegion& region, Rng& rng,
                                  const ScenarioConfig& cfg = {})
{
    require(region.rho_min_db < region.rho_max_db, "cell-edge region is empty");
    const int k = layout.cell_count;
    const double half_w = layout.cell_radius * std::sqrt(3.0) / 2.0;
    std::uniform_real_distribution<double> ux(-half_w, half_w);
    std::uniform_real_distribution<double> uy(-layout.cell_radius, layout.cell_radius);
    std::normal_distribution<double> shadow(0.0, cfg.shadowing_std_db);

    UeDrop drop;
    drop.positions.resize(k);
    drop.shadowing_db = Mat::Zero(k, k);
    drop.alpha_db = Mat::Zero(k, k);
    for (int i = 0; i < k; ++i) {
        bool placed = false;
        for (std::int64_t attempt = 0; attempt < cfg.attempt_cap && !placed; ++attempt) {
            const Point2 pos{layout.bs_positions[i][0] + ux(rng), layout.bs_positions[i][1] + uy(rng)};
            if (!layout.contains(i, pos))
                continue;
            bool too_close = false;
            for (int j = 0; j < k; ++j) {
                const double dist = distance(pos, layout.bs_positions[j]);
                too_close = too_close || dist < cfg.min_distance_m;
                drop.shadowing_db(i, j) = shadow(rng);
                drop.alpha_db(i, j) = too_close ? 0.0 : -pathloss_db(dist) + drop.shadowing_db(i, j);
            }
            if (too_close)
                continue;
            if (region.contains(cell_edge_gap_db(drop.alpha_db, i))) {
                drop.positions[i] = pos;
                placed = true;
            }
        }
        if (!placed)
            fail(ErrorCode::RegionUnreachable,
                 "no placement of UE " + std::to_string(i) + " reached the cell-edge region");
    }
    return drop;
}

/// Draws rate targets and a Rayleigh-faded channel on top of a cell-edge UE drop.
/// Gains are divided by the noise power, so the returned noise_power is 1.
inline ChannelRealization sample_channel(const NetworkLayout& layout, const ScenarioConfig& cfg, Rng& rng)
{
    const int k = layout.cell_count;
    ChannelRealization ch;
    ch.gamma_min.resize(k);
    if (cfg.rate.random) {
        std::uniform_int_distribution<int> step(1, 10);
        for (int i = 0; i < k; ++i)
            ch.gamma_min(i) = rate_to_sinr(step(rng) / 10.0);
    } else {
        ch.gamma_min.setConstant(rate_to_sinr(cfg.rate.lambda));
    }

    const UeDrop drop = sample_ue_positions(layout, cfg.region, rng, cfg);
    std::exponential_distribution<double> rayleigh_power(1.0);
    const double sigma2_w = dbm_to_watts(cfg.sigma2_dbm);
    ch.gains.resize(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            ch.gains(i, j) = std::pow(10.0, drop.alpha_db(i, j) / 10.0) * rayleigh_power(rng) / sigma2_w;
    ch.noise_power = 1.0;
    ch.p_max = dbm_to_watts(cfg.pmax_dbm);
    return ch;
}

struct DatasetMeta {
    int cell_count = 3;
    double rho_min_db = 0.0;
    double rho_max_db = 3.0;
    RateSpec rate;
    std::uint64_t seed = 0;
    std::size_t count = 0;
    double sigma2_dbm = -92.0;
    double pmax_dbm = 46.0;
    // Generation statistics; not required to load a dataset.
    std::uint64_t attempts = 0;
    std::uint64_t infeasible = 0;
    std::uint64_t degenerate = 0;
    std::string distance_unit = "m";

    double rejection_rate() const
    {
        return attempts == 0 ? 0.0 : static_cast<double>(attempts - count) / static_cast<double>(attempts);
    }
};

struct Dataset {
    std::vector<ChannelRealization> samples;
    DatasetMeta meta;

    std::size_t size() const { return samples.size(); }
};

struct DatasetConfig {
    ScenarioConfig scenario;
    std::size_t count = 0;
    std::uint64_t seed = 0;
    double yield_floor = 1e-4;
    int workers = 1;
};

namespace detail {

enum class DrawOutcome { Feasible, Infeasible, Degenerate };

struct Draw {
    DrawOutcome outcome = DrawOutcome::Infeasible;
    ChannelRealization channel;
};

inline Draw draw_sample(const NetworkLayout& layout, const ScenarioConfig& cfg, std::uint64_t seed,
                        std::uint64_t attempt)
{
    Rng rng = stream_rng(seed, attempt);
    Draw draw;
    draw.channel = sample_channel(layout, cfg, rng);
    try {
        const ConstraintSet cs = build_constraints(draw.channel);
        draw.outcome = cs.feasible ? DrawOutcome::Feasible : DrawOutcome::Infeasible;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::SingularGeometry && e.code() != ErrorCode::DegenerateGeometry)
            throw;
        draw.outcome = DrawOutcome::Degenerate;
    }
    return draw;
}

} // namespace detail

/// Draws channels until `count` of them admit the rate targets. Draw t uses
/// random stream t, so the result is independent of the worker count.
inline Dataset generate_dataset(const DatasetConfig& cfg)
{
    const NetworkLayout layout = make_layout(cfg.scenario.cell_count, cfg.scenario.cell_radius);
    require(cfg.scenario.region.rho_min_db < cfg.scenario.region.rho_max_db, "cell-edge region is empty");
    require(cfg.yield_floor >= 0.0 && cfg.yield_floor < 1.0, "yield floor must lie in [0, 1)");

    Dataset ds;
    ds.meta.cell_count = cfg.scenario.cell_count;
    ds.meta.rho_min_db = cfg.scenario.region.rho_min_db;
    ds.meta.rho_max_db = cfg.scenario.region.rho_max_db;
    ds.meta.rate = cfg.scenario.rate;
    ds.meta.seed = cfg.seed;
    ds.meta.sigma2_dbm = cfg.scenario.sigma2_dbm;
    ds.meta.pmax_dbm = cfg.scenario.pmax_dbm;
    ds.samples.reserve(cfg.count);

    const std::uint64_t chunk = 1024;
    const double check_after = cfg.yield_floor > 0.0 ? 10.0 / cfg.yield_floor : 0.0;
    std::vector<detail::Draw> draws(chunk);
    while (ds.samples.size() < cfg.count) {
        const std::uint64_t base = ds.meta.attempts;
        parallel_for(chunk, cfg.workers,
                     [&](std::size_t i) { draws[i] = detail::draw_sample(layout, cfg.scenario, cfg.seed, base + i); });
        for (std::uint64_t i = 0; i < chunk && ds.samples.size() < cfg.count; ++i) {
            ++ds.meta.attempts;
            switch (draws[i].outcome) {
            case detail::DrawOutcome::Feasible: ds.samples.push_back(std::move(draws[i].channel)); break;
            case detail::DrawOutcome::Infeasible: ++ds.meta.infeasible; break;
            case detail::DrawOutcome::Degenerate: ++ds.meta.degenerate; break;
            }
        }
        if (cfg.yield_floor > 0.0 && static_cast<double>(ds.meta.attempts) >= check_after &&
            static_cast<double>(ds.samples.size()) < cfg.yield_floor * static_cast<double>(ds.meta.attempts))
            fail(ErrorCode::YieldTooLow, "feasible-sample yield fell below " + std::to_string(cfg.yield_floor));
    }
    ds.meta.count = ds.samples.size();
    return ds;
}

} // namespace srnet
