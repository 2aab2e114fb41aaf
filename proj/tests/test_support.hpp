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

// Oracles shared by the unit tests and the acceptance binary: central finite
// differences, grid searches and random instance generators.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "srnet/srnet.hpp"

namespace srnet::testing {

/// Central-difference Jacobian of fn at x; column j is d fn / d x_j.
/// Step h_j = rel_step * max(1, |x_j|).
inline Mat fd_jacobian(const std::function<Vec(const Vec&)>& fn, const Vec& x, double rel_step = 1e-6)
{
    const Vec f0 = fn(x);
    Mat jac(f0.size(), x.size());
    for (int j = 0; j < x.size(); ++j) {
        const double h = rel_step * std::max(1.0, std::abs(x(j)));
        Vec xp = x, xm = x;
        xp(j) += h;
        xm(j) -= h;
        jac.col(j) = (fn(xp) - fn(xm)) / (2.0 * h);
    }
    return jac;
}

inline Vec fd_gradient(const std::function<double(const Vec&)>& fn, const Vec& x, double rel_step = 1e-6)
{
    const Mat j = fd_jacobian([&](const Vec& v) { return Vec::Constant(1, fn(v)); }, x, rel_step);
    return j.row(0).transpose();
}

/// Richardson-extrapolated central differences, fourth order in the step.
inline Mat fd_jacobian_richardson(const std::function<Vec(const Vec&)>& fn, const Vec& x, double rel_step = 1e-4)
{
    return (4.0 * fd_jacobian(fn, x, rel_step / 2) - fd_jacobian(fn, x, rel_step)) / 3.0;
}

inline Vec fd_gradient_richardson(const std::function<double(const Vec&)>& fn, const Vec& x, double rel_step = 1e-4)
{
    const Mat j = fd_jacobian_richardson([&](const Vec& v) { return Vec::Constant(1, fn(v)); }, x, rel_step);
    return j.row(0).transpose();
}

/// max |a - b| / max(max |b|, floor): matrix-level relative error.
inline double rel_error(const Mat& a, const Mat& b, double floor = 1e-6)
{
    if (a.size() == 0)
        return 0.0;
    const double diff = (a - b).cwiseAbs().maxCoeff();
    return diff / std::max(b.cwiseAbs().maxCoeff(), floor);
}

/// Synthetic K-cell instance with O(1) gains and p_max = 1, redrawn until
/// feasible with a strictly positive d_max_star.
inline ChannelRealization toy_instance(Rng& rng, int k, double max_rate = 1.0)
{
    std::uniform_real_distribution<double> direct(0.5, 2.0);
    std::uniform_real_distribution<double> cross(0.01, 0.4);
    std::uniform_real_distribution<double> rate(0.05, max_rate);
    std::uniform_real_distribution<double> noise(0.02, 0.2);
    for (;;) {
        ChannelRealization ch;
        ch.gains.resize(k, k);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j)
                ch.gains(i, j) = i == j ? direct(rng) : cross(rng);
        ch.gamma_min.resize(k);
        for (int i = 0; i < k; ++i)
            ch.gamma_min(i) = rate_to_sinr(rate(rng));
        ch.noise_power = noise(rng);
        ch.p_max = 1.0;
        const ConstraintSet cs = build_constraints(ch);
        if (cs.feasible && cs.d_max_star > 1e-6)
            return ch;
    }
}

inline Vec uniform_box(Rng& rng, int k, double hi)
{
    std::uniform_real_distribution<double> u(0.0, hi);
    Vec v(k);
    for (int i = 0; i < k; ++i)
        v(i) = u(rng);
    return v;
}

/// p_hat drawn uniformly from the box until it violates at least one rate constraint.
inline Vec violating_phat(const ConstraintSet& cs, Rng& rng, int attempts = 1000)
{
    for (int a = 0; a < attempts; ++a) {
        Vec p = uniform_box(rng, cs.size(), cs.p_max);
        if (!meets_rate_constraints(cs, p))
            return p;
    }
    // Fall back to a point just below p0 along the first coordinate.
    Vec p = cs.p0;
    p(0) *= 0.5;
    return p;
}

/// Mixed-scenario dataset of realistic K = 3 instances across the three
/// cell-edge regions and several rate settings.
inline std::vector<ChannelRealization> mixed_instances(std::size_t count, std::uint64_t seed)
{
    const double regions[3][2] = {{0, 3}, {3, 6}, {6, 9}};
    const RateSpec rates[4] = {{false, 0.1}, {false, 0.3}, {false, 0.5}, {true, 0.0}};
    std::vector<ChannelRealization> out;
    out.reserve(count);
    const std::size_t groups = 12;
    for (std::size_t g = 0; g < groups; ++g) {
        DatasetConfig cfg;
        cfg.scenario.region = {regions[g % 3][0], regions[g % 3][1]};
        cfg.scenario.rate = rates[g / 3];
        cfg.count = count / groups + (g < count % groups ? 1 : 0);
        cfg.seed = seed + g;
        Dataset ds = generate_dataset(cfg);
        out.insert(out.end(), ds.samples.begin(), ds.samples.end());
    }
    return out;
}

struct GridOptimum {
    double best_min_d = -std::numeric_limits<double>::infinity();
    Vec d;
    double step = 0.0;
};

/// Max-min-distance search over an n x n grid of d in [0, hi]^2 subject to
/// the interior point staying inside the power box (K = 2 only).
inline GridOptimum grid_max_min_distance(const ConstraintSet& cs, double hi, int n)
{
    GridOptimum g;
    g.step = hi / (n - 1);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            Vec d(2);
            d << a * g.step, b * g.step;
            const Vec p = cs.point_at(d);
            if ((p.array() <= cs.p_max).all() && d.minCoeff() > g.best_min_d) {
                g.best_min_d = d.minCoeff();
                g.d = d;
            }
        }
    return g;
}

/// Exhaustive sum-rate search over an n x n grid of the 2-cell power box,
/// restricted to points meeting the rate constraints.
inline double grid_max_sum_rate(const ChannelRealization& ch, const ConstraintSet& cs, int n)
{
    double best = -std::numeric_limits<double>::infinity();
    const double step = ch.p_max / (n - 1);
    Vec p(2);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            p << a * step, b * step;
            if (meets_rate_constraints(cs, p))
                best = std::max(best, sum_rate(ch, p));
        }
    return best;
}

} // namespace srnet::testing
