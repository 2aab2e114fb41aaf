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

#include <Eigen/LU>

#include <algorithm>
#include <limits>
#include <vector>

#include "srnet/channel.hpp"
#include "srnet/error.hpp"

namespace srnet {

/// Ratio denominators below this magnitude are treated as degenerate.
inline constexpr double kDenominatorFloor = 1e-30;
/// Reciprocal-condition threshold for the constraint matrix (condition > 1e12).
inline constexpr double kMinReciprocalCondition = 1e-12;

/// Polyhedral rate constraints B p >= q together with the power box p <= p_max.
///
/// B(i, i) = g_ii and B(i, j) = -gamma_i g_ij, q_i = gamma_i sigma^2. The
/// matrix is factored once; every quantity that needs B^-1 reuses the factor.
struct ConstraintSet {
    Mat B;
    Vec q;
    Vec p0;
    Vec row_norms;
    /// B^-1 diag(row_norms): maps distances d to the offset of the interior point.
    Mat interior_map;
    /// interior_map * 1, the direction of the uniform-distance ray.
    Vec uniform_direction;
    double d_max_star = 0.0;
    double p_max = 0.0;
    bool feasible = false;
    Eigen::PartialPivLU<Mat> lu;

    int size() const { return static_cast<int>(q.size()); }

    /// p0 + B^-1 diag(||b_i||) d without the box check on d.
    Vec point_at(const Vec& d) const { return p0 + interior_map * d; }
};

/// True iff 0 <= p0 <= p_max element-wise. No tolerance: p0 is the solver output.
inline bool feasibility_check(const ConstraintSet& cs, double p_max)
{
    return (cs.p0.array() >= 0.0).all() && (cs.p0.array() <= p_max).all();
}

/// Largest uniform distance bound keeping the interior point inside the power box.
inline double d_max_star(const ConstraintSet& cs, double p_max)
{
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < cs.size(); ++i) {
        const double denom = cs.uniform_direction(i);
        if (!(denom > 0.0))
            fail(ErrorCode::DegenerateGeometry,
                 "interior direction has a non-positive entry at row " + std::to_string(i));
        best = std::min(best, (p_max - cs.p0(i)) / denom);
    }
    return best;
}

inline ConstraintSet build_constraints(const ChannelRealization& ch)
{
    ch.validate();
    const int k = ch.cell_count();
    ConstraintSet cs;
    cs.p_max = ch.p_max;
    cs.B.resize(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            cs.B(i, j) = (i == j) ? ch.gains(i, i) : -ch.gamma_min(i) * ch.gains(i, j);
    cs.q = ch.gamma_min * ch.noise_power;

    cs.lu.compute(cs.B);
    if (!(cs.lu.rcond() >= kMinReciprocalCondition))
        fail(ErrorCode::SingularGeometry, "constraint matrix is numerically singular");

    cs.p0 = cs.lu.solve(cs.q);
    cs.row_norms = cs.B.rowwise().norm();
    cs.interior_map = cs.lu.solve(Mat(cs.row_norms.asDiagonal()));
    cs.uniform_direction = cs.interior_map.rowwise().sum();
    cs.feasible = feasibility_check(cs, ch.p_max);
    if (cs.feasible)
        cs.d_max_star = std::max(0.0, d_max_star(cs, ch.p_max));
    return cs;
}

/// Interior point whose distance to hyperplane i is d_i. Requires 0 <= d <= d_max_star.
inline Vec interior_point(const ConstraintSet& cs, const Vec& d)
{
    require(d.size() == cs.size(), "distance vector has wrong length");
    require((d.array() >= 0.0).all() && (d.array() <= cs.d_max_star).all(),
            "distances must lie in [0, d_max_star]");
    return cs.point_at(d);
}

/// The max-min-distance interior point, d = d_max_star * 1.
inline Vec heuristic_interior_point(const ConstraintSet& cs)
{
    return cs.p0 + cs.d_max_star * cs.uniform_direction;
}

/// Whether B p >= q holds exactly.
inline bool meets_rate_constraints(const ConstraintSet& cs, const Vec& p)
{
    return ((cs.B * p - cs.q).array() >= 0.0).all();
}

/// Same check with slack tol * max(||q||_inf, ||B p||_inf) per row, for
/// outputs that sit on a constraint boundary up to rounding.
inline bool meets_rate_constraints(const ConstraintSet& cs, const Vec& p, double rel_tol)
{
    const Vec bp = cs.B * p;
    const double scale = std::max(cs.q.lpNorm<Eigen::Infinity>(), bp.lpNorm<Eigen::Infinity>());
    return ((bp - cs.q).array() >= -rel_tol * scale).all();
}

struct SegmentCrossing {
    double eps_star = 0.0;
    int k_eps = -1;
    std::vector<int> active_set;
    bool feasible_input = true;
};

/// Smallest step along the segment p_hat -> p_C that satisfies every rate constraint.
inline SegmentCrossing epsilon_star(const ConstraintSet& cs, const Vec& p_hat, const Vec& p_C)
{
    SegmentCrossing out;
    const Vec slack = cs.q - cs.B * p_hat;
    if ((slack.array() <= 0.0).all())
        return out;

    out.feasible_input = false;
    const Vec rise = cs.B * (p_C - p_hat);
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < cs.size(); ++i) {
        if (!(rise(i) > 0.0))
            continue;
        out.active_set.push_back(i);
        const double ratio = slack(i) / rise(i);
        if (ratio > best) {
            best = ratio;
            out.k_eps = i;
        }
    }
    if (out.active_set.empty() || !(best > 0.0))
        fail(ErrorCode::GeometryViolated, "interior point does not improve any violated constraint");
    out.eps_star = std::min(best, 1.0);
    return out;
}

} // namespace srnet
