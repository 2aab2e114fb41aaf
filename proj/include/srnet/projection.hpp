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
#include <vector>

#include "srnet/channel.hpp"
#include "srnet/geometry.hpp"

namespace srnet {

/// Forward intermediates of the projection block, kept for the backward pass.
///
/// Points: A = p_hat (raw output), C = p_C (interior point), D = p_D (where
/// segment AC crosses the rate-constraint boundary), E = p_E (D scaled until
/// its largest entry hits the power cap).
struct ProjectionTape {
    Vec p_hat;
    Vec d;
    Vec p_C;
    bool feasible_input = true;
    std::vector<int> active_set;
    double eps_star = 0.0;
    int k_eps = -1;
    Vec p_D;
    int k_max = 0;
    Vec p_E;
    bool heuristic = false;
};

namespace detail {

inline int argmax_first(const Vec& v)
{
    int best = 0;
    for (int i = 1; i < v.size(); ++i)
        if (v(i) > v(best))
            best = i;
    return best;
}

inline void finish_projection(const ConstraintSet& cs, ProjectionTape& tape)
{
    const SegmentCrossing crossing = epsilon_star(cs, tape.p_hat, tape.p_C);
    tape.feasible_input = crossing.feasible_input;
    tape.eps_star = crossing.eps_star;
    tape.k_eps = crossing.k_eps;
    tape.active_set = crossing.active_set;
    tape.p_D = tape.feasible_input ? tape.p_hat : Vec(tape.p_hat + tape.eps_star * (tape.p_C - tape.p_hat));

    tape.k_max = argmax_first(tape.p_D);
    const double peak = tape.p_D(tape.k_max);
    if (!(peak > kDenominatorFloor))
        fail(ErrorCode::DegenerateScale, "projected point is numerically zero");
    tape.p_E.resize(tape.p_D.size());
    for (int i = 0; i < tape.p_D.size(); ++i)
        tape.p_E(i) = cs.p_max * (tape.p_D(i) / peak);
    tape.p_E(tape.k_max) = cs.p_max;
}

inline void check_box(const ConstraintSet& cs, const Vec& p_hat)
{
    require(cs.feasible, "projection requires a feasible instance");
    require(p_hat.size() == cs.size(), "power vector has wrong length");
    require((p_hat.array() >= 0.0).all() && (p_hat.array() <= cs.p_max).all(),
            "p_hat must lie in [0, p_max]");
}

} // namespace detail

/// Projection block with a learned interior point p_C = p0 + B^-1 diag(||b_i||) d.
inline ProjectionTape project_forward(const ConstraintSet& cs, const Vec& p_hat, const Vec& d)
{
    detail::check_box(cs, p_hat);
    ProjectionTape tape;
    tape.p_hat = p_hat;
    tape.d = d;
    tape.p_C = interior_point(cs, d);
    detail::finish_projection(cs, tape);
    return tape;
}

/// Projection block with the fixed interior point at d = d_max_star * 1.
inline ProjectionTape project_forward_heuristic(const ConstraintSet& cs, const Vec& p_hat)
{
    detail::check_box(cs, p_hat);
    ProjectionTape tape;
    tape.heuristic = true;
    tape.p_hat = p_hat;
    tape.d = Vec::Constant(cs.size(), cs.d_max_star);
    tape.p_C = heuristic_interior_point(cs);
    detail::finish_projection(cs, tape);
    return tape;
}

// Jacobians below use the numerator layout, J(i, j) = d out_i / d in_j. The
// closed forms printed for the projection block are the transposes of these
// (gradient layout); the two agree entry by entry after transposition.

/// d p_E / d p_D with the argmax index k_max held fixed.
inline Mat jacobian_E_wrt_D(const ProjectionTape& tape, double p_max)
{
    const int n = static_cast<int>(tape.p_D.size());
    const int k = tape.k_max;
    const double peak = tape.p_D(k);
    const double scale = p_max / (peak * peak);
    Mat jac = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        if (i == k)
            continue;
        jac(i, i) = scale * peak;
        jac(i, k) = -scale * tape.p_D(i);
    }
    return jac;
}

namespace detail {

struct CrossingTerms {
    double denom;     // [B (p_C - p_hat)]_k
    double numer_hat; // [B p_C - q]_k
    double numer_c;   // [q - B p_hat]_k
};

inline CrossingTerms crossing_terms(const ProjectionTape& tape, const ConstraintSet& cs)
{
    const int k = tape.k_eps;
    const auto row = cs.B.row(k);
    CrossingTerms t{row.dot(tape.p_C - tape.p_hat), row.dot(tape.p_C) - cs.q(k),
                    cs.q(k) - row.dot(tape.p_hat)};
    if (!(std::abs(t.denom) >= kDenominatorFloor))
        fail(ErrorCode::DegenerateGradient, "segment is parallel to the active constraint");
    return t;
}

} // namespace detail

/// d p_D / d p_hat with the crossing row k_eps held fixed; identity when p_hat is feasible.
inline Mat jacobian_D_wrt_phat(const ProjectionTape& tape, const ConstraintSet& cs)
{
    const int n = static_cast<int>(tape.p_hat.size());
    if (tape.feasible_input)
        return Mat::Identity(n, n);
    const auto t = detail::crossing_terms(tape, cs);
    const double s = t.numer_hat / t.denom;
    return s * Mat::Identity(n, n) + (s / t.denom) * (tape.p_hat - tape.p_C) * cs.B.row(tape.k_eps);
}

/// d p_D / d p_C with the crossing row k_eps held fixed; zero when p_hat is feasible.
inline Mat jacobian_D_wrt_C(const ProjectionTape& tape, const ConstraintSet& cs)
{
    const int n = static_cast<int>(tape.p_hat.size());
    if (tape.feasible_input)
        return Mat::Zero(n, n);
    const auto t = detail::crossing_terms(tape, cs);
    const double eps = t.numer_c / t.denom;
    return eps * Mat::Identity(n, n) - (eps / t.denom) * (tape.p_C - tape.p_hat) * cs.B.row(tape.k_eps);
}

/// d p_C / d d = B^-1 diag(||b_i||). Constant per instance.
inline Mat jacobian_C_wrt_d(const ConstraintSet& cs) { return cs.interior_map; }

struct ProjectionGrads {
    Vec p_hat;
    Vec d;
};

/// Vector-Jacobian product of the whole block: upstream dJ/dp_E to (dJ/dp_hat, dJ/dd).
/// In heuristic mode the interior point does not depend on any learned output and dJ/dd is zero.
inline ProjectionGrads projection_backward(const ProjectionTape& tape, const ConstraintSet& cs,
                                           const Vec& upstream)
{
    const int n = static_cast<int>(tape.p_D.size());
    const int k = tape.k_max;
    const double peak = tape.p_D(k);
    const double a = cs.p_max / peak;

    Vec g_D(n);
    double g_peak = 0.0;
    for (int i = 0; i < n; ++i) {
        if (i == k)
            continue;
        g_D(i) = a * upstream(i);
        g_peak -= a * upstream(i) * tape.p_D(i) / peak;
    }
    g_D(k) = g_peak;

    ProjectionGrads out;
    out.d = Vec::Zero(n);
    if (tape.feasible_input) {
        out.p_hat = g_D;
        return out;
    }
    const auto t = detail::crossing_terms(tape, cs);
    const Vec row = cs.B.row(tape.k_eps).transpose();
    const Vec toward_c = tape.p_C - tape.p_hat;
    const double along = toward_c.dot(g_D);
    const double s = t.numer_hat / t.denom;
    const double eps = t.numer_c / t.denom;
    out.p_hat = s * g_D - (s / t.denom) * along * row;
    if (!tape.heuristic) {
        const Vec g_C = eps * g_D - (eps / t.denom) * along * row;
        out.d = cs.interior_map.transpose() * g_C;
    }
    return out;
}

/// Reference composition of the five Jacobian factors, used to cross-check
/// projection_backward. Returns (dJ/dp_hat, dJ/dd) as dense products.
inline ProjectionGrads projection_backward_dense(const ProjectionTape& tape, const ConstraintSet& cs,
                                                 const Vec& upstream)
{
    const Vec g_D = jacobian_E_wrt_D(tape, cs.p_max).transpose() * upstream;
    ProjectionGrads out;
    out.p_hat = jacobian_D_wrt_phat(tape, cs).transpose() * g_D;
    out.d = tape.heuristic ? Vec(Vec::Zero(g_D.size()))
                           : Vec(jacobian_C_wrt_d(cs).transpose() * (jacobian_D_wrt_C(tape, cs).transpose() * g_D));
    return out;
}

} // namespace srnet
