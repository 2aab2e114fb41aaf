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
#include <cmath>
#include <vector>

#include "srnet/geometry.hpp"

namespace srnet {

struct L2Projection {
    Vec p;
    /// Multipliers of the 2K inequalities: rows 0..K-1 are B p >= q, rows K..2K-1 are p <= p_max.
    Vec multipliers;
    int iterations = 0;
    double kkt_residual = 0.0;
};

namespace detail {

// Inequalities in the form a_i' p >= b_i.
struct Inequalities {
    Mat A;
    Vec b;
};

inline Inequalities stacked_constraints(const ConstraintSet& cs, double p_max)
{
    const int k = cs.size();
    Inequalities ineq{Mat::Zero(2 * k, k), Vec::Zero(2 * k)};
    ineq.A.topRows(k) = cs.B;
    ineq.b.head(k) = cs.q;
    ineq.A.bottomRows(k) = -Mat::Identity(k, k);
    ineq.b.tail(k).setConstant(-p_max);
    return ineq;
}

} // namespace detail

/// KKT residual of (p, mu) for min ||p - p_hat||^2 s.t. A p >= b, scaled by
/// 1 + ||p_hat||_inf + ||b||_inf so that it is unitless.
inline double l2_kkt_residual(const ConstraintSet& cs, double p_max, const Vec& p_hat, const Vec& p,
                              const Vec& mu)
{
    const auto ineq = detail::stacked_constraints(cs, p_max);
    const Vec slack = ineq.A * p - ineq.b;
    double r = ((p - p_hat) - ineq.A.transpose() * mu).lpNorm<Eigen::Infinity>();
    for (int i = 0; i < slack.size(); ++i) {
        r = std::max(r, -slack(i));
        r = std::max(r, -mu(i));
        r = std::max(r, std::abs(mu(i) * slack(i)));
    }
    const double scale = 1.0 + p_hat.lpNorm<Eigen::Infinity>() + ineq.b.lpNorm<Eigen::Infinity>();
    return r / scale;
}

/// Euclidean projection of p_hat onto {B p >= q, p <= p_max} by a primal
/// active-set method started from a strictly interior point. Reference only.
inline L2Projection l2_projection(const ConstraintSet& cs, const Vec& p_hat, double p_max,
                                  int max_iterations = 1000)
{
    require(cs.feasible, "l2 projection requires a feasible instance");
    require(p_hat.size() == cs.size(), "power vector has wrong length");
    const int k = cs.size();
    const auto ineq = detail::stacked_constraints(cs, p_max);
    const int m = static_cast<int>(ineq.b.size());

    L2Projection out;
    out.multipliers = Vec::Zero(m);

    Vec x = cs.point_at(Vec::Constant(k, 0.5 * cs.d_max_star));
    std::vector<int> working;

    for (int it = 0; it < max_iterations; ++it) {
        out.iterations = it + 1;
        // Minimiser of the objective on the affine set of the working constraints.
        Vec target = p_hat;
        Vec lambda;
        if (!working.empty()) {
            Mat Aw(working.size(), k);
            Vec bw(working.size());
            for (std::size_t r = 0; r < working.size(); ++r) {
                Aw.row(r) = ineq.A.row(working[r]);
                bw(r) = ineq.b(working[r]);
            }
            lambda = (Aw * Aw.transpose()).ldlt().solve(Aw * p_hat - bw);
            target = p_hat - Aw.transpose() * lambda;
        }
        const Vec step = target - x;
        const double scale = 1.0 + x.lpNorm<Eigen::Infinity>();

        if (step.lpNorm<Eigen::Infinity>() <= 1e-13 * scale) {
            x = target;
            int worst = -1;
            double most_negative = 0.0;
            for (std::size_t r = 0; r < working.size(); ++r) {
                const double mu = -lambda(r);
                if (mu < most_negative) {
                    most_negative = mu;
                    worst = static_cast<int>(r);
                }
            }
            if (worst < 0) {
                for (std::size_t r = 0; r < working.size(); ++r)
                    out.multipliers(working[r]) = -lambda(r);
                out.p = x;
                out.kkt_residual = l2_kkt_residual(cs, p_max, p_hat, out.p, out.multipliers);
                return out;
            }
            working.erase(working.begin() + worst);
            continue;
        }

        double alpha = 1.0;
        int blocking = -1;
        for (int i = 0; i < m; ++i) {
            if (std::find(working.begin(), working.end(), i) != working.end())
                continue;
            const double rate = ineq.A.row(i).dot(step);
            if (rate >= 0.0)
                continue;
            const double room = std::max(0.0, ineq.A.row(i).dot(x) - ineq.b(i));
            const double limit = room / -rate;
            if (limit < alpha) {
                alpha = limit;
                blocking = i;
            }
        }
        x += alpha * step;
        if (blocking >= 0)
            working.push_back(blocking);
        else
            x = target;
    }
    fail(ErrorCode::NoConvergence, "active-set projection exceeded its iteration cap");
}

} // namespace srnet
