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
#include <span>
#include <vector>

#include "srnet/channel.hpp"
#include "srnet/geometry.hpp"
#include "srnet/mlp.hpp"
#include "srnet/projection.hpp"

namespace srnet {

/// Output-head results for a batch. For the projected variants `tapes` holds
/// the projection intermediates and `powers` the projected p_E; for the penalty
/// variants `powers` is the raw scaled-sigmoid output.
struct PolicyBatch {
    Mat out;          // output pre-activations
    Mat sig;          // sigmoid of out
    std::vector<ProjectionTape> tapes;
    std::vector<Vec> powers;
};

/// Applies the output activations (and the projection block when the variant
/// has one). constraints[m] belongs to column m.
inline PolicyBatch apply_head(const MlpModel& model, Mat out, std::span<const ConstraintSet* const> constraints)
{
    const int k = model.cells;
    const auto n = out.cols();
    require(static_cast<Eigen::Index>(constraints.size()) == n, "one constraint set per sample is required");
    PolicyBatch batch;
    batch.sig = out.unaryExpr([](double x) { return sigmoid(x); });
    batch.out = std::move(out);
    batch.powers.resize(static_cast<std::size_t>(n));
    if (is_projected(model.variant))
        batch.tapes.resize(static_cast<std::size_t>(n));
    for (Eigen::Index m = 0; m < n; ++m) {
        const ConstraintSet& cs = *constraints[static_cast<std::size_t>(m)];
        const Vec p_hat = cs.p_max * batch.sig.col(m).head(k);
        auto& slot = batch.powers[static_cast<std::size_t>(m)];
        switch (model.variant) {
        case Variant::LearnedC: {
            const Vec d = cs.d_max_star * batch.sig.col(m).tail(k);
            auto& tape = batch.tapes[static_cast<std::size_t>(m)];
            tape = project_forward(cs, p_hat, d);
            slot = tape.p_E;
            break;
        }
        case Variant::HeuristicC: {
            auto& tape = batch.tapes[static_cast<std::size_t>(m)];
            tape = project_forward_heuristic(cs, p_hat);
            slot = tape.p_E;
            break;
        }
        case Variant::PenaltyAdd:
        case Variant::PenaltyMul: slot = p_hat; break;
        }
    }
    return batch;
}

/// Mean negative sum rate over the batch.
inline double srnet_loss(const PolicyBatch& batch, std::span<const ChannelRealization* const> channels)
{
    double total = 0.0;
    for (std::size_t m = 0; m < channels.size(); ++m)
        total -= sum_rate(*channels[m], batch.powers[m]);
    return total / static_cast<double>(channels.size());
}

/// SINR shortfall sum_i max(0, gamma_min_i - SINR_i).
inline double sinr_violation(const ChannelRealization& ch, const Vec& p)
{
    return (ch.gamma_min - sinr(ch, p)).cwiseMax(0.0).sum();
}

inline Vec sinr_violation_grad(const ChannelRealization& ch, const Vec& p)
{
    const Vec s = sinr(ch, p);
    const Mat jac = sinr_jacobian(ch, p);
    Vec g = Vec::Zero(p.size());
    for (int i = 0; i < s.size(); ++i)
        if (ch.gamma_min(i) > s(i))
            g -= jac.row(i).transpose();
    return g;
}

struct LossAndGrad {
    double loss = 0.0;
    Mat d_out; // dLoss / d(output pre-activations)
};

/// Loss of the variant and its gradient with respect to the output pre-activations.
inline LossAndGrad policy_loss(const MlpModel& model, const PolicyBatch& batch,
                               std::span<const ChannelRealization* const> channels,
                               std::span<const ConstraintSet* const> constraints)
{
    const int k = model.cells;
    const auto n = static_cast<Eigen::Index>(channels.size());
    const double inv_n = 1.0 / static_cast<double>(n);
    LossAndGrad r;
    r.d_out = Mat::Zero(batch.out.rows(), n);
    for (Eigen::Index m = 0; m < n; ++m) {
        const auto& ch = *channels[static_cast<std::size_t>(m)];
        const auto& cs = *constraints[static_cast<std::size_t>(m)];
        const Vec& p = batch.powers[static_cast<std::size_t>(m)];
        const Vec sig = batch.sig.col(m);
        const Vec dsig = sig.array() * (1.0 - sig.array());
        const double neg_rate = -sum_rate(ch, p);
        const Vec g_rate = grad_neg_sum_rate(ch, p) * inv_n;

        if (is_projected(model.variant)) {
            r.loss += neg_rate * inv_n;
            const auto pg = projection_backward(batch.tapes[static_cast<std::size_t>(m)], cs, g_rate);
            r.d_out.col(m).head(k) = cs.p_max * pg.p_hat.cwiseProduct(dsig.head(k));
            if (model.variant == Variant::LearnedC)
                r.d_out.col(m).tail(k) = cs.d_max_star * pg.d.cwiseProduct(dsig.tail(k));
            continue;
        }

        const double w = model.penalty_weight;
        const double viol = sinr_violation(ch, p);
        Vec g_p;
        if (model.variant == Variant::PenaltyAdd) {
            r.loss += (neg_rate + w * viol) * inv_n;
            g_p = g_rate + w * inv_n * sinr_violation_grad(ch, p);
        } else {
            // Sum rate divided by (1 + w * violation): violations shrink the credited rate.
            const double factor = 1.0 + w * viol;
            r.loss += neg_rate / factor * inv_n;
            g_p = g_rate / factor - (neg_rate * w * inv_n / (factor * factor)) * sinr_violation_grad(ch, p);
        }
        r.d_out.col(m) = cs.p_max * g_p.cwiseProduct(dsig);
    }
    return r;
}

} // namespace srnet
