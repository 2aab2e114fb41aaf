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
#include <limits>
#include <string>
#include <vector>

#include "srnet/channel.hpp"
#include "srnet/geometry.hpp"
#include "srnet/l2_projection.hpp"
#include "srnet/mlp.hpp"
#include "srnet/random.hpp"
#include "srnet/training.hpp"

namespace srnet {

/// Minimal feasible power: every rate target met with equality.
inline Vec baseline_p0(const ConstraintSet& cs)
{
    require(cs.feasible, "p0 baseline requires a feasible instance");
    return cs.p0;
}

// ---------------------------------------------------------------------------
// Penalty-trained networks

enum class PenaltyMode { Additive, Multiplicative };

struct PenaltyConfig {
    PenaltyMode mode = PenaltyMode::Additive;
    std::vector<double> weight_grid{0.1, 1.0, 10.0, 100.0};
    bool fallback = true;
    int ensemble_size = 10;
    /// Fraction of the training set held out to pick the weight.
    double validation_fraction = 0.1;
};

inline Variant penalty_variant(PenaltyMode mode)
{
    return mode == PenaltyMode::Additive ? Variant::PenaltyAdd : Variant::PenaltyMul;
}

/// Trains the plain MLP (no projection block) on sum rate plus a violation penalty.
inline MlpModel train_penalty_net(const Dataset& train_set, const std::vector<ConstraintSet>& constraints,
                                  PenaltyMode mode, double weight, const TrainConfig& cfg,
                                  TrainResult* trace = nullptr)
{
    require(weight >= 0.0, "penalty weight must be non-negative");
    MlpModel model = make_model(penalty_variant(mode), train_set, cfg);
    model.penalty_weight = weight;
    TrainResult r = train(model, train_set.samples, constraints, cfg);
    if (trace)
        *trace = std::move(r);
    return model;
}

struct PenaltyInference {
    std::vector<Vec> powers;
    std::vector<bool> raw_satisfied;
    std::size_t fallback_count = 0;

    double substitution_rate() const
    {
        return powers.empty() ? 0.0 : static_cast<double>(fallback_count) / static_cast<double>(powers.size());
    }
};

/// Raw penalty-network powers; outputs violating B p >= q (exact check) are
/// replaced by p0 when fallback is enabled.
inline PenaltyInference infer_penalty_net(const MlpModel& model, const std::vector<ChannelRealization>& channels,
                                          const std::vector<ConstraintSet>& constraints, bool fallback = true)
{
    require(!is_projected(model.variant), "model is not a penalty network");
    PenaltyInference out;
    InferResult raw = infer(model, channels, constraints);
    out.powers = std::move(raw.powers);
    out.raw_satisfied.resize(out.powers.size());
    for (std::size_t m = 0; m < out.powers.size(); ++m) {
        const bool ok = meets_rate_constraints(constraints[m], out.powers[m]);
        out.raw_satisfied[m] = ok;
        if (!ok) {
            ++out.fallback_count;
            if (fallback)
                out.powers[m] = constraints[m].p0;
        }
    }
    return out;
}

inline Vec penalty_with_fallback(const MlpModel& model, const ChannelRealization& ch, const ConstraintSet& cs,
                                 bool* raw_ok = nullptr)
{
    Vec p = infer_one(model, ch, cs);
    const bool ok = meets_rate_constraints(cs, p);
    if (raw_ok)
        *raw_ok = ok;
    return ok ? p : cs.p0;
}

/// Per sample, the feasible (post-fallback) candidate with the highest sum rate.
inline std::vector<Vec> ensemble_select(const std::vector<MlpModel>& models,
                                        const std::vector<ChannelRealization>& channels,
                                        const std::vector<ConstraintSet>& constraints)
{
    require(!models.empty(), "ensemble needs at least one model");
    std::vector<Vec> best;
    std::vector<double> best_rate(channels.size(), -std::numeric_limits<double>::infinity());
    best.resize(channels.size());
    for (const auto& model : models) {
        const PenaltyInference r = infer_penalty_net(model, channels, constraints, true);
        for (std::size_t m = 0; m < channels.size(); ++m) {
            const double rate = sum_rate(channels[m], r.powers[m]);
            if (rate > best_rate[m]) {
                best_rate[m] = rate;
                best[m] = r.powers[m];
            }
        }
    }
    return best;
}

/// Mean post-fallback sum rate of a penalty model on a validation set.
inline double penalty_validation_score(const MlpModel& model, const std::vector<ChannelRealization>& channels,
                                       const std::vector<ConstraintSet>& constraints)
{
    const PenaltyInference r = infer_penalty_net(model, channels, constraints, true);
    double total = 0.0;
    for (std::size_t m = 0; m < channels.size(); ++m)
        total += sum_rate(channels[m], r.powers[m]);
    return total / static_cast<double>(channels.size());
}

struct PenaltySelection {
    MlpModel model;
    double weight = 0.0;
    std::vector<double> scores; // one per grid weight
};

/// Trains one network per grid weight on the leading part of the data and keeps
/// the one with the best validation sum rate on the held-out tail.
inline PenaltySelection select_penalty_net(const Dataset& data, const PenaltyConfig& pcfg, const TrainConfig& cfg)
{
    require(!pcfg.weight_grid.empty(), "penalty weight grid is empty");
    require(pcfg.validation_fraction > 0.0 && pcfg.validation_fraction < 1.0, "validation fraction must be in (0, 1)");
    const auto n_val = std::max<std::size_t>(1, static_cast<std::size_t>(pcfg.validation_fraction * data.size()));
    require(data.size() > n_val, "dataset too small for a validation split");
    Dataset fit = data;
    fit.samples.resize(data.size() - n_val);
    fit.meta.count = fit.samples.size();
    std::vector<ChannelRealization> val(data.samples.end() - static_cast<std::ptrdiff_t>(n_val), data.samples.end());
    const auto fit_cs = build_all_constraints(fit.samples);
    const auto val_cs = build_all_constraints(val);

    PenaltySelection best;
    double best_score = -std::numeric_limits<double>::infinity();
    for (double w : pcfg.weight_grid) {
        MlpModel m = train_penalty_net(fit, fit_cs, pcfg.mode, w, cfg);
        const double score = penalty_validation_score(m, val, val_cs);
        best.scores.push_back(score);
        if (score > best_score) {
            best_score = score;
            best.model = std::move(m);
            best.weight = w;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Multi-start projected gradient ascent

struct LocalOptOptions {
    int max_iterations = 10000;
    /// Convergence when a projected step moves p by less than this (infinity norm, watts).
    double tolerance = 1e-8;
    double armijo = 1e-4;
    int start_attempts = 100;
};

struct LocalOptResult {
    Vec p;
    double objective = 0.0;
    bool converged = true;
    long iterations = 0;
    std::vector<double> trace; // objective after each accepted step of the winning start
};

namespace detail {

inline LocalOptResult ascend(const ConstraintSet& cs, const ChannelRealization& ch, Vec p, const LocalOptOptions& opt)
{
    LocalOptResult r;
    double f = sum_rate(ch, p);
    r.trace.push_back(f);
    double alpha = -1.0;
    r.converged = false;
    for (int it = 0; it < opt.max_iterations; ++it) {
        r.iterations = it + 1;
        const Vec grad = -grad_neg_sum_rate(ch, p);
        const double gnorm = grad.lpNorm<Eigen::Infinity>();
        if (!(gnorm > 0.0)) {
            r.converged = true;
            break;
        }
        if (alpha < 0.0)
            alpha = cs.p_max / gnorm;
        else
            alpha *= 2.0;
        bool accepted = false;
        Vec next;
        double f_next = f;
        for (int bt = 0; bt < 80; ++bt) {
            next = l2_projection(cs, p + alpha * grad, cs.p_max).p;
            f_next = sum_rate(ch, next);
            if (f_next >= f + opt.armijo * grad.dot(next - p)) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            r.converged = true;
            break;
        }
        const double moved = (next - p).lpNorm<Eigen::Infinity>();
        if (f_next >= f) {
            p = next;
            f = f_next;
            r.trace.push_back(f);
        }
        if (moved < opt.tolerance) {
            r.converged = true;
            break;
        }
    }
    r.p = p;
    r.objective = f;
    return r;
}

} // namespace detail

/// Best of `starts` projected-gradient ascents on the sum rate. The first start
/// is p0; the others are uniform draws from [p0, p_max] accepted by the
/// feasibility test (or random interior points if none is accepted).
inline LocalOptResult multistart_local_opt(const ConstraintSet& cs, const ChannelRealization& ch, int starts, Rng& rng,
                                           const LocalOptOptions& opt = {})
{
    require(cs.feasible, "local optimisation requires a feasible instance");
    require(starts >= 1, "at least one start is required");
    const int k = cs.size();
    LocalOptResult best;
    best.objective = -std::numeric_limits<double>::infinity();
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int s = 0; s < starts; ++s) {
        Vec start = cs.p0;
        if (s > 0) {
            bool found = false;
            for (int a = 0; a < opt.start_attempts && !found; ++a) {
                Vec cand(k);
                for (int i = 0; i < k; ++i)
                    cand(i) = cs.p0(i) + unit(rng) * (cs.p_max - cs.p0(i));
                if (meets_rate_constraints(cs, cand)) {
                    start = cand;
                    found = true;
                }
            }
            if (!found) {
                Vec d(k);
                for (int i = 0; i < k; ++i)
                    d(i) = unit(rng) * cs.d_max_star;
                start = cs.point_at(d);
            }
        }
        LocalOptResult r = detail::ascend(cs, ch, start, opt);
        if (r.objective > best.objective)
            best = std::move(r);
    }
    return best;
}

} // namespace srnet
