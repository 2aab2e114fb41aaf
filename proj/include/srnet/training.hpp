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
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "srnet/mlp.hpp"
#include "srnet/parallel.hpp"
#include "srnet/policy.hpp"
#include "srnet/random.hpp"
#include "srnet/scenario.hpp"

namespace srnet {

struct TrainConfig {
    long iterations = 20000;
    int batch_size = 512;
    AdamConfig adam;
    std::uint64_t seed = 1;
    std::vector<int> hidden{128, 64};
    double bn_momentum = 0.99;
    /// Multiplies the learning rate every lr_decay_every steps (0 disables).
    long lr_decay_every = 0;
    double lr_decay = 1.0;

    static TrainConfig desk_scale() { return TrainConfig{}; }

    static TrainConfig full_scale()
    {
        TrainConfig cfg;
        cfg.iterations = 150000;
        cfg.batch_size = 8000;
        cfg.hidden = {720, 360, 180, 90};
        return cfg;
    }
};

struct TrainResult {
    std::vector<double> loss_trace;
};

/// Constraint sets of every sample, computed once. All samples must be feasible.
inline std::vector<ConstraintSet> build_all_constraints(const std::vector<ChannelRealization>& samples)
{
    std::vector<ConstraintSet> out;
    out.reserve(samples.size());
    for (std::size_t m = 0; m < samples.size(); ++m) {
        out.push_back(build_constraints(samples[m]));
        if (!out.back().feasible)
            fail(ErrorCode::Infeasible, "sample " + std::to_string(m) + " cannot meet its rate targets");
    }
    return out;
}

/// Fresh model for a variant with feature statistics taken from the training set.
inline MlpModel make_model(Variant variant, const Dataset& train_set, const TrainConfig& cfg)
{
    require(train_set.size() > 0, "training set is empty");
    Rng rng(splitmix64(cfg.seed ^ 0xa0761d6478bd642fULL));
    MlpModel model = init_model(variant, train_set.meta.cell_count, cfg.hidden, rng);
    model.bn_momentum = cfg.bn_momentum;
    model.stats = compute_feature_stats(train_set.samples);
    return model;
}

/// Mini-batch Adam on the variant's loss. Batches are drawn with replacement
/// from a seed-derived stream. Leaves the model in inference mode.
inline TrainResult train(MlpModel& model, const std::vector<ChannelRealization>& samples,
                         const std::vector<ConstraintSet>& constraints, const TrainConfig& cfg,
                         const std::function<void(long, double)>& on_step = {})
{
    require(!samples.empty(), "training set is empty");
    require(samples.size() == constraints.size(), "one constraint set per sample is required");
    require(cfg.iterations >= 0, "iteration count must be non-negative");
    TrainResult result;
    if (cfg.iterations == 0) {
        model.training = false;
        return result;
    }
    require(cfg.batch_size >= 2, "batch norm needs a batch size of at least two");

    const Mat features = featurize_batch(samples, model.stats);
    Rng rng(splitmix64(cfg.seed));
    std::uniform_int_distribution<std::size_t> pick(0, samples.size() - 1);
    AdamState state = AdamState::for_params(model.params);
    AdamConfig adam = cfg.adam;

    const auto batch = static_cast<std::size_t>(cfg.batch_size);
    Mat X(features.rows(), cfg.batch_size);
    std::vector<const ChannelRealization*> chans(batch);
    std::vector<const ConstraintSet*> sets(batch);
    ForwardCache cache;
    model.training = true;
    result.loss_trace.reserve(static_cast<std::size_t>(cfg.iterations));

    for (long step = 0; step < cfg.iterations; ++step) {
        for (std::size_t m = 0; m < batch; ++m) {
            const std::size_t idx = pick(rng);
            X.col(static_cast<Eigen::Index>(m)) = features.col(static_cast<Eigen::Index>(idx));
            chans[m] = &samples[idx];
            sets[m] = &constraints[idx];
        }
        Mat out = network_forward(model, X, &cache);
        const PolicyBatch pb = apply_head(model, std::move(out), sets);
        const LossAndGrad lg = policy_loss(model, pb, chans, sets);
        if (!std::isfinite(lg.loss))
            fail(ErrorCode::Diverged, "loss is not finite at step " + std::to_string(step));
        const Params grads = network_backward(model, cache, lg.d_out);
        adam_step(model.params, grads, state, adam);
        update_running_stats(model, cache, X.cols());
        result.loss_trace.push_back(lg.loss);
        if (on_step)
            on_step(step, lg.loss);
        if (cfg.lr_decay_every > 0 && (step + 1) % cfg.lr_decay_every == 0)
            adam.learning_rate *= cfg.lr_decay;
    }
    model.training = false;
    return result;
}

struct InferResult {
    std::vector<Vec> powers;
    std::vector<double> sum_rates;
};

/// Powers for each channel in inference mode. Projected variants always return
/// feasible powers; penalty variants return their raw outputs.
inline InferResult infer(const MlpModel& model, const std::vector<ChannelRealization>& channels,
                         const std::vector<ConstraintSet>& constraints)
{
    require(!model.training, "model must be in inference mode");
    require(channels.size() == constraints.size(), "one constraint set per sample is required");
    InferResult r;
    if (channels.empty())
        return r;
    for (std::size_t m = 0; m < constraints.size(); ++m)
        if (!constraints[m].feasible)
            fail(ErrorCode::Infeasible, "sample " + std::to_string(m) + " cannot meet its rate targets");
    std::vector<const ConstraintSet*> sets;
    for (const auto& cs : constraints)
        sets.push_back(&cs);
    const Mat out = network_forward(model, featurize_batch(channels, model.stats));
    PolicyBatch pb = apply_head(model, out, sets);
    r.powers = std::move(pb.powers);
    for (std::size_t m = 0; m < channels.size(); ++m)
        r.sum_rates.push_back(sum_rate(channels[m], r.powers[m]));
    return r;
}

inline InferResult infer(const MlpModel& model, const std::vector<ChannelRealization>& channels)
{
    std::vector<ConstraintSet> constraints;
    constraints.reserve(channels.size());
    for (const auto& ch : channels)
        constraints.push_back(build_constraints(ch));
    return infer(model, channels, constraints);
}

/// Single-instance inference; the per-instance path timed by the benchmark.
inline Vec infer_one(const MlpModel& model, const ChannelRealization& ch, const ConstraintSet& cs)
{
    if (!cs.feasible)
        fail(ErrorCode::Infeasible, "instance cannot meet its rate targets");
    Mat x = featurize(ch, model.stats);
    const ConstraintSet* set = &cs;
    PolicyBatch pb = apply_head(model, network_forward(model, x), std::span<const ConstraintSet* const>(&set, 1));
    return pb.powers.front();
}

} // namespace srnet
