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
#include <string>
#include <vector>

#include "srnet/channel.hpp"
#include "srnet/error.hpp"
#include "srnet/random.hpp"
#include "srnet/scenario.hpp"

namespace srnet {

enum class Variant {
    LearnedC,      // "srnet": outputs p_hat and distances d
    HeuristicC,    // "srnet-heu": outputs p_hat, interior point fixed at d_max_star
    PenaltyAdd,    // "penalty-add": outputs powers, additive violation penalty
    PenaltyMul,    // "penalty-mul": outputs powers, multiplicative violation penalty
};

inline std::string to_string(Variant v)
{
    switch (v) {
    case Variant::LearnedC: return "srnet";
    case Variant::HeuristicC: return "srnet-heu";
    case Variant::PenaltyAdd: return "penalty-add";
    case Variant::PenaltyMul: return "penalty-mul";
    }
    return "?";
}

inline Variant parse_variant(const std::string& s)
{
    if (s == "srnet")
        return Variant::LearnedC;
    if (s == "srnet-heu")
        return Variant::HeuristicC;
    if (s == "penalty-add")
        return Variant::PenaltyAdd;
    if (s == "penalty-mul")
        return Variant::PenaltyMul;
    fail(ErrorCode::InvalidArgument, "unknown variant '" + s + "'");
}

inline bool is_projected(Variant v) { return v == Variant::LearnedC || v == Variant::HeuristicC; }

inline int output_width(Variant v, int cells) { return v == Variant::LearnedC ? 2 * cells : cells; }

/// Trainable parameters, also used for gradients and optimiser moments.
struct Params {
    std::vector<Mat> W;
    std::vector<Vec> b;
    std::vector<Vec> gamma; // batch-norm scale, one per hidden layer
    std::vector<Vec> beta;  // batch-norm shift

    Params zeros_like() const
    {
        Params z = *this;
        for (auto& m : z.W)
            m.setZero();
        for (auto* group : {&z.b, &z.gamma, &z.beta})
            for (auto& v : *group)
                v.setZero();
        return z;
    }

    /// Visits every parameter block as a flat array, in a fixed order.
    template <typename Fn>
    void for_each_block(Fn&& fn)
    {
        for (std::size_t l = 0; l < W.size(); ++l) {
            fn(W[l].data(), W[l].size());
            fn(b[l].data(), b[l].size());
        }
        for (std::size_t l = 0; l < gamma.size(); ++l) {
            fn(gamma[l].data(), gamma[l].size());
            fn(beta[l].data(), beta[l].size());
        }
    }

    std::size_t count() const
    {
        std::size_t n = 0;
        const_cast<Params*>(this)->for_each_block([&](double*, Eigen::Index len) { n += static_cast<std::size_t>(len); });
        return n;
    }
};

/// Per-coordinate standardisation of the gains in dB.
struct FeatureStats {
    Vec mean;
    Vec stddev;
};

struct MlpModel {
    Variant variant = Variant::LearnedC;
    int cells = 3;
    std::vector<int> layer_sizes; // input, hidden..., output
    Params params;
    std::vector<Vec> running_mean;
    std::vector<Vec> running_var;
    double bn_momentum = 0.99;
    double bn_epsilon = 1e-5;
    bool training = true;
    FeatureStats stats;
    /// Violation weight for the penalty variants; unused otherwise.
    double penalty_weight = 0.0;

    int hidden_count() const { return static_cast<int>(layer_sizes.size()) - 2; }
    int input_width() const { return layer_sizes.front(); }
    int output_width() const { return layer_sizes.back(); }
};

inline int feature_width(int cells) { return cells * cells + cells; }

/// Xavier-uniform weights, zero biases, identity batch norm.
inline MlpModel init_model(Variant variant, int cells, const std::vector<int>& hidden, Rng& rng)
{
    require(cells >= 1, "cell count must be positive");
    for (int h : hidden)
        require(h >= 1, "hidden layer sizes must be positive");
    MlpModel model;
    model.variant = variant;
    model.cells = cells;
    model.layer_sizes.push_back(feature_width(cells));
    model.layer_sizes.insert(model.layer_sizes.end(), hidden.begin(), hidden.end());
    model.layer_sizes.push_back(output_width(variant, cells));

    for (std::size_t l = 0; l + 1 < model.layer_sizes.size(); ++l) {
        const int fan_in = model.layer_sizes[l];
        const int fan_out = model.layer_sizes[l + 1];
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> u(-limit, limit);
        Mat w(fan_out, fan_in);
        for (Eigen::Index c = 0; c < w.cols(); ++c)
            for (Eigen::Index r = 0; r < w.rows(); ++r)
                w(r, c) = u(rng);
        model.params.W.push_back(std::move(w));
        model.params.b.push_back(Vec::Zero(fan_out));
    }
    for (int h : hidden) {
        model.params.gamma.push_back(Vec::Ones(h));
        model.params.beta.push_back(Vec::Zero(h));
        model.running_mean.push_back(Vec::Zero(h));
        model.running_var.push_back(Vec::Ones(h));
    }
    const int g = cells * cells;
    model.stats.mean = Vec::Zero(g);
    model.stats.stddev = Vec::Ones(g);
    return model;
}

inline Vec gains_db(const ChannelRealization& ch)
{
    const int k = ch.cell_count();
    Vec out(k * k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            const double g = ch.gains(i, j);
            require(g > 0.0, "gains must be positive to featurise");
            out(i * k + j) = 10.0 * std::log10(g);
        }
    return out;
}

inline FeatureStats compute_feature_stats(const std::vector<ChannelRealization>& samples)
{
    require(!samples.empty(), "feature statistics need at least one sample");
    const auto g = gains_db(samples.front()).size();
    Vec sum = Vec::Zero(g);
    Vec sum_sq = Vec::Zero(g);
    for (const auto& ch : samples) {
        const Vec x = gains_db(ch);
        sum += x;
        sum_sq += x.cwiseProduct(x);
    }
    const double n = static_cast<double>(samples.size());
    FeatureStats stats;
    stats.mean = sum / n;
    stats.stddev = (sum_sq / n - stats.mean.cwiseProduct(stats.mean)).cwiseMax(0.0).cwiseSqrt();
    stats.stddev = stats.stddev.cwiseMax(1e-12);
    return stats;
}

/// Input vector: standardised gains in dB (row-major), then raw SINR targets.
inline Vec featurize(const ChannelRealization& ch, const FeatureStats& stats)
{
    const int k = ch.cell_count();
    require(stats.mean.size() == k * k, "feature statistics do not match the cell count");
    Vec x(feature_width(k));
    x.head(k * k) = (gains_db(ch) - stats.mean).cwiseQuotient(stats.stddev);
    x.tail(k) = ch.gamma_min;
    return x;
}

inline Mat featurize_batch(const std::vector<ChannelRealization>& samples, const FeatureStats& stats)
{
    require(!samples.empty(), "empty batch");
    Mat X(feature_width(samples.front().cell_count()), static_cast<Eigen::Index>(samples.size()));
    for (std::size_t m = 0; m < samples.size(); ++m)
        X.col(static_cast<Eigen::Index>(m)) = featurize(samples[m], stats);
    return X;
}

/// Activations retained by a forward pass for backprop.
struct ForwardCache {
    std::vector<Mat> inputs;  // input to each dense layer
    std::vector<Mat> xhat;    // normalised pre-activations of hidden layers
    std::vector<Mat> bn_out;  // batch-norm outputs (pre-ReLU)
    std::vector<Vec> inv_std;
    std::vector<Vec> batch_mean;
    std::vector<Vec> batch_var;
    bool training = true;
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Dense -> batch norm -> ReLU for each hidden layer, then a linear output layer.
/// Columns of X are samples. Returns output pre-activations.
inline Mat network_forward(const MlpModel& model, const Mat& X, ForwardCache* cache = nullptr)
{
    require(X.rows() == model.input_width(), "input width does not match the model");
    require(X.cols() >= 1, "empty batch");
    const Eigen::Index n = X.cols();
    if (model.training)
        require(n >= 2, "batch norm in training mode needs at least two samples");
    if (cache) {
        *cache = ForwardCache{};
        cache->training = model.training;
    }

    Mat act = X;
    const int hidden = model.hidden_count();
    for (int l = 0; l < hidden; ++l) {
        Mat z = model.params.W[l] * act;
        z.colwise() += model.params.b[l];
        Vec mean, var;
        if (model.training) {
            mean = z.rowwise().mean();
            var = (z.colwise() - mean).array().square().rowwise().mean();
        } else {
            mean = model.running_mean[l];
            var = model.running_var[l];
        }
        const Vec inv_std = (var.array() + model.bn_epsilon).rsqrt();
        Mat xhat = (z.colwise() - mean).array().colwise() * inv_std.array();
        Mat y = (xhat.array().colwise() * model.params.gamma[l].array()).colwise() + model.params.beta[l].array();
        if (cache) {
            cache->inputs.push_back(std::move(act));
            cache->xhat.push_back(std::move(xhat));
            cache->inv_std.push_back(inv_std);
            cache->batch_mean.push_back(mean);
            cache->batch_var.push_back(var);
            act = y.cwiseMax(0.0);
            cache->bn_out.push_back(std::move(y));
        } else {
            act = y.cwiseMax(0.0);
        }
    }
    Mat out = model.params.W[hidden] * act;
    out.colwise() += model.params.b[hidden];
    if (cache)
        cache->inputs.push_back(std::move(act));
    return out;
}

/// Gradients of a scalar loss given dLoss/d(output pre-activations).
inline Params network_backward(const MlpModel& model, const ForwardCache& cache, const Mat& d_out)
{
    require(cache.training, "backward needs a training-mode forward pass");
    const int hidden = model.hidden_count();
    if (static_cast<int>(cache.inputs.size()) != hidden + 1 || d_out.cols() != cache.inputs.back().cols())
        fail(ErrorCode::Internal, "forward cache does not match the backward batch");
    Params grads = model.params.zeros_like();
    const double n = static_cast<double>(d_out.cols());

    Mat delta = d_out;
    for (int l = hidden; l >= 0; --l) {
        grads.W[l] = delta * cache.inputs[l].transpose();
        grads.b[l] = delta.rowwise().sum();
        if (l == 0)
            break;
        const int h = l - 1;
        Mat d_act = model.params.W[l].transpose() * delta;
        Mat d_y = (cache.bn_out[h].array() > 0.0).select(d_act, 0.0);
        grads.gamma[h] = d_y.cwiseProduct(cache.xhat[h]).rowwise().sum();
        grads.beta[h] = d_y.rowwise().sum();
        const Mat d_xhat = d_y.array().colwise() * model.params.gamma[h].array();
        const Vec sum_dx = d_xhat.rowwise().sum();
        const Vec sum_dx_x = d_xhat.cwiseProduct(cache.xhat[h]).rowwise().sum();
        Mat d_z = (n * d_xhat).colwise() - sum_dx;
        d_z -= (cache.xhat[h].array().colwise() * sum_dx_x.array()).matrix();
        delta = (d_z.array().colwise() * (cache.inv_std[h].array() / n)).matrix();
    }
    return grads;
}

/// Exponential moving average of the batch statistics (unbiased variance).
inline void update_running_stats(MlpModel& model, const ForwardCache& cache, Eigen::Index batch)
{
    const double m = model.bn_momentum;
    const double unbias = batch > 1 ? static_cast<double>(batch) / static_cast<double>(batch - 1) : 1.0;
    for (int l = 0; l < model.hidden_count(); ++l) {
        model.running_mean[l] = m * model.running_mean[l] + (1.0 - m) * cache.batch_mean[l];
        model.running_var[l] = m * model.running_var[l] + (1.0 - m) * unbias * cache.batch_var[l];
    }
}

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    Params m;
    Params v;
    long step = 0;

    static AdamState for_params(const Params& p) { return AdamState{p.zeros_like(), p.zeros_like(), 0}; }
};

/// One bias-corrected Adam update of params in place.
inline void adam_step(Params& params, Params grads, AdamState& state, const AdamConfig& cfg)
{
    ++state.step;
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    std::vector<double*> p_blocks, g_blocks, m_blocks, v_blocks;
    std::vector<Eigen::Index> lens;
    params.for_each_block([&](double* d, Eigen::Index n) {
        p_blocks.push_back(d);
        lens.push_back(n);
    });
    grads.for_each_block([&](double* d, Eigen::Index) { g_blocks.push_back(d); });
    state.m.for_each_block([&](double* d, Eigen::Index) { m_blocks.push_back(d); });
    state.v.for_each_block([&](double* d, Eigen::Index) { v_blocks.push_back(d); });
    if (g_blocks.size() != p_blocks.size() || m_blocks.size() != p_blocks.size())
        fail(ErrorCode::Internal, "optimiser state does not match the parameters");
    for (std::size_t blk = 0; blk < p_blocks.size(); ++blk) {
        Eigen::Map<Eigen::ArrayXd> p(p_blocks[blk], lens[blk]);
        Eigen::Map<Eigen::ArrayXd> g(g_blocks[blk], lens[blk]);
        Eigen::Map<Eigen::ArrayXd> m(m_blocks[blk], lens[blk]);
        Eigen::Map<Eigen::ArrayXd> v(v_blocks[blk], lens[blk]);
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.square();
        p -= cfg.learning_rate * (m / c1) / ((v / c2).sqrt() + cfg.epsilon);
    }
}

} // namespace srnet
