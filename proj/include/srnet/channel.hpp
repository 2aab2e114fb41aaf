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

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

#include "srnet/error.hpp"

namespace srnet {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// One problem instance. gains(i, j) is the linear power gain from BS j to UE i.
struct ChannelRealization {
    Mat gains;
    Vec gamma_min;
    double noise_power = 1.0;
    double p_max = 1.0;

    int cell_count() const { return static_cast<int>(gamma_min.size()); }

    void validate() const
    {
        const auto k = gamma_min.size();
        require(k >= 1, "channel has no cells");
        require(gains.rows() == k && gains.cols() == k, "gain matrix must be K x K");
        require((gains.array() >= 0.0).all(), "gains must be non-negative");
        require((gains.diagonal().array() > 0.0).all(), "direct-link gains must be positive");
        require((gamma_min.array() >= 0.0).all(), "SINR targets must be non-negative");
        require(noise_power > 0.0, "noise power must be positive");
        require(p_max > 0.0, "power cap must be positive");
    }
};

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

inline double rate_to_sinr(double rate_bits) { return std::exp2(rate_bits) - 1.0; }

/// Per-UE SINR for transmit powers p.
inline Vec sinr(const ChannelRealization& ch, const Vec& p)
{
    const Vec received = ch.gains * p;
    const Vec signal = ch.gains.diagonal().cwiseProduct(p);
    const Vec interference = (received - signal).array() + ch.noise_power;
    return signal.cwiseQuotient(interference);
}

inline Vec rates(const ChannelRealization& ch, const Vec& p)
{
    return sinr(ch, p).unaryExpr([](double g) { return std::log2(1.0 + g); });
}

/// Sum rate in bit/s/Hz.
inline double sum_rate(const ChannelRealization& ch, const Vec& p) { return rates(ch, p).sum(); }

/// Gradient of J = -sum_i log2(1 + SINR_i) with respect to p.
///
/// log(1 + SINR_i) = log(S_i) - log(I_i) with S_i the total received power
/// plus noise and I_i the interference plus noise, so
/// dJ/dp_k = -(1/ln 2) sum_i (g_ik / S_i - [i != k] g_ik / I_i).
inline Vec grad_neg_sum_rate(const ChannelRealization& ch, const Vec& p)
{
    const int k = ch.cell_count();
    const Vec total = (ch.gains * p).array() + ch.noise_power;
    const Vec interference = total - ch.gains.diagonal().cwiseProduct(p);
    Vec grad = Vec::Zero(k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            grad(j) += ch.gains(i, j) / total(i);
            if (j != i)
                grad(j) -= ch.gains(i, j) / interference(i);
        }
    return -grad / std::numbers::ln2;
}

/// Jacobian of the SINR vector, J(i, j) = d SINR_i / d p_j.
inline Mat sinr_jacobian(const ChannelRealization& ch, const Vec& p)
{
    const int k = ch.cell_count();
    const Vec interference =
        (ch.gains * p - ch.gains.diagonal().cwiseProduct(p)).array() + ch.noise_power;
    Mat jac = Mat::Zero(k, k);
    for (int i = 0; i < k; ++i) {
        const double signal = ch.gains(i, i) * p(i);
        for (int j = 0; j < k; ++j)
            jac(i, j) = (i == j) ? ch.gains(i, i) / interference(i)
                                 : -signal * ch.gains(i, j) / (interference(i) * interference(i));
    }
    return jac;
}

} // namespace srnet
