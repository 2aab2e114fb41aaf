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

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "srnet/dataset_io.hpp"
#include "srnet/error.hpp"
#include "srnet/mlp.hpp"

namespace srnet {

// Text checkpoint, version 1:
//   srnet-checkpoint 1
//   variant <name>
//   cells <K>
//   layers <n0> <n1> ... <nL>
//   batchnorm <momentum> <epsilon>
//   penalty_weight <w>
//   stats_mean <K*K values>
//   stats_std <K*K values>
//   W <l> <rows> <cols> <values, column-major>      one line per dense layer
//   b <l> <values>
//   bn <l> <gamma...> | <beta...> | <running mean...> | <running var...>

inline constexpr int kCheckpointVersion = 1;

namespace detail {

inline void write_values(std::ostream& os, const double* data, Eigen::Index n)
{
    for (Eigen::Index i = 0; i < n; ++i)
        os << ' ' << format_double(data[i]);
}

} // namespace detail

inline void write_checkpoint(std::ostream& os, const MlpModel& model)
{
    os << "srnet-checkpoint " << kCheckpointVersion << '\n';
    os << "variant " << to_string(model.variant) << '\n';
    os << "cells " << model.cells << '\n';
    os << "layers";
    for (int s : model.layer_sizes)
        os << ' ' << s;
    os << '\n';
    os << "batchnorm " << format_double(model.bn_momentum) << ' ' << format_double(model.bn_epsilon) << '\n';
    os << "penalty_weight " << format_double(model.penalty_weight) << '\n';
    os << "stats_mean";
    detail::write_values(os, model.stats.mean.data(), model.stats.mean.size());
    os << "\nstats_std";
    detail::write_values(os, model.stats.stddev.data(), model.stats.stddev.size());
    os << '\n';
    for (std::size_t l = 0; l < model.params.W.size(); ++l) {
        const Mat& w = model.params.W[l];
        os << "W " << l << ' ' << w.rows() << ' ' << w.cols();
        detail::write_values(os, w.data(), w.size());
        os << "\nb " << l;
        detail::write_values(os, model.params.b[l].data(), model.params.b[l].size());
        os << '\n';
    }
    for (std::size_t l = 0; l < model.params.gamma.size(); ++l) {
        os << "bn " << l;
        for (const Vec* v : {&model.params.gamma[l], &model.params.beta[l], &model.running_mean[l], &model.running_var[l]})
            detail::write_values(os, v->data(), v->size());
        os << '\n';
    }
}

inline void save_checkpoint(const MlpModel& model, const std::string& path)
{
    std::ofstream os(path);
    if (!os)
        fail(ErrorCode::InvalidArgument, "cannot open '" + path + "' for writing");
    write_checkpoint(os, model);
}

namespace detail {

class LineReader {
public:
    explicit LineReader(std::istream& is) : is_(is) {}

    std::istringstream expect(const std::string& key)
    {
        std::string line;
        if (!std::getline(is_, line))
            fail(ErrorCode::Parse, "checkpoint line " + std::to_string(line_no_ + 1) + ": missing '" + key + "'");
        ++line_no_;
        std::istringstream ss(line);
        std::string got;
        ss >> got;
        if (got != key)
            fail(ErrorCode::Parse, "checkpoint line " + std::to_string(line_no_) + ": expected '" + key + "', got '" +
                                       got + "'");
        return ss;
    }

    void read_into(std::istringstream& ss, double* data, Eigen::Index n)
    {
        for (Eigen::Index i = 0; i < n; ++i) {
            std::string tok;
            if (!(ss >> tok))
                fail(ErrorCode::Parse, "checkpoint line " + std::to_string(line_no_) + ": too few values");
            data[i] = parse_double(tok, line_no_);
        }
    }

    void expect_end(std::istringstream& ss)
    {
        std::string extra;
        if (ss >> extra)
            fail(ErrorCode::Parse, "checkpoint line " + std::to_string(line_no_) + ": trailing values");
    }

    std::size_t line() const { return line_no_; }

private:
    std::istream& is_;
    std::size_t line_no_ = 0;
};

} // namespace detail

inline MlpModel read_checkpoint(std::istream& is)
{
    detail::LineReader in(is);
    int version = 0;
    if (!(in.expect("srnet-checkpoint") >> version) || version != kCheckpointVersion)
        fail(ErrorCode::Schema, "unsupported checkpoint version");

    MlpModel model;
    std::string variant;
    in.expect("variant") >> variant;
    model.variant = parse_variant(variant);
    if (!(in.expect("cells") >> model.cells) || model.cells < 1)
        fail(ErrorCode::Parse, "bad cell count");
    {
        auto ss = in.expect("layers");
        int s = 0;
        while (ss >> s)
            model.layer_sizes.push_back(s);
    }
    if (model.layer_sizes.size() < 2 || model.layer_sizes.front() != feature_width(model.cells) ||
        model.layer_sizes.back() != output_width(model.variant, model.cells))
        fail(ErrorCode::Schema, "layer sizes do not match variant and cell count");
    for (int s : model.layer_sizes)
        if (s < 1)
            fail(ErrorCode::Schema, "layer sizes must be positive");
    {
        auto ss = in.expect("batchnorm");
        in.read_into(ss, &model.bn_momentum, 1);
        in.read_into(ss, &model.bn_epsilon, 1);
    }
    {
        auto ss = in.expect("penalty_weight");
        in.read_into(ss, &model.penalty_weight, 1);
    }
    const int g = model.cells * model.cells;
    model.stats.mean.resize(g);
    model.stats.stddev.resize(g);
    {
        auto ss = in.expect("stats_mean");
        in.read_into(ss, model.stats.mean.data(), g);
        in.expect_end(ss);
    }
    {
        auto ss = in.expect("stats_std");
        in.read_into(ss, model.stats.stddev.data(), g);
        in.expect_end(ss);
    }
    const std::size_t dense = model.layer_sizes.size() - 1;
    for (std::size_t l = 0; l < dense; ++l) {
        auto ss = in.expect("W");
        std::size_t idx = 0;
        Eigen::Index rows = 0, cols = 0;
        ss >> idx >> rows >> cols;
        if (idx != l || rows != model.layer_sizes[l + 1] || cols != model.layer_sizes[l])
            fail(ErrorCode::Schema, "checkpoint line " + std::to_string(in.line()) + ": weight shape mismatch");
        Mat w(rows, cols);
        in.read_into(ss, w.data(), w.size());
        in.expect_end(ss);
        model.params.W.push_back(std::move(w));
        auto sb = in.expect("b");
        sb >> idx;
        Vec b(rows);
        in.read_into(sb, b.data(), rows);
        in.expect_end(sb);
        model.params.b.push_back(std::move(b));
    }
    for (std::size_t l = 0; l + 2 < model.layer_sizes.size(); ++l) {
        auto ss = in.expect("bn");
        std::size_t idx = 0;
        ss >> idx;
        const int h = model.layer_sizes[l + 1];
        Vec gamma(h), beta(h), mean(h), var(h);
        for (Vec* v : {&gamma, &beta, &mean, &var})
            in.read_into(ss, v->data(), h);
        in.expect_end(ss);
        if (!(var.array() > 0.0).all())
            fail(ErrorCode::Schema, "running variance must be positive");
        model.params.gamma.push_back(std::move(gamma));
        model.params.beta.push_back(std::move(beta));
        model.running_mean.push_back(std::move(mean));
        model.running_var.push_back(std::move(var));
    }
    model.training = false;
    return model;
}

inline MlpModel load_checkpoint(const std::string& path)
{
    std::ifstream is(path);
    if (!is)
        fail(ErrorCode::InvalidArgument, "cannot open checkpoint '" + path + "'");
    return read_checkpoint(is);
}

} // namespace srnet
