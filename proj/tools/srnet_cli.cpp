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

// srnet command line: generate | train | eval | bench | project.
//
// Exit codes: 0 ok, 1 runtime error, 2 usage error, 3 training diverged,
// 4 infeasible instance.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "srnet/srnet.hpp"

namespace {

using namespace srnet;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitInfeasible = 4;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<double> parse_list(const std::string& s, const char* what)
{
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (used != tok.size())
                throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw UsageError(std::string("bad number in ") + what + ": '" + tok + "'");
        }
    }
    return out;
}

std::string fmt_vec(const Vec& v)
{
    std::string s = "[";
    for (int i = 0; i < v.size(); ++i) {
        char buf[48];
        std::snprintf(buf, sizeof buf, "%s%.10g", i ? ", " : "", v(i));
        s += buf;
    }
    return s + "]";
}

void print_matrix(const char* name, const Mat& m)
{
    std::printf("%s =\n", name);
    for (int i = 0; i < m.rows(); ++i)
        std::printf("  %s\n", fmt_vec(m.row(i).transpose()).c_str());
}

// ---------------------------------------------------------------------------

struct GenerateArgs {
    std::string region = "0,3";
    double lambda = -1.0;
    bool lambda_random = false;
    std::size_t count = 0;
    std::uint64_t seed = 0;
    std::string out;
    std::string config;
    int workers = 0;
};

int run_generate(const GenerateArgs& a)
{
    DatasetConfig cfg;
    if (!a.config.empty())
        cfg = dataset_config_from(load_key_values(a.config));
    const auto region = parse_list(a.region, "--region");
    if (region.size() != 2)
        throw UsageError("--region expects rho_min,rho_max");
    if (a.lambda_random == (a.lambda >= 0.0))
        throw UsageError("exactly one of --lambda or --lambda-random is required");
    cfg.scenario.region = {region[0], region[1]};
    cfg.scenario.rate = a.lambda_random ? RateSpec{true, 0.0} : RateSpec{false, a.lambda};
    cfg.count = a.count;
    cfg.seed = a.seed;
    cfg.workers = a.workers > 0 ? a.workers : env_worker_count();
    const Dataset ds = generate_dataset(cfg);
    save_dataset(ds, a.out);
    std::printf("wrote %zu samples to %s\n", ds.size(), a.out.c_str());
    std::printf("attempts %llu  infeasible %llu  degenerate %llu  yield %.6f\n",
                static_cast<unsigned long long>(ds.meta.attempts), static_cast<unsigned long long>(ds.meta.infeasible),
                static_cast<unsigned long long>(ds.meta.degenerate), 1.0 - ds.meta.rejection_rate());
    return 0;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
    std::string data;
    std::string variant = "srnet";
    std::string config;
    std::uint64_t seed = 1;
    bool seed_set = false;
    std::string out;
    std::string trace;
    double penalty_weight = -1.0;
    long iterations = -1;
};

int run_train(const TrainArgs& a)
{
    const Variant variant = parse_variant(a.variant);
    KeyValues kv;
    if (!a.config.empty())
        kv = load_key_values(a.config);
    TrainConfig cfg = train_config_from(kv);
    if (a.seed_set)
        cfg.seed = a.seed;
    if (a.iterations >= 0)
        cfg.iterations = a.iterations;
    const Dataset data = load_dataset(a.data);
    if (data.size() == 0)
        throw UsageError("training set is empty");

    MlpModel model;
    TrainResult trace;
    if (is_projected(variant)) {
        model = make_model(variant, data, cfg);
        const auto constraints = build_all_constraints(data.samples);
        const long every = std::max<long>(1, cfg.iterations / 20);
        trace = train(model, data.samples, constraints, cfg, [&](long step, double loss) {
            if ((step + 1) % every == 0)
                std::fprintf(stderr, "step %ld  loss %.6f\n", step + 1, loss);
        });
    } else {
        const PenaltyMode mode = variant == Variant::PenaltyAdd ? PenaltyMode::Additive : PenaltyMode::Multiplicative;
        if (a.penalty_weight >= 0.0) {
            const auto constraints = build_all_constraints(data.samples);
            model = train_penalty_net(data, constraints, mode, a.penalty_weight, cfg, &trace);
        } else {
            PenaltyConfig pcfg = penalty_config_from(kv);
            pcfg.mode = mode;
            PenaltySelection sel = select_penalty_net(data, pcfg, cfg);
            for (std::size_t i = 0; i < pcfg.weight_grid.size(); ++i)
                std::fprintf(stderr, "penalty weight %g  validation sum rate %.6f\n", pcfg.weight_grid[i], sel.scores[i]);
            std::fprintf(stderr, "selected weight %g\n", sel.weight);
            model = std::move(sel.model);
        }
    }
    save_checkpoint(model, a.out);
    const std::string trace_path = a.trace.empty() ? a.out + ".trace.csv" : a.trace;
    std::ofstream ts(trace_path);
    ts << "step,loss\n";
    for (std::size_t i = 0; i < trace.loss_trace.size(); ++i)
        ts << i << ',' << format_double(trace.loss_trace[i]) << '\n';
    std::printf("wrote %s checkpoint to %s (trace %s)\n", to_string(model.variant).c_str(), a.out.c_str(),
                trace_path.c_str());
    return 0;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
    std::vector<std::string> tests;
    std::vector<std::string> methods;
    std::string out;
    bool no_fallback = false;
    std::uint64_t seed = 0;
};

int run_eval(const EvalArgs& a)
{
    std::vector<Method> methods;
    for (const auto& spec : a.methods) {
        Method m = parse_method(spec);
        m.fallback = !a.no_fallback;
        methods.push_back(std::move(m));
    }
    nlohmann::json doc;
    doc["schema_version"] = kReportSchemaVersion;
    doc["seed"] = a.seed;
    doc["tests"] = nlohmann::json::array();
    const std::string csv_path = a.out + ".samples.csv";
    std::ofstream csv(csv_path);
    csv << "test,sample,method,sum_rate,min_rate_margin,time_us\n";
    for (const auto& path : a.tests) {
        const Dataset test = load_dataset(path);
        if (test.size() == 0)
            throw UsageError("test set '" + path + "' is empty");
        EvalReport report = evaluate(methods, test, a.seed, env_worker_count());
        report.config = {{"test", path},
                         {"rho_min", test.meta.rho_min_db},
                         {"rho_max", test.meta.rho_max_db},
                         {"rate_spec", test.meta.rate.to_string()},
                         {"fallback", !a.no_fallback}};
        doc["tests"].push_back(to_json(report));
        for (const auto& r : report.rows)
            csv << path << ',' << r.sample << ',' << r.method << ',' << format_double(r.sum_rate) << ','
                << format_double(r.min_rate_margin) << ',' << format_double(r.time_us) << '\n';
        if (test.meta.rate.random)
            std::printf("%s (rate random)\n", path.c_str());
        else
            std::printf("%s (rate %g)\n", path.c_str(), test.meta.rate.lambda);
        std::printf("  %-40s %12s %10s %10s %10s %12s\n", "method", "sum_rate", "sat_raw", "sat", "fallback", "time_us");
        for (const auto& m : report.methods)
            std::printf("  %-40s %12.6f %10.4f %10.4f %10.4f %12.2f\n", m.label.c_str(), m.mean_sum_rate,
                        m.satisfaction_raw, m.satisfaction, m.fallback_rate, m.mean_time_us);
    }
    std::ofstream js(a.out);
    js << doc.dump(2) << '\n';
    return 0;
}

// ---------------------------------------------------------------------------

struct BenchArgs {
    std::string test;
    std::vector<std::string> methods;
    int repeats = 1;
    std::size_t limit = 0;
    std::string out;
    std::uint64_t seed = 0;
};

int run_bench(const BenchArgs& a)
{
    if (a.repeats < 1)
        throw UsageError("--repeats must be at least 1");
    Dataset test = load_dataset(a.test);
    if (a.limit > 0 && test.samples.size() > a.limit)
        test.samples.resize(a.limit);
    if (test.size() == 0)
        throw UsageError("test set is empty");
    std::vector<Method> methods;
    for (const auto& spec : a.methods)
        methods.push_back(parse_method(spec));
    const auto rows = benchmark(methods, test, a.repeats, a.seed);
    if (a.out.empty()) {
        write_bench_csv(std::cout, rows);
    } else {
        std::ofstream os(a.out);
        write_bench_csv(os, rows);
        write_bench_csv(std::cout, rows);
    }
    return 0;
}

// ---------------------------------------------------------------------------

struct ProjectArgs {
    std::string instance;
    std::string data;
    std::size_t index = 0;
    double p_max = 1.0;
    double sigma2 = 1.0;
    std::string phat;
    std::string d;
};

ChannelRealization parse_instance(const ProjectArgs& a)
{
    if (!a.data.empty()) {
        const Dataset ds = load_dataset(a.data);
        if (a.index >= ds.size())
            throw UsageError("--index out of range");
        return ds.samples[a.index];
    }
    if (a.instance.empty())
        throw UsageError("either --instance or --data is required");
    const auto semi = a.instance.find(';');
    if (semi == std::string::npos)
        throw UsageError("--instance expects 'g11,g12,...;gamma1,...'");
    const auto gains = parse_list(a.instance.substr(0, semi), "--instance gains");
    const auto targets = parse_list(a.instance.substr(semi + 1), "--instance targets");
    const auto k = static_cast<int>(targets.size());
    if (k < 1 || static_cast<int>(gains.size()) != k * k)
        throw UsageError("--instance needs K*K gains and K targets");
    ChannelRealization ch;
    ch.gains = Mat(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            ch.gains(i, j) = gains[static_cast<std::size_t>(i * k + j)];
    ch.gamma_min = Eigen::Map<const Vec>(targets.data(), k);
    ch.noise_power = a.sigma2;
    ch.p_max = a.p_max;
    return ch;
}

// Max relative deviation between an analytic Jacobian and central differences of fn.
template <typename Fn>
double fd_residual(const Mat& analytic, const Vec& x0, Fn&& fn)
{
    double worst = 0.0;
    for (int j = 0; j < x0.size(); ++j) {
        const double h = 1e-6 * std::max(1.0, std::abs(x0(j)));
        Vec xp = x0, xm = x0;
        xp(j) += h;
        xm(j) -= h;
        const Vec col = (fn(xp) - fn(xm)) / (2.0 * h);
        for (int i = 0; i < col.size(); ++i) {
            const double denom = std::max({std::abs(col(i)), std::abs(analytic(i, j)), 1e-6});
            worst = std::max(worst, std::abs(col(i) - analytic(i, j)) / denom);
        }
    }
    return worst;
}

int run_project(const ProjectArgs& a)
{
    const ChannelRealization ch = parse_instance(a);
    const ConstraintSet cs = build_constraints(ch);
    const int k = cs.size();
    std::printf("p0 = %s\n", fmt_vec(cs.p0).c_str());
    if (!cs.feasible) {
        std::printf("instance is infeasible: rate targets cannot be met within p_max = %.10g\n", ch.p_max);
        return kExitInfeasible;
    }
    std::printf("d_max* = %.10g\n", cs.d_max_star);

    Vec p_hat = Vec::Constant(k, 0.5 * ch.p_max);
    if (!a.phat.empty()) {
        const auto v = parse_list(a.phat, "--phat");
        if (static_cast<int>(v.size()) != k)
            throw UsageError("--phat needs K values");
        p_hat = Eigen::Map<const Vec>(v.data(), k);
    }
    Vec d = Vec::Constant(k, 0.5 * cs.d_max_star);
    if (!a.d.empty()) {
        const auto v = parse_list(a.d, "--d");
        if (static_cast<int>(v.size()) != k)
            throw UsageError("--d needs K values");
        d = Eigen::Map<const Vec>(v.data(), k);
    }

    const ProjectionTape tape = project_forward(cs, p_hat, d);
    std::printf("p_hat = %s\nd = %s\np_C = %s\n", fmt_vec(tape.p_hat).c_str(), fmt_vec(tape.d).c_str(),
                fmt_vec(tape.p_C).c_str());
    if (tape.feasible_input) {
        std::printf("p_hat already meets the rate constraints: eps* = 0, p_D = p_hat\n");
    } else {
        std::printf("active set = {");
        for (std::size_t i = 0; i < tape.active_set.size(); ++i)
            std::printf("%s%d", i ? ", " : "", tape.active_set[i] + 1);
        std::printf("}\neps* = %.10g (row %d)\n", tape.eps_star, tape.k_eps + 1);
    }
    std::printf("p_D = %s\np_E = %s (argmax %d)\n", fmt_vec(tape.p_D).c_str(), fmt_vec(tape.p_E).c_str(),
                tape.k_max + 1);
    std::printf("sum rate(p_E) = %.10g\n", sum_rate(ch, tape.p_E));

    // Each factor is checked against central differences of the forward map
    // with the tape's selected indices held fixed.
    const auto fixed_e = [&](const Vec& pd) { return Vec(ch.p_max / pd(tape.k_max) * pd); };
    const auto fixed_d_hat = [&](const Vec& ph) {
        if (tape.feasible_input)
            return ph;
        const auto row = cs.B.row(tape.k_eps);
        const double eps = (cs.q(tape.k_eps) - row.dot(ph)) / row.dot(tape.p_C - ph);
        return Vec(ph + eps * (tape.p_C - ph));
    };
    const auto fixed_d_c = [&](const Vec& pc) {
        if (tape.feasible_input)
            return tape.p_hat;
        const auto row = cs.B.row(tape.k_eps);
        const double eps = (cs.q(tape.k_eps) - row.dot(tape.p_hat)) / row.dot(pc - tape.p_hat);
        return Vec(tape.p_hat + eps * (pc - tape.p_hat));
    };
    const auto neg_rate = [&](const Vec& p) { return Vec::Constant(1, -sum_rate(ch, p)); };

    const Mat j_j = grad_neg_sum_rate(ch, tape.p_E).transpose();
    const Mat j_ed = jacobian_E_wrt_D(tape, ch.p_max);
    const Mat j_dp = jacobian_D_wrt_phat(tape, cs);
    const Mat j_dc = jacobian_D_wrt_C(tape, cs);
    const Mat j_cd = jacobian_C_wrt_d(cs);
    print_matrix("dJ/dp_E", j_j);
    print_matrix("dp_E/dp_D", j_ed);
    print_matrix("dp_D/dp_hat", j_dp);
    print_matrix("dp_D/dp_C", j_dc);
    print_matrix("dp_C/dd", j_cd);
    std::printf("finite-difference residuals (relative):\n");
    std::printf("  dJ/dp_E      %.3e\n", fd_residual(j_j, tape.p_E, neg_rate));
    std::printf("  dp_E/dp_D    %.3e\n", fd_residual(j_ed, tape.p_D, fixed_e));
    std::printf("  dp_D/dp_hat  %.3e\n", fd_residual(j_dp, tape.p_hat, fixed_d_hat));
    std::printf("  dp_D/dp_C    %.3e\n", fd_residual(j_dc, tape.p_C, fixed_d_c));
    std::printf("  dp_C/dd      %.3e\n", fd_residual(j_cd, tape.d, [&](const Vec& dd) { return cs.point_at(dd); }));
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Rate-constrained multicell power control with a learned projection block"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "Generate a feasibility-filtered channel dataset");
    g->add_option("--region", gen.region, "Cell-edge region rho_min,rho_max in dB")->default_val("0,3");
    g->add_option("--lambda", gen.lambda, "Fixed per-UE minimum rate (bit/s/Hz)");
    g->add_flag("--lambda-random", gen.lambda_random, "Per-UE minimum rate drawn from {0.1,...,1.0}");
    g->add_option("--count", gen.count, "Number of feasible samples")->required();
    g->add_option("--seed", gen.seed, "Random seed")->required();
    g->add_option("--out", gen.out, "Output dataset CSV")->required();
    g->add_option("--config", gen.config,
                  "Key-value file: cells, cell_radius, pmax_dbm, sigma2_dbm, shadowing_std_db, "
                  "min_distance_m, attempt_cap, yield_floor");
    g->add_option("--workers", gen.workers, "Worker threads (default: SRNET_WORKERS or 1)");

    TrainArgs tr;
    auto* t = app.add_subcommand("train", "Train a policy network");
    t->add_option("--data", tr.data, "Training dataset CSV")->required();
    t->add_option("--variant", tr.variant, "srnet | srnet-heu | penalty-add | penalty-mul")
        ->check(CLI::IsMember({"srnet", "srnet-heu", "penalty-add", "penalty-mul"}));
    t->add_option("--config", tr.config,
                  "Key-value file: preset (desk|full), iterations, batch_size, learning_rate, beta1, beta2, "
                  "adam_epsilon, seed, hidden, bn_momentum, lr_decay_every, lr_decay, penalty_weights, "
                  "validation_fraction, ensemble_size");
    t->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& s) { tr.seed = s; tr.seed_set = true; },
                                          "Training seed");
    t->add_option("--out", tr.out, "Checkpoint path")->required();
    t->add_option("--trace", tr.trace, "Loss trace CSV (default: <out>.trace.csv)");
    t->add_option("--penalty-weight", tr.penalty_weight, "Fixed penalty weight (skips the grid search)");
    t->add_option("--iterations", tr.iterations, "Override the iteration count");

    EvalArgs ev;
    auto* e = app.add_subcommand("eval", "Evaluate methods on test datasets");
    e->add_option("--test", ev.tests, "Test dataset CSV (repeatable)")->required();
    e->add_option("--method", ev.methods, "Checkpoint path, p0, local-opt[:starts] or ensemble:<paths>")->required();
    e->add_option("--out", ev.out, "JSON report path; per-sample CSV goes to <out>.samples.csv")->required();
    e->add_flag("--no-fallback", ev.no_fallback, "Report raw penalty-network outputs without p0 substitution");
    e->add_option("--seed", ev.seed, "Seed for randomised methods");

    BenchArgs be;
    auto* b = app.add_subcommand("bench", "Time per-instance inference of each method");
    b->add_option("--test", be.test, "Test dataset CSV")->required();
    b->add_option("--methods", be.methods, "Methods as for eval")->required();
    b->add_option("--repeats", be.repeats, "Passes over the test set")->default_val(1);
    b->add_option("--limit", be.limit, "Use only the first N instances");
    b->add_option("--out", be.out, "CSV output path");
    b->add_option("--seed", be.seed, "Seed for randomised methods");

    ProjectArgs pr;
    auto* p = app.add_subcommand("project", "Dump the projection block on one instance");
    p->add_option("--instance", pr.instance, "Inline instance 'g11,g12,...;gamma1,...'");
    p->add_option("--data", pr.data, "Dataset CSV to take the instance from");
    p->add_option("--index", pr.index, "Sample index within --data");
    p->add_option("--pmax", pr.p_max, "Power cap for inline instances (W)");
    p->add_option("--sigma2", pr.sigma2, "Noise power for inline instances");
    p->add_option("--phat", pr.phat, "Raw power p_hat (default p_max/2)");
    p->add_option("--d", pr.d, "Distances d (default d_max*/2)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int rc = app.exit(err);
        return rc == 0 ? 0 : kExitUsage;
    }

    try {
        if (*g)
            return run_generate(gen);
        if (*t)
            return run_train(tr);
        if (*e)
            return run_eval(ev);
        if (*b)
            return run_bench(be);
        if (*p)
            return run_project(pr);
    } catch (const UsageError& err) {
        std::fprintf(stderr, "usage error: %s\n", err.what());
        return kExitUsage;
    } catch (const Error& err) {
        std::fprintf(stderr, "error: %s\n", err.what());
        switch (err.code()) {
        case ErrorCode::Diverged: return kExitDiverged;
        case ErrorCode::Infeasible: return kExitInfeasible;
        case ErrorCode::InvalidArgument: return kExitUsage;
        default: return kExitRuntime;
        }
    } catch (const std::exception& err) {
        std::fprintf(stderr, "error: %s\n", err.what());
        return kExitRuntime;
    }
    return kExitUsage;
}
