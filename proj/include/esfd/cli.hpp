// Copyright (c) 2026 The esfd Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Front end for the esfd tool: argument parsing into a validated CliConfig,
// and dispatch to the experiments with CSV output.
//
//   esfd <command> [--dim N | --dim-grid a,b,c] [--sigma X | --sigma-grid ...]
//        [--lambda N | --lambda-grid ...] [--trials N] [--seed S]
//        [--objective NAME] [--param KEY=VALUE]... [--theta origin|ball:R]
//        [--normalize-es] [--mirrored] [--threads N] [--out PATH]
//
// Exit codes: 0 success, 2 usage/validation, 3 I/O, 4 selftest failure.

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "CLI11.hpp"
#include "esfd/csv.hpp"
#include "esfd/estimators.hpp"
#include "esfd/experiments.hpp"
#include "esfd/objectives.hpp"
#include "esfd/sampling.hpp"
#include "esfd/specfun.hpp"

namespace esfd::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitSelftest = 4;

inline const std::vector<std::string>& commands() {
    static const std::vector<std::string> c = {"norm-stats", "gamma-check", "grad-diff", "converge-dim",
                                               "shell",      "optimize",    "selftest"};
    return c;
}

struct CliConfig {
    std::string command;
    SweepPlan plan;
    std::string output;  // empty: stdout
    std::string format = "csv";
    std::string help_text;  // set when --help was requested; nothing else is valid then
};

namespace detail {

inline UsageError flag_error(const std::string& flag, const std::string& what) {
    return UsageError(flag + ": " + what);
}

inline double parse_positive_double(const std::string& flag, const std::string& text) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) throw flag_error(flag, "'" + text + "' is not a number");
    if (!(v > 0.0) || !std::isfinite(v)) throw flag_error(flag, "must be positive, got " + text);
    return v;
}

inline std::uint64_t parse_u64(const std::string& flag, const std::string& text) {
    std::uint64_t v = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) {
        throw flag_error(flag, "'" + text + "' is not a non-negative integer");
    }
    return v;
}

inline std::size_t parse_positive_size(const std::string& flag, const std::string& text) {
    const auto v = parse_u64(flag, text);
    if (v == 0) throw flag_error(flag, "must be positive, got " + text);
    return static_cast<std::size_t>(v);
}

inline std::vector<std::string> split_commas(const std::string& flag, const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) parts.push_back(item);
    if (parts.empty() || (!text.empty() && text.back() == ',')) {
        throw flag_error(flag, "expected a comma-separated list, got '" + text + "'");
    }
    return parts;
}

inline ThetaSpec parse_theta(const std::string& text) {
    if (text == "origin") return ThetaSpec::origin();
    if (text.rfind("ball:", 0) == 0) return ThetaSpec::ball(parse_positive_double("--theta", text.substr(5)));
    throw flag_error("--theta", "expected 'origin' or 'ball:R', got '" + text + "'");
}

struct RawFlags {
    std::optional<std::string> dim, dim_grid, sigma, sigma_grid, lambda, lambda_grid;
    std::optional<std::string> trials, seed, threads, step, iterations, checkpoints;
    std::string objective = "sphere";
    std::string theta = "ball:1";
    std::vector<std::string> params;
    bool normalize_es = false;
    bool mirrored = false;
    std::string out;
    std::string format = "csv";
};

inline void add_flags(CLI::App& sub, RawFlags& f) {
    auto* dim = sub.add_option("--dim", f.dim, "dimension n");
    auto* dim_grid = sub.add_option("--dim-grid", f.dim_grid, "comma-separated dimensions");
    dim->excludes(dim_grid);
    auto* sigma = sub.add_option("--sigma", f.sigma, "perturbation scale (default 1.0)");
    auto* sigma_grid = sub.add_option("--sigma-grid", f.sigma_grid, "comma-separated sigmas");
    sigma->excludes(sigma_grid);
    auto* lambda = sub.add_option("--lambda", f.lambda, "population size (default 100)");
    auto* lambda_grid = sub.add_option("--lambda-grid", f.lambda_grid, "comma-separated lambdas");
    lambda->excludes(lambda_grid);
    sub.add_option("--trials", f.trials, "independent trials per grid point (default 100)");
    sub.add_option("--seed", f.seed, "base seed (default 42)");
    sub.add_option("--objective", f.objective, "constant|linear|sphere|quadratic|rosenbrock");
    sub.add_option("--param", f.params, "objective parameter KEY=VALUE (repeatable)");
    sub.add_option("--theta", f.theta, "origin or ball:R (default ball:1)");
    sub.add_flag("--normalize-es", f.normalize_es, "apply 1/sigma^2 to the ES estimate");
    sub.add_flag("--mirrored", f.mirrored, "use mirrored (antithetic) batches");
    sub.add_option("--threads", f.threads, "worker threads (default: hardware concurrency)");
    sub.add_option("--step", f.step, "optimize: step size (default 0.05)");
    sub.add_option("--iterations", f.iterations, "optimize: iterations (default 2000)");
    sub.add_option("--checkpoints", f.checkpoints, "optimize: recorded checkpoints (default 10)");
    sub.add_option("--out", f.out, "output path (default stdout)");
    sub.add_option("--format", f.format, "output format (csv)");
}

template <class T, class Parse>
std::vector<T> grid(const std::optional<std::string>& single, const std::optional<std::string>& many,
                    const std::string& single_flag, const std::string& grid_flag, T fallback,
                    Parse parse) {
    if (single) return {parse(single_flag, *single)};
    if (many) {
        std::vector<T> out;
        for (const auto& p : split_commas(grid_flag, *many)) out.push_back(parse(grid_flag, p));
        return out;
    }
    return {fallback};
}

}  // namespace detail

/// Parses argv (without the program name). Throws UsageError naming the
/// offending flag; every value is validated before anything runs.
inline CliConfig parse_args(const std::vector<std::string>& argv) {
    CLI::App app{"Evolution Strategies vs Finite Differences gradient experiments", "esfd"};
    app.require_subcommand(1, 1);
    app.set_help_all_flag("--help-all");
    detail::RawFlags flags;
    const std::vector<std::pair<std::string, std::string>> descriptions = {
        {"norm-stats", "empirical vs exact moments of ||N(0, sigma^2 I)||"},
        {"gamma-check", "exact and asymptotic Gamma ratios and chi moments"},
        {"grad-diff", "distribution of central_sum - ES across lambda"},
        {"converge-dim", "agreement of mu^2 FD with the central sum across n"},
        {"shell", "sphere-shell geometry of Gaussian perturbations"},
        {"optimize", "paired ES/FD gradient descent on one batch sequence"},
        {"selftest", "closed-form and exact-identity checks"},
    };
    for (const auto& [name, desc] : descriptions) detail::add_flags(*app.add_subcommand(name, desc), flags);

    std::vector<std::string> reversed(argv.rbegin(), argv.rend());
    CliConfig cfg;
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        cfg.help_text = app.help();
        return cfg;
    } catch (const CLI::CallForAllHelp&) {
        cfg.help_text = app.help("", CLI::AppFormatMode::All);
        return cfg;
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }
    cfg.command = app.get_subcommands().front()->get_name();
    if (!app.get_subcommands().front()->get_subcommands().empty()) {
        throw UsageError("unexpected nested command");
    }

    using namespace detail;
    SweepPlan& plan = cfg.plan;
    plan.dims = grid<std::size_t>(flags.dim, flags.dim_grid, "--dim", "--dim-grid", 100, parse_positive_size);
    plan.sigmas = grid<double>(flags.sigma, flags.sigma_grid, "--sigma", "--sigma-grid", 1.0,
                               parse_positive_double);
    plan.lambdas = grid<std::size_t>(flags.lambda, flags.lambda_grid, "--lambda", "--lambda-grid", 100,
                                     parse_positive_size);
    plan.trials = flags.trials ? parse_positive_size("--trials", *flags.trials) : 100;
    plan.base_seed = flags.seed ? parse_u64("--seed", *flags.seed) : 42;
    plan.threads = flags.threads ? parse_positive_size("--threads", *flags.threads) : default_thread_count();
    if (flags.step) plan.step = parse_positive_double("--step", *flags.step);
    if (flags.iterations) plan.iterations = parse_positive_size("--iterations", *flags.iterations);
    if (flags.checkpoints) plan.checkpoints = parse_positive_size("--checkpoints", *flags.checkpoints);
    plan.theta = parse_theta(flags.theta);
    plan.normalize_es = flags.normalize_es;
    plan.mirrored = flags.mirrored;

    plan.objective.name = flags.objective;
    const auto& names = objective_names();
    if (std::find(names.begin(), names.end(), flags.objective) == names.end()) {
        throw flag_error("--objective", "unknown objective '" + flags.objective + "'");
    }
    for (const auto& kv : flags.params) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw flag_error("--param", "expected KEY=VALUE, got '" + kv + "'");
        const std::string value = kv.substr(eq + 1);
        double v = 0.0;
        const auto* end = value.data() + value.size();
        const auto [ptr, ec] = std::from_chars(value.data(), end, v);
        if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
            throw flag_error("--param", "'" + value + "' is not a finite number");
        }
        plan.objective.parameters[kv.substr(0, eq)] = v;
    }
    // Surface bad objective parameters now rather than mid-sweep.
    {
        ObjectiveSpec probe = plan.objective;
        probe.dim = std::max<std::size_t>(2, plan.dims.front());
        try {
            (void)make_objective(probe);
        } catch (const UsageError& e) {
            throw flag_error("--param", e.what());
        }
    }

    if (flags.format != "csv") throw flag_error("--format", "only 'csv' is supported");
    cfg.format = flags.format;
    cfg.output = flags.out;

    if (cfg.command == "norm-stats") plan.experiment = experiment_id::kNormConcentration;
    if (cfg.command == "grad-diff") plan.experiment = experiment_id::kDifferenceScaling;
    if (cfg.command == "converge-dim") plan.experiment = experiment_id::kDimensionConvergence;
    if (cfg.command == "shell") plan.experiment = experiment_id::kSphereShell;
    if (cfg.command == "optimize") {
        plan.experiment = experiment_id::kPairedOptimization;
        plan.normalize_es = true;
    }
    return cfg;
}

/// Exact vs first-order asymptotic Gamma ratio and the chi moments at each
/// (n, sigma).
inline std::vector<ExperimentRecord> gamma_check_records(const SweepPlan& plan) {
    std::vector<ExperimentRecord> out;
    for (std::size_t n : plan.dims) {
        const double z = static_cast<double>(n) / 2.0;
        const double exact = gamma_ratio_exact(z + 0.5, z);
        double asym = std::numeric_limits<double>::quiet_NaN();
        try {
            asym = gamma_ratio_asymptotic(z, 0.5, 0.0);
        } catch (const DomainError&) {
        }
        for (double sigma : plan.sigmas) {
            const auto cs = chi_stats(n, sigma);
            ExperimentRecord r;
            r.experiment = "gamma-check";
            r.n = n;
            r.sigma = sigma;
            r.lambda = 0;
            r.trials = 0;
            r.seed = plan.base_seed;
            r.metrics = {{"gamma_ratio_exact", exact},
                         {"gamma_ratio_asymptotic", asym},
                         {"asymptotic_rel_err", std::abs(asym - exact) / exact},
                         {"chi_mean", cs.mean},
                         {"chi_variance", cs.variance},
                         {"mean_asymptotic", cs.mean_asymptotic},
                         {"variance_limit", cs.variance_limit},
                         {"ratio_s_over_mu", std::sqrt(cs.variance) / cs.mean}};
            out.push_back(std::move(r));
        }
    }
    return out;
}

struct SelftestCheck {
    std::string name;
    double error;
    double tolerance;
    bool passed() const { return error <= tolerance; }
};

/// Closed-form special-function values and exact estimator identities.
inline std::vector<SelftestCheck> selftest_checks() {
    std::vector<SelftestCheck> checks;
    auto rel = [](double got, double want) { return std::abs(got - want) / std::abs(want); };
    const double pi = std::numbers::pi;
    checks.push_back({"chi_mean_n1", rel(chi_mean(1, 1.0), std::sqrt(2.0 / pi)), 1e-12});
    checks.push_back({"chi_variance_n1", rel(chi_variance(1, 1.0), 1.0 - 2.0 / pi), 1e-12});
    checks.push_back({"chi_mean_n2", rel(chi_mean(2, 1.0), std::sqrt(pi / 2.0)), 1e-12});
    checks.push_back({"gamma_ratio_recurrence", rel(gamma_ratio_exact(8.0, 7.0), 7.0), 1e-12});
    checks.push_back({"gamma_ratio_half", rel(gamma_ratio_exact(1.0, 0.5), 1.0 / std::sqrt(pi)), 1e-12});
    checks.push_back({"gamma_ratio_asymptotic_trivial", rel(gamma_ratio_asymptotic(50.0, 1.0, 0.0), 50.0), 0.0});
    checks.push_back({"chi_variance_limit_1e6", std::abs(chi_variance(1000000, 1.0) - 0.5), 1e-5});

    const std::size_t n = 20;
    const auto theta = ParamVector::random_ball(n, 1.0, 11);
    const auto batch = sample_batch(theta, 0.5, 64, 12);
    ObjectiveSpec spec{"linear", n, {{"offset", 3.0}, {"seed", 5.0}}};
    const auto linear = make_objective(spec);
    const auto set = estimate_all(batch, linear);
    {
        const auto closed = gradient_difference(batch, set.evaluations);
        double worst = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double sub = set.central.vector[j] - set.es.vector[j];
            worst = std::max(worst, std::abs(sub - closed[j]) / std::abs(closed[j]));
        }
        checks.push_back({"difference_identity", worst, 1e-10});
    }
    {
        const double mu = chi_mean(n, 0.5);
        double worst = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            worst = std::max(worst, rel(set.scaled_fd.vector[j], mu * mu * set.fd.vector[j]));
        }
        checks.push_back({"scaled_fd_definition", worst, 1e-12});
    }
    {
        const auto constant = make_objective({"constant", n, {{"value", 7.0}}});
        const auto mirrored = mirror_batch(batch);
        double worst = 0.0;
        for (double v : es_gradient(mirrored, constant).vector) worst = std::max(worst, std::abs(v));
        for (double v : fd_gradient(batch, constant).vector) worst = std::max(worst, std::abs(v));
        for (double v : gradient_difference(mirrored, constant)) worst = std::max(worst, std::abs(v));
        checks.push_back({"constant_objective_exact_zero", worst, 0.0});
    }
    return checks;
}

/// Runs a validated config. Never throws; maps failures onto exit codes.
inline int run(const CliConfig& cfg, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    if (!cfg.help_text.empty()) {
        out << cfg.help_text;
        return kExitOk;
    }
    std::vector<ExperimentRecord> records;
    int status = kExitOk;
    try {
        if (cfg.command == "gamma-check") {
            records = gamma_check_records(cfg.plan);
        } else if (cfg.command == "selftest") {
            for (const auto& c : selftest_checks()) {
                ExperimentRecord r;
                r.experiment = "selftest";
                r.seed = cfg.plan.base_seed;
                r.metrics = {{c.name, c.error}};
                records.push_back(std::move(r));
                if (!c.passed()) {
                    err << "esfd: selftest " << c.name << " FAILED: error " << c.error << " > "
                        << c.tolerance << '\n';
                    status = kExitSelftest;
                }
            }
        } else {
            records = run_experiment(cfg.plan);
        }
    } catch (const UsageError& e) {
        err << "esfd: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DomainError& e) {
        err << "esfd: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "esfd: " << e.what() << '\n';
        return cfg.command == "selftest" ? kExitSelftest : 1;
    }

    if (cfg.output.empty()) {
        write_csv(out, records);
        out.flush();
        if (!out) {
            err << "esfd: failed writing to standard output\n";
            return kExitIo;
        }
    } else {
        std::ofstream file(cfg.output, std::ios::binary | std::ios::trunc);
        if (!file) {
            err << "esfd: cannot open '" << cfg.output << "' for writing\n";
            return kExitIo;
        }
        write_csv(file, records);
        file.close();
        if (!file) {
            err << "esfd: failed writing '" << cfg.output << "'\n";
            return kExitIo;
        }
    }
    return status;
}

/// parse_args + run with the same exit-code mapping, for main().
inline int main_entry(const std::vector<std::string>& argv, std::ostream& out = std::cout,
                      std::ostream& err = std::cerr) {
    CliConfig cfg;
    try {
        cfg = parse_args(argv);
    } catch (const UsageError& e) {
        err << "esfd: " << e.what() << "\nRun 'esfd --help' for usage.\n";
        return kExitUsage;
    }
    return run(cfg, out, err);
}

}  // namespace esfd::cli
