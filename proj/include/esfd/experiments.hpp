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

// Monte Carlo sweeps. Each experiment is a pure function of its SweepPlan:
// per-trial seeds come from derive_seed(base_seed, n, sigma, lambda, trial),
// trials write into index-addressed slots, and every reduction over trials
// runs in trial order, so the records do not depend on the thread count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "esfd/errors.hpp"
#include "esfd/estimators.hpp"
#include "esfd/objectives.hpp"
#include "esfd/parallel.hpp"
#include "esfd/rng.hpp"
#include "esfd/sampling.hpp"
#include "esfd/specfun.hpp"
#include "esfd/summation.hpp"

namespace esfd {

namespace experiment_id {
inline constexpr const char* kNormConcentration = "norm-concentration";
inline constexpr const char* kDifferenceScaling = "difference-scaling";
inline constexpr const char* kDimensionConvergence = "dimension-convergence";
inline constexpr const char* kSphereShell = "sphere-shell";
inline constexpr const char* kPairedOptimization = "paired-optimization";
}  // namespace experiment_id

struct ThetaSpec {
    enum class Kind { Origin, Ball };
    Kind kind = Kind::Ball;
    double radius = 1.0;

    static ThetaSpec origin() { return {Kind::Origin, 0.0}; }
    static ThetaSpec ball(double r) { return {Kind::Ball, r}; }

    ParamVector make(std::size_t n, std::uint64_t seed) const {
        return kind == Kind::Origin ? ParamVector::zeros(n) : ParamVector::random_ball(n, radius, seed);
    }
};

struct SweepPlan {
    std::string experiment;
    std::vector<std::size_t> dims = {100};
    std::vector<double> sigmas = {1.0};
    std::vector<std::size_t> lambdas = {100};
    std::size_t trials = 100;
    std::uint64_t base_seed = 42;
    ObjectiveSpec objective;  // dim is overwritten at each grid point
    ThetaSpec theta;
    bool normalize_es = false;
    bool mirrored = false;
    std::size_t threads = 1;
    // paired-optimization only
    double step = 0.05;
    std::size_t iterations = 2000;
    std::size_t checkpoints = 10;
};

struct ExperimentRecord {
    std::string experiment;
    std::size_t n = 0;
    double sigma = 0.0;
    std::size_t lambda = 0;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, double>> metrics;

    double metric(const std::string& name) const {
        for (const auto& [k, v] : metrics) {
            if (k == name) return v;
        }
        throw UsageError("record has no metric '" + name + "'");
    }
};

/// Declared metric names, in output order. dimension-convergence adds
/// median_cosine_fd_true only for objectives with an analytic gradient.
inline std::vector<std::string> metric_schema(const std::string& experiment,
                                              bool has_gradient = true) {
    namespace id = experiment_id;
    if (experiment == id::kNormConcentration) {
        return {"emp_mean", "emp_var", "exact_mean", "exact_var", "asym_mean", "ratio_s_over_mu",
                "emp_ratio"};
    }
    if (experiment == id::kDifferenceScaling) {
        return {"r_theta", "mean_norm_D", "per_coord_var_D", "predicted_var", "predicted_norm",
                "fit_slope"};
    }
    if (experiment == id::kDimensionConvergence) {
        std::vector<std::string> s = {"median_rel_err_scaling", "median_cosine_es_fd"};
        if (has_gradient) s.emplace_back("median_cosine_fd_true");
        return s;
    }
    if (experiment == id::kSphereShell) {
        return {"emp_ratio_var", "exact_ratio_var",  "emp_ratio_var_se",     "max_abs_coord_mean",
                "coord_mean_se", "mean_abs_pairwise_cos"};
    }
    if (experiment == id::kPairedOptimization) {
        return {"iteration",        "normalize_es",     "f0",        "f_es",       "f_fd",
                "min_reduction_es", "min_reduction_fd", "traj_dist", "traj_scale", "traj_ratio",
                "failed_es",        "failed_fd"};
    }
    throw UsageError("unknown experiment '" + experiment + "'");
}

namespace detail {

inline void validate_plan(const SweepPlan& plan) {
    if (plan.dims.empty() || plan.sigmas.empty() || plan.lambdas.empty()) {
        throw UsageError("every grid needs at least one value");
    }
    for (auto n : plan.dims) {
        if (n == 0) throw UsageError("dimension grid values must be positive");
    }
    for (double s : plan.sigmas) {
        if (!(s > 0.0) || !std::isfinite(s)) throw UsageError("sigma grid values must be positive");
    }
    for (auto l : plan.lambdas) {
        if (l == 0) throw UsageError("lambda grid values must be positive");
    }
    if (plan.trials == 0) throw UsageError("trials must be >= 1");
    if (plan.theta.kind == ThetaSpec::Kind::Ball && !(plan.theta.radius > 0.0)) {
        throw UsageError("theta ball radius must be positive");
    }
}

inline ExperimentRecord make_record(const SweepPlan& plan, const char* id, std::size_t n,
                                    double sigma, std::size_t lambda) {
    ExperimentRecord r;
    r.experiment = id;
    r.n = n;
    r.sigma = sigma;
    r.lambda = lambda;
    r.trials = plan.trials;
    r.seed = plan.base_seed;
    return r;
}

inline Objective objective_at(const SweepPlan& plan, std::size_t n) {
    ObjectiveSpec spec = plan.objective;
    spec.dim = n;
    return make_objective(spec);
}

// Tags keep theta streams apart from perturbation streams.
inline constexpr std::uint64_t kThetaTag = 0x7468657461ULL;  // "theta"

inline std::uint64_t theta_seed(std::uint64_t base_seed, std::size_t n, std::uint64_t trial) {
    return base_seed ^ hash_words({kThetaTag, n, trial});
}

inline PerturbationBatch draw(const SweepPlan& plan, const ParamVector& theta, double sigma,
                              std::size_t lambda, std::uint64_t seed) {
    auto b = sample_batch(theta, sigma, lambda, seed);
    return plan.mirrored ? mirror_batch(b) : b;
}

inline double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

struct MeanVar {
    double mean = 0.0;
    double var = 0.0;  // unbiased; 0 for a single value
};

inline MeanVar mean_var(std::span<const double> v) {
    CompensatedSum s;
    for (double x : v) s.add(x);
    MeanVar mv;
    mv.mean = s.value() / static_cast<double>(v.size());
    if (v.size() > 1) {
        CompensatedSum d;
        for (double x : v) d.add((x - mv.mean) * (x - mv.mean));
        mv.var = d.value() / static_cast<double>(v.size() - 1);
    }
    return mv;
}

inline double cosine(std::span<const double> a, std::span<const double> b) {
    const double na = norm(a);
    const double nb = norm(b);
    if (na == 0.0 || nb == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return dot(a, b) / (na * nb);
}

/// Least-squares slope of log(y) against log(x); NaN if fewer than two
/// points or any y <= 0.
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
    const std::size_t m = x.size();
    if (m < 2) return std::numeric_limits<double>::quiet_NaN();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        if (!(y[i] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(m);
    my /= static_cast<double>(m);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace detail

/// Empirical vs exact moments of ||eps|| at each (n, sigma), from
/// trials * lambda draws.
inline std::vector<ExperimentRecord> norm_concentration_experiment(const SweepPlan& plan) {
    detail::validate_plan(plan);
    std::vector<ExperimentRecord> out;
    const std::size_t lambda = plan.lambdas.front();
    for (std::size_t n : plan.dims) {
        const auto theta = ParamVector::zeros(n);
        for (double sigma : plan.sigmas) {
            std::vector<double> norms(plan.trials * lambda);
            parallel_for(plan.trials, plan.threads, [&](std::size_t t) {
                const auto b = sample_batch(theta, sigma, lambda,
                                            derive_seed(plan.base_seed, n, sigma, lambda, t));
                for (std::size_t i = 0; i < lambda; ++i) norms[t * lambda + i] = norm(b.epsilon(i));
            });
            const auto mv = detail::mean_var(norms);
            const auto cs = chi_stats(n, sigma);
            auto r = detail::make_record(plan, experiment_id::kNormConcentration, n, sigma, lambda);
            r.metrics = {{"emp_mean", mv.mean},
                         {"emp_var", mv.var},
                         {"exact_mean", cs.mean},
                         {"exact_var", cs.variance},
                         {"asym_mean", cs.mean_asymptotic},
                         {"ratio_s_over_mu", std::sqrt(cs.variance) / cs.mean},
                         {"emp_ratio", std::sqrt(mv.var) / mv.mean}};
            out.push_back(std::move(r));
        }
    }
    return out;
}

/// Distribution of D = central_sum - ES over independent batches at a fixed
/// theta, for every lambda in the grid; fit_slope is the log-log slope of
/// mean ||D|| against lambda within each (n, sigma) group.
inline std::vector<ExperimentRecord> difference_scaling_experiment(const SweepPlan& plan) {
    detail::validate_plan(plan);
    std::vector<ExperimentRecord> out;
    for (std::size_t n : plan.dims) {
        const auto objective = detail::objective_at(plan, n);
        const auto theta = plan.theta.make(n, detail::theta_seed(plan.base_seed, n, 0));
        const double r_theta = objective(theta);
        if (r_theta == 0.0) {
            throw UsageError(
                "R(theta) = 0: the difference term vanishes identically; choose a theta or "
                "objective with R(theta) != 0");
        }
        for (double sigma : plan.sigmas) {
            const std::size_t first = out.size();
            std::vector<double> lambdas, mean_norms;
            for (std::size_t lambda : plan.lambdas) {
                std::vector<double> d(plan.trials * n);
                parallel_for(plan.trials, plan.threads, [&](std::size_t t) {
                    const auto b = detail::draw(plan, theta, sigma, lambda,
                                                derive_seed(plan.base_seed, n, sigma, lambda, t));
                    const auto diff = gradient_difference(b, objective);
                    std::copy(diff.begin(), diff.end(), d.begin() + static_cast<std::ptrdiff_t>(t * n));
                });
                std::vector<double> norms(plan.trials);
                for (std::size_t t = 0; t < plan.trials; ++t) {
                    norms[t] = norm(std::span<const double>(d).subspan(t * n, n));
                }
                CompensatedSum var_sum;
                std::vector<double> column(plan.trials);
                for (std::size_t j = 0; j < n; ++j) {
                    for (std::size_t t = 0; t < plan.trials; ++t) column[t] = d[t * n + j];
                    var_sum.add(detail::mean_var(column).var);
                }
                const double mean_norm = detail::mean_var(norms).mean;
                const double lam = static_cast<double>(lambda);
                auto r = detail::make_record(plan, experiment_id::kDifferenceScaling, n, sigma, lambda);
                r.metrics = {{"r_theta", r_theta},
                             {"mean_norm_D", mean_norm},
                             {"per_coord_var_D", var_sum.value() / static_cast<double>(n)},
                             {"predicted_var", r_theta * r_theta * sigma * sigma / lam},
                             {"predicted_norm",
                              std::abs(r_theta) * sigma * std::sqrt(static_cast<double>(n) / lam)},
                             {"fit_slope", 0.0}};
                out.push_back(std::move(r));
                lambdas.push_back(lam);
                mean_norms.push_back(mean_norm);
            }
            const double slope = detail::loglog_slope(lambdas, mean_norms);
            for (std::size_t k = first; k < out.size(); ++k) out[k].metrics.back().second = slope;
        }
    }
    return out;
}

/// Per-n medians over trials of how closely mu^2 FD matches the central sum,
/// and of the ES/FD direction agreement.
inline std::vector<ExperimentRecord> dimension_convergence_experiment(const SweepPlan& plan) {
    detail::validate_plan(plan);
    if (plan.objective.name == "constant") {
        throw UsageError("constant objective: central_sum is identically zero, relative error undefined");
    }
    std::vector<ExperimentRecord> out;
    for (std::size_t n : plan.dims) {
        const auto objective = detail::objective_at(plan, n);
        const bool has_grad = objective.has_gradient();
        for (double sigma : plan.sigmas) {
            for (std::size_t lambda : plan.lambdas) {
                std::vector<double> rel(plan.trials), cos_es_fd(plan.trials), cos_true(plan.trials);
                parallel_for(plan.trials, plan.threads, [&](std::size_t t) {
                    const auto theta = plan.theta.make(n, detail::theta_seed(plan.base_seed, n, t));
                    const auto b = detail::draw(plan, theta, sigma, lambda,
                                                derive_seed(plan.base_seed, n, sigma, lambda, t));
                    const auto s = estimate_all(b, objective);
                    const double cs_norm = norm(s.central.vector);
                    if (cs_norm == 0.0) {
                        throw UsageError("central_sum has zero norm at trial " + std::to_string(t));
                    }
                    std::vector<double> diff(n);
                    for (std::size_t j = 0; j < n; ++j) diff[j] = s.scaled_fd.vector[j] - s.central.vector[j];
                    rel[t] = norm(diff) / cs_norm;
                    cos_es_fd[t] = detail::cosine(s.es.vector, s.fd.vector);
                    if (has_grad) cos_true[t] = detail::cosine(s.fd.vector, objective.gradient(theta.values()));
                });
                auto r = detail::make_record(plan, experiment_id::kDimensionConvergence, n, sigma, lambda);
                r.metrics = {{"median_rel_err_scaling", detail::median(rel)},
                             {"median_cosine_es_fd", detail::median(cos_es_fd)}};
                if (has_grad) r.metrics.emplace_back("median_cosine_fd_true", detail::median(cos_true));
                out.push_back(std::move(r));
            }
        }
    }
    return out;
}

/// Shape of the perturbation cloud: spread of ||eps||/mu and isotropy of
/// eps/||eps||. Pairwise cosines use disjoint consecutive pairs (0,1), (2,3), ...
inline std::vector<ExperimentRecord> sphere_shell_experiment(const SweepPlan& plan) {
    detail::validate_plan(plan);
    std::vector<ExperimentRecord> out;
    const std::size_t lambda = plan.lambdas.front();
    for (std::size_t n : plan.dims) {
        const auto theta = ParamVector::zeros(n);
        for (double sigma : plan.sigmas) {
            const double mu = chi_mean(n, sigma);
            const std::size_t total = plan.trials * lambda;
            std::vector<double> ratios(total);
            std::vector<double> dir_sums(plan.trials * n);
            std::vector<double> pair_cos(plan.trials);
            std::vector<std::size_t> pair_count(plan.trials);
            parallel_for(plan.trials, plan.threads, [&](std::size_t t) {
                const auto b = sample_batch(theta, sigma, lambda,
                                            derive_seed(plan.base_seed, n, sigma, lambda, t));
                CompensatedVectorSum dirs(n);
                CompensatedSum cos_sum;
                std::size_t pairs = 0;
                for (std::size_t i = 0; i < lambda; ++i) {
                    const double len = norm(b.epsilon(i));
                    ratios[t * lambda + i] = len / mu;
                    dirs.add_scaled(b.epsilon(i), 1.0 / len);
                    if (i % 2 == 1) {
                        cos_sum.add(std::abs(detail::cosine(b.epsilon(i - 1), b.epsilon(i))));
                        ++pairs;
                    }
                }
                const auto v = dirs.values();
                std::copy(v.begin(), v.end(), dir_sums.begin() + static_cast<std::ptrdiff_t>(t * n));
                pair_cos[t] = cos_sum.value();
                pair_count[t] = pairs;
            });

            const auto mv = detail::mean_var(ratios);
            CompensatedSum m4;
            for (double x : ratios) {
                const double d = x - mv.mean;
                m4.add(d * d * d * d);
            }
            const double fourth = m4.value() / static_cast<double>(total);
            const double var_se =
                std::sqrt(std::max(0.0, fourth - mv.var * mv.var) / static_cast<double>(total));

            double max_coord = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                CompensatedSum s;
                for (std::size_t t = 0; t < plan.trials; ++t) s.add(dir_sums[t * n + j]);
                max_coord = std::max(max_coord, std::abs(s.value() / static_cast<double>(total)));
            }
            CompensatedSum cos_total;
            std::size_t pairs = 0;
            for (std::size_t t = 0; t < plan.trials; ++t) {
                cos_total.add(pair_cos[t]);
                pairs += pair_count[t];
            }
            const double s2 = chi_variance(n, sigma);
            auto r = detail::make_record(plan, experiment_id::kSphereShell, n, sigma, lambda);
            r.metrics = {{"emp_ratio_var", mv.var},
                         {"exact_ratio_var", s2 / (mu * mu)},
                         {"emp_ratio_var_se", var_se},
                         {"max_abs_coord_mean", max_coord},
                         {"coord_mean_se", 1.0 / std::sqrt(static_cast<double>(n * total))},
                         {"mean_abs_pairwise_cos",
                          pairs > 0 ? cos_total.value() / static_cast<double>(pairs)
                                    : std::numeric_limits<double>::quiet_NaN()}};
            out.push_back(std::move(r));
        }
    }
    return out;
}

/// One ES run and one FD run of fixed-step gradient descent sharing theta_0
/// and the per-iteration batch sequence.
struct PairedRun {
    double f0 = 0.0;
    std::vector<double> f_es, f_fd, traj_dist, traj_scale;  // per checkpoint
    std::optional<std::size_t> failed_es, failed_fd;        // iteration of first non-finite step
};

/// ES is paired with mu^2 FD, the form the two estimators share in the
/// limit. With normalize_es both updates are divided by sigma^2, which puts
/// them on the scale of the true gradient.
inline PairedRun run_paired_descent(const Objective& objective, const ParamVector& theta0,
                                    double sigma, std::size_t lambda, double step,
                                    std::size_t iterations, const std::vector<std::size_t>& checkpoints,
                                    std::uint64_t seed, bool normalize_es, bool mirrored) {
    const std::size_t n = theta0.size();
    const double mu = chi_mean(n, sigma);
    const double fd_scale = mu * mu / (normalize_es ? sigma * sigma : 1.0);
    std::vector<double> es(theta0.values().begin(), theta0.values().end());
    std::vector<double> fd = es;
    PairedRun run;
    run.f0 = objective(theta0);

    auto advance = [&](std::vector<double>& x, std::optional<std::size_t>& failed, std::size_t it,
                       bool is_es, std::uint64_t batch_seed) {
        if (failed) return;
        try {
            auto b = sample_batch(ParamVector(x), sigma, lambda, batch_seed);
            if (mirrored) b = mirror_batch(b);
            const auto ev = evaluate(b, objective);
            auto g = is_es ? es_gradient(b, ev, normalize_es).vector : fd_gradient(b, ev).vector;
            if (!is_es) {
                for (double& v : g) v *= fd_scale;
            }
            for (std::size_t j = 0; j < n; ++j) x[j] -= step * g[j];
            for (double v : x) {
                if (!std::isfinite(v)) throw EvaluationError("non-finite iterate", it);
            }
        } catch (const EvaluationError&) {
            failed = it;
        } catch (const UsageError&) {
            failed = it;  // ParamVector rejects a non-finite iterate
        }
    };

    std::size_t next_cp = 0;
    for (std::size_t it = 1; it <= iterations; ++it) {
        const std::uint64_t batch_seed = seed ^ hash_words({it});
        advance(es, run.failed_es, it, true, batch_seed);
        advance(fd, run.failed_fd, it, false, batch_seed);
        while (next_cp < checkpoints.size() && checkpoints[next_cp] == it) {
            constexpr double inf = std::numeric_limits<double>::infinity();
            const bool ok_es = !run.failed_es, ok_fd = !run.failed_fd;
            run.f_es.push_back(ok_es ? objective(es) : inf);
            run.f_fd.push_back(ok_fd ? objective(fd) : inf);
            if (ok_es && ok_fd) {
                std::vector<double> d(n), s(n);
                for (std::size_t j = 0; j < n; ++j) {
                    d[j] = es[j] - fd[j];
                    s[j] = es[j] - theta0[j];
                }
                run.traj_dist.push_back(norm(d));
                run.traj_scale.push_back(norm(s));
            } else {
                run.traj_dist.push_back(inf);
                run.traj_scale.push_back(inf);
            }
            ++next_cp;
        }
    }
    return run;
}

/// Paired ES/FD descent per grid point over `trials` seeds; one record per
/// checkpoint with medians across seeds. Failed runs contribute +inf.
inline std::vector<ExperimentRecord> paired_optimization_experiment(const SweepPlan& plan) {
    detail::validate_plan(plan);
    if (!(plan.step > 0.0)) throw UsageError("step must be positive");
    if (plan.iterations == 0) throw UsageError("iterations must be >= 1");
    std::vector<std::size_t> checkpoints;
    const std::size_t k = std::clamp<std::size_t>(plan.checkpoints, 1, plan.iterations);
    for (std::size_t c = 1; c <= k; ++c) checkpoints.push_back(plan.iterations * c / k);
    checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());

    std::vector<ExperimentRecord> out;
    for (std::size_t n : plan.dims) {
        const auto objective = detail::objective_at(plan, n);
        for (double sigma : plan.sigmas) {
            for (std::size_t lambda : plan.lambdas) {
                std::vector<PairedRun> runs(plan.trials);
                parallel_for(plan.trials, plan.threads, [&](std::size_t t) {
                    const auto theta0 = plan.theta.make(n, detail::theta_seed(plan.base_seed, n, t));
                    runs[t] = run_paired_descent(objective, theta0, sigma, lambda, plan.step,
                                                 plan.iterations, checkpoints,
                                                 derive_seed(plan.base_seed, n, sigma, lambda, t),
                                                 plan.normalize_es, plan.mirrored);
                });
                double failed_es = 0.0, failed_fd = 0.0;
                for (const auto& r : runs) {
                    failed_es += r.failed_es ? 1.0 : 0.0;
                    failed_fd += r.failed_fd ? 1.0 : 0.0;
                }
                std::vector<double> f0(plan.trials);
                for (std::size_t t = 0; t < plan.trials; ++t) f0[t] = runs[t].f0;
                for (std::size_t c = 0; c < checkpoints.size(); ++c) {
                    std::vector<double> fe(plan.trials), ff(plan.trials), td(plan.trials),
                        ts(plan.trials), tr(plan.trials);
                    double min_red_es = std::numeric_limits<double>::infinity();
                    double min_red_fd = min_red_es;
                    for (std::size_t t = 0; t < plan.trials; ++t) {
                        const auto& r = runs[t];
                        fe[t] = r.f_es[c];
                        ff[t] = r.f_fd[c];
                        td[t] = r.traj_dist[c];
                        ts[t] = r.traj_scale[c];
                        tr[t] = std::isfinite(td[t]) && ts[t] > 0.0
                                    ? td[t] / ts[t]
                                    : std::numeric_limits<double>::infinity();
                        min_red_es = std::min(min_red_es, r.f0 / fe[t]);
                        min_red_fd = std::min(min_red_fd, r.f0 / ff[t]);
                    }
                    auto rec = detail::make_record(plan, experiment_id::kPairedOptimization, n,
                                                   sigma, lambda);
                    rec.metrics = {{"iteration", static_cast<double>(checkpoints[c])},
                                   {"normalize_es", plan.normalize_es ? 1.0 : 0.0},
                                   {"f0", detail::median(f0)},
                                   {"f_es", detail::median(fe)},
                                   {"f_fd", detail::median(ff)},
                                   {"min_reduction_es", min_red_es},
                                   {"min_reduction_fd", min_red_fd},
                                   {"traj_dist", detail::median(td)},
                                   {"traj_scale", detail::median(ts)},
                                   {"traj_ratio", detail::median(tr)},
                                   {"failed_es", failed_es},
                                   {"failed_fd", failed_fd}};
                    out.push_back(std::move(rec));
                }
            }
        }
    }
    return out;
}

/// Dispatch on plan.experiment.
inline std::vector<ExperimentRecord> run_experiment(const SweepPlan& plan) {
    namespace id = experiment_id;
    if (plan.experiment == id::kNormConcentration) return norm_concentration_experiment(plan);
    if (plan.experiment == id::kDifferenceScaling) return difference_scaling_experiment(plan);
    if (plan.experiment == id::kDimensionConvergence) return dimension_convergence_experiment(plan);
    if (plan.experiment == id::kSphereShell) return sphere_shell_experiment(plan);
    if (plan.experiment == id::kPairedOptimization) return paired_optimization_experiment(plan);
    throw UsageError("unknown experiment '" + plan.experiment + "'");
}

}  // namespace esfd
