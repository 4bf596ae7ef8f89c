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

// The four gradient expressions built from one perturbation batch:
//
//   FD          (1/lambda) sum eps_i (R(theta+eps_i) - R(theta)) / ||eps_i||^2
//   ES          (1/lambda) sum eps_i R(theta+eps_i)
//   scaled FD   mu^2 * FD, mu = E||N(0, sigma^2 I)||
//   central sum (1/lambda) sum eps_i (R(theta+eps_i) - R(theta))
//
// and the exact difference central_sum - ES = -R(theta) (1/lambda) sum eps_i.
//
// The ES estimate carries no 1/sigma^2 factor unless normalize_es is set.
// All sums run in ascending sample order with compensated summation, so a
// fixed batch gives bit-identical output regardless of how the objective
// evaluations were scheduled.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "esfd/errors.hpp"
#include "esfd/objectives.hpp"
#include "esfd/parallel.hpp"
#include "esfd/sampling.hpp"
#include "esfd/specfun.hpp"
#include "esfd/summation.hpp"

namespace esfd {

enum class EstimatorKind { FD, ES, ScaledFD, CentralSum };

constexpr std::string_view to_string(EstimatorKind k) noexcept {
    switch (k) {
        case EstimatorKind::FD: return "FD";
        case EstimatorKind::ES: return "ES";
        case EstimatorKind::ScaledFD: return "SCALED_FD";
        case EstimatorKind::CentralSum: return "CENTRAL_SUM";
    }
    return "?";
}

struct GradientEstimate {
    std::vector<double> vector;
    EstimatorKind kind = EstimatorKind::FD;
    std::size_t lambda = 0;
    double sigma = 0.0;
    std::uint64_t seed = 0;
    std::optional<double> r_theta;  // absent for ES, which never reads R(theta)
    bool normalized = false;        // ES only: 1/sigma^2 applied
};

struct EstimatorOptions {
    bool normalize_es = false;
    std::size_t threads = 1;
};

/// R(theta) and R(theta + eps_i) for one batch, evaluated once and shared by
/// every estimator.
struct Evaluations {
    double r_theta = 0.0;
    std::vector<double> r_alpha;
};

/// Evaluates the objective at theta and at every alpha_i. Evaluations of
/// distinct samples may run concurrently.
inline Evaluations evaluate(const PerturbationBatch& batch, const Objective& objective,
                            std::size_t threads = 1) {
    if (objective.dim() != batch.dim()) {
        throw UsageError("objective dimension " + std::to_string(objective.dim()) +
                         " does not match batch dimension " + std::to_string(batch.dim()));
    }
    Evaluations ev;
    ev.r_theta = objective(batch.theta());
    if (!std::isfinite(ev.r_theta)) {
        throw EvaluationError("objective returned a non-finite value at theta", EvaluationError::npos);
    }
    ev.r_alpha.resize(batch.lambda());
    parallel_for(batch.lambda(), threads, [&](std::size_t i) {
        const double r = objective(batch.alpha(i));
        if (!std::isfinite(r)) {
            throw EvaluationError(
                "objective returned a non-finite value at sample " + std::to_string(i), i);
        }
        ev.r_alpha[i] = r;
    });
    return ev;
}

namespace detail {

inline void check_evaluations(const PerturbationBatch& batch, const Evaluations& ev) {
    if (ev.r_alpha.size() != batch.lambda()) {
        throw UsageError("evaluation count does not match batch size");
    }
}

/// Weight carried as an unevaluated sum hi + lo.
struct SplitWeight {
    double hi = 0.0;
    double lo = 0.0;
};

/// R(theta + eps_i) - R(theta) without rounding.
inline SplitWeight exact_difference(double r_alpha, double r_theta) noexcept {
    SplitWeight w;
    two_sum(r_alpha, -r_theta, w.hi, w.lo);
    return w;
}

/// (1/lambda) * sum_i weight(i) * eps_i, with the weight either a double or
/// a SplitWeight.
template <class Weight>
std::vector<double> weighted_mean(const PerturbationBatch& batch, Weight&& weight) {
    CompensatedVectorSum acc(batch.dim());
    for (std::size_t i = 0; i < batch.lambda(); ++i) {
        const auto w = weight(i);
        if constexpr (std::is_same_v<std::decay_t<decltype(w)>, SplitWeight>) {
            acc.add_scaled(batch.epsilon(i), w.hi, w.lo);
        } else {
            acc.add_scaled(batch.epsilon(i), w);
        }
    }
    auto v = acc.values();
    const double count = static_cast<double>(batch.lambda());
    for (double& x : v) x /= count;
    return v;
}

inline GradientEstimate make_estimate(const PerturbationBatch& batch, EstimatorKind kind,
                                      std::vector<double> v, std::optional<double> r_theta) {
    GradientEstimate g;
    g.vector = std::move(v);
    g.kind = kind;
    g.lambda = batch.lambda();
    g.sigma = batch.sigma();
    g.seed = batch.seed();
    g.r_theta = r_theta;
    return g;
}

}  // namespace detail

inline GradientEstimate fd_gradient(const PerturbationBatch& batch, const Evaluations& ev) {
    detail::check_evaluations(batch, ev);
    auto v = detail::weighted_mean(batch, [&](std::size_t i) {
        const auto d = detail::exact_difference(ev.r_alpha[i], ev.r_theta);
        const double sq = squared_norm(batch.epsilon(i));
        return detail::SplitWeight{d.hi / sq, d.lo / sq};
    });
    return detail::make_estimate(batch, EstimatorKind::FD, std::move(v), ev.r_theta);
}

inline GradientEstimate es_gradient(const PerturbationBatch& batch, const Evaluations& ev,
                                    bool normalize_es = false) {
    detail::check_evaluations(batch, ev);
    auto v = detail::weighted_mean(batch, [&](std::size_t i) { return ev.r_alpha[i]; });
    if (normalize_es) {
        const double inv_var = 1.0 / (batch.sigma() * batch.sigma());
        for (double& x : v) x *= inv_var;
    }
    auto g = detail::make_estimate(batch, EstimatorKind::ES, std::move(v), std::nullopt);
    g.normalized = normalize_es;
    return g;
}

inline GradientEstimate central_sum(const PerturbationBatch& batch, const Evaluations& ev) {
    detail::check_evaluations(batch, ev);
    auto v = detail::weighted_mean(batch,
                                   [&](std::size_t i) { return detail::exact_difference(ev.r_alpha[i], ev.r_theta); });
    return detail::make_estimate(batch, EstimatorKind::CentralSum, std::move(v), ev.r_theta);
}

inline GradientEstimate scaled_fd_gradient(const PerturbationBatch& batch, const Evaluations& ev) {
    auto g = fd_gradient(batch, ev);
    const double mu = chi_mean(batch.dim(), batch.sigma());
    const double mu2 = mu * mu;
    for (double& x : g.vector) x *= mu2;
    g.kind = EstimatorKind::ScaledFD;
    return g;
}

inline GradientEstimate fd_gradient(const PerturbationBatch& batch, const Objective& objective,
                                    const EstimatorOptions& opt = {}) {
    return fd_gradient(batch, evaluate(batch, objective, opt.threads));
}

inline GradientEstimate es_gradient(const PerturbationBatch& batch, const Objective& objective,
                                    const EstimatorOptions& opt = {}) {
    return es_gradient(batch, evaluate(batch, objective, opt.threads), opt.normalize_es);
}

inline GradientEstimate central_sum(const PerturbationBatch& batch, const Objective& objective,
                                    const EstimatorOptions& opt = {}) {
    return central_sum(batch, evaluate(batch, objective, opt.threads));
}

inline GradientEstimate scaled_fd_gradient(const PerturbationBatch& batch,
                                           const Objective& objective,
                                           const EstimatorOptions& opt = {}) {
    return scaled_fd_gradient(batch, evaluate(batch, objective, opt.threads));
}

/// All four estimates from a single round of objective evaluations.
struct EstimateSet {
    Evaluations evaluations;
    GradientEstimate fd;
    GradientEstimate es;
    GradientEstimate scaled_fd;
    GradientEstimate central;
};

inline EstimateSet estimate_all(const PerturbationBatch& batch, const Objective& objective,
                                const EstimatorOptions& opt = {}) {
    EstimateSet s;
    s.evaluations = evaluate(batch, objective, opt.threads);
    s.fd = fd_gradient(batch, s.evaluations);
    s.es = es_gradient(batch, s.evaluations, opt.normalize_es);
    s.scaled_fd = scaled_fd_gradient(batch, s.evaluations);
    s.central = central_sum(batch, s.evaluations);
    return s;
}

inline constexpr double kDifferenceRelTol = 1e-10;
inline constexpr double kDifferenceAbsTol = 1e-14;

/// D = central_sum - ES (unnormalized), returned in the closed form
/// -R(theta) (1/lambda) sum eps_i after checking it against the direct
/// subtraction of the two estimates.
///
/// Agreement is required per coordinate to kDifferenceRelTol relative to the
/// magnitude of the summed terms, (1/lambda) sum_i |eps_ij| (|R(alpha_i)| +
/// |R(theta)|), which bounds the rounding of the subtraction route. When
/// R(theta) = 0 the closed form is exactly zero and the subtraction must be
/// within kDifferenceAbsTol of it.
inline std::vector<double> gradient_difference(const PerturbationBatch& batch,
                                               const Evaluations& ev) {
    detail::check_evaluations(batch, ev);
    const auto cs = central_sum(batch, ev).vector;
    const auto es = es_gradient(batch, ev, false).vector;

    auto closed = batch.epsilon_sum();
    const double factor = -ev.r_theta / static_cast<double>(batch.lambda());
    for (double& x : closed) x *= factor;

    std::vector<double> scale(batch.dim(), 0.0);
    if (ev.r_theta != 0.0) {
        const double inv = 1.0 / static_cast<double>(batch.lambda());
        for (std::size_t i = 0; i < batch.lambda(); ++i) {
            const auto e = batch.epsilon(i);
            const double w = (std::abs(ev.r_alpha[i]) + std::abs(ev.r_theta)) * inv;
            for (std::size_t j = 0; j < scale.size(); ++j) scale[j] += std::abs(e[j]) * w;
        }
    }
    for (std::size_t j = 0; j < closed.size(); ++j) {
        const double err = std::abs((cs[j] - es[j]) - closed[j]);
        const double tol = ev.r_theta == 0.0
                               ? kDifferenceAbsTol
                               : kDifferenceRelTol * std::max(std::abs(closed[j]), scale[j]);
        if (!(err <= tol)) {
            throw NumericalConsistencyError(
                "central_sum - es_gradient disagrees with -R(theta) mean(eps) at coordinate " +
                std::to_string(j) + ": error " + std::to_string(err) + " > " + std::to_string(tol));
        }
    }
    return closed;
}

inline std::vector<double> gradient_difference(const PerturbationBatch& batch,
                                               const Objective& objective, std::size_t threads = 1) {
    return gradient_difference(batch, evaluate(batch, objective, threads));
}

}  // namespace esfd
