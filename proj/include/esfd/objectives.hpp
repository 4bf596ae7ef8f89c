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

// Benchmark objectives R: R^n -> R with analytic gradients.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "esfd/errors.hpp"
#include "esfd/rng.hpp"
#include "esfd/sampling.hpp"

namespace esfd {

/// A deterministic, pure objective. Stochastic objectives are not supported:
/// the estimator identities rely on R(alpha) being shared exactly.
class Objective {
public:
    using Eval = std::function<double(std::span<const double>)>;
    using Grad = std::function<std::vector<double>(std::span<const double>)>;

    Objective(std::string name, std::size_t dim, Eval evaluate, std::optional<Grad> gradient = {})
        : name_(std::move(name)), dim_(dim), eval_(std::move(evaluate)), grad_(std::move(gradient)) {
        if (dim_ == 0) throw UsageError("objective dimension must be >= 1");
    }

    const std::string& name() const noexcept { return name_; }
    std::size_t dim() const noexcept { return dim_; }
    bool has_gradient() const noexcept { return grad_.has_value(); }

    double operator()(std::span<const double> x) const { return eval_(x); }
    double operator()(const ParamVector& x) const { return eval_(x.values()); }

    std::vector<double> gradient(std::span<const double> x) const {
        if (!grad_) throw UsageError("objective '" + name_ + "' has no analytic gradient");
        return (*grad_)(x);
    }

private:
    std::string name_;
    std::size_t dim_;
    Eval eval_;
    std::optional<Grad> grad_;
};

struct ObjectiveSpec {
    std::string name = "sphere";
    std::size_t dim = 1;
    std::map<std::string, double> parameters;
};

inline const std::vector<std::string>& objective_names() {
    static const std::vector<std::string> names = {"constant", "linear", "sphere", "quadratic",
                                                   "rosenbrock"};
    return names;
}

/// R(x) = g^T x + offset.
inline Objective make_linear(std::vector<double> g, double offset = 0.0) {
    const std::size_t n = g.size();
    auto eval = [g, offset](std::span<const double> x) { return dot(g, x) + offset; };
    auto grad = [g](std::span<const double>) { return g; };
    return Objective("linear", n, eval, grad);
}

namespace detail {

inline double param_or(const ObjectiveSpec& spec, const std::string& key, double fallback) {
    const auto it = spec.parameters.find(key);
    return it == spec.parameters.end() ? fallback : it->second;
}

inline void allow_params(const ObjectiveSpec& spec, std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : spec.parameters) {
        const bool ok = std::any_of(allowed.begin(), allowed.end(),
                                    [&](const char* a) { return key == a; });
        if (!ok) throw UsageError("objective '" + spec.name + "' has no parameter '" + key + "'");
        if (!std::isfinite(value)) throw UsageError("objective parameter '" + key + "' must be finite");
    }
}

}  // namespace detail

/// Builds one of the registered families:
///   constant   value (default 1)
///   linear     scale (1), seed (0), offset (0); g is a seeded uniform direction times scale
///   sphere     ||x||^2
///   quadratic  condition (10); sum a_i x_i^2 with a_i log-spaced on [1, condition]
///   rosenbrock chained form, dim >= 2
inline Objective make_objective(const ObjectiveSpec& spec) {
    const std::size_t n = spec.dim;
    if (n == 0) throw UsageError("objective dimension must be >= 1");

    if (spec.name == "constant") {
        detail::allow_params(spec, {"value"});
        const double c = detail::param_or(spec, "value", 1.0);
        return Objective(
            "constant", n, [c](std::span<const double>) { return c; },
            [n](std::span<const double>) { return std::vector<double>(n, 0.0); });
    }
    if (spec.name == "linear") {
        detail::allow_params(spec, {"scale", "seed", "offset"});
        const double scale = detail::param_or(spec, "scale", 1.0);
        const double seed = detail::param_or(spec, "seed", 0.0);
        if (seed < 0.0 || seed != std::floor(seed)) {
            throw UsageError("linear seed must be a non-negative integer");
        }
        GaussianStream gs(static_cast<std::uint64_t>(seed));
        std::vector<double> g(n);
        double nrm = 0.0;
        while (nrm == 0.0) {
            for (double& x : g) x = gs.next();
            nrm = norm(g);
        }
        for (double& x : g) x *= scale / nrm;
        return make_linear(std::move(g), detail::param_or(spec, "offset", 0.0));
    }
    if (spec.name == "sphere") {
        detail::allow_params(spec, {});
        return Objective(
            "sphere", n, [](std::span<const double> x) { return squared_norm(x); },
            [](std::span<const double> x) {
                std::vector<double> g(x.begin(), x.end());
                for (double& v : g) v *= 2.0;
                return g;
            });
    }
    if (spec.name == "quadratic") {
        detail::allow_params(spec, {"condition"});
        const double cond = detail::param_or(spec, "condition", 10.0);
        if (!(cond >= 1.0)) throw UsageError("quadratic condition must be >= 1");
        std::vector<double> a(n, 1.0);
        for (std::size_t i = 0; i < n && n > 1; ++i) {
            a[i] = std::pow(cond, static_cast<double>(i) / static_cast<double>(n - 1));
        }
        auto eval = [a](std::span<const double> x) {
            double s = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * x[i] * x[i];
            return s;
        };
        auto grad = [a](std::span<const double> x) {
            std::vector<double> g(a.size());
            for (std::size_t i = 0; i < a.size(); ++i) g[i] = 2.0 * a[i] * x[i];
            return g;
        };
        return Objective("quadratic", n, eval, grad);
    }
    if (spec.name == "rosenbrock") {
        detail::allow_params(spec, {});
        if (n < 2) throw UsageError("rosenbrock needs dim >= 2");
        auto eval = [](std::span<const double> x) {
            double s = 0.0;
            for (std::size_t i = 0; i + 1 < x.size(); ++i) {
                const double a = x[i + 1] - x[i] * x[i];
                const double b = 1.0 - x[i];
                s += 100.0 * a * a + b * b;
            }
            return s;
        };
        auto grad = [](std::span<const double> x) {
            std::vector<double> g(x.size(), 0.0);
            for (std::size_t i = 0; i + 1 < x.size(); ++i) {
                const double a = x[i + 1] - x[i] * x[i];
                g[i] += -400.0 * x[i] * a - 2.0 * (1.0 - x[i]);
                g[i + 1] += 200.0 * a;
            }
            return g;
        };
        return Objective("rosenbrock", n, eval, grad);
    }
    throw UsageError("unknown objective '" + spec.name + "'");
}

/// Max over coordinates of |central difference - analytic gradient|, using
/// (R(x + h e_j) - R(x - h e_j)) / 2h.
inline double check_gradient(const Objective& objective, const ParamVector& point, double step) {
    if (!(step > 0.0)) throw UsageError("step must be positive");
    if (point.size() != objective.dim()) throw UsageError("point dimension mismatch");
    const auto analytic = objective.gradient(point.values());
    std::vector<double> x(point.values().begin(), point.values().end());
    double worst = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double saved = x[j];
        x[j] = saved + step;
        const double up = objective(x);
        x[j] = saved - step;
        const double down = objective(x);
        x[j] = saved;
        worst = std::max(worst, std::abs((up - down) / (2.0 * step) - analytic[j]));
    }
    return worst;
}

}  // namespace esfd
