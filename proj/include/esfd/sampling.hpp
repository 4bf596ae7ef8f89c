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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "esfd/errors.hpp"
#include "esfd/rng.hpp"
#include "esfd/summation.hpp"

namespace esfd {

inline double squared_norm(std::span<const double> v) noexcept {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

inline double norm(std::span<const double> v) noexcept { return std::sqrt(squared_norm(v)); }

inline double dot(std::span<const double> a, std::span<const double> b) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// A point theta in R^n. Non-empty, all entries finite.
class ParamVector {
public:
    explicit ParamVector(std::vector<double> values) : values_(std::move(values)) {
        if (values_.empty()) throw UsageError("parameter vector must have dimension >= 1");
        for (double v : values_) {
            if (!std::isfinite(v)) throw UsageError("parameter vector entries must be finite");
        }
    }

    static ParamVector zeros(std::size_t n) { return ParamVector(std::vector<double>(n, 0.0)); }

    /// Uniform draw from the closed ball of the given radius about the origin.
    static ParamVector random_ball(std::size_t n, double radius, std::uint64_t seed) {
        if (n == 0) throw UsageError("parameter vector must have dimension >= 1");
        GaussianStream g(seed);
        std::vector<double> v(n);
        double nrm = 0.0;
        while (nrm == 0.0) {
            for (double& x : v) x = g.next();
            nrm = norm(v);
        }
        const double r = radius * std::pow(g.uniform_open_closed(), 1.0 / static_cast<double>(n));
        for (double& x : v) x *= r / nrm;
        return ParamVector(std::move(v));
    }

    std::size_t size() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }

    friend bool operator==(const ParamVector&, const ParamVector&) = default;

private:
    std::vector<double> values_;
};

/// theta together with lambda perturbations eps_i = alpha_i - theta drawn
/// from N(0, sigma^2 I). Stores the differences, not the points, so
/// ||theta|| >> sigma does not cost precision. Immutable once built.
class PerturbationBatch {
public:
    const ParamVector& theta() const noexcept { return theta_; }
    double sigma() const noexcept { return sigma_; }
    std::uint64_t seed() const noexcept { return seed_; }
    std::size_t dim() const noexcept { return theta_.size(); }
    std::size_t lambda() const noexcept { return lambda_; }
    /// Draws rejected by the norm floor and redrawn.
    std::size_t resample_count() const noexcept { return resamples_; }
    bool mirrored() const noexcept { return mirrored_; }

    std::span<const double> epsilon(std::size_t i) const {
        return std::span<const double>(eps_).subspan(i * dim(), dim());
    }

    /// alpha_i = theta + eps_i
    std::vector<double> alpha(std::size_t i) const {
        std::vector<double> a(dim());
        const auto e = epsilon(i);
        for (std::size_t j = 0; j < a.size(); ++j) a[j] = theta_[j] + e[j];
        return a;
    }

    /// Sum of eps_i in ascending index order.
    std::vector<double> epsilon_sum() const;

    friend bool operator==(const PerturbationBatch&, const PerturbationBatch&) = default;

    /// Minimum admissible ||eps_i||: 1e-12 * sigma * sqrt(n).
    static double norm_floor(std::size_t n, double sigma) {
        return 1e-12 * sigma * std::sqrt(static_cast<double>(n));
    }

private:
    PerturbationBatch(ParamVector theta, double sigma, std::uint64_t seed)
        : theta_(std::move(theta)), sigma_(sigma), seed_(seed) {}

    ParamVector theta_;
    double sigma_;
    std::uint64_t seed_;
    std::size_t lambda_ = 0;
    std::size_t resamples_ = 0;
    bool mirrored_ = false;
    std::vector<double> eps_;  // lambda x n, row-major

    friend PerturbationBatch sample_batch(const ParamVector&, double, std::size_t, std::uint64_t);
    friend PerturbationBatch mirror_batch(const PerturbationBatch&);
    friend PerturbationBatch make_batch(ParamVector, double, std::vector<std::vector<double>>,
                                        std::uint64_t);
};

/// lambda i.i.d. perturbations from N(0, sigma^2 I_n), deterministic in seed.
/// A draw whose norm is at or below the norm floor is redrawn from the same
/// stream and counted in resample_count().
inline PerturbationBatch sample_batch(const ParamVector& theta, double sigma, std::size_t lambda,
                                      std::uint64_t seed) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw UsageError("sigma must be positive");
    if (lambda == 0) throw UsageError("lambda must be >= 1");
    PerturbationBatch b(theta, sigma, seed);
    const std::size_t n = theta.size();
    const double floor = PerturbationBatch::norm_floor(n, sigma);
    b.lambda_ = lambda;
    b.eps_.resize(lambda * n);
    GaussianStream g(seed);
    for (std::size_t i = 0; i < lambda; ++i) {
        std::span<double> row(b.eps_.data() + i * n, n);
        for (;;) {
            for (double& x : row) x = sigma * g.next();
            if (norm(row) > floor) break;
            ++b.resamples_;
        }
    }
    return b;
}

/// Batch of size 2 lambda holding eps_1, -eps_1, eps_2, -eps_2, ... so that
/// every in-order sum over it cancels pairwise to exactly zero.
inline PerturbationBatch mirror_batch(const PerturbationBatch& batch) {
    PerturbationBatch m(batch.theta_, batch.sigma_, batch.seed_);
    const std::size_t n = batch.dim();
    m.lambda_ = 2 * batch.lambda_;
    m.resamples_ = batch.resamples_;
    m.mirrored_ = true;
    m.eps_.reserve(m.lambda_ * n);
    for (std::size_t i = 0; i < batch.lambda_; ++i) {
        const auto e = batch.epsilon(i);
        m.eps_.insert(m.eps_.end(), e.begin(), e.end());
        for (double x : e) m.eps_.push_back(-x);
    }
    return m;
}

/// Batch from explicit perturbations (fixtures and hand-built cases).
inline PerturbationBatch make_batch(ParamVector theta, double sigma,
                                    std::vector<std::vector<double>> epsilons,
                                    std::uint64_t seed = 0) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw UsageError("sigma must be positive");
    if (epsilons.empty()) throw UsageError("batch needs at least one perturbation");
    const std::size_t n = theta.size();
    const double floor = PerturbationBatch::norm_floor(n, sigma);
    PerturbationBatch b(std::move(theta), sigma, seed);
    b.lambda_ = epsilons.size();
    b.eps_.reserve(b.lambda_ * n);
    for (const auto& e : epsilons) {
        if (e.size() != n) throw UsageError("perturbation dimension does not match theta");
        for (double x : e) {
            if (!std::isfinite(x)) throw UsageError("perturbation entries must be finite");
        }
        if (!(norm(e) > floor)) throw UsageError("perturbation norm is below the norm floor");
        b.eps_.insert(b.eps_.end(), e.begin(), e.end());
    }
    return b;
}

inline std::vector<double> PerturbationBatch::epsilon_sum() const {
    CompensatedVectorSum acc(dim());
    for (std::size_t i = 0; i < lambda_; ++i) acc.add_scaled(epsilon(i), 1.0);
    return acc.values();
}

}  // namespace esfd
