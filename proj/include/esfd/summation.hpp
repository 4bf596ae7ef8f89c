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
#include <span>
#include <vector>

namespace esfd {

/// Neumaier (improved Kahan-Babuska) running sum. Order-dependent by nature;
/// callers feed terms in a fixed order to get reproducible results.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }

    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Error-free sum: a + b == s + e exactly.
inline void two_sum(double a, double b, double& s, double& e) noexcept {
    s = a + b;
    const double bb = s - a;
    e = (a - (s - bb)) + (b - bb);
}

/// Coordinate-wise accumulation of weighted vectors in roughly twice the
/// working precision: the product rounding error is recovered with fma and the
/// addition error with two_sum, so the result behaves as if computed in
/// double-double and rounded once.
class CompensatedVectorSum {
public:
    explicit CompensatedVectorSum(std::size_t dim) : sum_(dim, 0.0), comp_(dim, 0.0) {}

    /// this += weight * v
    void add_scaled(std::span<const double> v, double weight) noexcept { add_scaled(v, weight, 0.0); }

    /// this += (weight_hi + weight_lo) * v, for a weight carried as an
    /// unevaluated two-term sum.
    void add_scaled(std::span<const double> v, double weight_hi, double weight_lo) noexcept {
        for (std::size_t j = 0; j < sum_.size(); ++j) {
            const double p = v[j] * weight_hi;
            const double p_err = std::fma(v[j], weight_hi, -p);
            double s = 0.0;
            double s_err = 0.0;
            two_sum(sum_[j], p, s, s_err);
            sum_[j] = s;
            comp_[j] += s_err + p_err + v[j] * weight_lo;
        }
    }

    std::size_t size() const noexcept { return sum_.size(); }

    std::vector<double> values() const {
        std::vector<double> out(sum_.size());
        for (std::size_t j = 0; j < out.size(); ++j) out[j] = sum_[j] + comp_[j];
        return out;
    }

private:
    std::vector<double> sum_;
    std::vector<double> comp_;
};

}  // namespace esfd
