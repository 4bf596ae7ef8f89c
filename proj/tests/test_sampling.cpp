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

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "esfd/sampling.hpp"
#include "esfd/specfun.hpp"
#include "esfd/summation.hpp"

using namespace esfd;

TEST(ParamVector, RejectsEmptyAndNonFinite) {
    EXPECT_THROW(ParamVector(std::vector<double>{}), UsageError);
    EXPECT_THROW(ParamVector(std::vector<double>{1.0, std::nan("")}), UsageError);
    EXPECT_THROW(ParamVector(std::vector<double>{INFINITY}), UsageError);
    EXPECT_NO_THROW(ParamVector(std::vector<double>{0.0}));
}

TEST(ParamVector, RandomBallStaysInside) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto p = ParamVector::random_ball(7, 2.5, seed);
        EXPECT_LE(norm(p.values()), 2.5);
        EXPECT_GT(norm(p.values()), 0.0);
    }
    EXPECT_EQ(ParamVector::random_ball(30, 1.0, 9), ParamVector::random_ball(30, 1.0, 9));
}

TEST(SampleBatch, Shape) {
    const auto theta = ParamVector::random_ball(13, 1.0, 1);
    const auto b = sample_batch(theta, 0.3, 17, 99);
    EXPECT_EQ(b.dim(), 13u);
    EXPECT_EQ(b.lambda(), 17u);
    EXPECT_EQ(b.seed(), 99u);
    EXPECT_DOUBLE_EQ(b.sigma(), 0.3);
    EXPECT_EQ(b.theta(), theta);
    EXPECT_FALSE(b.mirrored());
    for (std::size_t i = 0; i < b.lambda(); ++i) {
        const auto e = b.epsilon(i);
        ASSERT_EQ(e.size(), 13u);
        EXPECT_GT(norm(e), PerturbationBatch::norm_floor(13, 0.3));
        const auto a = b.alpha(i);
        for (std::size_t j = 0; j < 13; ++j) EXPECT_EQ(a[j], theta[j] + e[j]);
    }
}

TEST(SampleBatch, DeterministicInSeed) {
    const auto theta = ParamVector::zeros(40);
    const auto a = sample_batch(theta, 1.0, 25, 7);
    const auto b = sample_batch(theta, 1.0, 25, 7);
    EXPECT_EQ(a, b);
    const auto c = sample_batch(theta, 1.0, 25, 8);
    EXPECT_NE(a.epsilon(0)[0], c.epsilon(0)[0]);
}

TEST(SampleBatch, PerturbationsDoNotDependOnTheta) {
    const auto a = sample_batch(ParamVector::zeros(5), 0.5, 10, 3);
    const auto b = sample_batch(ParamVector(std::vector<double>(5, 1e6)), 0.5, 10, 3);
    for (std::size_t i = 0; i < 10; ++i) {
        for (std::size_t j = 0; j < 5; ++j) EXPECT_EQ(a.epsilon(i)[j], b.epsilon(i)[j]);
    }
}

TEST(SampleBatch, RejectsBadArguments) {
    const auto theta = ParamVector::zeros(3);
    EXPECT_THROW(sample_batch(theta, 0.0, 10, 1), UsageError);
    EXPECT_THROW(sample_batch(theta, -1.0, 10, 1), UsageError);
    EXPECT_THROW(sample_batch(theta, 1.0, 0, 1), UsageError);
}

TEST(SampleBatch, StandardGaussianMoments) {
    const std::size_t n = 100, lambda = 100000;
    const auto b = sample_batch(ParamVector::zeros(n), 1.0, lambda, 12345);
    std::vector<double> sum(n, 0.0), sum2(n, 0.0);
    for (std::size_t i = 0; i < lambda; ++i) {
        const auto e = b.epsilon(i);
        for (std::size_t j = 0; j < n; ++j) {
            sum[j] += e[j];
            sum2[j] += e[j] * e[j];
        }
    }
    const double width = 3.0 / std::sqrt(static_cast<double>(lambda));
    int mean_outside = 0;
    for (std::size_t j = 0; j < n; ++j) {
        const double m = sum[j] / lambda;
        const double v = sum2[j] / lambda - m * m;
        if (std::abs(m) > width) ++mean_outside;
        EXPECT_NEAR(v, 1.0, 0.05) << j;
    }
    // 3-sigma excursions happen with probability 0.27% per coordinate.
    EXPECT_LE(mean_outside, 2);
    EXPECT_EQ(b.resample_count(), 0u);
}

TEST(SampleBatch, NormMeanMatchesChiMean) {
    const std::size_t n = 10, lambda = 100000;
    const double sigma = 2.0;
    const auto b = sample_batch(ParamVector::zeros(n), sigma, lambda, 777);
    double s = 0.0;
    for (std::size_t i = 0; i < lambda; ++i) s += norm(b.epsilon(i));
    const double se = std::sqrt(chi_variance(n, sigma) / lambda);
    EXPECT_NEAR(s / lambda, chi_mean(n, sigma), 3.0 * se);
    EXPECT_NEAR(chi_mean(n, sigma), 2.0 * 3.0844, 1e-3);
}

TEST(SampleBatch, NormalizedNormSpreadShrinksWithDimension) {
    double prev = INFINITY;
    for (std::size_t n : {4u, 64u, 1024u}) {
        const auto b = sample_batch(ParamVector::zeros(n), 1.0, 4000, 5);
        const double mu = chi_mean(n, 1.0);
        double s = 0.0, s2 = 0.0;
        for (std::size_t i = 0; i < b.lambda(); ++i) {
            const double r = norm(b.epsilon(i)) / mu;
            s += r;
            s2 += r * r;
        }
        const double m = s / b.lambda();
        const double v = s2 / b.lambda() - m * m;
        const double want = chi_variance(n, 1.0) / (mu * mu);
        EXPECT_NEAR(v, want, 0.1 * want) << n;
        EXPECT_LT(v, prev);
        prev = v;
    }
}

TEST(MirrorBatch, PairsAndExactZeroSum) {
    const auto b = make_batch(ParamVector::zeros(3), 1.0, {{1.0, 0.0, 0.0}});
    const auto m = mirror_batch(b);
    ASSERT_EQ(m.lambda(), 2u);
    EXPECT_EQ(m.epsilon(1)[0], -1.0);
    for (double v : m.epsilon_sum()) EXPECT_EQ(v, 0.0);
}

TEST(MirrorBatch, RandomBatchSumsToExactlyZero) {
    const auto b = sample_batch(ParamVector::random_ball(50, 1.0, 2), 0.7, 33, 4);
    const auto m = mirror_batch(b);
    EXPECT_EQ(m.lambda(), 66u);
    EXPECT_TRUE(m.mirrored());
    EXPECT_EQ(m.seed(), b.seed());
    EXPECT_EQ(m.theta(), b.theta());
    for (double v : m.epsilon_sum()) EXPECT_EQ(v, 0.0);
}

TEST(MakeBatch, ValidatesInput) {
    const auto theta = ParamVector::zeros(2);
    EXPECT_THROW(make_batch(theta, 1.0, {}), UsageError);
    EXPECT_THROW(make_batch(theta, 1.0, {{1.0}}), UsageError);
    EXPECT_THROW(make_batch(theta, 1.0, {{0.0, 0.0}}), UsageError);
}

TEST(Summation, CompensatedSumRecoversCancelledTerms) {
    CompensatedSum s;
    for (double x : {1e16, 1.0, -1e16, 1.0}) s.add(x);
    EXPECT_EQ(s.value(), 2.0);
}

TEST(Summation, VectorSumRecoversProductRounding) {
    // (1 + 2^-30)^2 = 1 + 2^-29 + 2^-60; the last term is lost by a plain
    // product but kept by the fma error term.
    const double a = 1.0 + std::ldexp(1.0, -30);
    const std::vector<double> v = {a};
    CompensatedVectorSum acc(1);
    acc.add_scaled(v, a);
    acc.add_scaled(v, -1.0);
    acc.add_scaled(std::vector<double>{1.0}, -std::ldexp(1.0, -30));
    EXPECT_EQ(acc.values()[0], std::ldexp(1.0, -60));
}

TEST(Summation, VectorSumUsesLowWeightPart) {
    // Weight 1e16 + 1 is not representable; carried as hi + lo it is exact.
    double hi = 0.0;
    double lo = 0.0;
    two_sum(1e16, 1.0, hi, lo);
    EXPECT_EQ(lo, 1.0);
    CompensatedVectorSum acc(2);
    acc.add_scaled(std::vector<double>{1.0, 2.0}, hi, lo);
    acc.add_scaled(std::vector<double>{1.0, 2.0}, -1e16);
    EXPECT_EQ(acc.values()[0], 1.0);
    EXPECT_EQ(acc.values()[1], 2.0);
}
