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
#include <string>
#include <vector>

#include "esfd/experiments.hpp"

using namespace esfd;

namespace {

std::vector<std::string> keys(const ExperimentRecord& r) {
    std::vector<std::string> k;
    for (const auto& [name, value] : r.metrics) k.push_back(name);
    return k;
}

bool same_records(const std::vector<ExperimentRecord>& a, const std::vector<ExperimentRecord>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].experiment != b[i].experiment || a[i].n != b[i].n || a[i].lambda != b[i].lambda ||
            a[i].sigma != b[i].sigma || a[i].seed != b[i].seed || a[i].trials != b[i].trials) {
            return false;
        }
        if (a[i].metrics.size() != b[i].metrics.size()) return false;
        for (std::size_t k = 0; k < a[i].metrics.size(); ++k) {
            const double x = a[i].metrics[k].second, y = b[i].metrics[k].second;
            if (a[i].metrics[k].first != b[i].metrics[k].first) return false;
            if (std::bit_cast<std::uint64_t>(x) != std::bit_cast<std::uint64_t>(y)) return false;
        }
    }
    return true;
}

SweepPlan plan_for(const char* id) {
    SweepPlan p;
    p.experiment = id;
    return p;
}

}  // namespace

TEST(Seeds, DerivedSeedsDifferPerGridPointAndTrial) {
    const auto a = derive_seed(42, 10, 1.0, 100, 0);
    EXPECT_NE(a, derive_seed(42, 10, 1.0, 100, 1));
    EXPECT_NE(a, derive_seed(42, 11, 1.0, 100, 0));
    EXPECT_NE(a, derive_seed(42, 10, 2.0, 100, 0));
    EXPECT_NE(a, derive_seed(42, 10, 1.0, 101, 0));
    EXPECT_NE(a, derive_seed(43, 10, 1.0, 100, 0));
    EXPECT_EQ(a, derive_seed(42, 10, 1.0, 100, 0));
}

TEST(MetricSchema, UnknownExperiment) { EXPECT_THROW(metric_schema("nope"), UsageError); }

TEST(NormConcentration, OneDimensionMatchesClosedForm) {
    auto p = plan_for(experiment_id::kNormConcentration);
    p.dims = {1};
    p.lambdas = {100};
    p.trials = 1000;
    const auto recs = norm_concentration_experiment(p);
    ASSERT_EQ(recs.size(), 1u);
    EXPECT_EQ(keys(recs[0]), metric_schema(experiment_id::kNormConcentration));
    const double draws = 1e5;
    EXPECT_NEAR(recs[0].metric("emp_mean"), 0.7978845608, 3.0 * std::sqrt(0.3634 / draws));
    EXPECT_NEAR(recs[0].metric("exact_mean"), 0.7978845608, 1e-10);
    EXPECT_NEAR(recs[0].metric("exact_var"), 0.3633802276, 1e-10);
}

TEST(NormConcentration, HighDimensionMeanNearSqrtN) {
    auto p = plan_for(experiment_id::kNormConcentration);
    p.dims = {10000};
    p.lambdas = {100};
    p.trials = 10;
    const auto r = norm_concentration_experiment(p).at(0);
    const double ratio = r.metric("emp_mean") / r.metric("asym_mean");
    EXPECT_GE(ratio, 0.9995);
    EXPECT_LE(ratio, 1.0005);
}

TEST(NormConcentration, SpreadRatioDecreasesWithDimension) {
    auto p = plan_for(experiment_id::kNormConcentration);
    p.dims = {10, 100, 1000, 10000};
    p.lambdas = {50};
    p.trials = 4;
    const auto recs = norm_concentration_experiment(p);
    ASSERT_EQ(recs.size(), 4u);
    for (std::size_t i = 1; i < recs.size(); ++i) {
        EXPECT_LT(recs[i].metric("ratio_s_over_mu"), recs[i - 1].metric("ratio_s_over_mu"));
        EXPECT_LT(recs[i].metric("emp_ratio"), recs[i - 1].metric("emp_ratio"));
    }
}

TEST(DifferenceScaling, SlopeAndVarianceAtReducedScale) {
    auto p = plan_for(experiment_id::kDifferenceScaling);
    p.dims = {100};
    p.lambdas = {10, 100, 1000};
    p.trials = 100;
    p.objective = {"linear", 0, {{"offset", 5.0}}};
    p.theta = ThetaSpec::origin();
    const auto recs = difference_scaling_experiment(p);
    ASSERT_EQ(recs.size(), 3u);
    for (const auto& r : recs) {
        EXPECT_EQ(keys(r), metric_schema(experiment_id::kDifferenceScaling));
        EXPECT_EQ(r.metric("r_theta"), 5.0);
        EXPECT_DOUBLE_EQ(r.metric("predicted_var"), 25.0 / r.lambda);
        // 100 trials x 100 coordinates; relative SE of the pooled variance ~1.4%.
        EXPECT_NEAR(r.metric("per_coord_var_D"), 25.0 / r.lambda, 0.06 * 25.0 / r.lambda);
        EXPECT_NEAR(r.metric("mean_norm_D") / r.metric("predicted_norm"), 1.0, 0.05);
        EXPECT_EQ(r.metric("fit_slope"), recs[0].metric("fit_slope"));
    }
    EXPECT_GE(recs[0].metric("fit_slope"), -0.55);
    EXPECT_LE(recs[0].metric("fit_slope"), -0.45);
}

TEST(DifferenceScaling, MirroredBatchesGiveExactZero) {
    auto p = plan_for(experiment_id::kDifferenceScaling);
    p.dims = {20};
    p.lambdas = {10, 100};
    p.trials = 10;
    p.mirrored = true;
    p.objective = {"sphere", 0, {}};
    for (const auto& r : difference_scaling_experiment(p)) {
        EXPECT_EQ(r.metric("mean_norm_D"), 0.0);
        EXPECT_EQ(r.metric("per_coord_var_D"), 0.0);
        EXPECT_TRUE(std::isnan(r.metric("fit_slope")));
    }
}

TEST(DifferenceScaling, RejectsZeroObjectiveAtTheta) {
    auto p = plan_for(experiment_id::kDifferenceScaling);
    p.dims = {10};
    p.theta = ThetaSpec::origin();
    p.objective = {"sphere", 0, {}};
    EXPECT_THROW(difference_scaling_experiment(p), UsageError);
}

TEST(DimensionConvergence, RelativeErrorFallsWithDimension) {
    auto p = plan_for(experiment_id::kDimensionConvergence);
    p.dims = {10, 100, 1000};
    p.sigmas = {0.1};
    p.lambdas = {100};
    p.trials = 20;
    const auto recs = dimension_convergence_experiment(p);
    ASSERT_EQ(recs.size(), 3u);
    EXPECT_EQ(keys(recs[0]), metric_schema(experiment_id::kDimensionConvergence, true));
    EXPECT_LT(recs[1].metric("median_rel_err_scaling"), recs[0].metric("median_rel_err_scaling"));
    EXPECT_LT(recs[2].metric("median_rel_err_scaling"), recs[1].metric("median_rel_err_scaling"));
    for (const auto& r : recs) {
        EXPECT_GT(r.metric("median_cosine_es_fd"), 0.0);
        EXPECT_LE(r.metric("median_cosine_es_fd"), 1.0);
    }
}

TEST(DimensionConvergence, ConstantObjectiveIsUsageError) {
    auto p = plan_for(experiment_id::kDimensionConvergence);
    p.dims = {10};
    p.objective = {"constant", 0, {}};
    EXPECT_THROW(dimension_convergence_experiment(p), UsageError);
}

TEST(SphereShell, Geometry) {
    auto p = plan_for(experiment_id::kSphereShell);
    p.dims = {10, 100, 1000};
    p.lambdas = {100};
    p.trials = 50;
    const auto recs = sphere_shell_experiment(p);
    ASSERT_EQ(recs.size(), 3u);
    const double samples = 100.0 * 50.0;
    for (std::size_t i = 0; i < recs.size(); ++i) {
        const auto& r = recs[i];
        EXPECT_EQ(keys(r), metric_schema(experiment_id::kSphereShell));
        EXPECT_NEAR(r.metric("emp_ratio_var"), r.metric("exact_ratio_var"), 3.0 * r.metric("emp_ratio_var_se"));
        EXPECT_LT(r.metric("max_abs_coord_mean"),
                  3.0 / std::sqrt(samples) + 3.0 / std::sqrt(static_cast<double>(r.n)));
        if (i > 0) {
            EXPECT_LT(r.metric("emp_ratio_var"), recs[i - 1].metric("emp_ratio_var"));
        }
    }
    EXPECT_LT(recs[2].metric("mean_abs_pairwise_cos"), recs[0].metric("mean_abs_pairwise_cos"));
}

// E|cos| between independent uniform directions in R^n equals E|u_1| for u
// uniform on the sphere: Gamma(n/2) / (sqrt(pi) Gamma((n+1)/2)).
TEST(SphereShell, PairwiseCosineMatchesUniformDirections) {
    auto p = plan_for(experiment_id::kSphereShell);
    p.dims = {3, 10};
    p.lambdas = {200};
    p.trials = 100;
    for (const auto& r : sphere_shell_experiment(p)) {
        const double n = static_cast<double>(r.n);
        const double want = std::exp(std::lgamma(n / 2.0) - std::lgamma((n + 1.0) / 2.0)) / std::sqrt(M_PI);
        const double pairs = 100.0 * 100.0;
        const double se = std::sqrt((1.0 / n - want * want) / pairs);  // E cos^2 = 1/n
        EXPECT_NEAR(r.metric("mean_abs_pairwise_cos"), want, 3.0 * se) << r.n;
    }
}

TEST(PairedOptimization, MirroredConstantIsStationary) {
    auto p = plan_for(experiment_id::kPairedOptimization);
    p.dims = {20};
    p.sigmas = {0.1};
    p.lambdas = {10};
    p.trials = 3;
    p.iterations = 50;
    p.checkpoints = 5;
    p.mirrored = true;
    p.normalize_es = true;
    p.objective = {"constant", 0, {{"value", 2.0}}};
    const auto recs = paired_optimization_experiment(p);
    ASSERT_EQ(recs.size(), 5u);
    for (const auto& r : recs) {
        EXPECT_EQ(keys(r), metric_schema(experiment_id::kPairedOptimization));
        EXPECT_EQ(r.metric("traj_scale"), 0.0);
        EXPECT_EQ(r.metric("traj_dist"), 0.0);
        EXPECT_EQ(r.metric("f_es"), 2.0);
        EXPECT_EQ(r.metric("failed_es"), 0.0);
    }
    EXPECT_EQ(recs.back().metric("iteration"), 50.0);
}

TEST(PairedOptimization, ConstantWithoutMirroringDriftsOnlyInEs) {
    const std::size_t n = 20;
    const auto f = make_objective({"constant", n, {{"value", 2.0}}});
    const auto theta0 = ParamVector::random_ball(n, 1.0, 1);
    const auto run = run_paired_descent(f, theta0, 0.1, 10, 0.05, 30, {30}, 9, true, false);
    // FD stays put exactly, so the distance between the runs is the ES drift.
    EXPECT_GT(run.traj_scale.at(0), 0.0);
    EXPECT_EQ(run.traj_dist.at(0), run.traj_scale.at(0));
}

TEST(PairedOptimization, ConvergesInStableRegime) {
    auto p = plan_for(experiment_id::kPairedOptimization);
    p.dims = {10};
    p.sigmas = {0.05};
    p.lambdas = {50};
    p.trials = 4;
    p.step = 0.002;
    p.iterations = 2000;
    p.checkpoints = 4;
    p.normalize_es = true;
    p.theta = ThetaSpec::ball(1.0);
    const auto recs = paired_optimization_experiment(p);
    const auto& last = recs.back();
    EXPECT_EQ(last.metric("failed_es"), 0.0);
    EXPECT_EQ(last.metric("failed_fd"), 0.0);
    EXPECT_LT(last.metric("f_es"), 0.2 * last.metric("f0"));
    EXPECT_LT(last.metric("f_fd"), 0.2 * last.metric("f0"));
}

TEST(PairedOptimization, DivergenceIsRecordedNotThrown) {
    auto p = plan_for(experiment_id::kPairedOptimization);
    p.dims = {100};
    p.sigmas = {0.05};
    p.lambdas = {50};
    p.trials = 2;
    p.step = 0.05;
    p.iterations = 400;
    p.checkpoints = 2;
    p.normalize_es = true;
    const auto recs = paired_optimization_experiment(p);
    EXPECT_EQ(recs.back().metric("failed_es"), 2.0);
    EXPECT_TRUE(std::isinf(recs.back().metric("f_es")));
}

TEST(Experiments, PureFunctionOfPlanAndThreadIndependent) {
    for (const char* id : {experiment_id::kNormConcentration, experiment_id::kDifferenceScaling,
                           experiment_id::kDimensionConvergence, experiment_id::kSphereShell,
                           experiment_id::kPairedOptimization}) {
        auto p = plan_for(id);
        p.dims = {5, 40};
        p.lambdas = {20, 40};
        p.trials = 6;
        p.iterations = 20;
        p.checkpoints = 2;
        p.step = 0.001;
        p.threads = 1;
        const auto a = run_experiment(p);
        const auto b = run_experiment(p);
        p.threads = 8;
        const auto c = run_experiment(p);
        EXPECT_TRUE(same_records(a, b)) << id;
        EXPECT_TRUE(same_records(a, c)) << id;
    }
}

TEST(Experiments, PlanValidation) {
    auto p = plan_for(experiment_id::kSphereShell);
    p.trials = 0;
    EXPECT_THROW(run_experiment(p), UsageError);
    p = plan_for(experiment_id::kSphereShell);
    p.sigmas = {0.0};
    EXPECT_THROW(run_experiment(p), UsageError);
    p = plan_for("bogus");
    EXPECT_THROW(run_experiment(p), UsageError);
}
