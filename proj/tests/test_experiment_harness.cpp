#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fslln/experiment_harness.hpp"

using namespace fslln;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig c;
    c.grid = Grid{2, 0.5, 40};
    c.mus = {5.0, 10.0, 20.0};
    c.replicates = 24;
    c.seed = 1234;
    return c;
}

std::vector<double> flatten(const ExperimentResult& r) {
    std::vector<double> out;
    for (std::size_t m = 0; m < r.samples.size(); ++m)
        for (double v : r.values_at(m)) out.push_back(v);
    return out;
}

}  // namespace

TEST(RunExperiment, ShapeAndSeeds) {
    const auto c = small_config();
    const auto r = run_experiment(c);
    ASSERT_EQ(r.samples.size(), 3u);
    ASSERT_EQ(r.summaries.size(), 3u);
    for (std::size_t m = 0; m < 3; ++m) {
        ASSERT_EQ(r.samples[m].size(), 24u);
        for (int i = 0; i < 24; ++i) {
            EXPECT_EQ(r.samples[m][i].replicate_id, i);
            EXPECT_EQ(r.samples[m][i].mu, c.mus[m]);
        }
    }
    for (std::size_t i = 0; i < 24; ++i) EXPECT_EQ(r.child_seeds[i], mix_seed(1234, i));
    ASSERT_TRUE(r.embedding.has_value());
    EXPECT_LE(r.embedding->clipped_mass, 1e-3);
}

TEST(RunExperiment, DeterministicAcrossRunsAndThreadCounts) {
    auto c = small_config();
    const auto a = flatten(run_experiment(c));
    EXPECT_EQ(a, flatten(run_experiment(c)));
    for (int t : {2, 3, 8}) {
        c.threads = t;
        EXPECT_EQ(a, flatten(run_experiment(c))) << t;
    }
}

TEST(RunExperiment, ReplicatesArePrefixStable) {
    auto c = small_config();
    const auto full = run_experiment(c);
    c.replicates = 10;
    const auto part = run_experiment(c);
    for (std::size_t m = 0; m < 3; ++m)
        for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(part.samples[m][i].value, full.samples[m][i].value);
}

TEST(RunExperiment, NestedMatchesManualCurve) {
    const auto c = small_config();
    const auto r = run_experiment(c);
    const CirculantSampler s(c.covariance, c.grid, c.embedding);
    const auto curve = xi_curve(s.sample(mix_seed(c.seed, 5)), c.weight, c.k, Window::square(), c.mus);
    for (std::size_t m = 0; m < 3; ++m) EXPECT_EQ(r.samples[m][5].value, curve[m].value);
}

TEST(RunExperiment, IndependentModeUsesFreshFieldPerMu) {
    auto c = small_config();
    c.nesting = Nesting::Independent;
    const auto r = run_experiment(c);
    const CirculantSampler s(c.covariance, c.grid, c.embedding);
    const std::uint64_t child = mix_seed(c.seed, 3);
    for (std::size_t m = 0; m < 3; ++m) {
        const auto x = transform_field(s.sample(mix_seed(child, m + 1)), c.weight, c.k);
        EXPECT_EQ(r.samples[m][3].value, xi_estimate(x, Window::square(), c.mus[m]).value);
    }
    EXPECT_EQ(flatten(r), flatten(run_experiment(c)));
}

TEST(RunExperiment, RmseSquaredIsMeanSquare) {
    const auto r = run_experiment(small_config());
    for (std::size_t m = 0; m < 3; ++m) {
        double ms = 0.0;
        for (double v : r.values_at(m)) ms += v * v;
        ms /= 24.0;
        EXPECT_NEAR(r.summaries[m].rmse * r.summaries[m].rmse, ms, 1e-14 * ms);
        EXPECT_NEAR(r.summaries[m].variance + r.summaries[m].mean * r.summaries[m].mean, ms, 1e-12 * ms);
    }
}

TEST(RunExperiment, CholeskyGenerator) {
    auto c = small_config();
    c.grid = Grid{2, 0.5, 10};
    c.mus = {2.0, 4.0};
    c.generator = GeneratorKind::Cholesky;
    const auto r = run_experiment(c);
    EXPECT_FALSE(r.embedding.has_value());
    EXPECT_EQ(r.samples[0][0].value, r.samples[0][0].value);
    EXPECT_EQ(flatten(r), flatten(run_experiment(c)));
}

TEST(RunExperiment, ValidationAndCoverageErrors) {
    auto c = small_config();
    c.mus = {5.0, 25.0};
    EXPECT_THROW(run_experiment(c), CoverageError);
    c = small_config();
    c.mus = {10.0, 5.0};
    EXPECT_THROW(run_experiment(c), DomainError);
    c = small_config();
    c.replicates = 0;
    EXPECT_THROW(run_experiment(c), DomainError);
    c = small_config();
    c.weight = MonomialProductWeight{{0.1}};
    EXPECT_THROW(run_experiment(c), DomainError);
}

TEST(RunExperiment, MeanZeroAtFullScale) {
    ExperimentConfig c;
    c.replicates = 300;
    c.seed = 77;
    c.threads = 4;
    c.mus = {10.0, 50.0, 100.0};
    const auto r = run_experiment(c);
    for (const auto& s : r.summaries) EXPECT_LT(std::fabs(s.mean), 4 * std::sqrt(s.variance / 300)) << s.mu;
}

TEST(RmseTable, SlopeAndMonotonicity) {
    const auto& ref = reference_rmse_table();
    ASSERT_EQ(ref.size(), 7u);
    EXPECT_TRUE(strictly_decreasing(ref));
    EXPECT_NEAR(rmse_slope(ref), -0.44223996125134446, 1e-12);
    const std::vector<RmseRow> flat{{1, 1.0}, {2, 1.0}};
    EXPECT_FALSE(strictly_decreasing(flat));
}

TEST(CompareToReference, PassAndFailRows) {
    const std::vector<RmseRow> got{{10, 0.25}, {50, 0.2}, {100, 0.08}};
    const std::vector<double> tol{0.3};
    const auto rep = compare_to_reference(got, reference_rmse_table(), tol);
    ASSERT_EQ(rep.rows.size(), 3u);
    EXPECT_TRUE(rep.rows[0].pass);
    EXPECT_FALSE(rep.rows[1].pass);
    EXPECT_TRUE(rep.rows[2].pass);
    EXPECT_FALSE(rep.pass);
    EXPECT_NEAR(rep.rows[0].relative_error, 0.033 / 0.217, 1e-12);

    const std::vector<RmseRow> good{{10, 0.22}, {50, 0.1}, {100, 0.08}};
    EXPECT_TRUE(compare_to_reference(good, reference_rmse_table(), tol).pass);
}

TEST(CompareToReference, Errors) {
    const std::vector<RmseRow> got{{10, 0.25}};
    const std::vector<double> two{0.3, 0.3};
    EXPECT_THROW(compare_to_reference(got, reference_rmse_table(), two), InputError);
    const std::vector<RmseRow> none{{11, 0.25}};
    const std::vector<double> tol{0.3};
    EXPECT_THROW(compare_to_reference(none, reference_rmse_table(), tol), InputError);
}
