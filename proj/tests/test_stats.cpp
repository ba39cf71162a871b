#include "irt/errors.hpp"
#include "irt/rng.hpp"
#include "irt/special.hpp"
#include "irt/stats.hpp"

#include "scores_fixture.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace irt;

namespace {

ScoreTable random_table(std::size_t n, std::size_t k, std::uint64_t seed) {
    ScoreTable table;
    SplitMix64 rng(seed);
    for (std::size_t i = 0; i < n; ++i) table.blocks.push_back("b" + std::to_string(i));
    for (std::size_t j = 0; j < k; ++j) table.treatments.push_back("t" + std::to_string(j));
    for (std::size_t i = 0; i < n * k; ++i) table.values.push_back(rng.next_double());
    return table;
}

// Friedman chi-square recomputed from scratch for one permutation draw.
double friedman_chi2_of(const ScoreTable& table) {
    return friedman_test(table).chi2;
}

} // namespace

TEST_SUITE_BEGIN("stats");

TEST_CASE("average ranks handle ties by averaging") {
    CHECK(average_ranks_desc({3.0, 1.0, 2.0}) == std::vector<double>{1.0, 3.0, 2.0});
    CHECK(average_ranks_desc({5.0, 5.0, 1.0}) == std::vector<double>{1.5, 1.5, 3.0});
    CHECK(average_ranks_desc({2.0, 2.0, 2.0, 2.0}) ==
          std::vector<double>{2.5, 2.5, 2.5, 2.5});
}

TEST_CASE("rank rows always sum to k(k+1)/2") {
    SplitMix64 rng(3);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t k = 3 + rng.next_u64() % 8;
        std::vector<double> row;
        for (std::size_t j = 0; j < k; ++j) {
            row.push_back(rng.next_bernoulli(0.3) ? 0.5 : rng.next_double());
        }
        const auto ranks = average_ranks_desc(row);
        double sum = 0.0;
        for (double r : ranks) sum += r;
        CHECK(sum == doctest::Approx(k * (k + 1) / 2.0).epsilon(1e-12));
    }
}

TEST_CASE("score table validation") {
    ScoreTable too_small = random_table(1, 4, 1);
    CHECK_THROWS_AS(too_small.validate(), validation_error);
    ScoreTable narrow = random_table(5, 2, 1);
    CHECK_THROWS_AS(narrow.validate(), validation_error);
    ScoreTable bad = random_table(4, 4, 1);
    bad.values[3] = std::nan("");
    CHECK_THROWS_AS(bad.validate(), validation_error);
}

TEST_CASE("friedman on fully tied data is degenerate") {
    ScoreTable table;
    table.blocks = {"b0", "b1", "b2"};
    table.treatments = {"t0", "t1", "t2", "t3"};
    table.values.assign(12, 0.7);
    const auto result = friedman_test(table);
    CHECK(result.chi2 == 0.0);
    CHECK(result.p == 1.0);
    CHECK(result.degenerate);
}

TEST_CASE("friedman on the fixture table matches the hand-derived statistic") {
    // Rank sums computed by hand from the frozen table give
    // ssbn = 19443.5, uncorrected chi2 = 19443.5/60 - 270, ties = 30.
    const auto result = friedman_test(test_helpers::fixture_score_table());
    const double uncorrected = 19443.5 / 60.0 - 270.0;
    const double corrected = uncorrected / (1.0 - 30.0 / (10.0 * (512.0 - 8.0)));
    CHECK(result.chi2 == doctest::Approx(corrected).epsilon(1e-12));
    CHECK(result.chi2 == doctest::Approx(54.382).epsilon(1e-4));
    CHECK(result.p < 1e-7);
    CHECK(result.p > 1e-11);
    CHECK_FALSE(result.degenerate);
}

TEST_CASE("friedman p matches a permutation oracle") {
    const auto table = random_table(20, 5, 404);
    const auto analytic = friedman_test(table);

    // Null distribution by permuting scores within each block.
    SplitMix64 rng(405);
    const std::size_t k = table.treatments.size();
    ScoreTable perm = table;
    int at_least = 0;
    const int reps = 100000;
    for (int rep = 0; rep < reps; ++rep) {
        for (std::size_t i = 0; i < table.blocks.size(); ++i) {
            double* row = perm.values.data() + i * k;
            for (std::size_t j = k - 1; j > 0; --j) {
                const std::size_t pick = rng.next_u64() % (j + 1);
                std::swap(row[j], row[pick]);
            }
        }
        if (friedman_chi2_of(perm) >= analytic.chi2 - 1e-12) ++at_least;
    }
    const double mc_p = static_cast<double>(at_least + 1) / (reps + 1);
    CHECK(std::fabs(mc_p - analytic.p) < 0.02);
}

TEST_CASE("friedman is invariant under monotone transforms of one block") {
    auto table = random_table(8, 5, 51);
    const auto base = friedman_test(table);
    for (std::size_t j = 0; j < 5; ++j) {
        table.values[3 * 5 + j] = std::exp(table.values[3 * 5 + j]);
    }
    const auto transformed = friedman_test(table);
    CHECK(base.chi2 == transformed.chi2);
    CHECK(base.p == transformed.p);
}

TEST_CASE("studentized range sf boundary and closed form") {
    CHECK(studentized_range_sf(0.0, 5) == 1.0);

    // k = 2 reduces to the difference of two normals.
    for (double q = 0.0; q <= 8.0; q += 0.25) {
        const double closed = 2.0 * (1.0 - normal_cdf(q * M_SQRT1_2));
        CHECK(std::fabs(studentized_range_sf(q, 2) - closed) < 1e-8);
    }
    CHECK(std::fabs(studentized_range_sf(1.959963984540054 * M_SQRT2, 2) - 0.05) < 1e-6);
}

TEST_CASE("studentized range sf reproduces the df=infinity critical table") {
    CHECK(studentized_range_sf(3.314, 3) == doctest::Approx(0.05).epsilon(0.04));
    CHECK(std::fabs(studentized_range_sf(3.314, 3) - 0.05) < 0.002);
    CHECK(std::fabs(studentized_range_sf(4.286, 8) - 0.05) < 0.002);
}

TEST_CASE("studentized range sf is nonincreasing in q") {
    for (int k : {2, 3, 8, 15}) {
        double prev = 1.0;
        for (double q = 0.0; q <= 9.0; q += 0.1) {
            const double sf = studentized_range_sf(q, k);
            CHECK(sf <= prev + 1e-12);
            CHECK(sf >= 0.0);
            CHECK(sf <= 1.0);
            prev = sf;
        }
    }
    CHECK_THROWS_AS(studentized_range_sf(-0.5, 3), validation_error);
    CHECK_THROWS_AS(studentized_range_sf(std::nan(""), 3), validation_error);
    CHECK_THROWS_AS(studentized_range_sf(1.0, 1), validation_error);
}

TEST_CASE("nemenyi p-matrix is symmetric with unit diagonal") {
    const auto table = test_helpers::fixture_score_table();
    const auto pm = nemenyi_test(table);
    const std::size_t k = pm.treatments.size();
    REQUIRE(k == 8);
    for (std::size_t i = 0; i < k; ++i) {
        CHECK(pm.at(i, i) == 1.0);
        for (std::size_t j = 0; j < k; ++j) {
            CHECK(pm.at(i, j) == pm.at(j, i));
            CHECK(pm.at(i, j) >= 0.0);
            CHECK(pm.at(i, j) <= 1.0);
        }
    }
}

TEST_CASE("identical treatment columns compare with p = 1") {
    ScoreTable table = random_table(6, 4, 77);
    for (std::size_t i = 0; i < 6; ++i) {
        table.values[i * 4 + 2] = table.values[i * 4 + 1]; // duplicate a column
    }
    const auto pm = nemenyi_test(table);
    CHECK(pm.at(1, 2) == 1.0);
}

TEST_CASE("larger mean-rank gaps never raise the nemenyi p") {
    const auto table = test_helpers::fixture_score_table();
    const auto ranks = rank_within_blocks(table);
    const auto means = ranks.mean_ranks();
    const auto pm = nemenyi_test(table);
    const std::size_t k = means.size();
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < k; ++b) {
            for (std::size_t c = 0; c < k; ++c) {
                for (std::size_t d = 0; d < k; ++d) {
                    if (std::fabs(means[a] - means[b]) >= std::fabs(means[c] - means[d])) {
                        CHECK(pm.at(a, b) <= pm.at(c, d) + 1e-12);
                    }
                }
            }
        }
    }
}

TEST_CASE("confidence transform") {
    CHECK(confidence(0.0227) == doctest::Approx(0.9773).epsilon(1e-12));
    CHECK(confidence(1.0) == 0.0);
    CHECK(confidence(0.4775) == doctest::Approx(0.5225).epsilon(1e-12));
    CHECK_THROWS_AS(confidence(-0.1), validation_error);
    CHECK_THROWS_AS(confidence(1.0001), validation_error);
}

TEST_CASE("compare_scores bundles everything consistently") {
    const auto table = test_helpers::fixture_score_table();
    const auto report = compare_scores(table);
    CHECK(report.friedman.p == friedman_test(table).p);
    const std::size_t k = table.treatments.size();
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            CHECK(report.confidence_matrix.at(i, j) ==
                  doctest::Approx(1.0 - report.nemenyi_p.at(i, j)).epsilon(1e-15));
        }
    }
    // Rank matrix rows sum to k(k+1)/2.
    for (std::size_t i = 0; i < table.blocks.size(); ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < k; ++j) sum += report.ranks.at(i, j);
        CHECK(sum == doctest::Approx(36.0).epsilon(1e-12));
    }
}

TEST_SUITE_END();
