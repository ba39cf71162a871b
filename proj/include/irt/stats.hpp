#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace irt {

// Models x metrics score table for the nonparametric comparisons.
struct ScoreTable {
    std::vector<std::string> blocks;     // model ids (n rows)
    std::vector<std::string> treatments; // metric names (k columns)
    std::vector<double> values;          // n x k, row-major

    double at(std::size_t block, std::size_t treatment) const {
        return values[block * treatments.size() + treatment];
    }
    void validate() const;
};

// Within-block ranks, average-rank tie handling, rank 1 = highest score.
// Every row sums to k(k+1)/2.
struct RankMatrix {
    std::vector<std::string> blocks;
    std::vector<std::string> treatments;
    std::vector<double> ranks; // n x k, row-major

    double at(std::size_t block, std::size_t treatment) const {
        return ranks[block * treatments.size() + treatment];
    }
    std::vector<double> mean_ranks() const;
};

RankMatrix rank_within_blocks(const ScoreTable& table);

// Average-rank ties over one row of scores (descending: best score gets 1).
std::vector<double> average_ranks_desc(const std::vector<double>& values);

struct FriedmanResult {
    double chi2 = 0.0;
    double p = 1.0;
    bool degenerate = false; // zero rank variance in every block
    bool tie_corrected = true;
};

// Tie-corrected Friedman chi-square over blocks x treatments; p from the
// chi-square survival function with k-1 degrees of freedom.
FriedmanResult friedman_test(const ScoreTable& table);

// Survival function of the studentized range distribution (df = infinity):
// 1 - k * Int phi(z) * [Phi(z) - Phi(z - q)]^(k-1) dz.
double studentized_range_sf(double q, int k);

// Symmetric k x k matrix with unit diagonal.
struct PairwiseMatrix {
    std::vector<std::string> treatments;
    std::vector<double> values; // k x k, row-major

    double at(std::size_t i, std::size_t j) const {
        return values[i * treatments.size() + j];
    }
};

// Nemenyi post-hoc p-values: p_ij = sf(|R_i - R_j| / sqrt(k(k+1)/(12n)), k).
PairwiseMatrix nemenyi_test(const ScoreTable& table);

// Confidence reading of a p-value, 1 - p.
double confidence(double p);

struct TestReport {
    FriedmanResult friedman;
    RankMatrix ranks;
    std::vector<double> mean_ranks;
    PairwiseMatrix nemenyi_p;
    PairwiseMatrix confidence_matrix;
};

TestReport compare_scores(const ScoreTable& table);

} // namespace irt
