#include "irt/stats.hpp"

#include "irt/errors.hpp"
#include "irt/special.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace irt {

void ScoreTable::validate() const {
    if (blocks.size() < 2) throw validation_error("score table needs at least 2 blocks");
    if (treatments.size() < 3) throw validation_error("score table needs at least 3 treatments");
    if (values.size() != blocks.size() * treatments.size()) {
        throw validation_error("score table dimensions do not match values");
    }
    for (double v : values) {
        if (!std::isfinite(v)) throw validation_error("score table values must be finite");
    }
}

std::vector<double> average_ranks_desc(const std::vector<double>& values) {
    const std::size_t k = values.size();
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return values[x] > values[y]; });
    std::vector<double> ranks(k, 0.0);
    std::size_t pos = 0;
    while (pos < k) {
        std::size_t end = pos + 1;
        while (end < k && values[order[end]] == values[order[pos]]) ++end;
        const double avg = 0.5 * static_cast<double>(pos + 1 + end); // mean of pos+1..end
        for (std::size_t t = pos; t < end; ++t) ranks[order[t]] = avg;
        pos = end;
    }
    return ranks;
}

RankMatrix rank_within_blocks(const ScoreTable& table) {
    table.validate();
    const std::size_t n = table.blocks.size();
    const std::size_t k = table.treatments.size();
    RankMatrix rm;
    rm.blocks = table.blocks;
    rm.treatments = table.treatments;
    rm.ranks.resize(n * k);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row(table.values.begin() + i * k, table.values.begin() + (i + 1) * k);
        const auto ranks = average_ranks_desc(row);
        std::copy(ranks.begin(), ranks.end(), rm.ranks.begin() + i * k);
    }
    return rm;
}

std::vector<double> RankMatrix::mean_ranks() const {
    const std::size_t n = blocks.size();
    const std::size_t k = treatments.size();
    std::vector<double> means(k, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t i = 0; i < n; ++i) means[j] += ranks[i * k + j];
        means[j] /= static_cast<double>(n);
    }
    return means;
}

FriedmanResult friedman_test(const ScoreTable& table) {
    const RankMatrix rm = rank_within_blocks(table);
    const std::size_t n = table.blocks.size();
    const std::size_t k = table.treatments.size();

    // Column rank sums and the within-row tie correction term sum(t^3 - t).
    std::vector<double> col_sums(k, 0.0);
    double tie_term = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row(rm.ranks.begin() + i * k, rm.ranks.begin() + (i + 1) * k);
        for (std::size_t j = 0; j < k; ++j) col_sums[j] += row[j];
        std::sort(row.begin(), row.end());
        std::size_t pos = 0;
        while (pos < k) {
            std::size_t end = pos + 1;
            while (end < k && row[end] == row[pos]) ++end;
            const double t = static_cast<double>(end - pos);
            tie_term += t * t * t - t;
            pos = end;
        }
    }

    FriedmanResult result;
    const double kk = static_cast<double>(k);
    const double nn = static_cast<double>(n);
    const double correction = 1.0 - tie_term / (nn * (kk * kk * kk - kk));
    if (correction <= 0.0) {
        // Every block fully tied: no rank variance anywhere.
        result.chi2 = 0.0;
        result.p = 1.0;
        result.degenerate = true;
        return result;
    }

    double ssbn = 0.0;
    for (double s : col_sums) ssbn += s * s;
    const double uncorrected = 12.0 / (nn * kk * (kk + 1.0)) * ssbn - 3.0 * nn * (kk + 1.0);
    result.chi2 = uncorrected / correction;
    if (result.chi2 < 0.0) result.chi2 = 0.0; // clip fp noise around zero
    result.p = chi_square_sf(result.chi2, static_cast<int>(k) - 1);
    return result;
}

double studentized_range_sf(double q, int k) {
    if (k < 2) throw validation_error("studentized_range_sf requires k >= 2");
    if (!std::isfinite(q) || q < 0.0) {
        throw validation_error("studentized_range_sf requires finite q >= 0");
    }
    if (q == 0.0) return 1.0;

    const auto integrand = [q, k](double z) {
        const double inner = normal_cdf(z) - normal_cdf(z - q);
        return normal_pdf(z) * std::pow(inner, k - 1);
    };
    const double cdf = k * integrate(integrand, -9.0, 9.0, 1e-10);
    return std::clamp(1.0 - cdf, 0.0, 1.0);
}

PairwiseMatrix nemenyi_test(const ScoreTable& table) {
    const RankMatrix rm = rank_within_blocks(table);
    const std::vector<double> means = rm.mean_ranks();
    const std::size_t n = table.blocks.size();
    const std::size_t k = table.treatments.size();
    const double scale = std::sqrt(static_cast<double>(k) * (k + 1.0) / (12.0 * n));

    PairwiseMatrix pm;
    pm.treatments = table.treatments;
    pm.values.assign(k * k, 1.0);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
            const double q = std::fabs(means[i] - means[j]) / scale;
            const double p = studentized_range_sf(q, static_cast<int>(k));
            pm.values[i * k + j] = p;
            pm.values[j * k + i] = p;
        }
    }
    return pm;
}

double confidence(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw validation_error("confidence requires p in [0, 1]");
    return 1.0 - p;
}

TestReport compare_scores(const ScoreTable& table) {
    TestReport report;
    report.friedman = friedman_test(table);
    report.ranks = rank_within_blocks(table);
    report.mean_ranks = report.ranks.mean_ranks();
    report.nemenyi_p = nemenyi_test(table);
    report.confidence_matrix = report.nemenyi_p;
    for (double& v : report.confidence_matrix.values) v = confidence(v);
    return report;
}

} // namespace irt
