#include "irt/three_pl.hpp"

#include "irt/errors.hpp"
#include "irt/special.hpp"

#include <cmath>

namespace irt {

double prob_correct(double theta, const ItemParameters& item) {
    validate(item);
    if (!std::isfinite(theta)) throw validation_error("prob_correct requires finite theta");
    return item.c + (1.0 - item.c) * stable_sigmoid(item.a * (theta - item.b));
}

std::vector<IccSample> icc_curve(const ItemParameters& item,
                                 std::span<const double> theta_grid) {
    if (theta_grid.empty()) throw validation_error("icc_curve requires a nonempty grid");
    for (std::size_t i = 1; i < theta_grid.size(); ++i) {
        if (theta_grid[i] < theta_grid[i - 1]) {
            throw validation_error("icc_curve grid must be nondecreasing");
        }
    }
    std::vector<IccSample> samples;
    samples.reserve(theta_grid.size());
    for (double t : theta_grid) {
        samples.push_back({t, prob_correct(t, item)});
    }
    return samples;
}

double item_information(double theta, const ItemParameters& item) {
    const double p = prob_correct(theta, item);
    const double q = 1.0 - p;
    const double s = (p - item.c) / (1.0 - item.c); // = sigmoid(a(theta-b))
    return item.a * item.a * (q / p) * s * s;
}

double true_score(double theta, std::span<const ItemParameters> items, bool normalize) {
    if (items.empty()) throw validation_error("true_score requires at least one item");
    double sum = 0.0;
    for (const auto& item : items) sum += prob_correct(theta, item);
    return normalize ? sum / static_cast<double>(items.size()) : sum;
}

double total_score(double theta, std::span<const ItemParameters> items,
                   std::span<const int> responses, bool normalize) {
    if (items.empty()) throw validation_error("total_score requires at least one item");
    if (responses.size() != items.size()) {
        throw validation_error("total_score: responses and items must have equal length");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (responses[i] != 0 && responses[i] != 1) {
            throw validation_error("total_score responses must be 0 or 1");
        }
        const double p = prob_correct(theta, items[i]);
        sum += responses[i] ? p : -(1.0 - p);
    }
    return normalize ? sum / static_cast<double>(items.size()) : sum;
}

ScorePair score_pair(double theta, std::span<const ItemParameters> items,
                     std::span<const int> responses, bool normalize) {
    return {true_score(theta, items, normalize),
            total_score(theta, items, responses, normalize), normalize};
}

std::vector<double> theta_grid(double lo, double hi, double step) {
    if (!(step > 0.0) || !(lo <= hi)) {
        throw validation_error("theta_grid requires lo <= hi and step > 0");
    }
    std::vector<double> grid;
    const long n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    grid.reserve(n + 1);
    for (long k = 0; k <= n; ++k) grid.push_back(lo + step * static_cast<double>(k));
    return grid;
}

} // namespace irt
