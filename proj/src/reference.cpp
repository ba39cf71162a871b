#include "irt/reference.hpp"

#include "irt/errors.hpp"
#include "irt/three_pl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace irt::reference {

EStepResult e_step(const ResponseMatrix& matrix, std::span<const ItemParameters> items,
                   const QuadratureGrid& grid) {
    if (items.size() != matrix.n_items()) {
        throw validation_error("reference e_step: item count must match matrix columns");
    }
    const std::size_t n = matrix.n_respondents();
    const std::size_t k = items.size();
    const std::size_t nq = grid.nodes.size();

    std::vector<double> log_p(k * nq), log_q(k * nq);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t q = 0; q < nq; ++q) {
            const double p = prob_correct(grid.nodes[q], items[i]);
            log_p[i * nq + q] = std::log(p);
            log_q[i * nq + q] = std::log1p(-p);
        }
    }

    EStepResult result;
    result.posterior.assign(n * nq, 0.0);
    result.expected_n.assign(nq, 0.0);
    result.expected_correct.assign(k * nq, 0.0);
    result.log_likelihood = 0.0;

    for (std::size_t j = 0; j < n; ++j) {
        double* row = result.posterior.data() + j * nq;
        for (std::size_t q = 0; q < nq; ++q) {
            double s = grid.log_weights[q];
            for (std::size_t i = 0; i < k; ++i) {
                s += matrix.at(j, i) ? log_p[i * nq + q] : log_q[i * nq + q];
            }
            row[q] = s;
        }
        const double max_log = *std::max_element(row, row + nq);
        double norm = 0.0;
        for (std::size_t q = 0; q < nq; ++q) {
            row[q] = std::exp(row[q] - max_log);
            norm += row[q];
        }
        for (std::size_t q = 0; q < nq; ++q) row[q] /= norm;
        result.log_likelihood += max_log + std::log(norm);

        for (std::size_t q = 0; q < nq; ++q) {
            result.expected_n[q] += row[q];
            for (std::size_t i = 0; i < k; ++i) {
                if (matrix.at(j, i)) result.expected_correct[i * nq + q] += row[q];
            }
        }
    }
    return result;
}

double ability_grid_argmax(std::span<const int> responses,
                           std::span<const ItemParameters> items,
                           double theta_min, double theta_max, double step) {
    if (responses.size() != items.size() || items.empty()) {
        throw validation_error("reference ability_grid_argmax: bad input sizes");
    }
    double best_t = theta_min;
    double best_ll = -std::numeric_limits<double>::infinity();
    for (double t = theta_min; t <= theta_max + 1e-12; t += step) {
        double ll = 0.0;
        for (std::size_t i = 0; i < items.size(); ++i) {
            const double p = prob_correct(t, items[i]);
            ll += responses[i] ? std::log(p) : std::log1p(-p);
        }
        if (ll > best_ll) {
            best_ll = ll;
            best_t = t;
        }
    }
    return best_t;
}

} // namespace irt::reference
