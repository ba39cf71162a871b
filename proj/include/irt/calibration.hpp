#pragma once

#include "irt/data_model.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace irt {

struct CalibrationConfig {
    int quadrature_points = 61;   // >= 11, equally spaced over [quad_lo, quad_hi]
    double quad_lo = -6.0;
    double quad_hi = 6.0;
    int max_em_iterations = 200;
    double em_tolerance = 1e-4;   // max absolute parameter change
    double c_upper = 0.999;
    double theta_min = -6.0;      // ability search bounds
    double theta_max = 6.0;
    std::uint64_t seed = 0;       // reserved for stochastic restarts; echoed in manifests

    void validate() const;
};

struct ExcludedItem {
    std::string item_id;
    std::string reason;
};

struct CalibrationResult {
    std::vector<ItemParameters> items;        // matrix column order, minus exclusions
    std::vector<ExcludedItem> excluded_items; // all-0 / all-1 columns
    double log_likelihood = 0.0;              // marginal, at the final parameters
    int iterations_used = 0;
    std::vector<double> log_likelihood_trace; // one entry per E-step; nondecreasing
};

// Equally spaced quadrature nodes with standard-normal prior weights
// (normalized to sum 1).
struct QuadratureGrid {
    std::vector<double> nodes;
    std::vector<double> weights;
    std::vector<double> log_weights;
};
QuadratureGrid normal_prior_grid(int points, double lo, double hi);

// One EM E-step at the given item parameters: per-respondent posterior
// ability weights on the grid plus the expected counts the M-step needs.
// Parallelized; results are bit-identical for any worker-thread count.
struct EStepResult {
    std::vector<double> posterior;        // n x Q, row-major
    std::vector<double> expected_n;       // Q: expected respondents per node
    std::vector<double> expected_correct; // K x Q, item-major
    double log_likelihood = 0.0;
};
EStepResult e_step(const ResponseMatrix& matrix, std::span<const ItemParameters> items,
                   const QuadratureGrid& grid);

// Marginal-maximum-likelihood 3PL calibration (Bock-Aitkin EM) over the full
// respondent population. Discrimination is unconstrained in sign; guessing is
// kept inside [0, c_upper]. Degenerate all-0/all-1 columns are excluded.
CalibrationResult calibrate_items(const ResponseMatrix& matrix,
                                  const CalibrationConfig& config);

// Bounded ML ability for one response vector: coarse scan plus golden-section
// refinement to |dtheta| < 1e-6. at_bound marks maximizers within 1e-6 of a bound.
AbilityEstimate estimate_ability(std::span<const int> responses,
                                 std::span<const ItemParameters> items,
                                 double theta_min, double theta_max,
                                 std::string respondent_id = {});

// Ability per matrix row against already-calibrated items. Columns are matched
// by item id; every item must exist in the matrix. Parallel over respondents.
std::vector<AbilityEstimate> estimate_abilities(const ResponseMatrix& matrix,
                                                std::span<const ItemParameters> items,
                                                double theta_min, double theta_max);

// Two-stage Birnbaum fit: calibrate items on the whole population, then score
// each respondent's ability against the calibrated items.
struct BirnbaumFit {
    CalibrationResult calibration;
    std::vector<AbilityEstimate> abilities;
};
BirnbaumFit birnbaum_fit(const ResponseMatrix& matrix, const CalibrationConfig& config);

} // namespace irt
