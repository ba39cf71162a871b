#pragma once

#include "irt/data_model.hpp"

#include <span>
#include <vector>

namespace irt {

// One point of an Item Characteristic Curve.
struct IccSample {
    double theta = 0.0;
    double probability = 0.0;
};

struct ScorePair {
    double true_score = 0.0;
    double total_score = 0.0;
    bool normalized = false;
};

// P(correct | theta) = c + (1 - c) * sigmoid(a * (theta - b)).
// Stable for exponents up to +-700; at theta == b this is exactly (1 + c) / 2.
double prob_correct(double theta, const ItemParameters& item);

// Samples the ICC over a grid of abilities. The grid must be nondecreasing
// and nonempty; for a > 0 the samples are nondecreasing, reversed for a < 0.
std::vector<IccSample> icc_curve(const ItemParameters& item,
                                 std::span<const double> theta_grid);

// Fisher information of a 3PL item:
//   I(theta) = a^2 * (Q / P) * ((P - c) / (1 - c))^2,  Q = 1 - P.
// Nonnegative; tends to 0 as P approaches the guessing floor.
double item_information(double theta, const ItemParameters& item);

// Sum over items of P(correct | theta); mean when normalize is true.
double true_score(double theta, std::span<const ItemParameters> items, bool normalize);

// Correct items add P, wrong items subtract (1 - P). Satisfies the identity
// total == true_score - n_wrong (raw scale).
double total_score(double theta, std::span<const ItemParameters> items,
                   std::span<const int> responses, bool normalize);

ScorePair score_pair(double theta, std::span<const ItemParameters> items,
                     std::span<const int> responses, bool normalize);

// Equally spaced ability grid, [lo, hi] inclusive of both ends.
std::vector<double> theta_grid(double lo, double hi, double step);

} // namespace irt
