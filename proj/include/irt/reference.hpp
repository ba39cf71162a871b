#pragma once

#include "irt/calibration.hpp"
#include "irt/data_model.hpp"

#include <span>

namespace irt::reference {

// Straight-line serial implementations of the hot kernels. They trade every
// optimization for obviousness and exist so the parallel versions have
// something independent to be checked and benchmarked against.

// Naive E-step: per respondent, evaluate the full Bernoulli likelihood at
// every quadrature node directly from the matrix.
EStepResult e_step(const ResponseMatrix& matrix, std::span<const ItemParameters> items,
                   const QuadratureGrid& grid);

// Dense-grid ability maximizer: argmax of the log-likelihood over
// theta_min..theta_max at the given step.
double ability_grid_argmax(std::span<const int> responses,
                           std::span<const ItemParameters> items,
                           double theta_min, double theta_max, double step);

} // namespace irt::reference
