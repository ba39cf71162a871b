#pragma once

#include "irt/data_model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace irt {

struct AbilityDistribution {
    enum class Kind { Normal, Uniform, Explicit };
    Kind kind = Kind::Normal;
    double mean = 0.0, sd = 1.0; // Normal
    double lo = -1.0, hi = 1.0;  // Uniform
    std::vector<double> values;  // Explicit, one per respondent

    static AbilityDistribution normal(double mean, double sd);
    static AbilityDistribution uniform(double lo, double hi);
    static AbilityDistribution explicit_values(std::vector<double> values);
};

struct PopulationSpec {
    int n_respondents = 0;
    AbilityDistribution ability;
    std::vector<ItemParameters> items;
    std::uint64_t seed = 0;
    std::string id_prefix = "resp";
};

struct Population {
    ResponseMatrix matrix;
    std::vector<double> abilities; // aligned with matrix.respondent_ids()
};

// Draws abilities from the spec's distribution and fills each cell with an
// independent Bernoulli draw at prob_correct(theta_j, item_i). Every
// respondent runs on its own derived sub-seed, so generation parallelizes
// without changing the output.
Population generate_population(const PopulationSpec& spec);

// Uniformly sampled item bank over the given (a, b, c) ranges; ids item_000...
std::vector<ItemParameters> sample_items(int n_items, double a_lo, double a_hi,
                                         double b_lo, double b_hi, double c_lo,
                                         double c_hi, std::uint64_t seed);

} // namespace irt
