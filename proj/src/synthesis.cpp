#include "irt/synthesis.hpp"

#include "irt/errors.hpp"
#include "irt/parallel.hpp"
#include "irt/rng.hpp"
#include "irt/three_pl.hpp"

#include <cmath>
#include <cstdio>
#include <utility>

namespace irt {

namespace {

// Purpose tag separating the item-bank stream from respondent streams.
constexpr std::uint64_t kItemStreamTag = 0x17E6B00CULL;

std::string padded_id(const std::string& prefix, int index, int width) {
    std::string digits = std::to_string(index);
    if (static_cast<int>(digits.size()) < width) {
        digits.insert(0, width - digits.size(), '0');
    }
    return prefix + "_" + digits;
}

int id_width(int n) {
    int width = 1;
    for (int v = n - 1; v >= 10; v /= 10) ++width;
    return width < 3 ? 3 : width;
}

} // namespace

AbilityDistribution AbilityDistribution::normal(double mean, double sd) {
    AbilityDistribution d;
    d.kind = Kind::Normal;
    d.mean = mean;
    d.sd = sd;
    return d;
}

AbilityDistribution AbilityDistribution::uniform(double lo, double hi) {
    AbilityDistribution d;
    d.kind = Kind::Uniform;
    d.lo = lo;
    d.hi = hi;
    return d;
}

AbilityDistribution AbilityDistribution::explicit_values(std::vector<double> values) {
    AbilityDistribution d;
    d.kind = Kind::Explicit;
    d.values = std::move(values);
    return d;
}

Population generate_population(const PopulationSpec& spec) {
    if (spec.n_respondents < 1) {
        throw validation_error("population spec requires n_respondents >= 1");
    }
    if (spec.items.empty()) throw validation_error("population spec requires items");
    for (const auto& item : spec.items) validate(item);
    switch (spec.ability.kind) {
        case AbilityDistribution::Kind::Normal:
            if (!(spec.ability.sd > 0.0)) throw validation_error("ability sd must be > 0");
            break;
        case AbilityDistribution::Kind::Uniform:
            if (!(spec.ability.lo < spec.ability.hi)) {
                throw validation_error("ability uniform range must satisfy lo < hi");
            }
            break;
        case AbilityDistribution::Kind::Explicit:
            if (spec.ability.values.size() != static_cast<std::size_t>(spec.n_respondents)) {
                throw validation_error("explicit ability list must have one value per respondent");
            }
            break;
    }

    const int n = spec.n_respondents;
    const std::size_t k = spec.items.size();
    const int width = id_width(n);

    std::vector<std::string> respondent_ids(n);
    std::vector<std::string> item_ids(k);
    for (int j = 0; j < n; ++j) respondent_ids[j] = padded_id(spec.id_prefix, j, width);
    for (std::size_t i = 0; i < k; ++i) item_ids[i] = spec.items[i].item_id;

    std::vector<double> abilities(n, 0.0);
    std::vector<std::uint8_t> cells(static_cast<std::size_t>(n) * k, 0);

    const int threads = thread_count();
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(threads)
#endif
    for (int j = 0; j < n; ++j) {
        SplitMix64 rng(derive_seed(spec.seed, static_cast<std::uint64_t>(j)));
        double theta = 0.0;
        switch (spec.ability.kind) {
            case AbilityDistribution::Kind::Normal:
                theta = rng.next_normal(spec.ability.mean, spec.ability.sd);
                break;
            case AbilityDistribution::Kind::Uniform:
                theta = rng.next_uniform(spec.ability.lo, spec.ability.hi);
                break;
            case AbilityDistribution::Kind::Explicit:
                theta = spec.ability.values[j];
                break;
        }
        abilities[j] = theta;
        std::uint8_t* row = cells.data() + static_cast<std::size_t>(j) * k;
        for (std::size_t i = 0; i < k; ++i) {
            row[i] = rng.next_bernoulli(prob_correct(theta, spec.items[i])) ? 1 : 0;
        }
    }

    Population pop{ResponseMatrix::create(std::move(respondent_ids), std::move(item_ids),
                                          std::move(cells)),
                   std::move(abilities)};
    return pop;
}

std::vector<ItemParameters> sample_items(int n_items, double a_lo, double a_hi,
                                         double b_lo, double b_hi, double c_lo,
                                         double c_hi, std::uint64_t seed) {
    if (n_items < 1) throw validation_error("sample_items requires n_items >= 1");
    if (!(a_lo <= a_hi && b_lo <= b_hi && c_lo <= c_hi)) {
        throw validation_error("sample_items ranges must satisfy lo <= hi");
    }
    if (c_lo < 0.0 || c_hi >= 1.0) {
        throw validation_error("sample_items c range must lie in [0, 1)");
    }
    SplitMix64 rng(derive_seed(seed, kItemStreamTag));
    const int width = id_width(n_items);
    std::vector<ItemParameters> items(n_items);
    for (int i = 0; i < n_items; ++i) {
        items[i].item_id = padded_id("item", i, width);
        items[i].a = rng.next_uniform(a_lo, a_hi);
        items[i].b = rng.next_uniform(b_lo, b_hi);
        items[i].c = rng.next_uniform(c_lo, c_hi);
        items[i].converged = true;
    }
    return items;
}

} // namespace irt
