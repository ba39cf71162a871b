#pragma once

#include "irt/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

namespace test_helpers {

inline double pearson(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

inline std::vector<double> fractional_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t pos = 0;
    while (pos < n) {
        std::size_t end = pos + 1;
        while (end < n && values[order[end]] == values[order[pos]]) ++end;
        const double avg = 0.5 * static_cast<double>(pos + 1 + end);
        for (std::size_t t = pos; t < end; ++t) ranks[order[t]] = avg;
        pos = end;
    }
    return ranks;
}

inline double spearman(std::span<const double> x, std::span<const double> y) {
    const auto rx = fractional_ranks(x);
    const auto ry = fractional_ranks(y);
    return pearson(rx, ry);
}

} // namespace test_helpers
