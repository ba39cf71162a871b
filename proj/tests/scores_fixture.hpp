#pragma once

#include "irt/stats.hpp"

#include <array>
#include <string>
#include <vector>

namespace test_helpers {

// Ten binary classifiers evaluated on an 81-instance test split: six classic
// metrics plus True/Total Score per model, frozen as the fixture for the
// metric and rank-statistics checks.
struct FixtureModelRow {
    const char* model;
    double accuracy, f1, precision, recall, auc, specificity;
    double true_score, total_score;
};

inline const std::array<FixtureModelRow, 10>& fixture_rows() {
    static const std::array<FixtureModelRow, 10> rows{{
        {"RF", 0.802, 0.778, 0.778, 0.778, 0.800, 0.822, 0.7849, 0.5874},
        {"GB", 0.827, 0.781, 0.893, 0.694, 0.814, 0.933, 0.7851, 0.6122},
        {"BAG", 0.790, 0.761, 0.771, 0.750, 0.786, 0.822, 0.7853, 0.5754},
        {"ADA", 0.765, 0.725, 0.758, 0.694, 0.758, 0.822, 0.7603, 0.5258},
        {"KNN", 0.617, 0.523, 0.586, 0.472, 0.603, 0.733, 0.6692, 0.2865},
        {"DT", 0.728, 0.686, 0.706, 0.667, 0.722, 0.778, 0.7659, 0.4943},
        {"SVM", 0.790, 0.754, 0.788, 0.722, 0.783, 0.844, 0.7790, 0.5691},
        {"MLP", 0.802, 0.771, 0.794, 0.750, 0.797, 0.844, 0.7651, 0.5676},
        {"LDA", 0.802, 0.758, 0.833, 0.694, 0.792, 0.889, 0.7840, 0.5865},
        {"LSVM", 0.790, 0.773, 0.744, 0.806, 0.792, 0.778, 0.7651, 0.5552},
    }};
    return rows;
}

inline irt::ScoreTable fixture_score_table() {
    irt::ScoreTable table;
    table.treatments = {"accuracy", "f1",  "precision",  "recall",
                        "auc",      "specificity", "true_score", "total_score"};
    for (const auto& row : fixture_rows()) {
        table.blocks.push_back(row.model);
        table.values.insert(table.values.end(),
                            {row.accuracy, row.f1, row.precision, row.recall, row.auc,
                             row.specificity, row.true_score, row.total_score});
    }
    return table;
}

} // namespace test_helpers
