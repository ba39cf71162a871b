#pragma once

#include "irt/data_model.hpp"
#include "irt/three_pl.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace irt {

struct ConfusionCounts {
    long tp = 0, fp = 0, fn = 0, tn = 0;
    long total() const { return tp + fp + fn + tn; }
};

ConfusionCounts confusion_counts(const std::vector<BinaryOutcome>& outcomes);

// One model's row of the metric table. Metrics whose denominator was zero are
// reported as 0 and listed in `degenerate`.
struct MetricRow {
    double accuracy = 0.0;
    double f1 = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double auc = 0.0; // balanced accuracy of hard predictions
    double specificity = 0.0;
    std::optional<double> true_score;
    std::optional<double> total_score;
    std::vector<std::string> degenerate;
};

MetricRow classic_metrics(const ConfusionCounts& counts);

struct MetricTable {
    std::vector<std::string> model_ids;
    std::vector<MetricRow> rows;

    static const std::vector<std::string>& classic_metric_names();
    // Throws on unknown names; score columns only when present for all rows.
    double value(std::size_t row, const std::string& metric) const;
    bool has_metric(const std::string& metric) const;
};

// Competition ("1224") ranks, higher value = better, for one metric column.
std::vector<int> rank_models(const MetricTable& table, const std::string& metric);
std::vector<int> competition_ranks(std::span<const double> values);

enum class Cell { TP, FP, FN, TN };
const char* cell_name(Cell cell);

// Per-cell aggregate over the member items, evaluated at the model's ability.
struct CellSummary {
    Cell cell = Cell::TP;
    long n = 0;
    double mean_a = 0.0, mean_b = 0.0, mean_c = 0.0; // NaN when n == 0
    double mean_information = 0.0;                   // Fisher information at theta
    double total_score_contribution = 0.0;
    long negative_discrimination_count = 0;
};

struct IccBundleItem {
    std::string item_id;
    bool negative_discrimination = false;
    std::vector<IccSample> samples;
};

struct CellCurves {
    Cell cell = Cell::TP;
    std::vector<IccBundleItem> items;
    std::vector<IccSample> mean_curve; // empty when the cell is empty
};

struct GridSpec {
    double lo = -4.0;
    double hi = 4.0;
    double step = 0.05;
};

struct IccmcReport {
    std::array<CellSummary, 4> summaries; // TP, FP, FN, TN
    std::array<CellCurves, 4> curves;
    std::vector<std::string> dropped_instance_ids; // not among the calibrated items
    double theta = 0.0;                            // ability the summaries used
};

// Splits one model's calibrated items by its confusion cells and summarizes
// each cell. Partition ids without a calibrated item are dropped with notice.
// Contributions follow the Total Score: +P for hits (TP/TN), -(1-P) for
// misses (FP/FN), so the four cells sum to the raw total score.
IccmcReport iccmc_summaries(const ConfusionPartition& partition,
                            std::span<const ItemParameters> items,
                            const AbilityEstimate& ability,
                            const GridSpec& grid = {});

struct FilterResult {
    std::vector<std::string> retained; // sorted
    std::vector<std::string> removed;  // sorted, a < 0 strictly
};

FilterResult filter_negative_discrimination(std::span<const ItemParameters> items);

// Outcomes restricted to a retained-id set (for re-running metrics per the
// negative-discrimination filter).
std::vector<BinaryOutcome> restrict_outcomes(const std::vector<BinaryOutcome>& outcomes,
                                             const std::vector<std::string>& retained_ids);

// Histogram / scatter plot data for the calibrated item parameters, split by
// majority vs minority class.
struct ParameterHistogram {
    std::string parameter;           // "a", "b" or "c"
    std::array<double, 6> edges{};   // 5 bins
    std::array<long, 5> majority{};
    std::array<long, 5> minority{};
};

struct ParameterDistributions {
    ParameterHistogram a_hist, b_hist, c_hist;
    double mean_a = 0.0, mean_b = 0.0, mean_c = 0.0;
    double fraction_negative_a = 0.0;
    int majority_label = 0;

    struct ScatterPoint {
        std::string item_id;
        double b = 0.0, a = 0.0, c = 0.0;
        int label = 0;
    };
    std::vector<ScatterPoint> scatter; // sorted by item_id
};

ParameterDistributions parameter_distributions(std::span<const ItemParameters> items,
                                               const std::vector<LabeledInstance>& item_classes);

} // namespace irt
