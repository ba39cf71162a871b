#include "irt/evaluation.hpp"

#include "irt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace irt {

ConfusionCounts confusion_counts(const std::vector<BinaryOutcome>& outcomes) {
    const auto part = ConfusionPartition::from_outcomes(outcomes);
    return {static_cast<long>(part.tp.size()), static_cast<long>(part.fp.size()),
            static_cast<long>(part.fn.size()), static_cast<long>(part.tn.size())};
}

MetricRow classic_metrics(const ConfusionCounts& counts) {
    if (counts.tp < 0 || counts.fp < 0 || counts.fn < 0 || counts.tn < 0) {
        throw validation_error("confusion counts must be nonnegative");
    }
    if (counts.total() == 0) throw validation_error("confusion counts are all zero");

    MetricRow row;
    row.accuracy = static_cast<double>(counts.tp + counts.tn) / counts.total();

    const long pred_pos = counts.tp + counts.fp;
    const long actual_pos = counts.tp + counts.fn;
    const long actual_neg = counts.tn + counts.fp;

    if (pred_pos > 0) {
        row.precision = static_cast<double>(counts.tp) / pred_pos;
    } else {
        row.degenerate.push_back("precision");
    }
    if (actual_pos > 0) {
        row.recall = static_cast<double>(counts.tp) / actual_pos;
    } else {
        row.degenerate.push_back("recall");
    }
    if (row.precision + row.recall > 0.0) {
        row.f1 = 2.0 * row.precision * row.recall / (row.precision + row.recall);
    } else {
        row.degenerate.push_back("f1");
    }
    if (actual_neg > 0) {
        row.specificity = static_cast<double>(counts.tn) / actual_neg;
    } else {
        row.degenerate.push_back("specificity");
    }
    row.auc = 0.5 * (row.recall + row.specificity);
    if (actual_pos == 0 || actual_neg == 0) row.degenerate.push_back("auc");
    return row;
}

const std::vector<std::string>& MetricTable::classic_metric_names() {
    static const std::vector<std::string> names{"accuracy", "f1",  "precision",
                                                "recall",   "auc", "specificity"};
    return names;
}

bool MetricTable::has_metric(const std::string& metric) const {
    const auto& classic = classic_metric_names();
    if (std::find(classic.begin(), classic.end(), metric) != classic.end()) return true;
    if (metric == "true_score") {
        return std::all_of(rows.begin(), rows.end(),
                           [](const MetricRow& r) { return r.true_score.has_value(); });
    }
    if (metric == "total_score") {
        return std::all_of(rows.begin(), rows.end(),
                           [](const MetricRow& r) { return r.total_score.has_value(); });
    }
    return false;
}

double MetricTable::value(std::size_t row, const std::string& metric) const {
    const MetricRow& r = rows.at(row);
    if (metric == "accuracy") return r.accuracy;
    if (metric == "f1") return r.f1;
    if (metric == "precision") return r.precision;
    if (metric == "recall") return r.recall;
    if (metric == "auc") return r.auc;
    if (metric == "specificity") return r.specificity;
    if (metric == "true_score" && r.true_score) return *r.true_score;
    if (metric == "total_score" && r.total_score) return *r.total_score;
    throw validation_error("unknown metric '" + metric + "'");
}

std::vector<int> competition_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return values[x] > values[y]; });
    std::vector<int> ranks(n, 0);
    for (std::size_t pos = 0; pos < n; ++pos) {
        if (pos > 0 && values[order[pos]] == values[order[pos - 1]]) {
            ranks[order[pos]] = ranks[order[pos - 1]];
        } else {
            ranks[order[pos]] = static_cast<int>(pos) + 1;
        }
    }
    return ranks;
}

std::vector<int> rank_models(const MetricTable& table, const std::string& metric) {
    if (!table.has_metric(metric)) {
        throw validation_error("metric '" + metric + "' is not present for all models");
    }
    std::vector<double> values(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) values[i] = table.value(i, metric);
    return competition_ranks(values);
}

const char* cell_name(Cell cell) {
    switch (cell) {
        case Cell::TP: return "TP";
        case Cell::FP: return "FP";
        case Cell::FN: return "FN";
        case Cell::TN: return "TN";
    }
    return "?";
}

IccmcReport iccmc_summaries(const ConfusionPartition& partition,
                            std::span<const ItemParameters> items,
                            const AbilityEstimate& ability, const GridSpec& grid) {
    std::map<std::string, const ItemParameters*> by_id;
    for (const auto& item : items) by_id[item.item_id] = &item;

    const std::vector<double> grid_points = theta_grid(grid.lo, grid.hi, grid.step);

    IccmcReport report;
    report.theta = ability.theta;

    const std::array<std::pair<Cell, const std::vector<std::string>*>, 4> cells{{
        {Cell::TP, &partition.tp},
        {Cell::FP, &partition.fp},
        {Cell::FN, &partition.fn},
        {Cell::TN, &partition.tn},
    }};

    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
        const auto [cell, ids] = cells[ci];
        const bool is_hit = (cell == Cell::TP || cell == Cell::TN);

        CellSummary summary;
        summary.cell = cell;
        CellCurves curves;
        curves.cell = cell;

        double sum_a = 0.0, sum_b = 0.0, sum_c = 0.0, sum_info = 0.0;
        std::vector<double> mean_curve(grid_points.size(), 0.0);

        for (const auto& id : *ids) {
            const auto it = by_id.find(id);
            if (it == by_id.end()) {
                report.dropped_instance_ids.push_back(id);
                continue;
            }
            const ItemParameters& item = *it->second;
            ++summary.n;
            sum_a += item.a;
            sum_b += item.b;
            sum_c += item.c;
            sum_info += item_information(ability.theta, item);
            const double p = prob_correct(ability.theta, item);
            summary.total_score_contribution += is_hit ? p : -(1.0 - p);
            if (item.a < 0.0) ++summary.negative_discrimination_count;

            IccBundleItem bundle;
            bundle.item_id = id;
            bundle.negative_discrimination = item.a < 0.0;
            bundle.samples = icc_curve(item, grid_points);
            for (std::size_t g = 0; g < grid_points.size(); ++g) {
                mean_curve[g] += bundle.samples[g].probability;
            }
            curves.items.push_back(std::move(bundle));
        }

        if (summary.n > 0) {
            summary.mean_a = sum_a / summary.n;
            summary.mean_b = sum_b / summary.n;
            summary.mean_c = sum_c / summary.n;
            summary.mean_information = sum_info / summary.n;
            curves.mean_curve.reserve(grid_points.size());
            for (std::size_t g = 0; g < grid_points.size(); ++g) {
                curves.mean_curve.push_back({grid_points[g], mean_curve[g] / summary.n});
            }
        } else {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            summary.mean_a = summary.mean_b = summary.mean_c = nan;
            summary.mean_information = nan;
        }

        report.summaries[ci] = summary;
        report.curves[ci] = std::move(curves);
    }

    std::sort(report.dropped_instance_ids.begin(), report.dropped_instance_ids.end());
    return report;
}

FilterResult filter_negative_discrimination(std::span<const ItemParameters> items) {
    FilterResult result;
    for (const auto& item : items) {
        if (item.a < 0.0) {
            result.removed.push_back(item.item_id);
        } else {
            result.retained.push_back(item.item_id);
        }
    }
    std::sort(result.retained.begin(), result.retained.end());
    std::sort(result.removed.begin(), result.removed.end());
    return result;
}

std::vector<BinaryOutcome> restrict_outcomes(const std::vector<BinaryOutcome>& outcomes,
                                             const std::vector<std::string>& retained_ids) {
    const std::set<std::string> keep(retained_ids.begin(), retained_ids.end());
    std::vector<BinaryOutcome> subset;
    for (const auto& o : outcomes) {
        if (keep.count(o.instance_id)) subset.push_back(o);
    }
    return subset;
}

namespace {

ParameterHistogram make_histogram(const std::string& name, std::span<const double> values,
                                  std::span<const int> labels, int majority_label) {
    ParameterHistogram hist;
    hist.parameter = name;
    const auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
    double lo = *min_it;
    double hi = *max_it;
    if (lo == hi) { // all values identical: center one bin on the value
        lo -= 0.5;
        hi += 0.5;
    }
    const double width = (hi - lo) / 5.0;
    for (int e = 0; e <= 5; ++e) hist.edges[e] = lo + width * e;
    for (std::size_t i = 0; i < values.size(); ++i) {
        int bin = static_cast<int>((values[i] - lo) / width);
        bin = std::clamp(bin, 0, 4);
        if (labels[i] == majority_label) {
            ++hist.majority[bin];
        } else {
            ++hist.minority[bin];
        }
    }
    return hist;
}

} // namespace

ParameterDistributions parameter_distributions(std::span<const ItemParameters> items,
                                               const std::vector<LabeledInstance>& item_classes) {
    if (items.empty()) throw validation_error("parameter_distributions requires items");
    std::map<std::string, int> class_of;
    for (const auto& c : item_classes) {
        if (c.label != 0 && c.label != 1) {
            throw validation_error("class labels must be 0 or 1");
        }
        class_of[c.instance_id] = c.label;
    }

    std::vector<double> a_vals, b_vals, c_vals;
    std::vector<int> labels;
    long n_positive = 0;
    ParameterDistributions dist;
    for (const auto& item : items) {
        const auto it = class_of.find(item.item_id);
        if (it == class_of.end()) {
            throw validation_error("no class label for item '" + item.item_id + "'");
        }
        a_vals.push_back(item.a);
        b_vals.push_back(item.b);
        c_vals.push_back(item.c);
        labels.push_back(it->second);
        n_positive += it->second;
        dist.scatter.push_back({item.item_id, item.b, item.a, item.c, it->second});
    }
    std::sort(dist.scatter.begin(), dist.scatter.end(),
              [](const auto& x, const auto& y) { return x.item_id < y.item_id; });

    const long n = static_cast<long>(items.size());
    dist.majority_label = (2 * n_positive > n) ? 1 : 0;

    double sum_a = 0.0, sum_b = 0.0, sum_c = 0.0;
    long neg_a = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        sum_a += a_vals[i];
        sum_b += b_vals[i];
        sum_c += c_vals[i];
        if (a_vals[i] < 0.0) ++neg_a;
    }
    dist.mean_a = sum_a / n;
    dist.mean_b = sum_b / n;
    dist.mean_c = sum_c / n;
    dist.fraction_negative_a = static_cast<double>(neg_a) / n;

    dist.a_hist = make_histogram("a", a_vals, labels, dist.majority_label);
    dist.b_hist = make_histogram("b", b_vals, labels, dist.majority_label);
    dist.c_hist = make_histogram("c", c_vals, labels, dist.majority_label);
    return dist;
}

} // namespace irt
