#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace irt {

// A single ground-truth or predicted label. Positive class is always 1.
struct LabeledInstance {
    std::string instance_id;
    int label = 0; // {0, 1}
};

// Ground truth plus one model's prediction for the same instance.
struct BinaryOutcome {
    std::string instance_id;
    int true_label = 0;      // {0, 1}
    int predicted_label = 0; // {0, 1}
};

// Per-item 3PL parameters. Discrimination may legitimately be negative;
// guessing is a probability floor and must stay in [0, 1).
struct ItemParameters {
    std::string item_id;
    double a = 1.0; // discrimination
    double b = 0.0; // difficulty, same scale as ability
    double c = 0.0; // guessing
    bool converged = true;
};

// Throws validation_error when c is out of [0, 1) or a/b are not finite.
void validate(const ItemParameters& item);

// Latent ability of one respondent. at_bound marks estimates clamped at the
// search boundary (perfect or zero scores push the maximizer to infinity).
struct AbilityEstimate {
    std::string respondent_id;
    double theta = 0.0;
    bool at_bound = false;
};

// Dichotomous correctness matrix, respondents x items, row-major cells.
// Immutable after construction; safe to share across threads.
class ResponseMatrix {
public:
    // Validates dimensions, id uniqueness and cell values.
    static ResponseMatrix create(std::vector<std::string> respondent_ids,
                                 std::vector<std::string> item_ids,
                                 std::vector<std::uint8_t> cells);

    const std::vector<std::string>& respondent_ids() const { return respondent_ids_; }
    const std::vector<std::string>& item_ids() const { return item_ids_; }
    std::size_t n_respondents() const { return respondent_ids_.size(); }
    std::size_t n_items() const { return item_ids_.size(); }

    int at(std::size_t respondent, std::size_t item) const {
        return cells_[respondent * item_ids_.size() + item];
    }
    std::span<const std::uint8_t> row(std::size_t respondent) const {
        return {cells_.data() + respondent * item_ids_.size(), item_ids_.size()};
    }
    const std::vector<std::uint8_t>& cells() const { return cells_; }

    // Row mean == the respondent's accuracy over these items.
    double row_mean(std::size_t respondent) const;

private:
    ResponseMatrix() = default;
    std::vector<std::string> respondent_ids_;
    std::vector<std::string> item_ids_;
    std::vector<std::uint8_t> cells_;
};

// Builds the correctness matrix from ground truths and per-model predictions.
// Rows and columns are sorted by id, so input order never matters.
// cell[j][i] = 1 iff model j's prediction equals instance i's true label.
ResponseMatrix build_response_matrix(
    const std::vector<LabeledInstance>& labels,
    const std::map<std::string, std::vector<LabeledInstance>>& predictions);

// Instance-id sets of one model's confusion matrix. Pairwise disjoint,
// union is exactly the evaluated instance set; each vector sorted.
struct ConfusionPartition {
    std::vector<std::string> tp;
    std::vector<std::string> fp;
    std::vector<std::string> fn;
    std::vector<std::string> tn;

    static ConfusionPartition from_outcomes(const std::vector<BinaryOutcome>& outcomes);
};

// Joins labels with one model's predictions; rejects id mismatches.
std::vector<BinaryOutcome> join_outcomes(const std::vector<LabeledInstance>& labels,
                                         const std::vector<LabeledInstance>& predictions,
                                         const std::string& model_id);

} // namespace irt
