#include "irt/data_model.hpp"

#include "irt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace irt {

namespace {

void require_binary(int label, const std::string& what, const std::string& id) {
    if (label != 0 && label != 1) {
        std::ostringstream msg;
        msg << what << " for instance '" << id << "' is " << label
            << "; labels must be 0 or 1";
        throw validation_error(msg.str());
    }
}

void require_unique(const std::vector<std::string>& ids, const std::string& axis) {
    std::set<std::string> seen;
    for (const auto& id : ids) {
        if (!seen.insert(id).second) {
            throw validation_error("duplicate " + axis + " id '" + id + "'");
        }
    }
}

} // namespace

void validate(const ItemParameters& item) {
    if (!std::isfinite(item.a) || !std::isfinite(item.b)) {
        throw validation_error("item '" + item.item_id + "': a and b must be finite");
    }
    if (!(item.c >= 0.0 && item.c < 1.0)) {
        throw validation_error("item '" + item.item_id + "': c must lie in [0, 1)");
    }
}

ResponseMatrix ResponseMatrix::create(std::vector<std::string> respondent_ids,
                                      std::vector<std::string> item_ids,
                                      std::vector<std::uint8_t> cells) {
    if (cells.size() != respondent_ids.size() * item_ids.size()) {
        throw validation_error("response matrix cell count does not match id dimensions");
    }
    require_unique(respondent_ids, "respondent");
    require_unique(item_ids, "item");
    for (std::uint8_t v : cells) {
        if (v != 0 && v != 1) {
            throw validation_error("response matrix cells must be 0 or 1");
        }
    }
    ResponseMatrix m;
    m.respondent_ids_ = std::move(respondent_ids);
    m.item_ids_ = std::move(item_ids);
    m.cells_ = std::move(cells);
    return m;
}

double ResponseMatrix::row_mean(std::size_t respondent) const {
    const auto r = row(respondent);
    long sum = std::accumulate(r.begin(), r.end(), 0L);
    return static_cast<double>(sum) / static_cast<double>(r.size());
}

ResponseMatrix build_response_matrix(
    const std::vector<LabeledInstance>& labels,
    const std::map<std::string, std::vector<LabeledInstance>>& predictions) {
    if (labels.empty()) throw validation_error("no labeled instances given");
    if (predictions.empty()) throw validation_error("no model predictions given");

    std::map<std::string, int> truth;
    for (const auto& l : labels) {
        require_binary(l.label, "true label", l.instance_id);
        if (!truth.emplace(l.instance_id, l.label).second) {
            throw validation_error("duplicate instance id '" + l.instance_id + "' in labels");
        }
    }

    std::vector<std::string> item_ids;
    item_ids.reserve(truth.size());
    for (const auto& [id, _] : truth) item_ids.push_back(id);

    std::vector<std::string> respondent_ids;
    respondent_ids.reserve(predictions.size());
    for (const auto& [model_id, _] : predictions) respondent_ids.push_back(model_id);

    std::vector<std::uint8_t> cells(respondent_ids.size() * item_ids.size(), 0);
    for (std::size_t j = 0; j < respondent_ids.size(); ++j) {
        const std::string& model_id = respondent_ids[j];
        const auto& preds = predictions.at(model_id);
        std::map<std::string, int> by_id;
        for (const auto& p : preds) {
            require_binary(p.label, "prediction of model '" + model_id + "'", p.instance_id);
            if (!by_id.emplace(p.instance_id, p.label).second) {
                throw validation_error("model '" + model_id + "': duplicate prediction for instance '" +
                                       p.instance_id + "'");
            }
        }

        std::vector<std::string> missing, extra;
        for (const auto& [id, _] : truth) {
            if (!by_id.count(id)) missing.push_back(id);
        }
        for (const auto& [id, _] : by_id) {
            if (!truth.count(id)) extra.push_back(id);
        }
        if (!missing.empty() || !extra.empty()) {
            std::ostringstream msg;
            msg << "model '" << model_id << "' prediction set does not match the label set;";
            if (!missing.empty()) {
                msg << " missing:";
                for (const auto& id : missing) msg << " '" << id << "'";
                msg << ";";
            }
            if (!extra.empty()) {
                msg << " extra:";
                for (const auto& id : extra) msg << " '" << id << "'";
            }
            throw validation_error(msg.str());
        }

        for (std::size_t i = 0; i < item_ids.size(); ++i) {
            const std::string& id = item_ids[i];
            cells[j * item_ids.size() + i] =
                static_cast<std::uint8_t>(by_id.at(id) == truth.at(id) ? 1 : 0);
        }
    }

    return ResponseMatrix::create(std::move(respondent_ids), std::move(item_ids),
                                  std::move(cells));
}

ConfusionPartition ConfusionPartition::from_outcomes(const std::vector<BinaryOutcome>& outcomes) {
    if (outcomes.empty()) throw validation_error("cannot partition an empty outcome set");
    ConfusionPartition part;
    std::set<std::string> seen;
    for (const auto& o : outcomes) {
        require_binary(o.true_label, "true label", o.instance_id);
        require_binary(o.predicted_label, "predicted label", o.instance_id);
        if (!seen.insert(o.instance_id).second) {
            throw validation_error("duplicate instance id '" + o.instance_id + "' in outcomes");
        }
        if (o.true_label == 1 && o.predicted_label == 1) part.tp.push_back(o.instance_id);
        else if (o.true_label == 0 && o.predicted_label == 1) part.fp.push_back(o.instance_id);
        else if (o.true_label == 1 && o.predicted_label == 0) part.fn.push_back(o.instance_id);
        else part.tn.push_back(o.instance_id);
    }
    std::sort(part.tp.begin(), part.tp.end());
    std::sort(part.fp.begin(), part.fp.end());
    std::sort(part.fn.begin(), part.fn.end());
    std::sort(part.tn.begin(), part.tn.end());
    return part;
}

std::vector<BinaryOutcome> join_outcomes(const std::vector<LabeledInstance>& labels,
                                         const std::vector<LabeledInstance>& predictions,
                                         const std::string& model_id) {
    std::map<std::string, std::vector<LabeledInstance>> one{{model_id, predictions}};
    // Reuse the matrix builder's id agreement checks, then join directly.
    build_response_matrix(labels, one);

    std::map<std::string, int> by_id;
    for (const auto& p : predictions) by_id[p.instance_id] = p.label;

    std::vector<BinaryOutcome> outcomes;
    outcomes.reserve(labels.size());
    for (const auto& l : labels) {
        outcomes.push_back({l.instance_id, l.label, by_id.at(l.instance_id)});
    }
    std::sort(outcomes.begin(), outcomes.end(),
              [](const BinaryOutcome& x, const BinaryOutcome& y) {
                  return x.instance_id < y.instance_id;
              });
    return outcomes;
}

} // namespace irt
