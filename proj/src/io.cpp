#include "irt/io.hpp"

#include "irt/errors.hpp"
#include "irt/version.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

namespace irt::io {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& text, const std::string& context) {
    double v = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc{} || res.ptr != end) {
        throw validation_error(context + ": cannot parse number '" + text + "'");
    }
    return v;
}

std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001B3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string hash_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw validation_error("cannot open file '" + path.string() + "'");
    std::ostringstream content;
    content << in.rdbuf();
    return fnv1a_hex(content.str());
}

namespace {

struct CsvRow {
    long line = 0;
    std::vector<std::string> fields;
};

// Minimal CSV: comma-separated, no quoting; '#' lines and blanks skipped.
std::vector<CsvRow> read_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open file '" + path.string() + "'");
    std::vector<CsvRow> rows;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        CsvRow row;
        row.line = line_no;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            if (comma == std::string::npos) {
                row.fields.push_back(line.substr(start));
                break;
            }
            row.fields.push_back(line.substr(start, comma - start));
            start = comma + 1;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void expect_header(const fs::path& path, const std::vector<CsvRow>& rows,
                   const std::vector<std::string>& expected) {
    if (rows.empty()) throw validation_error("file '" + path.string() + "' is empty");
    if (rows.front().fields != expected) {
        std::ostringstream msg;
        msg << "file '" << path.string() << "' line " << rows.front().line
            << ": expected header '";
        for (std::size_t i = 0; i < expected.size(); ++i) {
            if (i) msg << ",";
            msg << expected[i];
        }
        msg << "'";
        throw validation_error(msg.str());
    }
}

// Maps raw label symbols to {0,1} given the positive symbol.
std::vector<LabeledInstance> map_symbols(const fs::path& path,
                                         const std::vector<CsvRow>& rows,
                                         const std::string& positive_label,
                                         const std::string& column_name) {
    std::set<std::string> observed;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.fields.size() != 2) {
            std::ostringstream msg;
            msg << "file '" << path.string() << "' line " << row.line << ": expected 2 fields, got "
                << row.fields.size();
            throw validation_error(msg.str());
        }
        if (row.fields[0].empty()) {
            std::ostringstream msg;
            msg << "file '" << path.string() << "' line " << row.line << ": empty instance_id";
            throw validation_error(msg.str());
        }
        observed.insert(row.fields[1]);
    }
    if (rows.size() < 2) {
        throw validation_error("file '" + path.string() + "' has a header but no rows");
    }

    const auto list_observed = [&] {
        std::ostringstream s;
        for (const auto& sym : observed) s << " '" << sym << "'";
        return s.str();
    };
    if (observed.size() > 2) {
        throw validation_error("file '" + path.string() + "': more than two distinct " +
                               column_name + " symbols:" + list_observed());
    }
    if (observed.size() == 2 && !observed.count(positive_label)) {
        throw validation_error("file '" + path.string() + "': positive label '" + positive_label +
                               "' not among observed symbols:" + list_observed());
    }

    std::map<std::string, long> first_line;
    std::vector<LabeledInstance> out;
    out.reserve(rows.size() - 1);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        const auto [it, inserted] = first_line.emplace(row.fields[0], row.line);
        if (!inserted) {
            std::ostringstream msg;
            msg << "file '" << path.string() << "': duplicate instance id '" << row.fields[0]
                << "' (lines " << it->second << " and " << row.line << ")";
            throw validation_error(msg.str());
        }
        out.push_back({row.fields[0], row.fields[1] == positive_label ? 1 : 0});
    }
    return out;
}

void write_text(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw validation_error("cannot write file '" + path.string() + "'");
    out << content;
}

std::string hash_line(const std::string& input_hash) {
    return "# input_hash=" + input_hash + "\n";
}

} // namespace

std::vector<LabeledInstance> load_labels(const fs::path& path,
                                         const std::string& positive_label) {
    const auto rows = read_csv(path);
    expect_header(path, rows, {"instance_id", "label"});
    return map_symbols(path, rows, positive_label, "label");
}

std::pair<std::string, std::vector<LabeledInstance>> load_predictions(
    const fs::path& path, const std::string& positive_label,
    const std::optional<std::string>& model_id) {
    const auto rows = read_csv(path);
    expect_header(path, rows, {"instance_id", "prediction"});
    auto instances = map_symbols(path, rows, positive_label, "prediction");
    return {model_id.value_or(path.stem().string()), std::move(instances)};
}

std::vector<fs::path> expand_prediction_paths(const std::vector<fs::path>& paths) {
    std::vector<fs::path> files;
    for (const auto& p : paths) {
        if (fs::is_directory(p)) {
            std::vector<fs::path> dir_files;
            for (const auto& entry : fs::directory_iterator(p)) {
                if (entry.is_regular_file() && entry.path().extension() == ".csv") {
                    dir_files.push_back(entry.path());
                }
            }
            std::sort(dir_files.begin(), dir_files.end());
            files.insert(files.end(), dir_files.begin(), dir_files.end());
        } else {
            files.push_back(p);
        }
    }
    if (files.empty()) throw validation_error("no prediction files found");
    return files;
}

std::map<std::string, std::vector<LabeledInstance>> load_prediction_set(
    const std::vector<fs::path>& paths, const std::string& positive_label) {
    std::map<std::string, std::vector<LabeledInstance>> set;
    for (const auto& path : expand_prediction_paths(paths)) {
        auto [model_id, preds] = load_predictions(path, positive_label);
        if (!set.emplace(model_id, std::move(preds)).second) {
            throw validation_error("duplicate model id '" + model_id + "' among prediction files");
        }
    }
    return set;
}

void write_items_csv(const fs::path& path, std::span<const ItemParameters> items,
                     const std::string& input_hash) {
    std::ostringstream out;
    out << hash_line(input_hash) << "item_id,a,b,c,converged\n";
    for (const auto& item : items) {
        out << item.item_id << ',' << format_double(item.a) << ',' << format_double(item.b)
            << ',' << format_double(item.c) << ',' << (item.converged ? "true" : "false")
            << '\n';
    }
    write_text(path, out.str());
}

std::vector<ItemParameters> read_items_csv(const fs::path& path) {
    const auto rows = read_csv(path);
    expect_header(path, rows, {"item_id", "a", "b", "c", "converged"});
    std::vector<ItemParameters> items;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.fields.size() != 5) {
            std::ostringstream msg;
            msg << "file '" << path.string() << "' line " << row.line << ": expected 5 fields";
            throw validation_error(msg.str());
        }
        ItemParameters item;
        item.item_id = row.fields[0];
        item.a = parse_double(row.fields[1], path.string());
        item.b = parse_double(row.fields[2], path.string());
        item.c = parse_double(row.fields[3], path.string());
        if (row.fields[4] == "true") {
            item.converged = true;
        } else if (row.fields[4] == "false") {
            item.converged = false;
        } else {
            std::ostringstream msg;
            msg << "file '" << path.string() << "' line " << row.line
                << ": converged must be true or false";
            throw validation_error(msg.str());
        }
        validate(item);
        items.push_back(std::move(item));
    }
    if (items.empty()) throw validation_error("file '" + path.string() + "' holds no items");
    return items;
}

void write_abilities_csv(const fs::path& path, std::span<const AbilityEstimate> abilities,
                         const std::string& input_hash) {
    std::ostringstream out;
    out << hash_line(input_hash) << "model_id,theta,at_bound\n";
    for (const auto& est : abilities) {
        out << est.respondent_id << ',' << format_double(est.theta) << ','
            << (est.at_bound ? "true" : "false") << '\n';
    }
    write_text(path, out.str());
}

std::vector<AbilityEstimate> read_abilities_csv(const fs::path& path) {
    const auto rows = read_csv(path);
    expect_header(path, rows, {"model_id", "theta", "at_bound"});
    std::vector<AbilityEstimate> abilities;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.fields.size() != 3) {
            std::ostringstream msg;
            msg << "file '" << path.string() << "' line " << row.line << ": expected 3 fields";
            throw validation_error(msg.str());
        }
        AbilityEstimate est;
        est.respondent_id = row.fields[0];
        est.theta = parse_double(row.fields[1], path.string());
        est.at_bound = row.fields[2] == "true";
        abilities.push_back(std::move(est));
    }
    if (abilities.empty()) throw validation_error("file '" + path.string() + "' holds no abilities");
    return abilities;
}

void write_scores_csv(const fs::path& path, std::span<const ScoreRow> rows,
                      const std::string& input_hash) {
    std::ostringstream out;
    out << hash_line(input_hash) << "model_id,true_score,total_score,true_rank,total_rank\n";
    for (const auto& row : rows) {
        out << row.model_id << ',' << format_double(row.true_score) << ','
            << format_double(row.total_score) << ',' << row.true_rank << ',' << row.total_rank
            << '\n';
    }
    write_text(path, out.str());
}

void write_metrics_csv(const fs::path& path, const MetricTable& table,
                       const std::string& input_hash) {
    const auto& names = MetricTable::classic_metric_names();
    std::map<std::string, std::vector<int>> ranks;
    for (const auto& name : names) ranks[name] = rank_models(table, name);

    std::ostringstream out;
    out << hash_line(input_hash) << "model_id";
    for (const auto& name : names) out << ',' << name << ',' << name << "_rank";
    out << '\n';
    for (std::size_t i = 0; i < table.model_ids.size(); ++i) {
        out << table.model_ids[i];
        for (const auto& name : names) {
            out << ',' << format_double(table.value(i, name)) << ',' << ranks[name][i];
        }
        out << '\n';
    }
    write_text(path, out.str());
}

void write_response_matrix_csv(const fs::path& path, const ResponseMatrix& matrix,
                               const std::string& input_hash) {
    std::ostringstream out;
    out << hash_line(input_hash) << "respondent_id";
    for (const auto& id : matrix.item_ids()) out << ',' << id;
    out << '\n';
    for (std::size_t j = 0; j < matrix.n_respondents(); ++j) {
        out << matrix.respondent_ids()[j];
        for (std::size_t i = 0; i < matrix.n_items(); ++i) out << ',' << matrix.at(j, i);
        out << '\n';
    }
    write_text(path, out.str());
}

ResponseMatrix read_response_matrix_csv(const fs::path& path) {
    const auto rows = read_csv(path);
    if (rows.empty()) throw validation_error("file '" + path.string() + "' is empty");
    const auto& header = rows.front().fields;
    if (header.size() < 2 || header[0] != "respondent_id") {
        throw validation_error("file '" + path.string() +
                               "': expected header 'respondent_id,<item ids...>'");
    }
    std::vector<std::string> item_ids(header.begin() + 1, header.end());
    std::vector<std::string> respondent_ids;
    std::vector<std::uint8_t> cells;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.fields.size() != header.size()) {
            std::ostringstream msg;
            msg << "file '" << path.string() << "' line " << row.line << ": expected "
                << header.size() << " fields, got " << row.fields.size();
            throw validation_error(msg.str());
        }
        respondent_ids.push_back(row.fields[0]);
        for (std::size_t i = 1; i < row.fields.size(); ++i) {
            if (row.fields[i] == "0") {
                cells.push_back(0);
            } else if (row.fields[i] == "1") {
                cells.push_back(1);
            } else {
                std::ostringstream msg;
                msg << "file '" << path.string() << "' line " << row.line
                    << ": cells must be 0 or 1, got '" << row.fields[i] << "'";
                throw validation_error(msg.str());
            }
        }
    }
    return ResponseMatrix::create(std::move(respondent_ids), std::move(item_ids),
                                  std::move(cells));
}

ScoreTable read_score_table_csv(const fs::path& path) {
    const auto rows = read_csv(path);
    if (rows.empty()) throw validation_error("file '" + path.string() + "' is empty");
    const auto& header = rows.front().fields;
    if (header.size() < 4 || header[0] != "model_id") {
        throw validation_error("file '" + path.string() +
                               "': expected header 'model_id,<metric...>' with >= 3 metrics");
    }
    ScoreTable table;
    table.treatments.assign(header.begin() + 1, header.end());
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.fields.size() != header.size()) {
            std::ostringstream msg;
            msg << "file '" << path.string() << "' line " << row.line << ": expected "
                << header.size() << " fields, got " << row.fields.size();
            throw validation_error(msg.str());
        }
        table.blocks.push_back(row.fields[0]);
        for (std::size_t i = 1; i < row.fields.size(); ++i) {
            table.values.push_back(parse_double(row.fields[i], path.string()));
        }
    }
    table.validate();
    return table;
}

void write_labels_csv(const fs::path& path, std::span<const LabeledInstance> labels,
                      const std::string& input_hash) {
    std::ostringstream out;
    out << hash_line(input_hash) << "instance_id,label\n";
    for (const auto& l : labels) out << l.instance_id << ',' << l.label << '\n';
    write_text(path, out.str());
}

void write_predictions_csv(const fs::path& path, std::span<const LabeledInstance> predictions,
                           const std::string& input_hash) {
    std::ostringstream out;
    out << hash_line(input_hash) << "instance_id,prediction\n";
    for (const auto& p : predictions) out << p.instance_id << ',' << p.label << '\n';
    write_text(path, out.str());
}

void write_thetas_csv(const fs::path& path, std::span<const std::string> respondent_ids,
                      std::span<const double> thetas, const std::string& input_hash) {
    std::ostringstream out;
    out << hash_line(input_hash) << "respondent_id,theta\n";
    for (std::size_t j = 0; j < respondent_ids.size(); ++j) {
        out << respondent_ids[j] << ',' << format_double(thetas[j]) << '\n';
    }
    write_text(path, out.str());
}

void write_score_table_csv(const fs::path& path, const ScoreTable& table,
                           const std::string& input_hash) {
    std::ostringstream out;
    out << hash_line(input_hash) << "model_id";
    for (const auto& t : table.treatments) out << ',' << t;
    out << '\n';
    for (std::size_t i = 0; i < table.blocks.size(); ++i) {
        out << table.blocks[i];
        for (std::size_t j = 0; j < table.treatments.size(); ++j) {
            out << ',' << format_double(table.at(i, j));
        }
        out << '\n';
    }
    write_text(path, out.str());
}

namespace {

ordered_json samples_to_json(const std::vector<IccSample>& samples) {
    ordered_json arr = ordered_json::array();
    for (const auto& s : samples) arr.push_back({s.theta, s.probability});
    return arr;
}

ordered_json summary_to_json(const CellSummary& summary) {
    ordered_json j;
    j["n"] = summary.n;
    j["mean_a"] = summary.mean_a;
    j["mean_b"] = summary.mean_b;
    j["mean_c"] = summary.mean_c;
    j["mean_information"] = summary.mean_information;
    j["total_score_contribution"] = summary.total_score_contribution;
    j["negative_discrimination_count"] = summary.negative_discrimination_count;
    return j;
}

ordered_json histogram_to_json(const ParameterHistogram& hist) {
    ordered_json j;
    j["parameter"] = hist.parameter;
    j["edges"] = hist.edges;
    j["majority_counts"] = hist.majority;
    j["minority_counts"] = hist.minority;
    return j;
}

ordered_json matrix_to_json(const PairwiseMatrix& pm) {
    ordered_json rows = ordered_json::array();
    const std::size_t k = pm.treatments.size();
    for (std::size_t i = 0; i < k; ++i) {
        ordered_json row = ordered_json::array();
        for (std::size_t j = 0; j < k; ++j) row.push_back(pm.at(i, j));
        rows.push_back(row);
    }
    return rows;
}

} // namespace

void write_iccmc_json(const fs::path& path,
                      const std::vector<std::pair<std::string, IccmcReport>>& per_model,
                      const GridSpec& grid, const std::string& input_hash) {
    ordered_json root;
    root["input_hash"] = input_hash;
    root["grid"] = {{"lo", grid.lo}, {"hi", grid.hi}, {"step", grid.step}};
    root["information_evaluated_at"] = "model_theta";
    ordered_json models = ordered_json::array();
    for (const auto& [model_id, report] : per_model) {
        ordered_json m;
        m["model_id"] = model_id;
        m["theta"] = report.theta;
        ordered_json cells;
        for (std::size_t ci = 0; ci < report.summaries.size(); ++ci) {
            ordered_json cell = summary_to_json(report.summaries[ci]);
            ordered_json items = ordered_json::array();
            for (const auto& item : report.curves[ci].items) {
                ordered_json ji;
                ji["item_id"] = item.item_id;
                ji["negative_discrimination"] = item.negative_discrimination;
                ji["icc"] = samples_to_json(item.samples);
                items.push_back(std::move(ji));
            }
            cell["items"] = std::move(items);
            cell["mean_curve"] = samples_to_json(report.curves[ci].mean_curve);
            cells[cell_name(report.summaries[ci].cell)] = std::move(cell);
        }
        m["cells"] = std::move(cells);
        if (!report.dropped_instance_ids.empty()) {
            m["dropped_instance_ids"] = report.dropped_instance_ids;
        }
        models.push_back(std::move(m));
    }
    root["models"] = std::move(models);
    write_text(path, root.dump(2) + "\n");
}

void write_comparison_json(const fs::path& path, const TestReport& report,
                           const std::string& input_hash) {
    ordered_json root;
    root["input_hash"] = input_hash;
    root["friedman"] = {{"chi2", report.friedman.chi2},
                        {"p", report.friedman.p},
                        {"degenerate", report.friedman.degenerate},
                        {"tie_corrected", report.friedman.tie_corrected}};
    root["treatments"] = report.ranks.treatments;
    root["mean_ranks"] = report.mean_ranks;
    root["nemenyi_p"] = matrix_to_json(report.nemenyi_p);
    root["confidence"] = matrix_to_json(report.confidence_matrix);
    write_text(path, root.dump(2) + "\n");
}

void write_distributions_json(const fs::path& path, const ParameterDistributions& dist,
                              const std::string& input_hash) {
    ordered_json root;
    root["input_hash"] = input_hash;
    root["means"] = {{"a", dist.mean_a}, {"b", dist.mean_b}, {"c", dist.mean_c}};
    root["fraction_negative_a"] = dist.fraction_negative_a;
    root["majority_label"] = dist.majority_label;
    root["histograms"] = {histogram_to_json(dist.a_hist), histogram_to_json(dist.b_hist),
                          histogram_to_json(dist.c_hist)};
    ordered_json scatter = ordered_json::array();
    for (const auto& p : dist.scatter) {
        scatter.push_back({{"item_id", p.item_id}, {"b", p.b}, {"a", p.a}, {"c", p.c},
                           {"label", p.label}});
    }
    root["scatter"] = std::move(scatter);
    write_text(path, root.dump(2) + "\n");
}

std::string combined_input_hash(const RunManifest& manifest) {
    std::ostringstream blob;
    for (const auto& [path, hash] : manifest.inputs) blob << hash << '\n';
    blob << manifest.config_echo_json << '\n' << manifest.seed << '\n';
    return fnv1a_hex(blob.str());
}

std::string manifest_timestamp() {
    std::time_t t = 0;
    if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) {
        t = static_cast<std::time_t>(std::strtoll(env, nullptr, 10));
    } else {
        t = std::time(nullptr);
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_manifest_json(const fs::path& path, const RunManifest& manifest) {
    ordered_json root;
    root["tool"] = kToolName;
    root["version"] = kToolVersion;
    root["subcommand"] = manifest.subcommand;
    root["timestamp"] = manifest_timestamp();
    root["seed"] = manifest.seed;
    root["threads"] = manifest.threads;
    if (!manifest.generator_id.empty()) root["generator_id"] = manifest.generator_id;

    ordered_json inputs = ordered_json::array();
    for (const auto& [p, h] : manifest.inputs) {
        inputs.push_back({{"path", p}, {"hash", h}});
    }
    root["inputs"] = std::move(inputs);
    root["input_hash"] = manifest.input_hash;
    if (!manifest.config_echo_json.empty()) {
        root["config"] = ordered_json::parse(manifest.config_echo_json);
    }
    if (manifest.label_count) {
        const long n = *manifest.label_count;
        const long pos = manifest.label_positives.value_or(0);
        const double pos_pct = std::round(1000.0 * pos / n) / 10.0;
        const double neg_pct = std::round(1000.0 * (n - pos) / n) / 10.0;
        root["labels"] = {{"instances", n},
                          {"positives", pos},
                          {"negatives", n - pos},
                          {"positive_percent", pos_pct},
                          {"negative_percent", neg_pct}};
    }

    std::vector<std::string> warnings = manifest.warnings;
    std::sort(warnings.begin(), warnings.end());
    warnings.erase(std::unique(warnings.begin(), warnings.end()), warnings.end());
    root["warnings"] = warnings;

    std::vector<std::string> outputs = manifest.outputs;
    std::sort(outputs.begin(), outputs.end());
    root["outputs"] = outputs;

    write_text(path, root.dump(2) + "\n");
}

} // namespace irt::io
