#include "irt/calibration.hpp"
#include "irt/data_model.hpp"
#include "irt/errors.hpp"
#include "irt/evaluation.hpp"
#include "irt/io.hpp"
#include "irt/parallel.hpp"
#include "irt/rng.hpp"
#include "irt/stats.hpp"
#include "irt/synthesis.hpp"
#include "irt/three_pl.hpp"
#include "irt/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr std::uint64_t kLabelStreamTag = 0x4C41424CULL;  // label draws
constexpr std::uint64_t kHeldOutStreamTag = 0x4556414CULL; // held-out population

struct CommonOptions {
    std::string labels_path;
    std::vector<std::string> prediction_paths;
    std::vector<std::string> eval_prediction_paths;
    std::string matrix_path;
    std::string items_path;
    std::string abilities_path;
    std::string table_path;
    std::string positive_label = "1";
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<std::string> model_id;
    std::string theta_bounds; // "lo,hi"
    std::string grid;         // "lo,hi,step"
};

std::pair<double, double> parse_bounds(const std::string& text) {
    std::istringstream in(text);
    double lo = 0.0, hi = 0.0;
    char comma = 0;
    if (!(in >> lo >> comma >> hi) || comma != ',' || !(lo < hi)) {
        throw irt::validation_error("expected --theta-bounds as 'lo,hi' with lo < hi");
    }
    return {lo, hi};
}

irt::GridSpec parse_grid(const std::string& text) {
    std::istringstream in(text);
    irt::GridSpec grid;
    char c1 = 0, c2 = 0;
    if (!(in >> grid.lo >> c1 >> grid.hi >> c2 >> grid.step) || c1 != ',' || c2 != ',' ||
        !(grid.lo <= grid.hi) || !(grid.step > 0.0)) {
        throw irt::validation_error("expected --grid as 'lo,hi,step'");
    }
    return grid;
}

json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw irt::validation_error("cannot open config file '" + path.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw irt::validation_error("config '" + path.string() + "': " + e.what());
    }
    return j;
}

irt::CalibrationConfig parse_calibration_config(const json& j) {
    irt::CalibrationConfig cfg;
    if (j.contains("quadrature_points")) cfg.quadrature_points = j.at("quadrature_points").get<int>();
    if (j.contains("quad_range")) {
        cfg.quad_lo = j.at("quad_range").at(0).get<double>();
        cfg.quad_hi = j.at("quad_range").at(1).get<double>();
    }
    if (j.contains("max_em_iterations")) cfg.max_em_iterations = j.at("max_em_iterations").get<int>();
    if (j.contains("em_tolerance")) cfg.em_tolerance = j.at("em_tolerance").get<double>();
    if (j.contains("c_upper")) cfg.c_upper = j.at("c_upper").get<double>();
    if (j.contains("ability_bounds")) {
        cfg.theta_min = j.at("ability_bounds").at(0).get<double>();
        cfg.theta_max = j.at("ability_bounds").at(1).get<double>();
    }
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.validate();
    return cfg;
}

std::string config_echo(const irt::CalibrationConfig& cfg) {
    ordered_json j;
    j["quadrature_points"] = cfg.quadrature_points;
    j["quad_range"] = {cfg.quad_lo, cfg.quad_hi};
    j["max_em_iterations"] = cfg.max_em_iterations;
    j["em_tolerance"] = cfg.em_tolerance;
    j["c_upper"] = cfg.c_upper;
    j["ability_bounds"] = {cfg.theta_min, cfg.theta_max};
    j["seed"] = cfg.seed;
    return j.dump();
}

// Everything a pipeline stage needs once inputs are loaded and hashed.
struct LoadedInputs {
    std::vector<irt::LabeledInstance> labels;
    std::map<std::string, std::vector<irt::LabeledInstance>> predictions;
    std::map<std::string, std::vector<irt::LabeledInstance>> eval_predictions;
    std::vector<irt::ItemParameters> items;
    std::vector<irt::AbilityEstimate> abilities;
    irt::io::RunManifest manifest;
};

void add_input(irt::io::RunManifest& manifest, const fs::path& path) {
    manifest.inputs.emplace_back(path.string(), irt::io::hash_file(path));
}

LoadedInputs load_inputs(const CommonOptions& opt, const std::string& subcommand,
                         bool want_labels, bool want_predictions, bool want_items,
                         bool want_abilities) {
    LoadedInputs in;
    in.manifest.subcommand = subcommand;
    in.manifest.threads = irt::thread_count();

    if (want_labels) {
        if (opt.labels_path.empty()) throw irt::validation_error("--labels is required");
        add_input(in.manifest, opt.labels_path);
        in.labels = irt::io::load_labels(opt.labels_path, opt.positive_label);
        long positives = 0;
        for (const auto& l : in.labels) positives += l.label;
        in.manifest.label_count = static_cast<long>(in.labels.size());
        in.manifest.label_positives = positives;
    }
    if (want_predictions) {
        if (opt.prediction_paths.empty()) throw irt::validation_error("--predictions is required");
        std::vector<fs::path> paths(opt.prediction_paths.begin(), opt.prediction_paths.end());
        const auto files = irt::io::expand_prediction_paths(paths);
        for (const auto& f : files) add_input(in.manifest, f);
        if (opt.model_id && files.size() == 1) {
            auto [id, preds] = irt::io::load_predictions(files[0], opt.positive_label, opt.model_id);
            in.predictions.emplace(id, std::move(preds));
        } else {
            in.predictions = irt::io::load_prediction_set(files, opt.positive_label);
        }
        if (!opt.eval_prediction_paths.empty()) {
            std::vector<fs::path> eval_paths(opt.eval_prediction_paths.begin(),
                                             opt.eval_prediction_paths.end());
            const auto eval_files = irt::io::expand_prediction_paths(eval_paths);
            for (const auto& f : eval_files) add_input(in.manifest, f);
            in.eval_predictions = irt::io::load_prediction_set(eval_files, opt.positive_label);
        }
    }
    if (want_items) {
        if (opt.items_path.empty()) throw irt::validation_error("--items is required");
        add_input(in.manifest, opt.items_path);
        in.items = irt::io::read_items_csv(opt.items_path);
    }
    if (want_abilities && !opt.abilities_path.empty()) {
        add_input(in.manifest, opt.abilities_path);
        in.abilities = irt::io::read_abilities_csv(opt.abilities_path);
    }
    return in;
}

irt::CalibrationConfig effective_config(const CommonOptions& opt) {
    irt::CalibrationConfig cfg;
    if (!opt.config_path.empty()) cfg = parse_calibration_config(read_json_file(opt.config_path));
    if (opt.seed) cfg.seed = *opt.seed;
    if (!opt.theta_bounds.empty()) {
        std::tie(cfg.theta_min, cfg.theta_max) = parse_bounds(opt.theta_bounds);
    }
    cfg.validate();
    return cfg;
}

void warn_excluded(irt::io::RunManifest& manifest, const irt::CalibrationResult& result) {
    for (const auto& ex : result.excluded_items) {
        manifest.warnings.push_back("excluded item '" + ex.item_id + "': " + ex.reason);
    }
}

void warn_at_bound(irt::io::RunManifest& manifest,
                   std::span<const irt::AbilityEstimate> abilities) {
    for (const auto& est : abilities) {
        if (est.at_bound) {
            manifest.warnings.push_back("ability clamped at search bound for '" +
                                        est.respondent_id + "'");
        }
    }
}

void warn_degenerate(irt::io::RunManifest& manifest, const irt::MetricTable& table) {
    for (std::size_t i = 0; i < table.model_ids.size(); ++i) {
        for (const auto& metric : table.rows[i].degenerate) {
            manifest.warnings.push_back("degenerate metric " + metric + " for model '" +
                                        table.model_ids[i] + "' (zero denominator)");
        }
    }
}

irt::ResponseMatrix matrix_from(const LoadedInputs& in,
                                const std::map<std::string, std::vector<irt::LabeledInstance>>& preds) {
    return irt::build_response_matrix(in.labels, preds);
}

// Response vectors aligned to the calibrated item order, per matrix row.
std::vector<std::vector<int>> aligned_responses(const irt::ResponseMatrix& matrix,
                                                std::span<const irt::ItemParameters> items) {
    std::map<std::string, std::size_t> column;
    for (std::size_t i = 0; i < matrix.n_items(); ++i) column[matrix.item_ids()[i]] = i;
    std::vector<std::size_t> cols;
    for (const auto& item : items) {
        const auto it = column.find(item.item_id);
        if (it == column.end()) {
            throw irt::validation_error("response matrix has no column for item '" +
                                        item.item_id + "'");
        }
        cols.push_back(it->second);
    }
    std::vector<std::vector<int>> rows(matrix.n_respondents());
    for (std::size_t j = 0; j < matrix.n_respondents(); ++j) {
        rows[j].resize(cols.size());
        for (std::size_t i = 0; i < cols.size(); ++i) rows[j][i] = matrix.at(j, cols[i]);
    }
    return rows;
}

std::vector<irt::io::ScoreRow> compute_scores(const irt::ResponseMatrix& matrix,
                                              std::span<const irt::ItemParameters> items,
                                              std::span<const irt::AbilityEstimate> abilities) {
    const auto responses = aligned_responses(matrix, items);
    const std::size_t n = matrix.n_respondents();
    std::vector<irt::io::ScoreRow> rows(n);
    std::vector<double> true_scores(n), total_scores(n);
    for (std::size_t j = 0; j < n; ++j) {
        rows[j].model_id = matrix.respondent_ids()[j];
        const auto pair = irt::score_pair(abilities[j].theta, items, responses[j], true);
        rows[j].true_score = true_scores[j] = pair.true_score;
        rows[j].total_score = total_scores[j] = pair.total_score;
    }
    const auto true_ranks = irt::competition_ranks(true_scores);
    const auto total_ranks = irt::competition_ranks(total_scores);
    for (std::size_t j = 0; j < n; ++j) {
        rows[j].true_rank = true_ranks[j];
        rows[j].total_rank = total_ranks[j];
    }
    return rows;
}

irt::MetricTable metric_table_for(const LoadedInputs& in,
                                  const std::map<std::string, std::vector<irt::LabeledInstance>>& preds) {
    irt::MetricTable table;
    for (const auto& [model_id, predictions] : preds) {
        const auto outcomes = irt::join_outcomes(in.labels, predictions, model_id);
        table.model_ids.push_back(model_id);
        table.rows.push_back(irt::classic_metrics(irt::confusion_counts(outcomes)));
    }
    return table;
}

void finalize_manifest(irt::io::RunManifest& manifest, const fs::path& out_dir) {
    manifest.outputs.push_back("manifest.json");
    irt::io::write_manifest_json(out_dir / "manifest.json", manifest);
}

// ---------------------------------------------------------------------------
// Subcommand drivers
// ---------------------------------------------------------------------------

int run_calibrate(const CommonOptions& opt) {
    const irt::CalibrationConfig cfg = effective_config(opt);
    LoadedInputs in;
    irt::ResponseMatrix matrix = [&] {
        if (!opt.matrix_path.empty()) {
            in.manifest.subcommand = "calibrate";
            in.manifest.threads = irt::thread_count();
            add_input(in.manifest, opt.matrix_path);
            return irt::io::read_response_matrix_csv(opt.matrix_path);
        }
        in = load_inputs(opt, "calibrate", true, true, false, false);
        return matrix_from(in, in.predictions);
    }();
    in.manifest.seed = cfg.seed;
    in.manifest.config_echo_json = config_echo(cfg);
    in.manifest.input_hash = irt::io::combined_input_hash(in.manifest);

    const auto result = irt::calibrate_items(matrix, cfg);
    warn_excluded(in.manifest, result);
    if (result.iterations_used >= cfg.max_em_iterations) {
        in.manifest.warnings.push_back("EM stopped at max_em_iterations before reaching tolerance");
    }

    const fs::path out_dir(opt.out_dir);
    irt::io::write_items_csv(out_dir / "items.csv", result.items, in.manifest.input_hash);
    in.manifest.outputs.push_back("items.csv");
    finalize_manifest(in.manifest, out_dir);
    return 0;
}

int run_ability(const CommonOptions& opt) {
    const irt::CalibrationConfig cfg = effective_config(opt);
    LoadedInputs in = load_inputs(opt, "ability", true, true, true, false);
    in.manifest.seed = cfg.seed;
    in.manifest.config_echo_json = config_echo(cfg);
    in.manifest.input_hash = irt::io::combined_input_hash(in.manifest);

    const auto matrix = matrix_from(in, in.predictions);
    const auto abilities =
        irt::estimate_abilities(matrix, in.items, cfg.theta_min, cfg.theta_max);
    warn_at_bound(in.manifest, abilities);

    const fs::path out_dir(opt.out_dir);
    irt::io::write_abilities_csv(out_dir / "abilities.csv", abilities, in.manifest.input_hash);
    in.manifest.outputs.push_back("abilities.csv");
    finalize_manifest(in.manifest, out_dir);
    return 0;
}

int run_score(const CommonOptions& opt) {
    const irt::CalibrationConfig cfg = effective_config(opt);
    LoadedInputs in = load_inputs(opt, "score", true, true, true, true);
    in.manifest.seed = cfg.seed;
    in.manifest.config_echo_json = config_echo(cfg);
    in.manifest.input_hash = irt::io::combined_input_hash(in.manifest);

    const auto matrix = matrix_from(in, in.predictions);
    std::vector<irt::AbilityEstimate> abilities = in.abilities;
    if (abilities.empty()) {
        abilities = irt::estimate_abilities(matrix, in.items, cfg.theta_min, cfg.theta_max);
        warn_at_bound(in.manifest, abilities);
    } else {
        std::map<std::string, irt::AbilityEstimate> by_id;
        for (const auto& est : abilities) by_id[est.respondent_id] = est;
        abilities.clear();
        for (const auto& id : matrix.respondent_ids()) {
            const auto it = by_id.find(id);
            if (it == by_id.end()) {
                throw irt::validation_error("abilities file has no entry for model '" + id + "'");
            }
            abilities.push_back(it->second);
        }
    }

    const auto rows = compute_scores(matrix, in.items, abilities);
    const fs::path out_dir(opt.out_dir);
    irt::io::write_scores_csv(out_dir / "scores.csv", rows, in.manifest.input_hash);
    in.manifest.outputs.push_back("scores.csv");
    finalize_manifest(in.manifest, out_dir);
    return 0;
}

int run_metrics(const CommonOptions& opt) {
    LoadedInputs in = load_inputs(opt, "metrics", true, true, false, false);
    in.manifest.input_hash = irt::io::combined_input_hash(in.manifest);

    const auto table = metric_table_for(in, in.predictions);
    warn_degenerate(in.manifest, table);

    const fs::path out_dir(opt.out_dir);
    irt::io::write_metrics_csv(out_dir / "metrics.csv", table, in.manifest.input_hash);
    in.manifest.outputs.push_back("metrics.csv");
    finalize_manifest(in.manifest, out_dir);
    return 0;
}

int run_iccmc(const CommonOptions& opt) {
    const irt::CalibrationConfig cfg = effective_config(opt);
    const irt::GridSpec grid = opt.grid.empty() ? irt::GridSpec{} : parse_grid(opt.grid);
    LoadedInputs in = load_inputs(opt, "iccmc", true, true, true, true);
    in.manifest.seed = cfg.seed;
    in.manifest.config_echo_json = config_echo(cfg);
    in.manifest.input_hash = irt::io::combined_input_hash(in.manifest);

    const auto matrix = matrix_from(in, in.predictions);
    std::map<std::string, irt::AbilityEstimate> ability_of;
    if (!in.abilities.empty()) {
        for (const auto& est : in.abilities) ability_of[est.respondent_id] = est;
    } else {
        const auto abilities =
            irt::estimate_abilities(matrix, in.items, cfg.theta_min, cfg.theta_max);
        warn_at_bound(in.manifest, abilities);
        for (const auto& est : abilities) ability_of[est.respondent_id] = est;
    }

    std::vector<std::pair<std::string, irt::IccmcReport>> reports;
    for (const auto& [model_id, predictions] : in.predictions) {
        const auto it = ability_of.find(model_id);
        if (it == ability_of.end()) {
            throw irt::validation_error("no ability available for model '" + model_id + "'");
        }
        const auto outcomes = irt::join_outcomes(in.labels, predictions, model_id);
        const auto partition = irt::ConfusionPartition::from_outcomes(outcomes);
        auto report = irt::iccmc_summaries(partition, in.items, it->second, grid);
        for (const auto& id : report.dropped_instance_ids) {
            in.manifest.warnings.push_back("instance '" + id +
                                           "' dropped from ICCMC (not calibrated)");
        }
        reports.emplace_back(model_id, std::move(report));
    }

    const fs::path out_dir(opt.out_dir);
    irt::io::write_iccmc_json(out_dir / "iccmc.json", reports, grid, in.manifest.input_hash);
    in.manifest.outputs.push_back("iccmc.json");
    finalize_manifest(in.manifest, out_dir);
    return 0;
}

int run_filter(const CommonOptions& opt) {
    LoadedInputs in = load_inputs(opt, "filter", true, true, true, false);
    in.manifest.input_hash = irt::io::combined_input_hash(in.manifest);

    const auto filter = irt::filter_negative_discrimination(in.items);
    irt::MetricTable table;
    for (const auto& [model_id, predictions] : in.predictions) {
        const auto outcomes = irt::join_outcomes(in.labels, predictions, model_id);
        const auto kept = irt::restrict_outcomes(outcomes, filter.retained);
        if (kept.empty()) {
            throw irt::validation_error("no instances left after filtering negative discrimination");
        }
        table.model_ids.push_back(model_id);
        table.rows.push_back(irt::classic_metrics(irt::confusion_counts(kept)));
    }
    warn_degenerate(in.manifest, table);
    for (const auto& id : filter.removed) {
        in.manifest.warnings.push_back("instance '" + id +
                                       "' removed by negative-discrimination filter");
    }

    const fs::path out_dir(opt.out_dir);
    irt::io::write_metrics_csv(out_dir / "filtered_metrics.csv", table, in.manifest.input_hash);
    in.manifest.outputs.push_back("filtered_metrics.csv");
    finalize_manifest(in.manifest, out_dir);
    return 0;
}

int run_compare(const CommonOptions& opt) {
    if (opt.table_path.empty()) throw irt::validation_error("--table is required");
    irt::io::RunManifest manifest;
    manifest.subcommand = "compare";
    manifest.threads = irt::thread_count();
    add_input(manifest, opt.table_path);
    manifest.input_hash = irt::io::combined_input_hash(manifest);

    const auto table = irt::io::read_score_table_csv(opt.table_path);
    const auto report = irt::compare_scores(table);
    if (report.friedman.degenerate) {
        manifest.warnings.push_back("Friedman test degenerate: no rank variance in any block");
    }

    const fs::path out_dir(opt.out_dir);
    irt::io::write_comparison_json(out_dir / "comparison.json", report, manifest.input_hash);
    manifest.outputs.push_back("comparison.json");
    finalize_manifest(manifest, out_dir);
    return 0;
}

// Synthetic population generation plus label/prediction derivation so the
// output feeds straight back into the pipeline.
int run_synth(const CommonOptions& opt) {
    if (opt.config_path.empty()) throw irt::validation_error("--config is required for synth");
    irt::io::RunManifest manifest;
    manifest.subcommand = "synth";
    manifest.threads = irt::thread_count();
    manifest.generator_id = irt::kGeneratorId;
    add_input(manifest, opt.config_path);

    const json spec_json = read_json_file(opt.config_path);
    irt::PopulationSpec spec;
    spec.n_respondents = spec_json.at("n_respondents").get<int>();
    spec.seed = spec_json.value("seed", std::uint64_t{0});
    if (opt.seed) spec.seed = *opt.seed;
    spec.id_prefix = spec_json.value("id_prefix", std::string("rand"));

    const auto parse_ability = [](const json& j) {
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "normal") {
            return irt::AbilityDistribution::normal(j.value("mean", 0.0), j.value("sd", 1.0));
        }
        if (kind == "uniform") {
            return irt::AbilityDistribution::uniform(j.at("lo").get<double>(),
                                                     j.at("hi").get<double>());
        }
        if (kind == "explicit") {
            return irt::AbilityDistribution::explicit_values(
                j.at("values").get<std::vector<double>>());
        }
        throw irt::validation_error("ability kind must be normal, uniform or explicit");
    };
    spec.ability = spec_json.contains("ability") ? parse_ability(spec_json.at("ability"))
                                                 : irt::AbilityDistribution::normal(0.0, 1.0);

    const json& items_json = spec_json.at("items");
    if (items_json.is_array()) {
        for (const auto& ij : items_json) {
            irt::ItemParameters item;
            item.item_id = ij.at("item_id").get<std::string>();
            item.a = ij.at("a").get<double>();
            item.b = ij.at("b").get<double>();
            item.c = ij.value("c", 0.0);
            spec.items.push_back(std::move(item));
        }
    } else {
        spec.items = irt::sample_items(
            items_json.at("n").get<int>(), items_json.at("a").at(0).get<double>(),
            items_json.at("a").at(1).get<double>(), items_json.at("b").at(0).get<double>(),
            items_json.at("b").at(1).get<double>(), items_json.at("c").at(0).get<double>(),
            items_json.at("c").at(1).get<double>(), spec.seed);
    }

    const int held_out = spec_json.value("held_out", 0);
    const double positive_rate = spec_json.value("positive_rate", 0.5);
    if (!(positive_rate >= 0.0 && positive_rate <= 1.0)) {
        throw irt::validation_error("positive_rate must lie in [0, 1]");
    }

    manifest.seed = spec.seed;
    manifest.config_echo_json = spec_json.dump();
    manifest.input_hash = irt::io::combined_input_hash(manifest);

    const auto population = irt::generate_population(spec);

    // True labels per item, then predictions consistent with each response row.
    irt::SplitMix64 label_rng(irt::derive_seed(spec.seed, kLabelStreamTag));
    std::vector<irt::LabeledInstance> labels;
    labels.reserve(spec.items.size());
    for (const auto& item : spec.items) {
        labels.push_back({item.item_id, label_rng.next_bernoulli(positive_rate) ? 1 : 0});
    }

    const fs::path out_dir(opt.out_dir);
    const std::string& hash = manifest.input_hash;
    irt::io::write_response_matrix_csv(out_dir / "responses.csv", population.matrix, hash);
    irt::io::write_thetas_csv(out_dir / "abilities_true.csv", population.matrix.respondent_ids(),
                              population.abilities, hash);
    irt::io::write_labels_csv(out_dir / "labels.csv", labels, hash);
    irt::io::write_items_csv(out_dir / "items_true.csv", spec.items, hash);
    manifest.outputs.insert(manifest.outputs.end(),
                            {"responses.csv", "abilities_true.csv", "labels.csv", "items_true.csv"});

    const auto emit_predictions = [&](const irt::ResponseMatrix& matrix, const fs::path& dir) {
        for (std::size_t j = 0; j < matrix.n_respondents(); ++j) {
            std::vector<irt::LabeledInstance> preds;
            preds.reserve(matrix.n_items());
            for (std::size_t i = 0; i < matrix.n_items(); ++i) {
                const int truth = labels[i].label;
                preds.push_back({matrix.item_ids()[i], matrix.at(j, i) ? truth : 1 - truth});
            }
            const std::string file = matrix.respondent_ids()[j] + ".csv";
            irt::io::write_predictions_csv(dir / file, preds, hash);
            manifest.outputs.push_back((dir.filename() / file).string());
        }
    };
    emit_predictions(population.matrix, out_dir / "predictions");

    if (held_out > 0) {
        irt::PopulationSpec eval_spec = spec;
        eval_spec.n_respondents = held_out;
        eval_spec.id_prefix = "eval";
        eval_spec.seed = irt::derive_seed(spec.seed, kHeldOutStreamTag);
        if (spec_json.contains("held_out_ability")) {
            eval_spec.ability = parse_ability(spec_json.at("held_out_ability"));
        } else if (eval_spec.ability.kind == irt::AbilityDistribution::Kind::Explicit) {
            throw irt::validation_error("held_out runs need held_out_ability when ability is explicit");
        }
        const auto eval_population = irt::generate_population(eval_spec);
        irt::io::write_thetas_csv(out_dir / "eval_abilities_true.csv",
                                  eval_population.matrix.respondent_ids(),
                                  eval_population.abilities, hash);
        manifest.outputs.push_back("eval_abilities_true.csv");
        emit_predictions(eval_population.matrix, out_dir / "eval_predictions");
    }

    finalize_manifest(manifest, out_dir);
    return 0;
}

// Full pipeline: calibrate on the population, evaluate the held-out models,
// emit every artifact.
int run_report(const CommonOptions& opt) {
    const irt::CalibrationConfig cfg = effective_config(opt);
    const irt::GridSpec grid = opt.grid.empty() ? irt::GridSpec{} : parse_grid(opt.grid);
    LoadedInputs in = load_inputs(opt, "report", true, true, false, false);
    in.manifest.seed = cfg.seed;
    in.manifest.config_echo_json = config_echo(cfg);
    in.manifest.input_hash = irt::io::combined_input_hash(in.manifest);
    const std::string& hash = in.manifest.input_hash;
    const fs::path out_dir(opt.out_dir);

    const auto& eval_preds = in.eval_predictions.empty() ? in.predictions : in.eval_predictions;

    // Stage 1: item calibration on the full population.
    const auto population_matrix = matrix_from(in, in.predictions);
    const auto calibration = irt::calibrate_items(population_matrix, cfg);
    warn_excluded(in.manifest, calibration);
    irt::io::write_items_csv(out_dir / "items.csv", calibration.items, hash);
    in.manifest.outputs.push_back("items.csv");

    // Stage 2: abilities of the evaluated models against those items.
    const auto eval_matrix = matrix_from(in, eval_preds);
    const auto abilities =
        irt::estimate_abilities(eval_matrix, calibration.items, cfg.theta_min, cfg.theta_max);
    warn_at_bound(in.manifest, abilities);
    irt::io::write_abilities_csv(out_dir / "abilities.csv", abilities, hash);
    in.manifest.outputs.push_back("abilities.csv");

    // IRT scores.
    const auto score_rows = compute_scores(eval_matrix, calibration.items, abilities);
    irt::io::write_scores_csv(out_dir / "scores.csv", score_rows, hash);
    in.manifest.outputs.push_back("scores.csv");

    // Classic metrics with ranks.
    irt::MetricTable table = metric_table_for(in, eval_preds);
    for (std::size_t i = 0; i < table.model_ids.size(); ++i) {
        table.rows[i].true_score = score_rows[i].true_score;
        table.rows[i].total_score = score_rows[i].total_score;
    }
    warn_degenerate(in.manifest, table);
    irt::io::write_metrics_csv(out_dir / "metrics.csv", table, hash);
    in.manifest.outputs.push_back("metrics.csv");

    // ICCMC bundles.
    std::vector<std::pair<std::string, irt::IccmcReport>> iccmc;
    std::size_t model_index = 0;
    for (const auto& [model_id, predictions] : eval_preds) {
        const auto outcomes = irt::join_outcomes(in.labels, predictions, model_id);
        const auto partition = irt::ConfusionPartition::from_outcomes(outcomes);
        auto report =
            irt::iccmc_summaries(partition, calibration.items, abilities[model_index], grid);
        for (const auto& id : report.dropped_instance_ids) {
            in.manifest.warnings.push_back("instance '" + id +
                                           "' dropped from ICCMC (not calibrated)");
        }
        iccmc.emplace_back(model_id, std::move(report));
        ++model_index;
    }
    irt::io::write_iccmc_json(out_dir / "iccmc.json", iccmc, grid, hash);
    in.manifest.outputs.push_back("iccmc.json");

    // Negative-discrimination filter and re-evaluated metrics.
    const auto filter = irt::filter_negative_discrimination(calibration.items);
    for (const auto& id : filter.removed) {
        in.manifest.warnings.push_back("instance '" + id +
                                       "' removed by negative-discrimination filter");
    }
    irt::MetricTable filtered;
    for (const auto& [model_id, predictions] : eval_preds) {
        const auto outcomes = irt::join_outcomes(in.labels, predictions, model_id);
        const auto kept = irt::restrict_outcomes(outcomes, filter.retained);
        if (kept.empty()) {
            throw irt::validation_error("no instances left after filtering negative discrimination");
        }
        filtered.model_ids.push_back(model_id);
        filtered.rows.push_back(irt::classic_metrics(irt::confusion_counts(kept)));
    }
    irt::io::write_metrics_csv(out_dir / "filtered_metrics.csv", filtered, hash);
    in.manifest.outputs.push_back("filtered_metrics.csv");

    // Statistical comparison over 6 classic metrics + both IRT scores.
    irt::ScoreTable score_table;
    score_table.blocks = table.model_ids;
    score_table.treatments = irt::MetricTable::classic_metric_names();
    score_table.treatments.push_back("true_score");
    score_table.treatments.push_back("total_score");
    for (std::size_t i = 0; i < table.model_ids.size(); ++i) {
        for (const auto& name : score_table.treatments) {
            score_table.values.push_back(table.value(i, name));
        }
    }
    irt::io::write_score_table_csv(out_dir / "score_table.csv", score_table, hash);
    in.manifest.outputs.push_back("score_table.csv");
    const auto comparison = irt::compare_scores(score_table);
    if (comparison.friedman.degenerate) {
        in.manifest.warnings.push_back("Friedman test degenerate: no rank variance in any block");
    }
    irt::io::write_comparison_json(out_dir / "comparison.json", comparison, hash);
    in.manifest.outputs.push_back("comparison.json");

    // Parameter histograms and scatter plot data.
    std::vector<irt::LabeledInstance> calibrated_classes;
    {
        std::map<std::string, int> label_of;
        for (const auto& l : in.labels) label_of[l.instance_id] = l.label;
        for (const auto& item : calibration.items) {
            calibrated_classes.push_back({item.item_id, label_of.at(item.item_id)});
        }
    }
    const auto distributions = irt::parameter_distributions(calibration.items, calibrated_classes);
    irt::io::write_distributions_json(out_dir / "distributions.json", distributions, hash);
    in.manifest.outputs.push_back("distributions.json");

    finalize_manifest(in.manifest, out_dir);
    return 0;
}

void emit_error(const std::string& type, const std::string& message) {
    ordered_json err;
    err["error"] = {{"type", type}, {"message", message}};
    std::cerr << err.dump() << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"IRT-based evaluation of binary classifiers"};
    app.set_version_flag("--version", std::string(irt::kToolVersion));
    app.require_subcommand(1);

    CommonOptions opt;
    const auto add_common = [&](CLI::App* cmd, bool io_flags = true) {
        if (io_flags) {
            cmd->add_option("--positive-label", opt.positive_label,
                            "Label symbol mapped to the positive class (default 1)");
        }
        cmd->add_option("--out", opt.out_dir, "Output directory (default .)");
        cmd->add_option("--config", opt.config_path, "JSON config file");
        cmd->add_option("--seed", opt.seed, "Seed override");
        cmd->add_option("--theta-bounds", opt.theta_bounds, "Ability search bounds 'lo,hi'");
    };

    auto* calibrate = app.add_subcommand("calibrate", "Estimate 3PL item parameters (EM)");
    calibrate->add_option("--labels", opt.labels_path, "Ground-truth labels CSV");
    calibrate->add_option("--predictions", opt.prediction_paths,
                          "Prediction CSV files or directories");
    calibrate->add_option("--matrix", opt.matrix_path, "Precomputed response matrix CSV");
    add_common(calibrate);

    auto* ability = app.add_subcommand("ability", "Estimate model abilities against items");
    ability->add_option("--items", opt.items_path, "Calibrated item parameters CSV")->required();
    ability->add_option("--labels", opt.labels_path, "Ground-truth labels CSV");
    ability->add_option("--predictions", opt.prediction_paths,
                        "Prediction CSV files or directories");
    ability->add_option("--model-id", opt.model_id, "Model id for a single prediction file");
    add_common(ability);

    auto* score = app.add_subcommand("score", "True/Total Scores per model");
    score->add_option("--items", opt.items_path, "Calibrated item parameters CSV")->required();
    score->add_option("--labels", opt.labels_path, "Ground-truth labels CSV");
    score->add_option("--predictions", opt.prediction_paths,
                      "Prediction CSV files or directories");
    score->add_option("--abilities", opt.abilities_path,
                      "Abilities CSV (estimated when absent)");
    add_common(score);

    auto* metrics = app.add_subcommand("metrics", "Classic confusion-matrix metrics with ranks");
    metrics->add_option("--labels", opt.labels_path, "Ground-truth labels CSV");
    metrics->add_option("--predictions", opt.prediction_paths,
                        "Prediction CSV files or directories");
    add_common(metrics);

    auto* iccmc = app.add_subcommand("iccmc", "Per-cell ICC bundles and summaries");
    iccmc->add_option("--items", opt.items_path, "Calibrated item parameters CSV")->required();
    iccmc->add_option("--labels", opt.labels_path, "Ground-truth labels CSV");
    iccmc->add_option("--predictions", opt.prediction_paths,
                      "Prediction CSV files or directories");
    iccmc->add_option("--abilities", opt.abilities_path,
                      "Abilities CSV (estimated when absent)");
    iccmc->add_option("--grid", opt.grid, "ICC grid 'lo,hi,step' (default -4,4,0.05)");
    add_common(iccmc);

    auto* filter = app.add_subcommand("filter", "Metrics after removing a<0 instances");
    filter->add_option("--items", opt.items_path, "Calibrated item parameters CSV")->required();
    filter->add_option("--labels", opt.labels_path, "Ground-truth labels CSV");
    filter->add_option("--predictions", opt.prediction_paths,
                       "Prediction CSV files or directories");
    add_common(filter);

    auto* compare = app.add_subcommand("compare", "Friedman + Nemenyi over a score table");
    compare->add_option("--table", opt.table_path, "Wide score table CSV")->required();
    add_common(compare, false);

    auto* synth = app.add_subcommand("synth", "Generate a synthetic respondent population");
    add_common(synth, false);

    auto* report = app.add_subcommand("report", "Full pipeline: calibrate, score, report");
    report->add_option("--labels", opt.labels_path, "Ground-truth labels CSV");
    report->add_option("--predictions", opt.prediction_paths,
                       "Population prediction CSVs or directories");
    report->add_option("--eval-predictions", opt.eval_prediction_paths,
                       "Held-out model predictions (population reused when absent)");
    report->add_option("--grid", opt.grid, "ICC grid 'lo,hi,step' (default -4,4,0.05)");
    add_common(report);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        emit_error("validation", e.what());
        return 1;
    }

    try {
        if (calibrate->parsed()) return run_calibrate(opt);
        if (ability->parsed()) return run_ability(opt);
        if (score->parsed()) return run_score(opt);
        if (metrics->parsed()) return run_metrics(opt);
        if (iccmc->parsed()) return run_iccmc(opt);
        if (filter->parsed()) return run_filter(opt);
        if (compare->parsed()) return run_compare(opt);
        if (synth->parsed()) return run_synth(opt);
        if (report->parsed()) return run_report(opt);
    } catch (const irt::numeric_error& e) {
        emit_error("numerical", e.what());
        return 2;
    } catch (const irt::validation_error& e) {
        emit_error("validation", e.what());
        return 1;
    } catch (const std::exception& e) {
        emit_error("validation", e.what());
        return 1;
    }
    return 0;
}
