#pragma once

#include "irt/calibration.hpp"
#include "irt/data_model.hpp"
#include "irt/evaluation.hpp"
#include "irt/stats.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace irt::io {

// Shortest representation that parses back to the same double.
std::string format_double(double v);
double parse_double(const std::string& text, const std::string& context);

// FNV-1a 64-bit content hashes; inputs are identified by these in manifests.
std::string fnv1a_hex(std::string_view bytes);
std::string hash_file(const std::filesystem::path& path);

// -------- tabular inputs --------

// labels CSV: header `instance_id,label`. The positive symbol maps to 1, the
// single remaining symbol to 0; anything else is rejected with the observed
// symbol list. Duplicate ids are rejected naming both line numbers.
std::vector<LabeledInstance> load_labels(const std::filesystem::path& path,
                                         const std::string& positive_label);

// predictions CSV: header `instance_id,prediction`; model id from the file
// stem unless given explicitly.
std::pair<std::string, std::vector<LabeledInstance>> load_predictions(
    const std::filesystem::path& path, const std::string& positive_label,
    const std::optional<std::string>& model_id = std::nullopt);

// Expands directories to their *.csv files, sorted; keeps files as-is.
std::vector<std::filesystem::path> expand_prediction_paths(
    const std::vector<std::filesystem::path>& paths);

std::map<std::string, std::vector<LabeledInstance>> load_prediction_set(
    const std::vector<std::filesystem::path>& paths, const std::string& positive_label);

// -------- tabular outputs (full round-trip precision) --------

void write_items_csv(const std::filesystem::path& path,
                     std::span<const ItemParameters> items, const std::string& input_hash);
std::vector<ItemParameters> read_items_csv(const std::filesystem::path& path);

void write_abilities_csv(const std::filesystem::path& path,
                         std::span<const AbilityEstimate> abilities,
                         const std::string& input_hash);
std::vector<AbilityEstimate> read_abilities_csv(const std::filesystem::path& path);

struct ScoreRow {
    std::string model_id;
    double true_score = 0.0;
    double total_score = 0.0;
    int true_rank = 0;
    int total_rank = 0;
};
void write_scores_csv(const std::filesystem::path& path, std::span<const ScoreRow> rows,
                      const std::string& input_hash);

// Metric table with a competition-rank column beside every metric.
void write_metrics_csv(const std::filesystem::path& path, const MetricTable& table,
                       const std::string& input_hash);

void write_response_matrix_csv(const std::filesystem::path& path, const ResponseMatrix& matrix,
                               const std::string& input_hash);
ResponseMatrix read_response_matrix_csv(const std::filesystem::path& path);

// Wide score table for `compare`: header `model_id,<metric...>`.
ScoreTable read_score_table_csv(const std::filesystem::path& path);
void write_score_table_csv(const std::filesystem::path& path, const ScoreTable& table,
                           const std::string& input_hash);

// Synthesis outputs reusable as pipeline inputs.
void write_labels_csv(const std::filesystem::path& path,
                      std::span<const LabeledInstance> labels, const std::string& input_hash);
void write_predictions_csv(const std::filesystem::path& path,
                           std::span<const LabeledInstance> predictions,
                           const std::string& input_hash);
void write_thetas_csv(const std::filesystem::path& path,
                      std::span<const std::string> respondent_ids,
                      std::span<const double> thetas, const std::string& input_hash);

// -------- JSON reports --------

void write_iccmc_json(const std::filesystem::path& path,
                      const std::vector<std::pair<std::string, IccmcReport>>& per_model,
                      const GridSpec& grid, const std::string& input_hash);

void write_comparison_json(const std::filesystem::path& path, const TestReport& report,
                           const std::string& input_hash);

void write_distributions_json(const std::filesystem::path& path,
                              const ParameterDistributions& dist,
                              const std::string& input_hash);

// -------- run manifest --------

struct RunManifest {
    std::string subcommand;
    std::vector<std::pair<std::string, std::string>> inputs; // (path, content hash)
    std::string input_hash; // combined content/config/seed hash, cited by every report
    std::string config_echo_json;     // serialized config as received
    std::uint64_t seed = 0;
    int threads = 1;
    std::string generator_id;         // synthesis runs only
    std::optional<long> label_count;
    std::optional<long> label_positives;
    std::vector<std::string> warnings; // deduplicated on write
    std::vector<std::string> outputs;  // file names, sorted on write
};

// Combined hash over input hashes + config echo + seed.
std::string combined_input_hash(const RunManifest& manifest);

// SOURCE_DATE_EPOCH (reproducible-build convention) wins over wall time.
std::string manifest_timestamp();

void write_manifest_json(const std::filesystem::path& path, const RunManifest& manifest);

} // namespace irt::io
