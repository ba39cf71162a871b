// Acceptance checklist for the release build. Each criterion prints exactly
// one PASS/FAIL line; the process exits nonzero if any criterion fails.

#include "irt/calibration.hpp"
#include "irt/data_model.hpp"
#include "irt/evaluation.hpp"
#include "irt/io.hpp"
#include "irt/parallel.hpp"
#include "irt/rng.hpp"
#include "irt/special.hpp"
#include "irt/stats.hpp"
#include "irt/synthesis.hpp"
#include "irt/three_pl.hpp"

#include "helpers.hpp"
#include "scores_fixture.hpp"

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;
std::vector<std::vector<double>> g_em_traces; // every EM run observed

void report(int number, const std::string& name, bool pass, const std::string& detail) {
    std::printf("%s  %d. %s  [%s]\n", pass ? "PASS" : "FAIL", number, name.c_str(),
                detail.c_str());
    if (!pass) ++g_failures;
}

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

// ---------------------------------------------------------------------------
// 1. Classic metric reproduction of the fixture GB and RF rows.
// ---------------------------------------------------------------------------
void criterion_metrics() {
    const auto gb = irt::classic_metrics({25, 3, 11, 42});
    const auto rf = irt::classic_metrics({28, 8, 8, 37});
    const double gb_expected[6] = {0.827, 0.781, 0.893, 0.694, 0.814, 0.933};
    const double rf_expected[6] = {0.802, 0.778, 0.778, 0.778, 0.800, 0.822};
    const double gb_actual[6] = {gb.accuracy, gb.f1,  gb.precision,
                                 gb.recall,   gb.auc, gb.specificity};
    const double rf_actual[6] = {rf.accuracy, rf.f1,  rf.precision,
                                 rf.recall,   rf.auc, rf.specificity};
    double worst = 0.0;
    for (int i = 0; i < 6; ++i) {
        worst = std::max(worst, std::fabs(gb_actual[i] - gb_expected[i]));
        worst = std::max(worst, std::fabs(rf_actual[i] - rf_expected[i]));
    }
    report(1, "metric reproduction (GB and RF rows, +-0.0005)", worst < 0.0005,
           fmt("max deviation %.6f", worst));
}

// ---------------------------------------------------------------------------
// 2. Score identity against the fixture table and on random inputs.
// ---------------------------------------------------------------------------
void criterion_score_identity() {
    double worst_table = 0.0;
    for (const auto& row : test_helpers::fixture_rows()) {
        const double gap = (row.true_score - row.total_score) - (1.0 - row.accuracy);
        worst_table = std::max(worst_table, std::fabs(gap));
    }

    irt::SplitMix64 rng(2025);
    double worst_identity = 0.0;
    for (int rep = 0; rep < 2000; ++rep) {
        const int n = 1 + static_cast<int>(rng.next_u64() % 60);
        std::vector<irt::ItemParameters> items;
        std::vector<int> responses;
        int wrong = 0;
        for (int i = 0; i < n; ++i) {
            items.push_back({"i" + std::to_string(i), rng.next_uniform(-2.5, 2.5),
                             rng.next_uniform(-3.0, 3.0), rng.next_uniform(0.0, 0.6), true});
            const int u = rng.next_bernoulli(0.6) ? 1 : 0;
            responses.push_back(u);
            wrong += 1 - u;
        }
        const double theta = rng.next_uniform(-4.0, 4.0);
        const auto pair = irt::score_pair(theta, items, responses, true);
        const double gap =
            pair.total_score - (pair.true_score - static_cast<double>(wrong) / n);
        worst_identity = std::max(worst_identity, std::fabs(gap));
    }

    report(2, "score identity (tables +-0.0015; random inputs 1e-12)",
           worst_table < 0.0015 && worst_identity < 1e-12,
           fmt("table gap %.5f, identity gap %.2e", worst_table, worst_identity));
}

// ---------------------------------------------------------------------------
// 3. Friedman + Nemenyi on the fixture 10x8 table.
// ---------------------------------------------------------------------------
void criterion_comparison() {
    const auto start = Clock::now();
    const auto table = test_helpers::fixture_score_table();
    const auto result = irt::compare_scores(table);
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();

    const auto& treatments = result.nemenyi_p.treatments;
    const auto idx = [&](const std::string& name) {
        for (std::size_t i = 0; i < treatments.size(); ++i) {
            if (treatments[i] == name) return i;
        }
        return std::size_t{999};
    };
    const std::size_t total = idx("total_score");
    const std::size_t trues = idx("true_score");

    bool pass = result.friedman.p < 1e-7;
    pass = pass && std::fabs(result.nemenyi_p.at(total, idx("f1")) - 0.4775) <= 0.05;
    pass = pass && std::fabs(result.nemenyi_p.at(total, idx("recall")) - 0.7516) <= 0.05;
    for (const char* m : {"accuracy", "precision", "auc", "specificity"}) {
        pass = pass && result.nemenyi_p.at(total, idx(m)) < 0.05;
    }
    for (const char* m : {"accuracy", "f1", "precision", "recall", "auc", "specificity"}) {
        pass = pass && result.nemenyi_p.at(trues, idx(m)) > 0.05;
    }
    pass = pass && secs < 1.0;

    // Same table through the CLI compare subcommand.
    const fs::path work =
        fs::temp_directory_path() / ("irt_compare_" + std::to_string(::getpid()));
    fs::create_directories(work);
    irt::io::write_score_table_csv(work / "table.csv", table, "0");
    const std::string cmd = "cd " + work.string() + " && " IRT_ARENA_CLI_PATH
                            " compare --table table.csv --out . >/dev/null 2>&1";
    pass = pass && std::system(cmd.c_str()) == 0;
    {
        std::ifstream in(work / "comparison.json");
        std::ostringstream content;
        content << in.rdbuf();
        const std::string json = content.str();
        pass = pass && json.find("\"nemenyi_p\"") != std::string::npos &&
               json.find("\"confidence\"") != std::string::npos &&
               json.find("1.9761") != std::string::npos; // friedman p mantissa
    }
    fs::remove_all(work);

    report(3, "statistical comparison (Friedman p, Nemenyi pattern, CLI compare)", pass,
           fmt("p=%.2e, p(total,f1)=%.4f, p(total,recall)=%.4f, %.2f s", result.friedman.p,
               result.nemenyi_p.at(total, idx("f1")),
               result.nemenyi_p.at(total, idx("recall")), secs));
}

// ---------------------------------------------------------------------------
// 4. Studentized range accuracy.
// ---------------------------------------------------------------------------
void criterion_studentized_range() {
    double worst_closed = 0.0;
    for (double q = 0.0; q <= 8.0; q += 0.01) {
        const double closed = 2.0 * (1.0 - irt::normal_cdf(q * M_SQRT1_2));
        worst_closed =
            std::max(worst_closed, std::fabs(irt::studentized_range_sf(q, 2) - closed));
    }
    const double sf3 = irt::studentized_range_sf(3.314, 3);
    const double sf8 = irt::studentized_range_sf(4.286, 8);
    const bool pass = worst_closed <= 1e-8 && std::fabs(sf3 - 0.05) <= 0.002 &&
                      std::fabs(sf8 - 0.05) <= 0.002;
    report(4, "studentized range sf (k=2 closed form; critical values)", pass,
           fmt("closed-form gap %.2e, sf(3.314,3)=%.4f, sf(4.286,8)=%.4f", worst_closed, sf3,
               sf8));
}

// ---------------------------------------------------------------------------
// 5. Parameter recovery on a seeded synthetic population.
// ---------------------------------------------------------------------------
void criterion_recovery() {
    irt::set_thread_count(1);
    const auto start = Clock::now();

    irt::PopulationSpec spec;
    spec.n_respondents = 5000;
    spec.ability = irt::AbilityDistribution::normal(0.0, 1.0);
    spec.items = irt::sample_items(40, 0.8, 2.2, -2.0, 2.0, 0.0, 0.25, 42);
    spec.seed = 42;
    const auto population = irt::generate_population(spec);

    irt::CalibrationConfig config;
    const auto result = irt::calibrate_items(population.matrix, config);
    g_em_traces.push_back(result.log_likelihood_trace);

    std::map<std::string, const irt::ItemParameters*> estimated;
    for (const auto& item : result.items) estimated[item.item_id] = &item;
    std::vector<double> a_true, a_est, b_true, b_est;
    for (const auto& item : spec.items) {
        a_true.push_back(item.a);
        b_true.push_back(item.b);
        a_est.push_back(estimated.at(item.item_id)->a);
        b_est.push_back(estimated.at(item.item_id)->b);
    }
    const double ra = test_helpers::pearson(a_true, a_est);
    const double rb = test_helpers::pearson(b_true, b_est);

    irt::PopulationSpec small = spec;
    small.n_respondents = 200;
    small.seed = 43;
    const auto population200 = irt::generate_population(small);
    const auto fit = irt::birnbaum_fit(population200.matrix, config);
    g_em_traces.push_back(fit.calibration.log_likelihood_trace);
    std::vector<double> theta_est;
    for (const auto& est : fit.abilities) theta_est.push_back(est.theta);
    const double rho = test_helpers::spearman(population200.abilities, theta_est);

    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    irt::set_thread_count(0);

    const bool pass = rb >= 0.95 && ra >= 0.85 && rho >= 0.9 && secs < 60.0;
    report(5, "parameter recovery (5000x40 items, 200-respondent abilities)", pass,
           fmt("r(a)=%.3f, r(b)=%.3f, rank-corr(theta)=%.3f, %.1f s single-threaded", ra, rb,
               rho, secs));
}

// ---------------------------------------------------------------------------
// 6. 3PL property suite.
// ---------------------------------------------------------------------------
void criterion_properties() {
    irt::SplitMix64 rng(7);
    double worst_mid = 0.0;
    bool monotone = true;
    double worst_info = 0.0;

    for (int i = 0; i < 10000; ++i) {
        const irt::ItemParameters item{"p", rng.next_uniform(-3.0, 3.0),
                                       rng.next_uniform(-4.0, 4.0),
                                       rng.next_uniform(0.0, 0.95), true};
        worst_mid = std::max(
            worst_mid, std::fabs(irt::prob_correct(item.b, item) - 0.5 * (1.0 + item.c)));
    }

    for (int i = 0; i < 2000; ++i) {
        const irt::ItemParameters item{"m", rng.next_uniform(0.05, 3.0),
                                       rng.next_uniform(-3.0, 3.0),
                                       rng.next_uniform(0.0, 0.5), true};
        double t1 = rng.next_uniform(-6.0, 6.0);
        double t2 = rng.next_uniform(-6.0, 6.0);
        if (t1 > t2) std::swap(t1, t2);
        monotone = monotone && irt::prob_correct(t1, item) <= irt::prob_correct(t2, item);
        irt::ItemParameters rev = item;
        rev.a = -rev.a;
        monotone = monotone && irt::prob_correct(t1, rev) >= irt::prob_correct(t2, rev);
    }

    const double h = 1e-5;
    for (int i = 0; i < 2000; ++i) {
        const irt::ItemParameters item{"f", rng.next_uniform(-2.5, 2.5),
                                       rng.next_uniform(-2.0, 2.0),
                                       rng.next_uniform(0.0, 0.4), true};
        const double theta = rng.next_uniform(-3.0, 3.0);
        const double p = irt::prob_correct(theta, item);
        const double dp =
            (irt::prob_correct(theta + h, item) - irt::prob_correct(theta - h, item)) /
            (2.0 * h);
        const double fd = dp * dp / (p * (1.0 - p));
        const double info = irt::item_information(theta, item);
        worst_info = std::max(worst_info, std::fabs(info - fd) / std::max(1.0, fd));
    }

    // One extra small calibration so several EM traces are on record.
    irt::PopulationSpec spec;
    spec.n_respondents = 300;
    spec.ability = irt::AbilityDistribution::normal(0.0, 1.0);
    spec.items = irt::sample_items(8, 0.8, 2.0, -1.5, 1.5, 0.0, 0.2, 11);
    spec.seed = 11;
    const auto population = irt::generate_population(spec);
    g_em_traces.push_back(irt::calibrate_items(population.matrix, {}).log_likelihood_trace);

    bool em_monotone = !g_em_traces.empty();
    for (const auto& trace : g_em_traces) {
        for (std::size_t t = 1; t < trace.size(); ++t) {
            em_monotone = em_monotone &&
                          trace[t] >= trace[t - 1] - 1e-8 * (1.0 + std::fabs(trace[t - 1]));
        }
    }

    const bool pass = worst_mid < 1e-12 && monotone && worst_info < 1e-6 && em_monotone;
    report(6, "3PL property suite (midpoint, monotonicity, information, EM)", pass,
           fmt("midpoint %.1e, monotone %s, info gap %.1e, EM runs %zu nondecreasing %s",
               worst_mid, monotone ? "yes" : "NO", worst_info, g_em_traces.size(),
               em_monotone ? "yes" : "NO"));
}

// ---------------------------------------------------------------------------
// 7. Negative-discrimination filtering semantics.
// ---------------------------------------------------------------------------
void criterion_filtering() {
    std::vector<irt::BinaryOutcome> gb_like;
    int idx = 0;
    const auto add = [&](int count, int truth, int pred) {
        for (int i = 0; i < count; ++i) {
            char buf[16];
            std::snprintf(buf, sizeof(buf), "inst_%03d", idx++);
            gb_like.push_back({buf, truth, pred});
        }
    };
    add(25, 1, 1);
    add(3, 0, 1);
    add(11, 1, 0);
    add(42, 0, 0);

    const auto part = irt::ConfusionPartition::from_outcomes(gb_like);
    std::set<std::string> fn_ids(part.fn.begin(), part.fn.end());
    std::vector<irt::ItemParameters> items;
    for (const auto& o : gb_like) {
        items.push_back(
            {o.instance_id, fn_ids.count(o.instance_id) ? -0.7 : 1.3, 0.0, 0.05, true});
    }

    const auto filter = irt::filter_negative_discrimination(items);
    const auto kept = irt::restrict_outcomes(gb_like, filter.retained);
    const auto filtered_row = irt::classic_metrics(irt::confusion_counts(kept));

    std::vector<irt::BinaryOutcome> clean_model;
    for (const auto& o : gb_like) {
        const int pred = fn_ids.count(o.instance_id) ? 1 - o.true_label : o.true_label;
        clean_model.push_back({o.instance_id, o.true_label, pred});
    }
    const auto clean_row = irt::classic_metrics(
        irt::confusion_counts(irt::restrict_outcomes(clean_model, filter.retained)));

    const bool pass = filter.removed.size() == 11 && filtered_row.recall == 1.0 &&
                      clean_row.accuracy == 1.0 && clean_row.f1 == 1.0 &&
                      clean_row.precision == 1.0 && clean_row.recall == 1.0 &&
                      clean_row.auc == 1.0 && clean_row.specificity == 1.0;
    report(7, "filtering semantics (FN items a<0 -> recall 1.00)", pass,
           fmt("removed %zu, filtered recall %.2f, clean model all-ones %s",
               filter.removed.size(), filtered_row.recall,
               clean_row.accuracy == 1.0 ? "yes" : "NO"));
}

// ---------------------------------------------------------------------------
// 8. Byte-identical reruns of the CLI.
// ---------------------------------------------------------------------------
std::map<std::string, std::string> slurp_tree(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file()) continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::ostringstream content;
        content << in.rdbuf();
        files[fs::relative(entry.path(), root).string()] = content.str();
    }
    return files;
}

void criterion_determinism() {
    const fs::path work =
        fs::temp_directory_path() / ("irt_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(work);
    fs::create_directories(work);

    const std::string config = R"({
  "n_respondents": 120,
  "ability": {"kind": "normal", "mean": 0.0, "sd": 1.0},
  "items": {"n": 40, "a": [0.5, 2.5], "b": [-2.5, 2.5], "c": [0.0, 0.3]},
  "seed": 7,
  "held_out": 8,
  "positive_rate": 0.444
})";
    {
        std::ofstream out(work / "synth.json");
        out << config;
    }

    const std::string env = "cd " + work.string() +
                            " && SOURCE_DATE_EPOCH=0 IRT_ARENA_THREADS=2 " IRT_ARENA_CLI_PATH;
    bool pass = true;
    std::string detail;

    for (const char* tag : {"one", "two"}) {
        const std::string cmd = env + " synth --config synth.json --out synth_" + tag +
                                " >/dev/null 2>&1";
        pass = pass && std::system(cmd.c_str()) == 0;
    }
    if (pass) {
        const auto a = slurp_tree(work / "synth_one");
        const auto b = slurp_tree(work / "synth_two");
        pass = a == b && !a.empty();
        if (!pass) detail = "synth outputs differ; ";
    }

    for (const char* tag : {"one", "two"}) {
        const std::string cmd = env +
                                " report --labels synth_one/labels.csv"
                                " --predictions synth_one/predictions"
                                " --eval-predictions synth_one/eval_predictions"
                                " --seed 7 --out report_" +
                                tag + " >/dev/null 2>&1";
        pass = pass && std::system(cmd.c_str()) == 0;
    }
    if (pass) {
        const auto a = slurp_tree(work / "report_one");
        const auto b = slurp_tree(work / "report_two");
        pass = pass && a == b && a.size() >= 10;
        if (!(a == b)) detail += "report outputs differ";
    }

    report(8, "determinism (synth and report reruns byte-identical)", pass,
           pass ? "outputs identical under SOURCE_DATE_EPOCH=0, 2 threads" : detail);
    fs::remove_all(work);
}

} // namespace

int main() {
    std::printf("acceptance checklist (cli: %s)\n", IRT_ARENA_CLI_PATH);
    criterion_metrics();
    criterion_score_identity();
    criterion_comparison();
    criterion_studentized_range();
    criterion_recovery();
    criterion_properties();
    criterion_filtering();
    criterion_determinism();
    if (g_failures == 0) {
        std::printf("all 8 criteria passed\n");
        return 0;
    }
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
}
