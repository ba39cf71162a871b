#include "irt/errors.hpp"
#include "irt/io.hpp"
#include "irt/rng.hpp"

#include <json.hpp>

#include <doctest.h>

#include <cstdlib>
#include <random>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

using namespace irt;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("irt_io_test_" + std::to_string(SplitMix64(std::random_device{}()).next_u64()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

fs::path write_file(const fs::path& dir, const std::string& name, const std::string& content) {
    const fs::path p = dir / name;
    std::ofstream out(p, std::ios::binary);
    out << content;
    return p;
}

} // namespace

TEST_SUITE_BEGIN("io");

TEST_CASE("format_double round-trips arbitrary doubles exactly") {
    SplitMix64 rng(1);
    std::vector<double> values{0.0, -0.0, 0.1, 1.0 / 3.0, 1e-300, 6.0, -6.0, 0.999};
    for (int i = 0; i < 500; ++i) {
        values.push_back(rng.next_normal(0.0, 10.0));
    }
    for (double v : values) {
        const std::string text = io::format_double(v);
        CHECK(io::parse_double(text, "test") == v);
    }
    CHECK_THROWS_AS(io::parse_double("1.0x", "test"), validation_error);
    CHECK_THROWS_AS(io::parse_double("", "test"), validation_error);
}

TEST_CASE("fnv1a hash is stable") {
    CHECK(io::fnv1a_hex("") == "cbf29ce484222325");
    CHECK(io::fnv1a_hex("abc") == io::fnv1a_hex("abc"));
    CHECK(io::fnv1a_hex("abc") != io::fnv1a_hex("abd"));
}

TEST_CASE("labels load with positive-label mapping") {
    TempDir tmp;
    const auto path = write_file(tmp.path, "labels.csv",
                                 "instance_id,label\nx1,1\nx2,0\n");
    const auto labels = io::load_labels(path, "1");
    REQUIRE(labels.size() == 2);
    CHECK(labels[0].instance_id == "x1");
    CHECK(labels[0].label == 1);
    CHECK(labels[1].label == 0);

    const auto sympath = write_file(tmp.path, "sym.csv",
                                    "instance_id,label\np1,present\np2,absent\np3,present\n");
    const auto mapped = io::load_labels(sympath, "present");
    CHECK(mapped[0].label == 1);
    CHECK(mapped[1].label == 0);
    CHECK(mapped[2].label == 1);
}

TEST_CASE("duplicate instance ids name both line numbers") {
    TempDir tmp;
    const auto path = write_file(tmp.path, "dup.csv",
                                 "instance_id,label\nx1,1\nx2,0\nx1,0\n");
    CHECK_THROWS_WITH_AS(io::load_labels(path, "1"), doctest::Contains("lines 2 and 4"),
                         validation_error);
}

TEST_CASE("malformed rows carry their line number") {
    TempDir tmp;
    const auto path = write_file(tmp.path, "bad.csv",
                                 "instance_id,label\nx1,1\nx2,0,extra\n");
    CHECK_THROWS_WITH_AS(io::load_labels(path, "1"), doctest::Contains("line 3"),
                         validation_error);

    const auto noheader = write_file(tmp.path, "nohdr.csv", "id,label\nx1,1\n");
    CHECK_THROWS_AS(io::load_labels(noheader, "1"), validation_error);

    const auto empty = write_file(tmp.path, "empty.csv", "");
    CHECK_THROWS_AS(io::load_labels(empty, "1"), validation_error);
}

TEST_CASE("unknown label symbols are listed") {
    TempDir tmp;
    const auto three = write_file(tmp.path, "three.csv",
                                  "instance_id,label\nx1,a\nx2,b\nx3,c\n");
    CHECK_THROWS_WITH_AS(io::load_labels(three, "a"), doctest::Contains("'c'"),
                         validation_error);

    const auto wrongpos = write_file(tmp.path, "wrongpos.csv",
                                     "instance_id,label\nx1,yes\nx2,no\n");
    CHECK_THROWS_WITH_AS(io::load_labels(wrongpos, "1"), doctest::Contains("'yes'"),
                         validation_error);
}

TEST_CASE("prediction files take the model id from the stem") {
    TempDir tmp;
    const auto path = write_file(tmp.path, "gb_model.csv",
                                 "instance_id,prediction\nx1,1\nx2,0\n");
    const auto [id, preds] = io::load_predictions(path, "1");
    CHECK(id == "gb_model");
    CHECK(preds.size() == 2);

    const auto [renamed, preds2] = io::load_predictions(path, "1", std::string("GB"));
    CHECK(renamed == "GB");
    CHECK(preds2.size() == 2);
}

TEST_CASE("prediction sets expand directories deterministically") {
    TempDir tmp;
    fs::create_directories(tmp.path / "preds");
    write_file(tmp.path / "preds", "b.csv", "instance_id,prediction\nx1,1\n");
    write_file(tmp.path / "preds", "a.csv", "instance_id,prediction\nx1,0\n");
    const auto set = io::load_prediction_set({tmp.path / "preds"}, "1");
    REQUIRE(set.size() == 2);
    CHECK(set.count("a"));
    CHECK(set.count("b"));

    CHECK_THROWS_AS(io::load_prediction_set({tmp.path / "missing_dir_file.csv"}, "1"),
                    validation_error);
}

TEST_CASE("item parameters survive a write/read round trip exactly") {
    TempDir tmp;
    SplitMix64 rng(2);
    std::vector<ItemParameters> items;
    for (int i = 0; i < 60; ++i) {
        items.push_back({"it" + std::to_string(i), rng.next_normal(0.0, 3.0),
                         rng.next_normal(0.0, 2.0), rng.next_uniform(0.0, 0.99),
                         rng.next_bernoulli(0.8)});
    }
    const auto path = tmp.path / "items.csv";
    io::write_items_csv(path, items, "deadbeef00000000");
    const auto back = io::read_items_csv(path);
    REQUIRE(back.size() == items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
        CHECK(back[i].item_id == items[i].item_id);
        CHECK(back[i].a == items[i].a);
        CHECK(back[i].b == items[i].b);
        CHECK(back[i].c == items[i].c);
        CHECK(back[i].converged == items[i].converged);
    }

    // The hash comment is the first line.
    std::ifstream check(path);
    std::string first;
    std::getline(check, first);
    CHECK(first == "# input_hash=deadbeef00000000");
}

TEST_CASE("abilities survive a round trip exactly") {
    TempDir tmp;
    SplitMix64 rng(3);
    std::vector<AbilityEstimate> abilities;
    for (int i = 0; i < 25; ++i) {
        abilities.push_back({"m" + std::to_string(i), rng.next_normal(0.0, 2.0),
                             rng.next_bernoulli(0.2)});
    }
    const auto path = tmp.path / "abilities.csv";
    io::write_abilities_csv(path, abilities, "0");
    const auto back = io::read_abilities_csv(path);
    REQUIRE(back.size() == abilities.size());
    for (std::size_t i = 0; i < abilities.size(); ++i) {
        CHECK(back[i].respondent_id == abilities[i].respondent_id);
        CHECK(back[i].theta == abilities[i].theta);
        CHECK(back[i].at_bound == abilities[i].at_bound);
    }
}

TEST_CASE("response matrix round trip") {
    TempDir tmp;
    const auto matrix = ResponseMatrix::create({"r0", "r1"}, {"i0", "i1", "i2"},
                                               {1, 0, 1, 0, 1, 1});
    const auto path = tmp.path / "matrix.csv";
    io::write_response_matrix_csv(path, matrix, "0");
    const auto back = io::read_response_matrix_csv(path);
    CHECK(back.respondent_ids() == matrix.respondent_ids());
    CHECK(back.item_ids() == matrix.item_ids());
    CHECK(back.cells() == matrix.cells());

    const auto bad = write_file(tmp.path, "bad_matrix.csv",
                                "respondent_id,i0\nr0,2\n");
    CHECK_THROWS_AS(io::read_response_matrix_csv(bad), validation_error);
}

TEST_CASE("score table round trip and validation") {
    TempDir tmp;
    ScoreTable table;
    table.blocks = {"m0", "m1"};
    table.treatments = {"accuracy", "f1", "recall"};
    table.values = {0.9, 0.8, 0.7, 0.6, 0.5, 0.4};
    const auto path = tmp.path / "table.csv";
    io::write_score_table_csv(path, table, "0");
    const auto back = io::read_score_table_csv(path);
    CHECK(back.blocks == table.blocks);
    CHECK(back.treatments == table.treatments);
    CHECK(back.values == table.values);

    const auto bad = write_file(tmp.path, "bad_table.csv", "model_id,a\nm0,1\n");
    CHECK_THROWS_AS(io::read_score_table_csv(bad), validation_error);
}

TEST_CASE("manifest dedupes warnings and echoes the class balance") {
    TempDir tmp;
    io::RunManifest manifest;
    manifest.subcommand = "metrics";
    manifest.seed = 7;
    manifest.threads = 2;
    manifest.label_count = 81;
    manifest.label_positives = 36;
    manifest.warnings = {"w2", "w1", "w2"};
    manifest.outputs = {"b.csv", "a.csv"};
    manifest.config_echo_json = "{\"seed\":7}";
    manifest.input_hash = io::combined_input_hash(manifest);

    ::setenv("SOURCE_DATE_EPOCH", "0", 1);
    const auto path = tmp.path / "manifest.json";
    io::write_manifest_json(path, manifest);
    ::unsetenv("SOURCE_DATE_EPOCH");

    std::ifstream in(path);
    nlohmann::json j;
    in >> j;
    CHECK(j.at("timestamp") == "1970-01-01T00:00:00Z");
    CHECK(j.at("labels").at("positive_percent").get<double>() == doctest::Approx(44.4));
    CHECK(j.at("labels").at("negative_percent").get<double>() == doctest::Approx(55.6));
    CHECK(j.at("warnings").size() == 2);
    const bool outputs_sorted = j.at("outputs") == nlohmann::json({"a.csv", "b.csv"}) ||
                                j.at("outputs") == nlohmann::json({"a.csv", "b.csv", "manifest.json"});
    CHECK(outputs_sorted);
    CHECK(j.at("seed").get<std::uint64_t>() == 7);
    CHECK(j.at("input_hash").get<std::string>().size() == 16);
}

TEST_SUITE_END();
