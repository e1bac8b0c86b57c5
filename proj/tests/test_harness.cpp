#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "whisker/config.hpp"
#include "whisker/harness.hpp"
#include "whisker/seed.hpp"

using namespace whisker;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("whisker_" + name)).string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream(path) << text;
}

GridSpec tiny_grid() {
    GridSpec g;
    g.window_sizes = {50};
    g.speeds_mm_min = {100.0};
    g.selectors = {Selector::P, Selector::A, Selector::PA};
    g.models = {ModelKind::RF};
    g.n_runs = 2;
    g.seed = 7;
    return g;
}

StudyOptions tiny_options() {
    StudyOptions o;
    o.sweep_length_mm = 1.5;
    o.profile_resolution_um = 1.0;
    o.rf.n_trees = 10;
    o.dab_duration_ms = 1000.0;
    o.dabs_per_material = 3;
    return o;
}

} // namespace

TEST_CASE("seed derivation is stable and path sensitive") {
    CHECK(derive_seed(1, {2, 3}) == derive_seed(1, {2, 3}));
    CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
    CHECK(derive_seed(1, {2}) != derive_seed(2, {2}));
    CHECK(tag_of("split") != tag_of("lane"));
    CHECK(splitmix64(0) != splitmix64(1));
}

TEST_CASE("constraint table matches hand-computed distances") {
    auto sensors = default_sensor_rates();
    sensors.push_back({"Fast Board", 500.0});
    const auto path = temp_path("constraint.csv");
    emit_constraint_table(path, sensors);
    const auto text = slurp(path);
    std::remove(path.c_str());
    // 50 mm/min = 833.33 um/s; D = v / rate, 2D the resolvable separation.
    CHECK(text.find("sensor,rate_hz,D_um_V50,d_sep_um_V50,D_um_V100,d_sep_um_V100") == 0);
    CHECK(text.find("Pressure Sensor,157,5.31,10.62,10.62,21.23") != std::string::npos);
    CHECK(text.find("Accelerometer,1000,0.83,1.67,1.67,3.33") != std::string::npos);
    CHECK(text.find("NCDT Laser,2500,0.33,0.67,0.67,1.33") != std::string::npos);
    CHECK(text.find("Fast Board,500,1.67,3.33,3.33,6.67") != std::string::npos);

    const auto rows = constraint_table(sensors);
    CHECK(rows.size() == 8);
    for (const auto& r : rows)
        CHECK(r.report.distance_per_sample_um ==
              doctest::Approx(r.speed_mm_min * 1000.0 / 60.0 / r.rate_hz));
}

TEST_CASE("grid validation") {
    GridSpec g;
    CHECK(g.cell_count() == 48);
    CHECK_NOTHROW(g.validate());
    g.n_runs = 1;
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
    g = GridSpec{};
    g.window_sizes.clear();
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
    g = GridSpec{};
    g.speeds_mm_min = {0.0};
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
}

TEST_CASE("study config round-trips through a file") {
    StudyConfig c;
    c.grid.window_sizes = {25, 75};
    c.grid.speeds_mm_min = {40.0, 80.0};
    c.grid.selectors = {Selector::PA, Selector::L};
    c.grid.models = {ModelKind::MLP};
    c.grid.n_runs = 3;
    c.grid.seed = 99;
    c.options.sweep_length_mm = 7.5;
    c.options.suite.pressure_noise_sd = 0.123;
    c.options.suite.stage_vibration_um_per_mm_min = 0.002;
    c.options.svm.regularization_c = 2.5;
    c.options.rf.n_trees = 17;
    c.options.mlp.hidden_layers = {64, 32, 16};
    c.options.mlp.layer_norm = false;
    const auto path = temp_path("config.ini");
    write_study_config(c, path);
    const auto back = load_study_config(path);
    CHECK(back.grid.window_sizes == c.grid.window_sizes);
    CHECK(back.grid.speeds_mm_min == c.grid.speeds_mm_min);
    CHECK(back.grid.selectors == c.grid.selectors);
    CHECK(back.grid.models == c.grid.models);
    CHECK(back.grid.n_runs == 3);
    CHECK(back.grid.seed == 99);
    CHECK(back.options.sweep_length_mm == 7.5);
    CHECK(back.options.suite.pressure_noise_sd == 0.123);
    CHECK(back.options.suite.stage_vibration_um_per_mm_min == 0.002);
    CHECK(back.options.svm.regularization_c == 2.5);
    CHECK(back.options.rf.n_trees == 17);
    CHECK(back.options.mlp.hidden_layers == c.options.mlp.hidden_layers);
    CHECK_FALSE(back.options.mlp.layer_norm);
    CHECK(fingerprint(back.options.mlp) == fingerprint(c.options.mlp));

    write_text(path, "[grid]\nn_runs = 4\n");
    const auto partial = load_study_config(path);
    CHECK(partial.grid.n_runs == 4);
    CHECK(partial.grid.window_sizes == GridSpec{}.window_sizes);

    write_text(path, "[grid]\nbogus = 1\n");
    CHECK_THROWS(load_study_config(path));
    write_text(path, "[grid]\nn_runs = many\n");
    CHECK_THROWS(load_study_config(path));
    std::remove(path.c_str());
}

TEST_CASE("roughness recordings cover every class with distinct lanes") {
    const auto catalog = list_specimen_catalog();
    const auto opts = tiny_options();
    const auto recs = roughness_recordings(catalog, opts, 7, 0, 100.0);
    CHECK(recs.size() == catalog.roughness.size() * 3);
    CHECK(recs[0].label == "H1");
    CHECK(recs[0].source_id != recs[1].source_id);
    CHECK(recs[0].whisker.data.rows() == 900);
    REQUIRE(recs[0].laser);
    CHECK(recs[0].laser->data.rows() == 900);
    const auto again = roughness_recordings(catalog, opts, 7, 0, 100.0);
    CHECK(again[5].whisker.data == recs[5].whisker.data);
    const auto other_run = roughness_recordings(catalog, opts, 7, 1, 100.0);
    CHECK(other_run[5].whisker.data != recs[5].whisker.data);
}

TEST_CASE("tiny roughness grid is reproducible") {
    const auto grid = tiny_grid();
    const auto opts = tiny_options();
    const auto a = run_roughness_grid(grid, opts);
    const auto b = run_roughness_grid(grid, opts);
    REQUIRE(a.cells.size() == 3);
    for (const auto& [key, cell] : a.cells) {
        CAPTURE(key.describe());
        REQUIRE(cell.result);
        CHECK(cell.result->run_accuracies.size() == 2);
        CHECK(cell.result->run_accuracies == b.cells.at(key).result->run_accuracies);
        CHECK(cell.class_set.size() == 18);
        CHECK(cell.result->confusion.rows() == 18);
    }
    // Ordering check per (model, speed, window) plus the best-PA check.
    CHECK(a.checks.size() == 2);
    CHECK(std::isnan(a.accuracy({"roughness", ModelKind::SVM, 50, 100.0, Selector::P, 0.0})));
}

TEST_CASE("tiny hardness grid emits its tables") {
    auto grid = tiny_grid();
    grid.selectors = {Selector::P, Selector::A, Selector::PA, Selector::L};
    auto opts = tiny_options();
    opts.out_dir = temp_path("hardness_out");
    std::filesystem::remove_all(opts.out_dir);
    const auto r = run_hardness_grid(grid, opts);
    // L does not apply to dabs.
    CHECK(r.cells.size() == 3);
    for (const auto& [key, cell] : r.cells) {
        REQUIRE(cell.result);
        CHECK(cell.class_set.size() == 6);
    }
    CHECK_FALSE(r.emitted_files.empty());
    for (const auto& f : r.emitted_files) CHECK(std::filesystem::exists(f));
    std::filesystem::remove_all(opts.out_dir);
}
