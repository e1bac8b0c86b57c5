#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "whisker/config.hpp"
#include "whisker/csv.hpp"
#include "whisker/harness.hpp"
#include "whisker/metrics.hpp"

namespace fs = std::filesystem;
using namespace whisker;

namespace {

struct Verdict {
    bool passed = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            passed = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
};

struct Criterion {
    std::string name;
    Verdict verdict;
    double seconds = 0.0;
};

template <typename F>
Criterion run(const std::string& name, F body) {
    const auto t0 = std::chrono::steady_clock::now();
    Criterion c{name, {}, 0.0};
    try {
        c.verdict = body();
    } catch (const std::exception& e) {
        c.verdict = {false, std::string("exception: ") + e.what()};
    }
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (c.verdict.passed ? "PASS " : "FAIL ") << c.name << " ("
              << format_fixed(c.seconds, 1) << " s)";
    if (!c.verdict.detail.empty()) std::cout << ": " << c.verdict.detail;
    std::cout << std::endl;
    return c;
}

std::string two(double v) { return format_fixed(v, 2); }

// Checks of a study report whose names start with `prefix`.
void require_checks(Verdict& v, const StudyReport& report, const std::string& prefix) {
    int seen = 0;
    for (const auto& c : report.checks) {
        if (c.name.rfind(prefix, 0) != 0) continue;
        ++seen;
        v.require(c.passed, c.name + " [" + c.detail + "]");
    }
    v.require(seen > 0, "no checks named " + prefix);
}

Verdict constraint_table_check(const std::string& dir) {
    const auto path = (fs::path(dir) / "constraint_table.csv").string();
    emit_constraint_table(path);
    // Sensor, rate, then D and d_sep at 50 and 100 mm/min.
    const std::vector<std::vector<double>> expected{{157, 5.31, 10.62, 10.62, 21.23},
                                                    {1000, 0.83, 1.67, 1.67, 3.33},
                                                    {2500, 0.33, 0.67, 0.67, 1.33}};
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    Verdict v;
    std::size_t row = 0;
    for (; std::getline(in, line) && row < expected.size(); ++row) {
        std::vector<std::string> cells;
        std::stringstream s(line);
        for (std::string c; std::getline(s, c, ',');) cells.push_back(c);
        v.require(cells.size() == 6, "row " + std::to_string(row) + " has " +
                                         std::to_string(cells.size()) + " fields");
        if (cells.size() != 6) continue;
        for (std::size_t j = 0; j < 5; ++j) {
            const double got = std::stod(cells[j + 1]);
            v.require(std::abs(got - expected[row][j]) <= 0.01 + 1e-9,
                      cells[0] + " column " + std::to_string(j + 1) + " = " + cells[j + 1]);
        }
    }
    v.require(row == expected.size(), "expected 3 sensor rows");
    if (v.passed) v.detail = "12 entries within 0.01 um";
    return v;
}

Verdict roughness_metric_check() {
    Verdict v;
    SurfaceSpec tri;
    tri.waveform = Waveform::Triangular;
    tri.rz_target_um = 10.0;
    tri.spatial_period_um = 400.0;
    tri.noise_amplitude = 0.0;
    const auto tp = build_roughness_profile(tri, 4000.0, tri.spatial_period_um / 100.0);
    const double ra_tri = compute_ra(tp);
    v.require(std::abs(ra_tri - 2.5) <= 0.025, "triangle Ra = " + format_fixed(ra_tri, 4));

    SurfaceSpec sine = tri;
    sine.waveform = Waveform::Sinusoidal;
    sine.rz_target_um = 6.0;
    const auto sp = build_roughness_profile(sine, 4000.0, sine.spatial_period_um / 100.0);
    const double amplitude = 0.5 * sp.rz_actual_um;
    // Brute-force midpoint integration of |A sin| over one period.
    const int steps = 1000000;
    double acc = 0.0;
    for (int i = 0; i < steps; ++i)
        acc += std::abs(amplitude * std::sin(2.0 * std::numbers::pi * (i + 0.5) / steps));
    const double oracle = acc / steps;
    const double ra_sine = compute_ra(sp);
    v.require(std::abs(oracle - 2.0 * amplitude / std::numbers::pi) <= 1e-6 * oracle,
              "oracle disagrees with 2A/pi");
    v.require(std::abs(ra_sine - oracle) <= 0.01 * oracle,
              "sine Ra = " + format_fixed(ra_sine, 4) + " vs " + format_fixed(oracle, 4));
    v.detail = "triangle Ra " + format_fixed(ra_tri, 4) + " (2.5); sine Ra " +
               format_fixed(ra_sine, 4) + " (" + format_fixed(oracle, 4) + ")";
    return v;
}

Verdict roughness_trend_check(const StudyReport& r) {
    Verdict v;
    require_checks(v, r, "roughness_order/");
    require_checks(v, r, "roughness_best_pa_at_least_90");
    require_checks(v, r, "roughness_pa_matches_laser");
    return v;
}

struct Blob {
    Eigen::MatrixXd x;
    Eigen::VectorXi y;
};

LabeledDataset wrap(const Blob& b, int n_classes, std::uint64_t seed) {
    LabeledDataset ds;
    ds.selector = Selector::P;
    ds.window = static_cast<int>(b.x.cols());
    ds.k = 1;
    for (int c = 0; c < n_classes; ++c) ds.class_set.push_back("c" + std::to_string(c));
    ds.features = b.x;
    const auto n = static_cast<std::size_t>(b.x.rows());
    ds.labels.assign(b.y.data(), b.y.data() + n);
    ds.source_ids.assign(n, "synthetic");
    ds.window_indices.assign(n, 0);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    ds.splits.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        ds.splits[order[i]] = i < 7 * n / 10 ? Split::Train : i < 9 * n / 10 ? Split::Val : Split::Test;
    ds.stats = compute_train_stats(ds);
    return standardize(ds);
}

Verdict ml_oracle_check() {
    Verdict v;
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> g;

    // Gradient against central differences.
    Eigen::MatrixXd x(16, 12);
    for (auto& e : x.reshaped()) e = g(rng);
    Eigen::VectorXi y(16);
    for (int i = 0; i < 16; ++i) y(i) = i % 4;
    Mlp net(12, 4, {16, 16}, 0.2, true, 5);
    for (auto& p : net.parameters()) p += 0.1 * g(rng);
    Eigen::VectorXd grad;
    net.loss_and_gradient(x, y, &grad);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < grad.size(); ++i) {
        const double keep = net.parameters()(i);
        net.parameters()(i) = keep + 1e-6;
        const double up = net.loss(x, y);
        net.parameters()(i) = keep - 1e-6;
        const double down = net.loss(x, y);
        net.parameters()(i) = keep;
        const double num = (up - down) / 2e-6;
        worst = std::max(worst, std::abs(num - grad(i)) /
                                    std::max(1e-3, std::abs(num) + std::abs(grad(i))));
    }
    v.require(worst <= 1e-4, "MLP gradient relative error " + std::to_string(worst));

    // Separable blobs: four clusters 10 sd apart on the axes.
    const int per = 250, classes = 4, dims = 8;
    Blob blobs{Eigen::MatrixXd(per * classes, dims), Eigen::VectorXi(per * classes)};
    for (int c = 0; c < classes; ++c)
        for (int i = 0; i < per; ++i) {
            const int r = c * per + i;
            for (int f = 0; f < dims; ++f) blobs.x(r, f) = g(rng) + (f == c ? 10.0 : 0.0);
            blobs.y(r) = c;
        }
    RfConfig tree;
    tree.n_trees = 1;
    tree.bootstrap = false;
    tree.features_per_split = dims;
    const auto single = RandomForest::fit(blobs.x, blobs.y, classes, tree);
    const double tree_train = 100.0 * (single.predict(blobs.x).array() == blobs.y.array()).cast<double>().mean();
    v.require(tree_train == 100.0, "single tree train accuracy " + two(tree_train));

    const auto separable = wrap(blobs, classes, 1);
    const double svm_test =
        evaluate(train_svm(separable, StudyOptions{}.svm), separable, Split::Test).accuracy_mean;
    v.require(svm_test == 100.0, "SVM blob test accuracy " + two(svm_test));

    // Features independent of labels.
    Blob noise{Eigen::MatrixXd(8000, dims), Eigen::VectorXi(8000)};
    std::uniform_int_distribution<int> label(0, classes - 1);
    for (auto& e : noise.x.reshaped()) e = g(rng);
    for (auto& l : noise.y) l = label(rng);
    const auto shuffled = wrap(noise, classes, 2);
    const StudyOptions defaults;
    std::string chance;
    for (ModelKind k : {ModelKind::SVM, ModelKind::RF, ModelKind::MLP}) {
        const double acc =
            evaluate(train_model(shuffled, defaults.model_config(k)), shuffled, Split::Test)
                .accuracy_mean;
        v.require(std::abs(acc - 25.0) <= 5.0, to_string(k) + " shuffled accuracy " + two(acc));
        chance += " " + to_string(k) + "=" + two(acc);
    }
    if (v.passed)
        v.detail = "grad err " + std::to_string(worst) + ", tree " + two(tree_train) + ", SVM blobs " +
                   two(svm_test) + ", chance" + chance;
    return v;
}

Verdict determinism_check(const StudyReport& full, const GridSpec& grid, const StudyOptions& options,
                          const std::string& dir) {
    Verdict v;
    // Regenerate one cell of the full grid in isolation.
    GridSpec one = grid;
    one.window_sizes = {grid.window_sizes.back()};
    one.speeds_mm_min = {grid.speeds_mm_min.back()};
    one.selectors = {Selector::PA};
    one.models = {ModelKind::RF};
    StudyOptions quiet = options;
    quiet.out_dir.clear();
    const auto again = run_roughness_grid(one, quiet);
    const CellKey key{"roughness", ModelKind::RF, one.window_sizes[0], one.speeds_mm_min[0],
                      Selector::PA, 0.0};
    const auto a = full.cells.find(key);
    const auto b = again.cells.find(key);
    v.require(a != full.cells.end() && a->second.result, "cell missing from full grid");
    v.require(b != again.cells.end() && b->second.result, "cell missing from rerun");
    if (!v.passed) return v;
    v.require(a->second.result->run_accuracies == b->second.result->run_accuracies,
              "rerun accuracies differ");
    v.require(a->second.result->confusion == b->second.result->confusion, "rerun confusion differs");

    // Dataset and model persistence.
    const auto catalog = list_specimen_catalog();
    const auto recs = roughness_recordings(catalog, quiet, grid.seed, 0, grid.speeds_mm_min[0]);
    const auto ds = standardize(assemble_dataset(recs, Selector::PA, grid.window_sizes[0], 11));
    const auto ds_path = (fs::path(dir) / "determinism_dataset.csv").string();
    write_dataset(ds, ds_path);
    const auto ds_back = read_dataset(ds_path);
    v.require(ds_back == ds, "dataset round-trip differs");
    const auto x = ds.features_of(Split::Test);
    for (ModelKind k : {ModelKind::SVM, ModelKind::RF, ModelKind::MLP}) {
        const auto model = train_model(ds, with_seed(quiet.model_config(k), 3));
        const auto path = (fs::path(dir) / ("determinism_" + to_string(k) + ".model")).string();
        model.save(path);
        const auto back = TrainedModel::load(path);
        v.require(back.predict(x) == model.predict(x), to_string(k) + " predictions differ after load");
        v.require(back.predict(ds_back.features_of(Split::Test)) == model.predict(x),
                  to_string(k) + " predictions differ on reloaded dataset");
    }
    if (v.passed) v.detail = "cell " + key.describe() + " bit-identical; dataset and 3 models round-trip";
    return v;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"whiskerbench acceptance run"};
    std::string out_dir = "acceptance_out";
    std::string config;
    int parallelism = 1;
    app.add_option("--out-dir", out_dir, "output directory")->capture_default_str();
    app.add_option("--config", config, "INI config file")->check(CLI::ExistingFile);
    app.add_option("--parallelism", parallelism, "concurrent jobs")->capture_default_str();
    CLI11_PARSE(app, argc, argv);

    StudyConfig cfg;
    if (!config.empty()) apply_study_config(config, cfg);
    cfg.options.parallelism = parallelism;
    fs::create_directories(out_dir);
    cfg.options.out_dir = out_dir;
    const GridSpec& grid = cfg.grid;
    const StudyOptions& options = cfg.options;

    std::vector<Criterion> results;
    results.push_back(run("C1 constraint table", [&] { return constraint_table_check(out_dir); }));
    results.push_back(run("C2 Ra/Rz analytic", [] { return roughness_metric_check(); }));

    StudyReport roughness;
    results.push_back(run("C3 roughness trend", [&] {
        roughness = run_roughness_grid(grid, options);
        return roughness_trend_check(roughness);
    }));
    results.push_back(run("C4 speed monotonicity", [&] {
        Verdict v;
        require_checks(v, roughness, "speed_monotone/");
        return v;
    }));
    results.push_back(run("C5 hardness trend", [&] {
        const auto r = run_hardness_grid(grid, options);
        Verdict v;
        require_checks(v, r, "hardness_");
        return v;
    }));
    results.push_back(run("C6 downsampling", [&] {
        GridSpec g = grid;
        g.models = {ModelKind::SVM};
        const auto r = run_downsampling_study(g, options);
        Verdict v;
        require_checks(v, r, "downsample_gain/SVM");
        require_checks(v, r, "downsample_trend/SVM");
        return v;
    }));
    results.push_back(run("C7 ML oracles", [] { return ml_oracle_check(); }));
    results.push_back(run("C8 determinism and persistence",
                          [&] { return determinism_check(roughness, grid, options, out_dir); }));

    int passed = 0;
    for (const auto& r : results) passed += r.verdict.passed;
    std::cout << passed << "/" << results.size() << " criteria passed\n";
    return passed == static_cast<int>(results.size()) ? 0 : 1;
}
