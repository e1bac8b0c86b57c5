#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "whisker/config.hpp"
#include "whisker/csv.hpp"
#include "whisker/harness.hpp"
#include "whisker/metrics.hpp"
#include "whisker/seed.hpp"

namespace fs = std::filesystem;
using namespace whisker;

namespace {

struct Common {
    std::optional<std::uint64_t> seed;
    std::string out_dir = "out";
    std::optional<int> parallelism;
    std::optional<int> runs;
    std::string config;
};

StudyConfig resolve(const Common& c) {
    StudyConfig cfg;
    if (!c.config.empty()) apply_study_config(c.config, cfg);
    if (c.seed) cfg.grid.seed = *c.seed;
    if (c.parallelism) cfg.options.parallelism = *c.parallelism;
    if (c.runs) cfg.grid.n_runs = *c.runs;
    cfg.options.out_dir = c.out_dir;
    return cfg;
}

void add_common(CLI::App* app, Common& c) {
    app->add_option("--seed", c.seed, "study seed");
    app->add_option("--out-dir", c.out_dir, "output directory")->capture_default_str();
    app->add_option("--parallelism", c.parallelism, "concurrent jobs");
    app->add_option("--runs", c.runs, "repeated runs per cell (>= 2)");
    app->add_option("--config", c.config, "INI config file")->check(CLI::ExistingFile);
}

int print_report(const StudyReport& report, const std::string& title) {
    std::cout << title << ": " << report.cells.size() << " cells\n";
    for (const auto& [key, cell] : report.cells) {
        std::cout << "  " << key.describe() << "  ";
        if (cell.result)
            std::cout << format_fixed(cell.result->accuracy_mean, 2) << "% (var "
                      << format_fixed(cell.result->accuracy_variance, 2) << ")";
        else
            std::cout << "FAILED: " << cell.error;
        for (const auto& w : cell.warnings) std::cout << "\n    warning: " << w;
        std::cout << '\n';
    }
    int failed = 0;
    for (const auto& c : report.checks) {
        std::cout << (c.passed ? "[pass] " : "[FAIL] ") << c.name << "  " << c.detail << '\n';
        failed += !c.passed;
    }
    for (const auto& f : report.emitted_files) std::cout << "wrote " << f << '\n';
    std::cout << report.checks.size() - failed << '/' << report.checks.size() << " checks passed\n";
    return 0;
}

std::string in_dir(const std::string& dir, const std::string& name) {
    fs::create_directories(dir);
    return (fs::path(dir) / name).string();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"whiskerbench: synthetic whisker texture benchmark"};
    app.require_subcommand(1);

    Common common;

    auto* constraint = app.add_subcommand("constraint", "write the sampling-constraint table");
    add_common(constraint, common);

    auto* sweep = app.add_subcommand("sweep", "simulate one sweep and write its streams");
    add_common(sweep, common);
    std::string klass = "H1";
    double speed = 50.0;
    std::optional<double> length;
    std::string out;
    sweep->add_option("--class", klass, "roughness class id")->capture_default_str();
    sweep->add_option("--speed", speed, "stage speed, mm/min")->capture_default_str();
    sweep->add_option("--length", length, "sweep length, mm");
    sweep->add_option("--out", out, "output CSV");

    auto* dab = app.add_subcommand("dab", "simulate one dab and write its stream");
    add_common(dab, common);
    std::string material = "hard1";
    std::optional<double> t_dab;
    dab->add_option("--class", material, "hardness class id")->capture_default_str();
    dab->add_option("--duration", t_dab, "contact duration, ms");
    dab->add_option("--out", out, "output CSV");

    auto* dataset = app.add_subcommand("dataset", "assemble a standardized dataset file");
    add_common(dataset, common);
    std::string study = "roughness";
    std::string selector = "PA";
    int window = 50;
    int run = 0;
    dataset->add_option("--study", study, "roughness or hardness")
        ->check(CLI::IsMember({"roughness", "hardness"}))
        ->capture_default_str();
    dataset->add_option("--selector", selector, "P, A, PA or L")->capture_default_str();
    dataset->add_option("--window", window, "window size W")->capture_default_str();
    dataset->add_option("--speed", speed, "stage speed, mm/min")->capture_default_str();
    dataset->add_option("--run", run, "run index")->capture_default_str();
    dataset->add_option("--out", out, "output dataset file");

    auto* train = app.add_subcommand("train", "train one model on a dataset file");
    add_common(train, common);
    std::string dataset_path;
    std::string model_name = "SVM";
    train->add_option("--dataset", dataset_path, "dataset file")->required()->check(CLI::ExistingFile);
    train->add_option("--model", model_name, "SVM, RF or MLP")->capture_default_str();
    train->add_option("--out", out, "output model file");

    auto* grid_rough = app.add_subcommand("grid-roughness", "roughness grid");
    add_common(grid_rough, common);
    auto* grid_hard = app.add_subcommand("grid-hardness", "hardness grid");
    add_common(grid_hard, common);
    auto* downsample = app.add_subcommand("study-downsample", "stream decimation study");
    add_common(downsample, common);
    auto* window_study = app.add_subcommand("study-window", "window size trade-off study");
    add_common(window_study, common);
    std::vector<int> windows{25, 50, 100, 200};
    window_study->add_option("--windows", windows, "window sizes")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        const StudyConfig cfg = resolve(common);
        const auto& opt = cfg.options;
        const auto catalog = list_specimen_catalog();

        if (constraint->parsed()) {
            const auto path = out.empty() ? in_dir(common.out_dir, "constraint_table.csv") : out;
            emit_constraint_table(path);
            for (const auto& r : constraint_table(default_sensor_rates()))
                std::cout << r.sensor << " @" << format_double(r.rate_hz) << " Hz, "
                          << format_double(r.speed_mm_min) << " mm/min: D = "
                          << format_fixed(r.report.distance_per_sample_um, 2)
                          << " um, d_sep = " << format_fixed(r.report.min_resolvable_separation_um, 2)
                          << " um\n";
            std::cout << "wrote " << path << '\n';
        } else if (sweep->parsed()) {
            StageConfig stage;
            stage.speed_mm_min = speed;
            stage.sweep_length_mm = length.value_or(opt.sweep_length_mm);
            SurfaceSpec spec = catalog.roughness_class(klass);
            spec.seed = derive_seed(cfg.grid.seed, {tag_of("cli-sweep")});
            const double len = std::max(10.0 * spec.spatial_period_um,
                                        stage.sweep_length_mm * 1000.0 + spec.spatial_period_um);
            const auto profile = build_roughness_profile(spec, len, opt.profile_resolution_um);
            const auto rec = simulate_sweep(profile, stage, opt.suite, cfg.grid.seed);
            const auto base = out.empty() ? in_dir(common.out_dir, "sweep_" + klass + ".csv") : out;
            const std::vector<std::string> meta{
                "class=" + klass, "speed_mm_min=" + format_double(speed),
                "sweep_length_mm=" + format_double(stage.sweep_length_mm),
                "seed=" + std::to_string(cfg.grid.seed),
                "ra_um=" + format_double(profile.ra_actual_um),
                "rz_um=" + format_double(profile.rz_actual_um)};
            write_stream_csv(fuse_to_stream(rec, opt.suite.stream_rate_hz), meta, base);
            const auto laser = fs::path(base).replace_extension(".laser.csv").string();
            write_stream_csv(laser_stream(rec, opt.suite.stream_rate_hz), meta, laser);
            const auto c = check_sampling_constraint(opt.suite.pressure_rate_hz, speed,
                                                     spec.spatial_period_um);
            std::cout << "D = " << format_fixed(c.distance_per_sample_um, 2) << " um, constraint "
                      << (c.satisfied ? "satisfied" : "violated") << "\nwrote " << base << "\nwrote "
                      << laser << '\n';
        } else if (dab->parsed()) {
            const auto& m = catalog.hardness_class(material);
            const auto rec = simulate_dab(m, t_dab.value_or(opt.dab_duration_ms), opt.suite,
                                          cfg.grid.seed);
            const auto path = out.empty() ? in_dir(common.out_dir, "dab_" + material + ".csv") : out;
            write_stream_csv(fuse_to_stream(rec, opt.suite.stream_rate_hz),
                             {"class=" + material, "seed=" + std::to_string(cfg.grid.seed),
                              "rise_ms=" + format_fixed(rec.rise_time_measured_ms, 3),
                              "fall_ms=" + format_fixed(rec.fall_time_measured_ms, 3)},
                             path);
            std::cout << "rise(10-90) = " << format_fixed(rec.rise_time_measured_ms, 2)
                      << " ms, fall(90-10) = " << format_fixed(rec.fall_time_measured_ms, 2)
                      << " ms\nwrote " << path << '\n';
        } else if (dataset->parsed()) {
            const auto recs = study == "roughness"
                                  ? roughness_recordings(catalog, opt, cfg.grid.seed, run, speed)
                                  : hardness_recordings(catalog, opt, cfg.grid.seed, run);
            const auto rs = run_seed(cfg.grid.seed, run);
            const auto d = standardize(assemble_dataset(recs, selector_from_string(selector), window,
                                                        derive_seed(rs, {tag_of("split")})));
            const auto path = out.empty() ? in_dir(common.out_dir, "dataset.txt") : out;
            write_dataset(d, path);
            std::cout << d.size() << " windows x " << d.feature_count() << " features, "
                      << d.indices_of(Split::Train).size() << " train / "
                      << d.indices_of(Split::Val).size() << " val / "
                      << d.indices_of(Split::Test).size() << " test\nwrote " << path << '\n';
        } else if (train->parsed()) {
            const auto d = read_dataset(dataset_path);
            const auto kind = model_kind_from_string(model_name);
            const auto mcfg = with_seed(opt.model_config(kind), model_seed(cfg.grid.seed));
            const auto t0 = std::chrono::steady_clock::now();
            const auto model = train_model(d, mcfg);
            const double secs =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            const auto r = evaluate(model, d, Split::Test);
            std::cout << to_string(kind) << ": test accuracy " << format_fixed(r.accuracy_mean, 2)
                      << "%, train " << format_fixed(secs, 2) << " s, "
                      << format_fixed(r.inference_time_per_window_us, 2) << " us/window\n";
            if (!out.empty()) {
                model.save(out);
                std::cout << "wrote " << out << '\n';
            }
        } else if (grid_rough->parsed()) {
            return print_report(run_roughness_grid(cfg.grid, opt), "roughness grid");
        } else if (grid_hard->parsed()) {
            return print_report(run_hardness_grid(cfg.grid, opt), "hardness grid");
        } else if (downsample->parsed()) {
            return print_report(run_downsampling_study(cfg.grid, opt), "downsampling study");
        } else if (window_study->parsed()) {
            return print_report(run_window_tradeoff(cfg.grid, opt, windows), "window trade-off");
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
