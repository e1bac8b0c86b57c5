#include "whisker/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <random>
#include <sstream>
#include <thread>

#include "whisker/csv.hpp"
#include "whisker/seed.hpp"

namespace whisker {

namespace fs = std::filesystem;

// Fixed operating point of the downsampling and window studies.
constexpr double kSpeed = 50.0;
constexpr int kWindow = 50;

void GridSpec::validate() const {
    if (window_sizes.empty() || speeds_mm_min.empty() || selectors.empty() || models.empty())
        throw std::invalid_argument("GridSpec: every axis must be non-empty");
    if (n_runs < 2) throw std::invalid_argument("GridSpec: n_runs must be >= 2");
    for (int w : window_sizes)
        if (w < 1) throw std::invalid_argument("GridSpec: window sizes must be >= 1");
    for (double s : speeds_mm_min)
        if (!(s > 0.0)) throw std::invalid_argument("GridSpec: speeds must be positive");
}

std::size_t GridSpec::cell_count() const {
    return window_sizes.size() * speeds_mm_min.size() * selectors.size() * models.size();
}

ModelConfig StudyOptions::model_config(ModelKind kind) const {
    switch (kind) {
    case ModelKind::SVM: return svm;
    case ModelKind::RF: return rf;
    case ModelKind::MLP: return mlp;
    }
    throw std::invalid_argument("unknown model kind");
}

std::string CellKey::describe() const {
    std::ostringstream s;
    s << study << '/' << to_string(model) << "/W" << window;
    if (speed_mm_min > 0.0) s << "/V" << format_double(speed_mm_min);
    s << '/' << to_string(selector);
    if (rate_hz > 0.0) s << '/' << std::lround(rate_hz) << "Hz";
    return s.str();
}

bool StudyReport::all_checks_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

double StudyReport::accuracy(const CellKey& key) const {
    const auto it = cells.find(key);
    if (it == cells.end() || !it->second.result) return std::numeric_limits<double>::quiet_NaN();
    return it->second.result->accuracy_mean;
}

namespace {

void parallel_for(std::size_t n, int parallelism, const std::function<void(std::size_t)>& fn) {
    const auto workers = static_cast<std::size_t>(std::max(1, parallelism));
    if (workers == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(workers, n); ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        });
    for (auto& th : pool) th.join();
}

struct CellAccumulator {
    std::vector<double> accuracies;
    Eigen::MatrixXi confusion;
    double train_s = 0.0;
    double infer_us = 0.0;
    std::string fingerprint;
    std::vector<std::string> class_set;
    std::string error;
    std::vector<std::string> warnings;
};

struct DatasetJob {
    std::vector<CellKey> keys; // one per model
    std::function<LabeledDataset()> build;
};

// Minimum over repeats damps scheduler noise in per-window timing.
double timed_inference_us(const TrainedModel& model, const Eigen::MatrixXd& x, int repeats) {
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        const Eigen::VectorXi p = model.predict(x);
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double, std::micro>(t1 - t0).count());
        if (p.size() == 0) break;
    }
    return best / static_cast<double>(std::max<Eigen::Index>(1, x.rows()));
}

void train_cell(const LabeledDataset& dataset, ModelKind kind, std::uint64_t seed,
                const StudyOptions& options, int timing_repeats, CellAccumulator& acc) {
    try {
        const ModelConfig cfg = with_seed(options.model_config(kind), model_seed(seed));
        const auto t0 = std::chrono::steady_clock::now();
        const TrainedModel model = train_model(dataset, cfg);
        const auto t1 = std::chrono::steady_clock::now();
        ExperimentResult r = evaluate(model, dataset, Split::Test);
        if (timing_repeats > 1)
            r.inference_time_per_window_us =
                timed_inference_us(model, dataset.features_of(Split::Test), timing_repeats);
        acc.accuracies.push_back(r.accuracy_mean);
        if (acc.confusion.size() == 0) acc.confusion = r.confusion;
        else acc.confusion += r.confusion;
        acc.train_s += std::chrono::duration<double>(t1 - t0).count();
        acc.infer_us += r.inference_time_per_window_us;
        acc.fingerprint = fingerprint(options.model_config(kind));
        acc.class_set = dataset.class_set;
    } catch (const std::exception& e) {
        if (acc.error.empty()) acc.error = e.what();
    }
}

std::vector<std::string> short_stream_warnings(const std::vector<RecordingStreams>& recs,
                                               Selector selector, int window, int decimation) {
    std::vector<std::string> out;
    for (const auto& r : recs) {
        const auto& s = selector == Selector::L && r.laser ? *r.laser : r.whisker;
        const Eigen::Index rows = (s.data.rows() + decimation - 1) / decimation;
        if (rows < window)
            out.push_back("zero windows: " + r.source_id + " has " + std::to_string(rows) +
                          " samples < W=" + std::to_string(window));
    }
    return out;
}

std::uint64_t split_seed(std::uint64_t run) { return derive_seed(run, {tag_of("split")}); }

// Runs every dataset job for each run; cells are merged by key, so output does
// not depend on completion order.
std::map<CellKey, CellOutcome> execute(
    const GridSpec& grid, const StudyOptions& options, int timing_repeats,
    const std::function<std::vector<DatasetJob>(int run, std::uint64_t run_seed)>& jobs_for_run) {
    std::map<CellKey, CellAccumulator> acc;
    for (int run = 0; run < grid.n_runs; ++run) {
        const auto seed = run_seed(grid.seed, run);
        const auto jobs = jobs_for_run(run, seed);
        std::vector<std::unique_ptr<LabeledDataset>> datasets(jobs.size());
        std::vector<std::string> build_errors(jobs.size());
        parallel_for(jobs.size(), options.parallelism, [&](std::size_t j) {
            try {
                datasets[j] = std::make_unique<LabeledDataset>(jobs[j].build());
            } catch (const std::exception& e) {
                build_errors[j] = e.what();
            }
        });
        // Accumulators are created up front so workers never mutate the map.
        std::vector<std::pair<std::size_t, CellAccumulator*>> tasks;
        for (std::size_t j = 0; j < jobs.size(); ++j)
            for (const auto& key : jobs[j].keys) {
                auto& a = acc[key];
                if (!build_errors[j].empty() && a.error.empty()) a.error = build_errors[j];
                tasks.emplace_back(j, &a);
            }
        std::vector<ModelKind> kinds;
        for (const auto& job : jobs)
            for (const auto& key : job.keys) kinds.push_back(key.model);
        parallel_for(tasks.size(), options.parallelism, [&](std::size_t t) {
            const auto [j, target] = tasks[t];
            if (!datasets[j]) return;
            train_cell(*datasets[j], kinds[t], seed, options, timing_repeats, *target);
        });
    }

    std::map<CellKey, CellOutcome> cells;
    for (auto& [key, a] : acc) {
        CellOutcome out;
        out.class_set = a.class_set;
        out.warnings = a.warnings;
        if (!a.error.empty() || a.accuracies.empty()) {
            out.error = a.error.empty() ? "no successful runs" : a.error;
        } else {
            ExperimentResult r;
            r.run_accuracies = a.accuracies;
            std::tie(r.accuracy_mean, r.accuracy_variance) = mean_and_variance(a.accuracies);
            r.confusion = a.confusion;
            const auto n = static_cast<double>(a.accuracies.size());
            r.train_time_s = a.train_s / n;
            r.inference_time_per_window_us = a.infer_us / n;
            r.config_fingerprint = a.fingerprint + " runs=" + std::to_string(a.accuracies.size()) +
                                   " study_seed=" + std::to_string(grid.seed);
            out.result = std::move(r);
        }
        cells.emplace(key, std::move(out));
    }
    return cells;
}

std::string fmt2(double v) { return std::isnan(v) ? "nan" : format_fixed(v, 2); }

void add_warnings(std::map<CellKey, CellOutcome>& cells, const CellKey& key,
                  const std::vector<std::string>& w) {
    auto it = cells.find(key);
    if (it == cells.end()) return;
    for (const auto& s : w)
        if (std::find(it->second.warnings.begin(), it->second.warnings.end(), s) ==
            it->second.warnings.end())
            it->second.warnings.push_back(s);
}

void write_cells_csv(const StudyReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "study,model,window,speed_mm_min,selector,rate_hz,mu,sigma2,train_time_s,"
           "inference_us_per_window,status,fingerprint\n";
    for (const auto& [key, cell] : report.cells) {
        out << key.study << ',' << to_string(key.model) << ',' << key.window << ','
            << format_double(key.speed_mm_min) << ',' << to_string(key.selector) << ','
            << format_fixed(key.rate_hz, 2) << ',';
        if (cell.result) {
            const auto& r = *cell.result;
            out << fmt2(r.accuracy_mean) << ',' << fmt2(r.accuracy_variance) << ','
                << format_fixed(r.train_time_s, 4) << ','
                << format_fixed(r.inference_time_per_window_us, 3) << ",ok,\""
                << r.config_fingerprint << "\"\n";
        } else {
            out << "nan,nan,nan,nan,\"failed: " << cell.error << "\",\n";
        }
    }
}

void write_checks_csv(const StudyReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "check,passed,detail\n";
    for (const auto& c : report.checks)
        out << c.name << ',' << (c.passed ? "true" : "false") << ",\"" << c.detail << "\"\n";
}

void emit_confusions(StudyReport& report, const std::string& dir) {
    fs::create_directories(dir);
    for (const auto& [key, cell] : report.cells) {
        if (!cell.result) continue;
        std::string name = key.describe();
        std::replace(name.begin(), name.end(), '/', '_');
        const auto path = (fs::path(dir) / (name + ".csv")).string();
        write_confusion_csv(cell.result->confusion, cell.class_set, path);
        report.emitted_files.push_back(path);
    }
}

std::string detail_of(const std::vector<std::pair<std::string, double>>& values) {
    std::string s;
    for (const auto& [name, v] : values) {
        if (!s.empty()) s += ' ';
        s += name + '=' + fmt2(v);
    }
    return s;
}

std::string out_path(const StudyOptions& options, const std::string& name) {
    fs::create_directories(options.out_dir);
    return (fs::path(options.out_dir) / name).string();
}

} // namespace

std::vector<RecordingStreams> roughness_recordings(const SpecimenCatalog& catalog,
                                                   const StudyOptions& options,
                                                   std::uint64_t study_seed, int run,
                                                   double speed_mm_min) {
    std::vector<RecordingStreams> out;
    StageConfig stage;
    stage.speed_mm_min = speed_mm_min;
    stage.sweep_length_mm = options.sweep_length_mm;
    const double sweep_um = options.sweep_length_mm * 1000.0;
    for (std::size_t c = 0; c < catalog.roughness.size(); ++c) {
        for (int s = 0; s < options.sweeps_per_class; ++s) {
            // Each sweep runs along its own lane of the specimen; lanes share
            // the machined waveform and differ in phase and micro-roughness.
            const auto lane = derive_seed(study_seed, {tag_of("lane"), c,
                                                       static_cast<std::uint64_t>(s),
                                                       static_cast<std::uint64_t>(run)});
            SurfaceSpec spec = catalog.roughness[c];
            spec.seed = lane;
            const double length = std::max(10.0 * spec.spatial_period_um,
                                           sweep_um + spec.spatial_period_um);
            const TextureProfile profile =
                build_roughness_profile(spec, length, options.profile_resolution_um);
            const auto rec = simulate_sweep(profile, stage, options.suite,
                                            derive_seed(lane, {tag_of("sensor")}), 0.0);
            out.push_back(streams_of(rec, options.suite.stream_rate_hz));
        }
    }
    return out;
}

std::vector<RecordingStreams> hardness_recordings(const SpecimenCatalog& catalog,
                                                  const StudyOptions& options,
                                                  std::uint64_t study_seed, int run) {
    if (options.dabs_per_material < 1) throw std::invalid_argument("empty dab set");
    std::vector<RecordingStreams> out;
    for (const auto& material : catalog.hardness) {
        for (int d = 0; d < options.dabs_per_material; ++d) {
            const auto seed = derive_seed(study_seed, {tag_of("dab"),
                                                       static_cast<std::uint64_t>(material.hardness_rank),
                                                       static_cast<std::uint64_t>(d),
                                                       static_cast<std::uint64_t>(run)});
            HardnessSpec m = material;
            if (options.dab_variability > 0.0) {
                std::mt19937_64 rng(derive_seed(seed, {tag_of("contact")}));
                std::normal_distribution<double> jitter(1.0, options.dab_variability);
                m.steady_state_pressure *= jitter(rng);
                const double tau_scale = std::max(0.5, jitter(rng));
                m.rise_time_constant_ms *= tau_scale;
                m.fall_time_constant_ms *= tau_scale;
            }
            const auto rec = simulate_dab(m, options.dab_duration_ms, options.suite, seed);
            out.push_back(streams_of(rec, options.suite.stream_rate_hz));
        }
    }
    return out;
}

StudyReport run_roughness_grid(const GridSpec& grid, const StudyOptions& options) {
    grid.validate();
    const auto catalog = list_specimen_catalog();
    std::map<CellKey, std::vector<std::string>> warnings;

    auto cells = execute(grid, options, 1, [&](int run, std::uint64_t seed) {
        std::vector<DatasetJob> jobs;
        for (double speed : grid.speeds_mm_min) {
            auto recs = std::make_shared<std::vector<RecordingStreams>>(
                roughness_recordings(catalog, options, grid.seed, run, speed));
            for (int w : grid.window_sizes)
                for (Selector sel : grid.selectors) {
                    DatasetJob job;
                    for (ModelKind m : grid.models) {
                        CellKey key{"roughness", m, w, speed, sel, 0.0};
                        job.keys.push_back(key);
                        if (run == 0) warnings[key] = short_stream_warnings(*recs, sel, w, 1);
                    }
                    job.build = [recs, sel, w, seed] {
                        return standardize(assemble_dataset(*recs, sel, w, split_seed(seed)));
                    };
                    jobs.push_back(std::move(job));
                }
        }
        return jobs;
    });
    for (const auto& [k, w] : warnings) add_warnings(cells, k, w);

    StudyReport report;
    report.cells = std::move(cells);
    auto acc = [&](ModelKind m, int w, double v, Selector s) {
        return report.accuracy({"roughness", m, w, v, s, 0.0});
    };
    const auto has = [&](Selector s) {
        return std::find(grid.selectors.begin(), grid.selectors.end(), s) != grid.selectors.end();
    };

    if (has(Selector::P) && has(Selector::A) && has(Selector::PA)) {
        for (ModelKind m : grid.models)
            for (double v : grid.speeds_mm_min)
                for (int w : grid.window_sizes) {
                    const double pa = acc(m, w, v, Selector::PA);
                    const double p = acc(m, w, v, Selector::P);
                    const double a = acc(m, w, v, Selector::A);
                    PredicateCheck c;
                    c.name = "roughness_order/" + to_string(m) + "/V" + format_double(v) + "/W" +
                             std::to_string(w);
                    c.passed = pa >= p && p >= a && pa - a >= 3.0;
                    c.detail = "PA>=P>=A and PA-A>=3: " +
                               detail_of({{"PA", pa}, {"P", p}, {"A", a}});
                    report.checks.push_back(std::move(c));
                }
    }

    if (grid.speeds_mm_min.size() >= 2) {
        const double slow = *std::min_element(grid.speeds_mm_min.begin(), grid.speeds_mm_min.end());
        const double fast = *std::max_element(grid.speeds_mm_min.begin(), grid.speeds_mm_min.end());
        for (ModelKind m : grid.models)
            for (Selector s : grid.selectors)
                for (int w : grid.window_sizes) {
                    const double a_slow = acc(m, w, slow, s);
                    const double a_fast = acc(m, w, fast, s);
                    PredicateCheck c;
                    c.name = "speed_monotone/" + to_string(m) + "/" + to_string(s) + "/W" +
                             std::to_string(w);
                    c.passed = a_slow >= a_fast - 2.0;
                    c.detail = "acc(V" + format_double(slow) + ") >= acc(V" + format_double(fast) +
                               ") - 2: " + detail_of({{"slow", a_slow}, {"fast", a_fast}});
                    report.checks.push_back(std::move(c));
                }
    }

    double best_pa = -1.0;
    double best_l = -1.0;
    CellKey best_pa_key;
    for (const auto& [key, cell] : report.cells) {
        if (!cell.result) continue;
        if (key.selector == Selector::PA && cell.result->accuracy_mean > best_pa) {
            best_pa = cell.result->accuracy_mean;
            best_pa_key = key;
        }
        if (key.selector == Selector::L) best_l = std::max(best_l, cell.result->accuracy_mean);
    }
    if (has(Selector::PA)) {
        report.checks.push_back({"roughness_best_pa_at_least_90", best_pa >= 90.0,
                                 best_pa_key.describe() + " " + detail_of({{"PA", best_pa}})});
        if (has(Selector::L))
            report.checks.push_back(
                {"roughness_pa_matches_laser",
                 std::abs(best_pa - best_l) <= options.approx_tolerance,
                 "|best PA - best L| <= " + fmt2(options.approx_tolerance) + ": " +
                     detail_of({{"PA", best_pa}, {"L", best_l}})});
    }

    if (!options.out_dir.empty()) {
        // One row per (W, model), mu/sigma2 per speed and selector.
        std::vector<double> speeds = grid.speeds_mm_min;
        std::sort(speeds.rbegin(), speeds.rend());
        const auto path = out_path(options, "roughness_table.csv");
        std::ofstream out(path);
        out << "window,classifier";
        for (double v : speeds)
            for (Selector s : grid.selectors)
                out << ",V" << format_double(v) << '_' << to_string(s) << "_mu,V"
                    << format_double(v) << '_' << to_string(s) << "_sigma2";
        out << '\n';
        for (int w : grid.window_sizes)
            for (ModelKind m : grid.models) {
                out << w << ',' << to_string(m);
                for (double v : speeds)
                    for (Selector s : grid.selectors) {
                        const auto it = report.cells.find({"roughness", m, w, v, s, 0.0});
                        if (it != report.cells.end() && it->second.result)
                            out << ',' << fmt2(it->second.result->accuracy_mean) << ','
                                << fmt2(it->second.result->accuracy_variance);
                        else
                            out << ",nan,nan";
                    }
                out << '\n';
            }
        report.emitted_files.push_back(path);
        const auto cells_path = out_path(options, "roughness_cells.csv");
        write_cells_csv(report, cells_path);
        report.emitted_files.push_back(cells_path);
        emit_confusions(report, out_path(options, "confusion_roughness"));
        const auto checks_path = out_path(options, "roughness_checks.csv");
        write_checks_csv(report, checks_path);
        report.emitted_files.push_back(checks_path);
    }
    return report;
}

StudyReport run_hardness_grid(const GridSpec& grid, const StudyOptions& options) {
    grid.validate();
    if (options.dabs_per_material < 1) throw std::invalid_argument("empty dab set");
    const auto catalog = list_specimen_catalog();
    std::vector<Selector> selectors;
    for (Selector s : {Selector::A, Selector::P, Selector::PA})
        if (std::find(grid.selectors.begin(), grid.selectors.end(), s) != grid.selectors.end())
            selectors.push_back(s);
    if (selectors.empty()) throw std::invalid_argument("hardness grid needs A, P or PA");

    std::map<CellKey, std::vector<std::string>> warnings;
    auto cells = execute(grid, options, 1, [&](int run, std::uint64_t seed) {
        auto recs = std::make_shared<std::vector<RecordingStreams>>(
            hardness_recordings(catalog, options, grid.seed, run));
        std::vector<DatasetJob> jobs;
        for (int w : grid.window_sizes)
            for (Selector sel : selectors) {
                DatasetJob job;
                for (ModelKind m : grid.models) {
                    CellKey key{"hardness", m, w, 0.0, sel, 0.0};
                    job.keys.push_back(key);
                    if (run == 0) warnings[key] = short_stream_warnings(*recs, sel, w, 1);
                }
                job.build = [recs, sel, w, seed] {
                    return standardize(assemble_dataset(*recs, sel, w, split_seed(seed)));
                };
                jobs.push_back(std::move(job));
            }
        return jobs;
    });
    for (const auto& [k, w] : warnings) add_warnings(cells, k, w);

    StudyReport report;
    report.cells = std::move(cells);
    auto acc = [&](ModelKind m, int w, Selector s) {
        return report.accuracy({"hardness", m, w, 0.0, s, 0.0});
    };
    if (selectors.size() == 3) {
        for (ModelKind m : grid.models)
            for (int w : grid.window_sizes) {
                const double p = acc(m, w, Selector::P);
                const double pa = acc(m, w, Selector::PA);
                const double a = acc(m, w, Selector::A);
                PredicateCheck c;
                c.name = "hardness_order/" + to_string(m) + "/W" + std::to_string(w);
                c.passed = std::abs(p - pa) <= options.approx_tolerance &&
                           std::min(p, pa) - a >= 10.0;
                c.detail = "|P-PA|<=" + fmt2(options.approx_tolerance) +
                           " and min(P,PA)-A>=10: " + detail_of({{"P", p}, {"PA", pa}, {"A", a}});
                report.checks.push_back(std::move(c));
            }
    }
    double best_rf = -1.0;
    double best_any = -1.0;
    ModelKind best_model = ModelKind::SVM;
    const int w_best = std::find(grid.window_sizes.begin(), grid.window_sizes.end(), 50) !=
                               grid.window_sizes.end()
                           ? 50
                           : grid.window_sizes.front();
    for (const auto& [key, cell] : report.cells) {
        if (!cell.result) continue;
        const double v = cell.result->accuracy_mean;
        if (key.selector == Selector::A) continue;
        if (v > best_any) {
            best_any = v;
            best_model = key.model;
        }
        if (key.model == ModelKind::RF && key.window == w_best) best_rf = std::max(best_rf, v);
    }
    if (std::find(grid.models.begin(), grid.models.end(), ModelKind::RF) != grid.models.end()) {
        report.checks.push_back({"hardness_rf_best_at_least_90", best_rf >= 90.0,
                                 "RF on P or PA at W=" + std::to_string(w_best) + ": " +
                                     detail_of({{"acc", best_rf}})});
        report.checks.push_back({"hardness_rf_is_best_family", best_model == ModelKind::RF,
                                 "best P/PA cell is " + to_string(best_model) + " at " +
                                     fmt2(best_any)});
    }

    if (!options.out_dir.empty()) {
        const auto path = out_path(options, "hardness_table.csv");
        std::ofstream out(path);
        out << "window,classifier";
        for (Selector s : selectors)
            out << ',' << to_string(s) << "_mu," << to_string(s) << "_sigma2";
        out << '\n';
        for (int w : grid.window_sizes)
            for (ModelKind m : grid.models) {
                out << w << ',' << to_string(m);
                for (Selector s : selectors) {
                    const auto it = report.cells.find({"hardness", m, w, 0.0, s, 0.0});
                    if (it != report.cells.end() && it->second.result)
                        out << ',' << fmt2(it->second.result->accuracy_mean) << ','
                            << fmt2(it->second.result->accuracy_variance);
                    else
                        out << ",nan,nan";
                }
                out << '\n';
            }
        report.emitted_files.push_back(path);
        const auto cells_path = out_path(options, "hardness_cells.csv");
        write_cells_csv(report, cells_path);
        report.emitted_files.push_back(cells_path);
        emit_confusions(report, out_path(options, "confusion_hardness"));
        const auto checks_path = out_path(options, "hardness_checks.csv");
        write_checks_csv(report, checks_path);
        report.emitted_files.push_back(checks_path);
    }
    return report;
}

StudyReport run_downsampling_study(const GridSpec& grid, const StudyOptions& options) {
    grid.validate();
    const auto catalog = list_specimen_catalog();
    const double base_rate = options.suite.stream_rate_hz;

    auto cells = execute(grid, options, 1, [&](int run, std::uint64_t seed) {
        auto recs = std::make_shared<std::vector<RecordingStreams>>(
            roughness_recordings(catalog, options, grid.seed, run, kSpeed));
        std::vector<DatasetJob> jobs;
        for (int factor = 1; factor <= 5; ++factor) {
            DatasetJob job;
            for (ModelKind m : grid.models)
                job.keys.push_back({"downsample", m, kWindow, kSpeed, Selector::PA,
                                    base_rate / factor});
            job.build = [recs, factor, seed] {
                return standardize(
                    assemble_dataset(*recs, Selector::PA, kWindow, split_seed(seed), factor));
            };
            jobs.push_back(std::move(job));
        }
        return jobs;
    });

    StudyReport report;
    report.cells = std::move(cells);
    for (ModelKind m : grid.models) {
        std::vector<std::pair<std::string, double>> series;
        std::vector<double> accs;
        for (int factor = 1; factor <= 5; ++factor) {
            const double a =
                report.accuracy({"downsample", m, kWindow, kSpeed, Selector::PA, base_rate / factor});
            accs.push_back(a);
            series.emplace_back(std::to_string(std::lround(base_rate / factor)) + "Hz", a);
        }
        bool trend = true;
        for (std::size_t i = 1; i < accs.size(); ++i)
            trend = trend && accs[i] <= accs[i - 1] + 2.0;
        report.checks.push_back({"downsample_gain/" + to_string(m),
                                 accs.front() - accs.back() >= 2.0,
                                 "acc(full rate) - acc(rate/5) >= 2: " + detail_of(series)});
        report.checks.push_back({"downsample_trend/" + to_string(m), trend,
                                 "non-increasing within 2 points: " + detail_of(series)});
    }

    if (!options.out_dir.empty()) {
        const auto path = out_path(options, "downsample_plot.csv");
        std::ofstream out(path);
        out << "rate_hz,classifier,mu,sigma2\n";
        for (int factor = 1; factor <= 5; ++factor)
            for (ModelKind m : grid.models) {
                const auto it = report.cells.find(
                    {"downsample", m, kWindow, kSpeed, Selector::PA, base_rate / factor});
                out << std::lround(base_rate / factor) << ',' << to_string(m) << ',';
                if (it != report.cells.end() && it->second.result)
                    out << fmt2(it->second.result->accuracy_mean) << ','
                        << fmt2(it->second.result->accuracy_variance) << '\n';
                else
                    out << "nan,nan\n";
            }
        report.emitted_files.push_back(path);
        const auto checks_path = out_path(options, "downsample_checks.csv");
        write_checks_csv(report, checks_path);
        report.emitted_files.push_back(checks_path);
    }
    return report;
}

StudyReport run_window_tradeoff(const GridSpec& grid, const StudyOptions& options,
                                const std::vector<int>& windows) {
    grid.validate();
    if (windows.empty()) throw std::invalid_argument("window tradeoff needs window sizes");
    const auto catalog = list_specimen_catalog();
    std::map<CellKey, std::vector<std::string>> warnings;

    auto cells = execute(grid, options, 5, [&](int run, std::uint64_t seed) {
        auto recs = std::make_shared<std::vector<RecordingStreams>>(
            roughness_recordings(catalog, options, grid.seed, run, kSpeed));
        std::vector<DatasetJob> jobs;
        for (int w : windows) {
            DatasetJob job;
            for (ModelKind m : grid.models) {
                CellKey key{"window", m, w, kSpeed, Selector::PA, 0.0};
                job.keys.push_back(key);
                if (run == 0) warnings[key] = short_stream_warnings(*recs, Selector::PA, w, 1);
            }
            job.build = [recs, w, seed] {
                return standardize(assemble_dataset(*recs, Selector::PA, w, split_seed(seed)));
            };
            jobs.push_back(std::move(job));
        }
        return jobs;
    });
    for (const auto& [k, w] : warnings) add_warnings(cells, k, w);

    StudyReport report;
    report.cells = std::move(cells);
    for (ModelKind m : grid.models) {
        if (m != ModelKind::MLP) continue;
        bool monotone = true;
        double prev = -1.0;
        std::vector<std::pair<std::string, double>> series;
        for (int w : windows) {
            const auto it = report.cells.find({"window", m, w, kSpeed, Selector::PA, 0.0});
            if (it == report.cells.end() || !it->second.result) continue;
            const double t = it->second.result->inference_time_per_window_us;
            series.emplace_back("W" + std::to_string(w), t);
            monotone = monotone && t >= prev;
            prev = t;
        }
        report.checks.push_back({"window_inference_time_monotone/" + to_string(m), monotone,
                                 "us per window: " + detail_of(series)});
    }

    if (!options.out_dir.empty()) {
        const auto path = out_path(options, "window_tradeoff_plot.csv");
        std::ofstream out(path);
        out << "window,classifier,mu,sigma2,inference_us_per_window,train_time_s,warnings\n";
        for (int w : windows)
            for (ModelKind m : grid.models) {
                const auto it = report.cells.find({"window", m, w, kSpeed, Selector::PA, 0.0});
                out << w << ',' << to_string(m) << ',';
                if (it != report.cells.end() && it->second.result) {
                    const auto& r = *it->second.result;
                    out << fmt2(r.accuracy_mean) << ',' << fmt2(r.accuracy_variance) << ','
                        << format_fixed(r.inference_time_per_window_us, 3) << ','
                        << format_fixed(r.train_time_s, 4);
                } else {
                    out << "nan,nan,nan,nan";
                }
                out << ',' << (it != report.cells.end() ? it->second.warnings.size() : 0) << '\n';
            }
        report.emitted_files.push_back(path);
    }
    return report;
}

std::vector<SensorRate> default_sensor_rates() {
    return {{"Pressure Sensor", 157.0}, {"Accelerometer", 1000.0}, {"NCDT Laser", 2500.0}};
}

std::vector<ConstraintRow> constraint_table(const std::vector<SensorRate>& sensors,
                                            const std::vector<double>& speeds_mm_min) {
    std::vector<ConstraintRow> rows;
    for (const auto& s : sensors)
        for (double v : speeds_mm_min)
            rows.push_back({s.name, s.rate_hz, v,
                            check_sampling_constraint(s.rate_hz, v, 1.0)});
    return rows;
}

void emit_constraint_table(const std::string& path, const std::vector<SensorRate>& sensors) {
    const std::vector<double> speeds{50.0, 100.0};
    const auto rows = constraint_table(sensors, speeds);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "sensor,rate_hz";
    for (double v : speeds)
        out << ",D_um_V" << format_double(v) << ",d_sep_um_V" << format_double(v);
    out << '\n';
    for (std::size_t i = 0; i < rows.size(); i += speeds.size()) {
        out << rows[i].sensor << ',' << format_double(rows[i].rate_hz);
        for (std::size_t j = 0; j < speeds.size(); ++j) {
            const auto& r = rows[i + j].report;
            out << ',' << format_fixed(r.distance_per_sample_um, 2) << ','
                << format_fixed(r.min_resolvable_separation_um, 2);
        }
        out << '\n';
    }
}

} // namespace whisker
