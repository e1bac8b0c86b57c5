#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "whisker/dataset.hpp"
#include "whisker/metrics.hpp"
#include "whisker/model.hpp"
#include "whisker/sensor.hpp"
#include "whisker/surface.hpp"

namespace whisker {

struct GridSpec {
    std::vector<int> window_sizes{50, 100};
    std::vector<double> speeds_mm_min{50.0, 100.0};
    std::vector<Selector> selectors{Selector::P, Selector::A, Selector::PA, Selector::L};
    std::vector<ModelKind> models{ModelKind::SVM, ModelKind::RF, ModelKind::MLP};
    int n_runs = 5;
    std::uint64_t seed = 2024;

    void validate() const;
    std::size_t cell_count() const;
};

/// Acquisition and training settings shared by every study.
struct StudyOptions {
    SensorSuiteConfig suite;
    double sweep_length_mm = 10.0;
    int sweeps_per_class = 3;
    double profile_resolution_um = 0.25;
    double dab_duration_ms = 3000.0;
    int dabs_per_material = 6;
    // Dab-to-dab relative spread of contact pressure and time constants.
    double dab_variability = 0.03;

    SvmConfig svm;
    RfConfig rf;
    MlpConfig mlp;

    // "Approximately equal" for the ordering predicates, in accuracy points.
    double approx_tolerance = 5.0;
    int parallelism = 1;
    std::string out_dir; // empty: emit nothing

    ModelConfig model_config(ModelKind kind) const;
};

struct CellKey {
    std::string study;
    ModelKind model = ModelKind::SVM;
    int window = 0;
    double speed_mm_min = 0.0;
    Selector selector = Selector::PA;
    double rate_hz = 0.0;

    auto operator<=>(const CellKey&) const = default;
    std::string describe() const;
};

struct CellOutcome {
    std::optional<ExperimentResult> result;
    std::vector<std::string> class_set;
    std::string error;
    std::vector<std::string> warnings;
};

struct PredicateCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct StudyReport {
    std::map<CellKey, CellOutcome> cells;
    std::vector<PredicateCheck> checks;
    std::vector<std::string> emitted_files;

    bool all_checks_passed() const;
    /// Mean accuracy of a cell, or NaN when the cell is missing or failed.
    double accuracy(const CellKey& key) const;
};

/// Swept recordings of every roughness class for one run and speed.
std::vector<RecordingStreams> roughness_recordings(const SpecimenCatalog& catalog,
                                                   const StudyOptions& options,
                                                   std::uint64_t study_seed, int run,
                                                   double speed_mm_min);
/// Dab recordings of every hardness material for one run.
std::vector<RecordingStreams> hardness_recordings(const SpecimenCatalog& catalog,
                                                  const StudyOptions& options,
                                                  std::uint64_t study_seed, int run);

StudyReport run_roughness_grid(const GridSpec& grid, const StudyOptions& options);
/// Restricted to selectors {A, P, PA}; speed does not apply to dabs.
StudyReport run_hardness_grid(const GridSpec& grid, const StudyOptions& options);
/// PA at V_s = 50, W = 50, stream decimated by 1..5.
StudyReport run_downsampling_study(const GridSpec& grid, const StudyOptions& options);
/// PA at V_s = 50 for each W in `windows`.
StudyReport run_window_tradeoff(const GridSpec& grid, const StudyOptions& options,
                                const std::vector<int>& windows = {25, 50, 100, 200});

struct SensorRate {
    std::string name;
    double rate_hz;
};

struct ConstraintRow {
    std::string sensor;
    double rate_hz;
    double speed_mm_min;
    ConstraintReport report;
};

std::vector<SensorRate> default_sensor_rates();
std::vector<ConstraintRow> constraint_table(const std::vector<SensorRate>& sensors,
                                            const std::vector<double>& speeds_mm_min = {50.0,
                                                                                        100.0});
/// Table of D and 2D per sensor and speed, two decimals.
void emit_constraint_table(const std::string& path,
                           const std::vector<SensorRate>& sensors = default_sensor_rates());

} // namespace whisker
