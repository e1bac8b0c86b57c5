#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "whisker/sensor.hpp"

namespace whisker {

enum class Selector { P, A, PA, L };

std::string to_string(Selector s);
Selector selector_from_string(const std::string& text);
/// Features per time step: P 1, A 3, PA 4, L 1.
int channels_per_step(Selector s);

enum class Split { Train, Val, Test };

std::string to_string(Split s);
Split split_from_string(const std::string& text);

struct WindowedSample {
    Eigen::VectorXd features; // W * k values, time-major then channel
    std::string label;
    std::string source_id;
    int window_index = 0;
};

enum class WindowStatus { Ok, InsufficientData };

struct WindowingResult {
    std::vector<WindowedSample> windows;
    WindowStatus status = WindowStatus::Ok;
};

/// Non-straddling windows of W rows taken every `stride` rows.
WindowingResult window_split(const FusedStream& stream, int window, int stride);

/// Whisker stream plus the optional laser stream of one recording.
struct RecordingStreams {
    std::string label;
    std::string source_id;
    FusedStream whisker;
    std::optional<FusedStream> laser;
};

RecordingStreams streams_of(const SweepRecording& recording, double stream_rate_hz);
RecordingStreams streams_of(const DabRecording& recording, double stream_rate_hz);

struct StandardizationStats {
    Eigen::VectorXd mean;
    Eigen::VectorXd sd;
};

inline constexpr double kSdFloor = 1e-8;

/// Windowed, labelled samples stored row-wise in one feature matrix.
struct LabeledDataset {
    Selector selector = Selector::PA;
    int window = 50;
    int k = 4;
    std::uint64_t split_seed = 0;
    std::vector<std::string> class_set;

    Eigen::MatrixXd features; // one row per window
    std::vector<int> labels;  // indices into class_set
    std::vector<std::string> source_ids;
    std::vector<int> window_indices;
    std::vector<Split> splits;

    StandardizationStats stats; // from train rows only

    Eigen::Index size() const { return features.rows(); }
    Eigen::Index feature_count() const { return features.cols(); }
    int class_count() const { return static_cast<int>(class_set.size()); }
    std::vector<Eigen::Index> indices_of(Split s) const;
    Eigen::MatrixXd features_of(Split s) const;
    Eigen::VectorXi labels_of(Split s) const;
    WindowedSample sample(Eigen::Index i) const;

    bool operator==(const LabeledDataset& other) const;
};

class InsufficientSweeps : public std::invalid_argument {
public:
    explicit InsufficientSweeps(const std::string& label)
        : std::invalid_argument("insufficient sweeps for class " + label) {}
};

inline constexpr int kMinRecordingsPerClass = 3;

/// Windows every recording (stride = W), selects channels, splits each class
/// 0.7/0.2/0.1 by a seeded shuffle and records train-only statistics.
LabeledDataset assemble_dataset(const std::vector<RecordingStreams>& recordings,
                                Selector selector, int window, std::uint64_t seed,
                                int decimation = 1);

/// Per-feature mean and population sd of the train rows.
StandardizationStats compute_train_stats(const LabeledDataset& dataset);

/// Applies the stored stats, then refreshes them from the new train rows.
LabeledDataset standardize(const LabeledDataset& dataset);

class DatasetParseError : public std::runtime_error {
public:
    DatasetParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

void write_dataset(const LabeledDataset& dataset, const std::string& path);
LabeledDataset read_dataset(const std::string& path);

} // namespace whisker
