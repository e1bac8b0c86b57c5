#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "whisker/dataset.hpp"
#include "whisker/model.hpp"

namespace whisker {

/// Accuracy statistics in percent; variance is the population variance
/// (percent squared) over repeated runs, zero for a single evaluation.
struct ExperimentResult {
    double accuracy_mean = 0.0;
    double accuracy_variance = 0.0;
    Eigen::MatrixXi confusion; // rows: true class, cols: predicted class
    double train_time_s = 0.0;
    double inference_time_per_window_us = 0.0;
    std::string config_fingerprint;
    std::vector<double> run_accuracies;
};

/// Rows are true labels, columns predictions.
Eigen::MatrixXi confusion_matrix(const Eigen::VectorXi& truth, const Eigen::VectorXi& predicted,
                                 int n_classes);
double accuracy_percent(const Eigen::MatrixXi& confusion);

ExperimentResult evaluate(const TrainedModel& model, const LabeledDataset& dataset, Split split);

/// Mean and population variance of a list of accuracies.
std::pair<double, double> mean_and_variance(const std::vector<double>& values);

using DatasetBuilder = std::function<LabeledDataset(std::uint64_t seed)>;

/// Per run r: dataset = builder(seed_r) (already standardized), model seeded
/// from seed_r, accuracy on the test split. Confusion counts are summed.
ExperimentResult repeated_runs(const DatasetBuilder& builder, const ModelConfig& config,
                               int n_runs, std::uint64_t base_seed);

std::uint64_t run_seed(std::uint64_t base_seed, int run);
std::uint64_t model_seed(std::uint64_t run_seed);

void write_confusion_csv(const Eigen::MatrixXi& confusion,
                         const std::vector<std::string>& class_set, const std::string& path);

} // namespace whisker
