#include "whisker/metrics.hpp"

#include <chrono>
#include <fstream>
#include <stdexcept>

#include "whisker/seed.hpp"

namespace whisker {

Eigen::MatrixXi confusion_matrix(const Eigen::VectorXi& truth, const Eigen::VectorXi& predicted,
                                 int n_classes) {
    if (truth.size() != predicted.size())
        throw std::invalid_argument("confusion_matrix: size mismatch");
    Eigen::MatrixXi c = Eigen::MatrixXi::Zero(n_classes, n_classes);
    for (Eigen::Index i = 0; i < truth.size(); ++i) ++c(truth(i), predicted(i));
    return c;
}

double accuracy_percent(const Eigen::MatrixXi& confusion) {
    const auto total = confusion.sum();
    return total > 0 ? 100.0 * confusion.trace() / static_cast<double>(total) : 0.0;
}

ExperimentResult evaluate(const TrainedModel& model, const LabeledDataset& dataset, Split split) {
    const Eigen::MatrixXd x = dataset.features_of(split);
    if (x.rows() == 0) throw std::invalid_argument("evaluate: split " + to_string(split) + " is empty");
    const Eigen::VectorXi truth = dataset.labels_of(split);

    const auto t0 = std::chrono::steady_clock::now();
    const Eigen::VectorXi predicted = model.predict(x);
    const auto t1 = std::chrono::steady_clock::now();

    ExperimentResult r;
    r.confusion = confusion_matrix(truth, predicted, dataset.class_count());
    r.accuracy_mean = accuracy_percent(r.confusion);
    r.run_accuracies = {r.accuracy_mean};
    r.inference_time_per_window_us =
        std::chrono::duration<double, std::micro>(t1 - t0).count() / static_cast<double>(x.rows());
    r.config_fingerprint = model.fingerprint();
    return r;
}

std::pair<double, double> mean_and_variance(const std::vector<double>& values) {
    if (values.empty()) return {0.0, 0.0};
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    return {mean, var / static_cast<double>(values.size())};
}

std::uint64_t run_seed(std::uint64_t base_seed, int run) {
    return derive_seed(base_seed, {tag_of("run"), static_cast<std::uint64_t>(run)});
}

std::uint64_t model_seed(std::uint64_t seed) { return derive_seed(seed, {tag_of("model")}); }

ExperimentResult repeated_runs(const DatasetBuilder& builder, const ModelConfig& config,
                               int n_runs, std::uint64_t base_seed) {
    if (n_runs < 2) throw std::invalid_argument("repeated_runs: n_runs must be >= 2");
    ExperimentResult total;
    double inference = 0.0;
    for (int r = 0; r < n_runs; ++r) {
        const auto seed = run_seed(base_seed, r);
        const LabeledDataset dataset = builder(seed);
        const ModelConfig cfg = with_seed(config, model_seed(seed));
        const auto t0 = std::chrono::steady_clock::now();
        const TrainedModel model = train_model(dataset, cfg);
        const auto t1 = std::chrono::steady_clock::now();
        const ExperimentResult one = evaluate(model, dataset, Split::Test);
        total.train_time_s += std::chrono::duration<double>(t1 - t0).count();
        inference += one.inference_time_per_window_us;
        total.run_accuracies.push_back(one.accuracy_mean);
        if (total.confusion.size() == 0) total.confusion = one.confusion;
        else total.confusion += one.confusion;
    }
    std::tie(total.accuracy_mean, total.accuracy_variance) = mean_and_variance(total.run_accuracies);
    total.train_time_s /= n_runs;
    total.inference_time_per_window_us = inference / n_runs;
    total.config_fingerprint = fingerprint(config) + " runs=" + std::to_string(n_runs) +
                               " base_seed=" + std::to_string(base_seed);
    return total;
}

void write_confusion_csv(const Eigen::MatrixXi& confusion,
                         const std::vector<std::string>& class_set, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "true\\predicted";
    for (const auto& c : class_set) out << ',' << c;
    out << '\n';
    for (Eigen::Index i = 0; i < confusion.rows(); ++i) {
        out << class_set[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < confusion.cols(); ++j) out << ',' << confusion(i, j);
        out << '\n';
    }
}

} // namespace whisker
