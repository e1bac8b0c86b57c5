#pragma once

#include <string>
#include <variant>

#include <Eigen/Core>

#include "whisker/dataset.hpp"
#include "whisker/forest.hpp"
#include "whisker/mlp.hpp"
#include "whisker/svm.hpp"

namespace whisker {

enum class ModelKind { SVM, RF, MLP };

std::string to_string(ModelKind k);
ModelKind model_kind_from_string(const std::string& text);

using ModelConfig = std::variant<SvmConfig, RfConfig, MlpConfig>;

ModelKind kind_of(const ModelConfig& config);
ModelConfig default_config(ModelKind kind);
/// Copy of `config` with its seed replaced.
ModelConfig with_seed(ModelConfig config, std::uint64_t seed);
std::string fingerprint(const ModelConfig& config);

/// One trained classifier of any family, with the class names it predicts.
class TrainedModel {
public:
    using Impl = std::variant<LinearSvm, RandomForest, Mlp>;

    TrainedModel() = default;
    TrainedModel(Impl impl, std::vector<std::string> class_set, std::string fingerprint)
        : impl_(std::move(impl)), class_set_(std::move(class_set)),
          fingerprint_(std::move(fingerprint)) {}

    ModelKind kind() const { return static_cast<ModelKind>(impl_.index()); }
    Eigen::VectorXi predict(const Eigen::Ref<const Eigen::MatrixXd>& x) const;
    const std::vector<std::string>& class_set() const { return class_set_; }
    const std::string& fingerprint() const { return fingerprint_; }
    const Impl& impl() const { return impl_; }

    void save(const std::string& path) const;
    static TrainedModel load(const std::string& path);

private:
    Impl impl_;
    std::vector<std::string> class_set_;
    std::string fingerprint_;
};

// Each trainer fits on the train split (the MLP also watches the val split).
// The dataset is expected to be standardized already.
TrainedModel train_svm(const LabeledDataset& dataset, const SvmConfig& config);
TrainedModel train_rf(const LabeledDataset& dataset, const RfConfig& config);
TrainedModel train_mlp(const LabeledDataset& dataset, const MlpConfig& config);
TrainedModel train_model(const LabeledDataset& dataset, const ModelConfig& config);

} // namespace whisker
