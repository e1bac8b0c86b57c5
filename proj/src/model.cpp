#include "whisker/model.hpp"

#include <fstream>
#include <sstream>

#include "whisker/csv.hpp"
#include "whisker/serial.hpp"

namespace whisker {

std::string to_string(ModelKind k) {
    switch (k) {
    case ModelKind::SVM: return "SVM";
    case ModelKind::RF: return "RF";
    case ModelKind::MLP: return "MLP";
    }
    return "?";
}

ModelKind model_kind_from_string(const std::string& text) {
    if (text == "SVM" || text == "svm") return ModelKind::SVM;
    if (text == "RF" || text == "rf") return ModelKind::RF;
    if (text == "MLP" || text == "mlp") return ModelKind::MLP;
    throw std::invalid_argument("unknown model: " + text);
}

ModelKind kind_of(const ModelConfig& config) { return static_cast<ModelKind>(config.index()); }

ModelConfig default_config(ModelKind kind) {
    switch (kind) {
    case ModelKind::SVM: return SvmConfig{};
    case ModelKind::RF: return RfConfig{};
    case ModelKind::MLP: return MlpConfig{};
    }
    throw std::invalid_argument("unknown model kind");
}

ModelConfig with_seed(ModelConfig config, std::uint64_t seed) {
    std::visit([seed](auto& c) { c.seed = seed; }, config);
    return config;
}

std::string fingerprint(const ModelConfig& config) {
    return std::visit([](const auto& c) { return c.fingerprint(); }, config);
}

Eigen::VectorXi TrainedModel::predict(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
    return std::visit([&](const auto& m) { return m.predict(x); }, impl_);
}

void TrainedModel::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "whisker-model 1\n";
    out << "classes " << class_set_.size();
    for (const auto& c : class_set_) out << ' ' << c;
    out << '\n';
    out << "fingerprint " << fingerprint_ << '\n';
    std::visit([&](const auto& m) { m.save(out); }, impl_);
}

TrainedModel TrainedModel::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    expect_token(in, "whisker-model");
    if (read_index(in) != 1) throw ModelFormatError("unsupported model file version");
    expect_token(in, "classes");
    const auto n = read_index(in);
    std::vector<std::string> classes;
    for (Eigen::Index i = 0; i < n; ++i) classes.push_back(read_token(in));
    expect_token(in, "fingerprint");
    std::string fp;
    std::getline(in, fp);
    if (!fp.empty() && fp.front() == ' ') fp.erase(0, 1);

    const auto pos = in.tellg();
    const auto kind = read_token(in);
    in.seekg(pos);
    Impl impl;
    if (kind == "svm") impl = LinearSvm::load(in);
    else if (kind == "rf") impl = RandomForest::load(in);
    else if (kind == "mlp") impl = Mlp::load(in);
    else throw ModelFormatError("unknown model kind '" + kind + "'");
    return TrainedModel(std::move(impl), std::move(classes), std::move(fp));
}

TrainedModel train_svm(const LabeledDataset& d, const SvmConfig& config) {
    auto m = LinearSvm::fit(d.features_of(Split::Train), d.labels_of(Split::Train),
                            d.class_count(), config);
    return TrainedModel(std::move(m), d.class_set, config.fingerprint());
}

TrainedModel train_rf(const LabeledDataset& d, const RfConfig& config) {
    auto m = RandomForest::fit(d.features_of(Split::Train), d.labels_of(Split::Train),
                               d.class_count(), config);
    return TrainedModel(std::move(m), d.class_set, config.fingerprint());
}

TrainedModel train_mlp(const LabeledDataset& d, const MlpConfig& config) {
    auto m = Mlp::fit(d.features_of(Split::Train), d.labels_of(Split::Train),
                      d.features_of(Split::Val), d.labels_of(Split::Val), d.class_count(), config);
    return TrainedModel(std::move(m), d.class_set, config.fingerprint());
}

TrainedModel train_model(const LabeledDataset& dataset, const ModelConfig& config) {
    return std::visit(
        [&](const auto& c) -> TrainedModel {
            using C = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<C, SvmConfig>) return train_svm(dataset, c);
            else if constexpr (std::is_same_v<C, RfConfig>) return train_rf(dataset, c);
            else return train_mlp(dataset, c);
        },
        config);
}

} // namespace whisker
