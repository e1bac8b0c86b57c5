#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace whisker {

/// Layer norm of the flattened window, then Dense/ReLU/Dropout blocks, then a
/// softmax layer with one unit per class. Trained with Adam on cross-entropy
/// and early-stopped on validation loss (best weights restored).
struct MlpConfig {
    std::vector<int> hidden_layers{128, 128};
    double dropout_rate = 0.2;
    bool layer_norm = true;
    double learning_rate = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    int max_epochs = 300;
    int early_stopping_patience = 20;
    int batch_size = 32;
    std::uint64_t seed = 0;

    std::string fingerprint() const;
};

class TrainingDiverged : public std::runtime_error {
public:
    explicit TrainingDiverged(int epoch)
        : std::runtime_error("training diverged at epoch " + std::to_string(epoch)),
          epoch_(epoch) {}
    int epoch() const { return epoch_; }

private:
    int epoch_;
};

/// Adam over a flat parameter vector.
class Adam {
public:
    Adam(Eigen::Index size, double learning_rate, double beta1, double beta2, double epsilon);
    void step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::Ref<const Eigen::VectorXd>& grad);
    long long steps() const { return t_; }

private:
    double lr_, beta1_, beta2_, eps_;
    Eigen::VectorXd m_, v_;
    long long t_ = 0;
};

class Mlp {
public:
    static constexpr double kLayerNormEps = 1e-3;

    Mlp() = default;
    /// Glorot-uniform weights, zero biases, unit layer-norm gain.
    Mlp(int n_inputs, int n_classes, std::vector<int> hidden, double dropout_rate,
        bool layer_norm, std::uint64_t seed);

    static Mlp fit(const Eigen::Ref<const Eigen::MatrixXd>& x_train,
                   const Eigen::VectorXi& y_train, const Eigen::Ref<const Eigen::MatrixXd>& x_val,
                   const Eigen::VectorXi& y_val, int n_classes, const MlpConfig& config);

    /// Softmax class probabilities, dropout disabled.
    Eigen::MatrixXd predict_proba(const Eigen::Ref<const Eigen::MatrixXd>& x) const;
    Eigen::VectorXi predict(const Eigen::Ref<const Eigen::MatrixXd>& x) const;

    /// Mean cross-entropy and its gradient with respect to parameters().
    /// `dropout_masks`, when given, holds one 0/1 matrix per hidden layer.
    double loss_and_gradient(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::VectorXi& y,
                             Eigen::VectorXd* gradient,
                             const std::vector<Eigen::MatrixXd>* dropout_masks = nullptr) const;
    double loss(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::VectorXi& y) const {
        return loss_and_gradient(x, y, nullptr);
    }

    Eigen::VectorXd& parameters() { return params_; }
    const Eigen::VectorXd& parameters() const { return params_; }
    int n_inputs() const { return n_inputs_; }
    int n_classes() const { return n_classes_; }
    const std::vector<int>& hidden() const { return hidden_; }
    int epochs_trained() const { return epochs_trained_; }
    const std::vector<double>& val_loss_history() const { return val_history_; }

    void save(std::ostream& out) const;
    static Mlp load(std::istream& in);

private:
    struct Offsets {
        Eigen::Index gamma = 0, beta = 0;
        std::vector<Eigen::Index> weight, bias;
        std::vector<int> fan_in, fan_out;
    };

    void layout();
    Eigen::MatrixXd normalize(const Eigen::Ref<const Eigen::MatrixXd>& x, Eigen::MatrixXd* xhat,
                              Eigen::VectorXd* inv_sd) const;

    int n_inputs_ = 0;
    int n_classes_ = 0;
    std::vector<int> hidden_;
    double dropout_rate_ = 0.0;
    bool layer_norm_ = true;
    Eigen::VectorXd params_;
    Offsets off_;
    int epochs_trained_ = 0;
    std::vector<double> val_history_;
};

} // namespace whisker
