#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace whisker {

/// Linear one-vs-rest SVM trained by mini-batch stochastic subgradient descent.
///
/// Each binary machine minimises (lambda/2)|w|^2 + mean hinge loss with
/// lambda = 1e-4 / regularization_c. The step size at epoch t is
/// initial_learning_rate / (1 + t * decay).
struct SvmConfig {
    double regularization_c = 1.0;
    int epochs = 200;
    double initial_learning_rate = 0.01;
    double decay = 0.05;
    int batch_size = 32;
    std::uint64_t seed = 0;

    double lambda() const { return 1e-4 / regularization_c; }
    std::string fingerprint() const;
};

class LinearSvm {
public:
    LinearSvm() = default;
    LinearSvm(Eigen::MatrixXd weights, Eigen::VectorXd bias);

    static LinearSvm fit(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::VectorXi& y,
                         int n_classes, const SvmConfig& config);

    /// One column of decision values per class.
    Eigen::MatrixXd decision_function(const Eigen::Ref<const Eigen::MatrixXd>& x) const;
    Eigen::VectorXi predict(const Eigen::Ref<const Eigen::MatrixXd>& x) const;

    /// Regularised mean hinge loss summed over the binary machines.
    double objective(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::VectorXi& y,
                     double lambda) const;

    const Eigen::MatrixXd& weights() const { return weights_; }
    const Eigen::VectorXd& bias() const { return bias_; }
    /// Objective after each training epoch.
    const std::vector<double>& loss_history() const { return loss_history_; }

    void save(std::ostream& out) const;
    static LinearSvm load(std::istream& in);

private:
    Eigen::MatrixXd weights_; // classes x features
    Eigen::VectorXd bias_;
    std::vector<double> loss_history_;
};

} // namespace whisker
