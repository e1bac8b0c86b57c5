#include "whisker/svm.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "whisker/csv.hpp"
#include "whisker/serial.hpp"

namespace whisker {

std::string SvmConfig::fingerprint() const {
    std::ostringstream s;
    s << "svm kernel=linear strategy=ovr C=" << format_double(regularization_c)
      << " epochs=" << epochs << " lr0=" << format_double(initial_learning_rate)
      << " decay=" << format_double(decay) << " batch=" << batch_size << " seed=" << seed;
    return s.str();
}

LinearSvm::LinearSvm(Eigen::MatrixXd weights, Eigen::VectorXd bias)
    : weights_(std::move(weights)), bias_(std::move(bias)) {}

namespace {

Eigen::MatrixXd signed_targets(const Eigen::VectorXi& y, int n_classes) {
    Eigen::MatrixXd t = Eigen::MatrixXd::Constant(y.size(), n_classes, -1.0);
    for (Eigen::Index i = 0; i < y.size(); ++i) t(i, y(i)) = 1.0;
    return t;
}

} // namespace

LinearSvm LinearSvm::fit(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::VectorXi& y,
                         int n_classes, const SvmConfig& config) {
    if (n_classes < 2 || (y.size() > 0 && y.minCoeff() == y.maxCoeff()))
        throw std::invalid_argument("train_svm: need at least two classes");
    if (x.rows() != y.size() || x.rows() == 0)
        throw std::invalid_argument("train_svm: empty or mismatched training set");
    if (!(config.regularization_c > 0.0) || config.epochs < 1 || config.batch_size < 1)
        throw std::invalid_argument("train_svm: invalid configuration");

    const Eigen::Index n = x.rows();
    const Eigen::Index d = x.cols();
    const double lambda = config.lambda();
    const Eigen::MatrixXd targets = signed_targets(y, n_classes);

    LinearSvm m(Eigen::MatrixXd::Zero(n_classes, d), Eigen::VectorXd::Zero(n_classes));
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::mt19937_64 rng(config.seed);

    Eigen::MatrixXd xb, tb;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const double eta = config.initial_learning_rate / (1.0 + epoch * config.decay);
        std::shuffle(order.begin(), order.end(), rng);
        for (Eigen::Index start = 0; start < n; start += config.batch_size) {
            const Eigen::Index b = std::min<Eigen::Index>(config.batch_size, n - start);
            xb.resize(b, d);
            tb.resize(b, n_classes);
            for (Eigen::Index i = 0; i < b; ++i) {
                xb.row(i) = x.row(order[static_cast<std::size_t>(start + i)]);
                tb.row(i) = targets.row(order[static_cast<std::size_t>(start + i)]);
            }
            Eigen::MatrixXd scores = xb * m.weights_.transpose();
            scores.rowwise() += m.bias_.transpose();
            // Subgradient of the hinge: -t where the margin is violated.
            const Eigen::MatrixXd g =
                ((tb.array() * scores.array()) < 1.0).cast<double>() * (-tb.array()) /
                static_cast<double>(b);
            m.weights_ = (1.0 - eta * lambda) * m.weights_ - eta * (g.transpose() * xb);
            m.bias_ -= eta * g.colwise().sum().transpose();
        }
        m.loss_history_.push_back(m.objective(x, y, lambda));
    }
    return m;
}

Eigen::MatrixXd LinearSvm::decision_function(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
    Eigen::MatrixXd s = x * weights_.transpose();
    s.rowwise() += bias_.transpose();
    return s;
}

Eigen::VectorXi LinearSvm::predict(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
    const Eigen::MatrixXd s = decision_function(x);
    Eigen::VectorXi out(s.rows());
    for (Eigen::Index i = 0; i < s.rows(); ++i) s.row(i).maxCoeff(&out(i));
    return out;
}

double LinearSvm::objective(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::VectorXi& y,
                            double lambda) const {
    const Eigen::MatrixXd t = signed_targets(y, static_cast<int>(weights_.rows()));
    const Eigen::MatrixXd s = decision_function(x);
    const double hinge = (1.0 - (t.array() * s.array())).max(0.0).sum() /
                         static_cast<double>(x.rows());
    return hinge + 0.5 * lambda * weights_.squaredNorm();
}

void LinearSvm::save(std::ostream& out) const {
    out << "svm " << weights_.rows() << ' ' << weights_.cols() << '\n';
    write_values(out, weights_);
    write_values(out, bias_);
}

LinearSvm LinearSvm::load(std::istream& in) {
    expect_token(in, "svm");
    const auto rows = read_index(in);
    const auto cols = read_index(in);
    Eigen::MatrixXd w(rows, cols);
    Eigen::VectorXd b(rows);
    read_values(in, w);
    read_values(in, b);
    return LinearSvm(std::move(w), std::move(b));
}

} // namespace whisker
