#include "whisker/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "whisker/csv.hpp"
#include "whisker/seed.hpp"
#include "whisker/serial.hpp"

namespace whisker {

std::string MlpConfig::fingerprint() const {
    std::ostringstream s;
    s << "mlp hidden=";
    for (std::size_t i = 0; i < hidden_layers.size(); ++i) s << (i ? "x" : "") << hidden_layers[i];
    if (hidden_layers.empty()) s << "none";
    s << " dropout=" << format_double(dropout_rate) << " layer_norm=" << (layer_norm ? 1 : 0)
      << " optimizer=adam lr=" << format_double(learning_rate) << " beta1=" << format_double(beta1)
      << " beta2=" << format_double(beta2) << " eps=" << format_double(epsilon)
      << " max_epochs=" << max_epochs << " patience=" << early_stopping_patience
      << " batch=" << batch_size << " seed=" << seed;
    return s.str();
}

Adam::Adam(Eigen::Index size, double learning_rate, double beta1, double beta2, double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon),
      m_(Eigen::VectorXd::Zero(size)), v_(Eigen::VectorXd::Zero(size)) {}

void Adam::step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::Ref<const Eigen::VectorXd>& grad) {
    ++t_;
    m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
    v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    params.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

Mlp::Mlp(int n_inputs, int n_classes, std::vector<int> hidden, double dropout_rate,
         bool layer_norm, std::uint64_t seed)
    : n_inputs_(n_inputs), n_classes_(n_classes), hidden_(std::move(hidden)),
      dropout_rate_(dropout_rate), layer_norm_(layer_norm) {
    if (n_inputs < 1 || n_classes < 2) throw std::invalid_argument("Mlp: bad dimensions");
    for (int h : hidden_)
        if (h < 1) throw std::invalid_argument("Mlp: hidden widths must be positive");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0)
        throw std::invalid_argument("Mlp: dropout rate must lie in [0, 1)");
    layout();
    params_.setZero();
    if (layer_norm_) params_.segment(off_.gamma, n_inputs_).setOnes();
    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l < off_.weight.size(); ++l) {
        const double limit = std::sqrt(6.0 / (off_.fan_in[l] + off_.fan_out[l]));
        std::uniform_real_distribution<double> u(-limit, limit);
        auto w = params_.segment(off_.weight[l],
                                 static_cast<Eigen::Index>(off_.fan_in[l]) * off_.fan_out[l]);
        for (auto& v : w) v = u(rng);
    }
}

void Mlp::layout() {
    off_ = Offsets{};
    Eigen::Index pos = 0;
    if (layer_norm_) {
        off_.gamma = pos;
        pos += n_inputs_;
        off_.beta = pos;
        pos += n_inputs_;
    }
    int fan_in = n_inputs_;
    std::vector<int> widths = hidden_;
    widths.push_back(n_classes_);
    for (int w : widths) {
        off_.fan_in.push_back(fan_in);
        off_.fan_out.push_back(w);
        off_.weight.push_back(pos);
        pos += static_cast<Eigen::Index>(fan_in) * w;
        off_.bias.push_back(pos);
        pos += w;
        fan_in = w;
    }
    params_.resize(pos);
}

Eigen::MatrixXd Mlp::normalize(const Eigen::Ref<const Eigen::MatrixXd>& x, Eigen::MatrixXd* xhat,
                               Eigen::VectorXd* inv_sd) const {
    if (!layer_norm_) return x;
    const Eigen::VectorXd mean = x.rowwise().mean();
    Eigen::MatrixXd centered = x.colwise() - mean;
    const Eigen::VectorXd inv =
        (centered.array().square().rowwise().mean() + kLayerNormEps).rsqrt().matrix();
    centered = centered.array().colwise() * inv.array();
    const auto gamma = params_.segment(off_.gamma, n_inputs_);
    const auto beta = params_.segment(off_.beta, n_inputs_);
    Eigen::MatrixXd out = (centered.array().rowwise() * gamma.transpose().array()).matrix();
    out.rowwise() += beta.transpose();
    if (xhat) *xhat = std::move(centered);
    if (inv_sd) *inv_sd = inv;
    return out;
}

double Mlp::loss_and_gradient(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::VectorXi& y,
                              Eigen::VectorXd* gradient,
                              const std::vector<Eigen::MatrixXd>* dropout_masks) const {
    const Eigen::Index b = x.rows();
    const std::size_t n_layers = off_.weight.size();
    const double keep_scale = dropout_masks ? 1.0 / (1.0 - dropout_rate_) : 1.0;

    Eigen::MatrixXd xhat;
    Eigen::VectorXd inv_sd;
    std::vector<Eigen::MatrixXd> inputs(n_layers);   // input to each dense layer
    std::vector<Eigen::MatrixXd> pre(n_layers - 1);  // hidden pre-activations
    inputs[0] = normalize(x, gradient ? &xhat : nullptr, gradient ? &inv_sd : nullptr);
    Eigen::MatrixXd logits;
    for (std::size_t l = 0; l < n_layers; ++l) {
        const Eigen::Map<const Eigen::MatrixXd> w(params_.data() + off_.weight[l], off_.fan_in[l],
                                                  off_.fan_out[l]);
        const auto bias = params_.segment(off_.bias[l], off_.fan_out[l]);
        Eigen::MatrixXd z = inputs[l] * w;
        z.rowwise() += bias.transpose();
        if (l + 1 == n_layers) {
            logits = std::move(z);
            break;
        }
        Eigen::MatrixXd a = z.cwiseMax(0.0);
        if (dropout_masks) a = (a.array() * (*dropout_masks)[l].array() * keep_scale).matrix();
        pre[l] = std::move(z);
        inputs[l + 1] = std::move(a);
    }

    const Eigen::VectorXd row_max = logits.rowwise().maxCoeff();
    Eigen::MatrixXd probs = (logits.colwise() - row_max).array().exp().matrix();
    const Eigen::VectorXd sums = probs.rowwise().sum();
    double loss = 0.0;
    for (Eigen::Index i = 0; i < b; ++i)
        loss += std::log(sums(i)) + row_max(i) - logits(i, y(i));
    loss /= static_cast<double>(b);
    if (!gradient) return loss;

    probs = probs.array().colwise() / sums.array();
    gradient->setZero(params_.size());
    Eigen::MatrixXd delta = probs;
    for (Eigen::Index i = 0; i < b; ++i) delta(i, y(i)) -= 1.0;
    delta /= static_cast<double>(b);

    for (std::size_t l = n_layers; l-- > 0;) {
        Eigen::Map<Eigen::MatrixXd> gw(gradient->data() + off_.weight[l], off_.fan_in[l],
                                       off_.fan_out[l]);
        gw.noalias() = inputs[l].transpose() * delta;
        gradient->segment(off_.bias[l], off_.fan_out[l]) = delta.colwise().sum().transpose();
        const Eigen::Map<const Eigen::MatrixXd> w(params_.data() + off_.weight[l], off_.fan_in[l],
                                                  off_.fan_out[l]);
        Eigen::MatrixXd up = delta * w.transpose();
        if (l == 0) {
            delta = std::move(up);
            break;
        }
        if (dropout_masks) up = (up.array() * (*dropout_masks)[l - 1].array() * keep_scale).matrix();
        delta = (up.array() * (pre[l - 1].array() > 0.0).cast<double>()).matrix();
    }

    if (layer_norm_) {
        gradient->segment(off_.gamma, n_inputs_) =
            (delta.array() * xhat.array()).colwise().sum().transpose();
        gradient->segment(off_.beta, n_inputs_) = delta.colwise().sum().transpose();
    }
    return loss;
}

Eigen::MatrixXd Mlp::predict_proba(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
    Eigen::MatrixXd h = normalize(x, nullptr, nullptr);
    const std::size_t n_layers = off_.weight.size();
    for (std::size_t l = 0; l < n_layers; ++l) {
        const Eigen::Map<const Eigen::MatrixXd> w(params_.data() + off_.weight[l], off_.fan_in[l],
                                                  off_.fan_out[l]);
        Eigen::MatrixXd z = h * w;
        z.rowwise() += params_.segment(off_.bias[l], off_.fan_out[l]).transpose();
        h = l + 1 == n_layers ? std::move(z) : Eigen::MatrixXd(z.cwiseMax(0.0));
    }
    h = (h.colwise() - h.rowwise().maxCoeff()).array().exp().matrix();
    return h.array().colwise() / h.rowwise().sum().array();
}

Eigen::VectorXi Mlp::predict(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
    const Eigen::MatrixXd p = predict_proba(x);
    Eigen::VectorXi out(p.rows());
    for (Eigen::Index i = 0; i < p.rows(); ++i) p.row(i).maxCoeff(&out(i));
    return out;
}

Mlp Mlp::fit(const Eigen::Ref<const Eigen::MatrixXd>& x_train, const Eigen::VectorXi& y_train,
             const Eigen::Ref<const Eigen::MatrixXd>& x_val, const Eigen::VectorXi& y_val,
             int n_classes, const MlpConfig& config) {
    if (n_classes < 2 || (y_train.size() > 0 && y_train.minCoeff() == y_train.maxCoeff()))
        throw std::invalid_argument("train_mlp: need at least two classes");
    if (x_train.rows() != y_train.size() || x_train.rows() == 0)
        throw std::invalid_argument("train_mlp: empty or mismatched training set");
    if (config.batch_size < 1 || config.max_epochs < 1)
        throw std::invalid_argument("train_mlp: invalid configuration");

    Mlp net(static_cast<int>(x_train.cols()), n_classes, config.hidden_layers,
            config.dropout_rate, config.layer_norm, derive_seed(config.seed, {tag_of("init")}));
    Adam adam(net.params_.size(), config.learning_rate, config.beta1, config.beta2,
              config.epsilon);
    std::mt19937_64 rng(derive_seed(config.seed, {tag_of("train")}));
    std::bernoulli_distribution keep(1.0 - config.dropout_rate);

    const Eigen::Index n = x_train.rows();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const bool has_val = x_val.rows() > 0;

    Eigen::VectorXd best = net.params_;
    double best_loss = std::numeric_limits<double>::infinity();
    int since_best = 0;
    Eigen::VectorXd grad;
    std::vector<Eigen::MatrixXd> masks(config.hidden_layers.size());
    std::vector<Eigen::Index> batch;
    int epoch = 0;
    while (epoch < config.max_epochs) {
        ++epoch;
        std::shuffle(order.begin(), order.end(), rng);
        for (Eigen::Index start = 0; start < n; start += config.batch_size) {
            const Eigen::Index bs = std::min<Eigen::Index>(config.batch_size, n - start);
            batch.assign(order.begin() + start, order.begin() + start + bs);
            const Eigen::MatrixXd xb = x_train(batch, Eigen::all);
            const Eigen::VectorXi yb = y_train(batch);
            const bool dropout = config.dropout_rate > 0.0;
            if (dropout) {
                for (std::size_t l = 0; l < masks.size(); ++l) {
                    masks[l].resize(bs, config.hidden_layers[l]);
                    for (Eigen::Index j = 0; j < masks[l].size(); ++j)
                        masks[l](j) = keep(rng) ? 1.0 : 0.0;
                }
            }
            const double l = net.loss_and_gradient(xb, yb, &grad, dropout ? &masks : nullptr);
            if (!std::isfinite(l) || !grad.allFinite()) throw TrainingDiverged(epoch);
            adam.step(net.params_, grad);
        }
        const double monitored = has_val ? net.loss(x_val, y_val) : net.loss(x_train, y_train);
        if (!std::isfinite(monitored)) throw TrainingDiverged(epoch);
        net.val_history_.push_back(monitored);
        if (monitored < best_loss) {
            best_loss = monitored;
            best = net.params_;
            since_best = 0;
        } else if (++since_best >= config.early_stopping_patience) {
            break;
        }
    }
    net.params_ = std::move(best);
    net.epochs_trained_ = epoch;
    return net;
}

void Mlp::save(std::ostream& out) const {
    out << "mlp " << n_inputs_ << ' ' << n_classes_ << ' ' << (layer_norm_ ? 1 : 0) << ' '
        << format_double(dropout_rate_) << ' ' << hidden_.size();
    for (int h : hidden_) out << ' ' << h;
    out << '\n' << params_.size() << '\n';
    write_values(out, params_.transpose());
}

Mlp Mlp::load(std::istream& in) {
    expect_token(in, "mlp");
    Mlp m;
    m.n_inputs_ = static_cast<int>(read_index(in));
    m.n_classes_ = static_cast<int>(read_index(in));
    m.layer_norm_ = read_index(in) != 0;
    m.dropout_rate_ = read_double(in);
    const auto n_hidden = read_index(in);
    for (Eigen::Index i = 0; i < n_hidden; ++i) m.hidden_.push_back(static_cast<int>(read_index(in)));
    m.layout();
    const auto n_params = read_index(in);
    if (n_params != m.params_.size()) throw ModelFormatError("parameter count mismatch");
    for (Eigen::Index i = 0; i < n_params; ++i) m.params_(i) = read_double(in);
    return m;
}

} // namespace whisker
