#include "whisker/forest.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "whisker/seed.hpp"
#include "whisker/serial.hpp"

namespace whisker {

std::string RfConfig::fingerprint() const {
    std::ostringstream s;
    s << "rf n_trees=" << n_trees << " max_depth=" << max_depth
      << " features_per_split=" << (features_per_split > 0 ? std::to_string(features_per_split)
                                                           : std::string("sqrt"))
      << " impurity=gini bootstrap=" << (bootstrap ? 1 : 0)
      << " min_samples_split=" << min_samples_split << " seed=" << seed;
    return s.str();
}

int DecisionTree::depth() const {
    if (nodes_.empty()) return 0;
    std::vector<int> d(nodes_.size(), 0);
    int deepest = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const auto& n = nodes_[i];
        deepest = std::max(deepest, d[i]);
        if (n.feature >= 0) {
            d[static_cast<std::size_t>(n.left)] = d[i] + 1;
            d[static_cast<std::size_t>(n.right)] = d[i] + 1;
        }
    }
    return deepest;
}

namespace {

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double score = -1.0; // sum_c nl_c^2/nl + sum_c nr_c^2/nr, larger is purer
};

class TreeBuilder {
public:
    TreeBuilder(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::VectorXi& y,
                int n_classes, const RfConfig& config, std::uint64_t seed)
        : x_(x), y_(y), n_classes_(n_classes), config_(config), rng_(seed),
          features_(static_cast<std::size_t>(x.cols())) {
        std::iota(features_.begin(), features_.end(), 0);
        mtry_ = config.features_per_split > 0
                    ? std::min<int>(config.features_per_split, static_cast<int>(x.cols()))
                    : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(x.cols()))));
    }

    DecisionTree build(std::vector<int> rows) {
        rows_ = std::move(rows);
        std::vector<TreeNode> nodes(1);
        struct Job {
            int node, begin, end, depth;
        };
        std::vector<Job> stack{{0, 0, static_cast<int>(rows_.size()), 0}};
        std::vector<int> counts(static_cast<std::size_t>(n_classes_));
        while (!stack.empty()) {
            const Job job = stack.back();
            stack.pop_back();
            std::fill(counts.begin(), counts.end(), 0);
            for (int i = job.begin; i < job.end; ++i) ++counts[static_cast<std::size_t>(y_(rows_[static_cast<std::size_t>(i)]))];
            const auto majority =
                static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
            nodes[static_cast<std::size_t>(job.node)].label = majority;

            const int size = job.end - job.begin;
            const bool pure = counts[static_cast<std::size_t>(majority)] == size;
            const bool depth_cap = config_.max_depth >= 0 && job.depth >= config_.max_depth;
            if (pure || depth_cap || size < config_.min_samples_split) continue;

            const SplitChoice best = find_split(job.begin, job.end, counts);
            if (best.feature < 0) continue;

            const auto mid_it = std::partition(
                rows_.begin() + job.begin, rows_.begin() + job.end,
                [&](int r) { return x_(r, best.feature) <= best.threshold; });
            const int mid = static_cast<int>(mid_it - rows_.begin());

            const int left = static_cast<int>(nodes.size());
            nodes.push_back({});
            nodes.push_back({});
            auto& n = nodes[static_cast<std::size_t>(job.node)];
            n.feature = best.feature;
            n.threshold = best.threshold;
            n.left = left;
            n.right = left + 1;
            stack.push_back({left + 1, mid, job.end, job.depth + 1});
            stack.push_back({left, job.begin, mid, job.depth + 1});
        }
        return DecisionTree(std::move(nodes));
    }

private:
    SplitChoice find_split(int begin, int end, const std::vector<int>& totals) {
        SplitChoice best;
        const auto n_features = static_cast<int>(features_.size());
        const int size = end - begin;
        std::vector<int> left(static_cast<std::size_t>(n_classes_));
        // Partial Fisher-Yates; keeps drawing past mtry until a valid split exists.
        for (int drawn = 0; drawn < n_features; ++drawn) {
            if (drawn >= mtry_ && best.feature >= 0) break;
            std::uniform_int_distribution<int> pick(drawn, n_features - 1);
            std::swap(features_[static_cast<std::size_t>(drawn)],
                      features_[static_cast<std::size_t>(pick(rng_))]);
            const int f = features_[static_cast<std::size_t>(drawn)];

            column_.clear();
            for (int i = begin; i < end; ++i) {
                const int r = rows_[static_cast<std::size_t>(i)];
                column_.emplace_back(x_(r, f), y_(r));
            }
            std::sort(column_.begin(), column_.end());
            if (column_.front().first == column_.back().first) continue;

            std::fill(left.begin(), left.end(), 0);
            double sum_left = 0.0;
            double sum_right = 0.0;
            for (int c : totals) sum_right += static_cast<double>(c) * c;
            for (int i = 0; i + 1 < size; ++i) {
                const auto c = static_cast<std::size_t>(column_[static_cast<std::size_t>(i)].second);
                const double lc = left[c];
                const double rc = totals[c] - lc;
                sum_left += 2.0 * lc + 1.0;
                sum_right -= 2.0 * rc - 1.0;
                ++left[c];
                const double a = column_[static_cast<std::size_t>(i)].first;
                const double b = column_[static_cast<std::size_t>(i + 1)].first;
                if (!(a < b)) continue;
                const double nl = i + 1;
                const double nr = size - nl;
                const double score = sum_left / nl + sum_right / nr;
                if (score > best.score) {
                    double thr = 0.5 * (a + b);
                    if (!(thr < b)) thr = a;
                    best = {f, thr, score};
                }
            }
        }
        return best;
    }

    const Eigen::Ref<const Eigen::MatrixXd>& x_;
    const Eigen::VectorXi& y_;
    int n_classes_;
    const RfConfig& config_;
    std::mt19937_64 rng_;
    std::vector<int> features_;
    int mtry_ = 1;
    std::vector<int> rows_;
    std::vector<std::pair<double, int>> column_;
};

} // namespace

RandomForest RandomForest::fit(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::VectorXi& y,
                               int n_classes, const RfConfig& config) {
    if (n_classes < 2 || (y.size() > 0 && y.minCoeff() == y.maxCoeff()))
        throw std::invalid_argument("train_rf: need at least two classes");
    if (x.rows() != y.size() || x.rows() == 0)
        throw std::invalid_argument("train_rf: empty or mismatched training set");
    if (config.n_trees < 1) throw std::invalid_argument("train_rf: n_trees must be >= 1");

    const auto n = static_cast<int>(x.rows());
    std::vector<DecisionTree> trees;
    trees.reserve(static_cast<std::size_t>(config.n_trees));
    for (int t = 0; t < config.n_trees; ++t) {
        const auto tree_seed = derive_seed(config.seed, {static_cast<std::uint64_t>(t)});
        std::mt19937_64 rng(derive_seed(tree_seed, {tag_of("bootstrap")}));
        std::vector<int> rows(static_cast<std::size_t>(n));
        if (config.bootstrap) {
            std::uniform_int_distribution<int> draw(0, n - 1);
            for (auto& r : rows) r = draw(rng);
        } else {
            std::iota(rows.begin(), rows.end(), 0);
        }
        TreeBuilder builder(x, y, n_classes, config, tree_seed);
        trees.push_back(builder.build(std::move(rows)));
    }
    return RandomForest(std::move(trees), n_classes);
}

Eigen::VectorXi RandomForest::predict(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
    Eigen::VectorXi out(x.rows());
    std::vector<int> votes(static_cast<std::size_t>(n_classes_));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        std::fill(votes.begin(), votes.end(), 0);
        const auto row = x.row(i);
        for (const auto& t : trees_) ++votes[static_cast<std::size_t>(t.predict_row(row))];
        out(i) = static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
    }
    return out;
}

void RandomForest::save(std::ostream& out) const {
    out << "rf " << n_classes_ << ' ' << trees_.size() << '\n';
    for (const auto& t : trees_) {
        out << "tree " << t.nodes().size() << '\n';
        for (const auto& n : t.nodes())
            out << n.feature << ' ' << format_double(n.threshold) << ' ' << n.left << ' '
                << n.right << ' ' << n.label << '\n';
    }
}

RandomForest RandomForest::load(std::istream& in) {
    expect_token(in, "rf");
    const auto n_classes = static_cast<int>(read_index(in));
    const auto n_trees = read_index(in);
    std::vector<DecisionTree> trees;
    for (Eigen::Index t = 0; t < n_trees; ++t) {
        expect_token(in, "tree");
        const auto n_nodes = read_index(in);
        std::vector<TreeNode> nodes(static_cast<std::size_t>(n_nodes));
        for (auto& n : nodes) {
            n.feature = static_cast<int>(read_index(in));
            n.threshold = read_double(in);
            n.left = static_cast<int>(read_index(in));
            n.right = static_cast<int>(read_index(in));
            n.label = static_cast<int>(read_index(in));
            if (n.feature >= 0 && (n.left < 0 || n.right < 0 || n.left >= n_nodes ||
                                   n.right >= n_nodes))
                throw ModelFormatError("tree node child index out of range");
        }
        trees.emplace_back(std::move(nodes));
    }
    return RandomForest(std::move(trees), n_classes);
}

} // namespace whisker
