#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace whisker {

/// Random forest of CART trees with Gini splits.
struct RfConfig {
    int n_trees = 100;
    int max_depth = -1;         // -1: grow until pure
    int features_per_split = 0; // 0: ceil(sqrt(feature count))
    int min_samples_split = 2;
    bool bootstrap = true;
    std::uint64_t seed = 0;

    std::string fingerprint() const;
};

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int label = 0;
};

class DecisionTree {
public:
    DecisionTree() = default;
    explicit DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

    template <typename Row>
    int predict_row(const Row& x) const {
        int i = 0;
        while (nodes_[static_cast<std::size_t>(i)].feature >= 0) {
            const auto& n = nodes_[static_cast<std::size_t>(i)];
            i = x(n.feature) <= n.threshold ? n.left : n.right;
        }
        return nodes_[static_cast<std::size_t>(i)].label;
    }

    const std::vector<TreeNode>& nodes() const { return nodes_; }
    int depth() const;

private:
    std::vector<TreeNode> nodes_;
};

class RandomForest {
public:
    RandomForest() = default;
    RandomForest(std::vector<DecisionTree> trees, int n_classes)
        : trees_(std::move(trees)), n_classes_(n_classes) {}

    static RandomForest fit(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::VectorXi& y,
                            int n_classes, const RfConfig& config);

    /// Majority vote; ties go to the lowest class index.
    Eigen::VectorXi predict(const Eigen::Ref<const Eigen::MatrixXd>& x) const;

    const std::vector<DecisionTree>& trees() const { return trees_; }
    int n_classes() const { return n_classes_; }

    void save(std::ostream& out) const;
    static RandomForest load(std::istream& in);

private:
    std::vector<DecisionTree> trees_;
    int n_classes_ = 0;
};

} // namespace whisker
