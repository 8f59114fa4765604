#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "multisurf/errors.hpp"
#include "multisurf/rng.hpp"

namespace multisurf {

struct ForestParams {
    int n_trees = 100;
    int max_depth = 0;          // 0 = unlimited
    int min_samples_split = 2;
    int features_per_split = 0; // 0 = floor(sqrt(d))
    bool bootstrap = true;
};

namespace detail {

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int label = -1;  // class index at leaves
};

/// Majority class; ties go to the lowest class index (manifest order).
inline int majority_class(const std::vector<std::size_t>& counts) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < counts.size(); ++c)
        if (counts[c] > counts[best]) best = c;
    return static_cast<int>(best);
}

inline double gini(const std::vector<std::size_t>& counts, double n) {
    double g = 1.0;
    for (std::size_t c : counts) {
        const double p = static_cast<double>(c) / n;
        g -= p * p;
    }
    return g;
}

}  // namespace detail

/// CART-style classification tree: Gini splits over a random feature subset,
/// midpoint thresholds between consecutive distinct values.
class DecisionTree {
public:
    /// rows: row indices into X (may repeat under bootstrap).
    void grow(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
              int n_classes, const std::vector<std::size_t>& rows, const ForestParams& p,
              Rng& rng) {
        nodes_.clear();
        n_classes_ = n_classes;
        build(X, y, rows, p, rng, 0);
    }

    int predict(const std::vector<double>& x) const {
        int i = 0;
        while (nodes_[i].feature >= 0)
            i = x[nodes_[i].feature] <= nodes_[i].threshold ? nodes_[i].left : nodes_[i].right;
        return nodes_[i].label;
    }

    nlohmann::json to_json() const {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& n : nodes_)
            arr.push_back({{"f", n.feature}, {"t", n.threshold}, {"l", n.left}, {"r", n.right},
                           {"c", n.label}});
        return arr;
    }

    static DecisionTree from_json(const nlohmann::json& arr) {
        DecisionTree t;
        for (const auto& j : arr)
            t.nodes_.push_back({j.at("f").get<int>(), j.at("t").get<double>(), j.at("l").get<int>(),
                                j.at("r").get<int>(), j.at("c").get<int>()});
        return t;
    }

private:
    struct Split {
        int feature = -1;
        double threshold = 0.0;
        double gain = 0.0;
    };

    int build(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
              const std::vector<std::size_t>& rows, const ForestParams& p, Rng& rng, int depth) {
        std::vector<std::size_t> counts(n_classes_, 0);
        for (std::size_t r : rows) ++counts[static_cast<std::size_t>(y[r])];

        const bool pure = *std::max_element(counts.begin(), counts.end()) == rows.size();
        const bool depth_capped = p.max_depth > 0 && depth >= p.max_depth;
        if (pure || depth_capped || rows.size() < static_cast<std::size_t>(p.min_samples_split))
            return make_leaf(counts);

        const std::size_t d = X[0].size();
        const std::size_t mtry = p.features_per_split > 0
                                     ? static_cast<std::size_t>(p.features_per_split)
                                     : std::max<std::size_t>(1, static_cast<std::size_t>(
                                           std::floor(std::sqrt(static_cast<double>(d)))));

        // Walk a seeded feature permutation: evaluate the first mtry features,
        // then keep going until some usable split has been seen. This mirrors
        // the usual "max_features is a lower bound" splitter behaviour and
        // guarantees a mixed node splits whenever any feature can separate it.
        const std::vector<std::size_t> perm = rng.permutation(d);
        Split best;
        std::size_t scanned = 0;
        for (std::size_t f : perm) {
            ++scanned;
            consider_feature(X, y, rows, counts, static_cast<int>(f), best);
            if (scanned >= mtry && best.gain > 0.0) break;
        }
        if (best.gain <= 0.0) return make_leaf(counts);

        std::vector<std::size_t> left_rows, right_rows;
        for (std::size_t r : rows)
            (X[r][best.feature] <= best.threshold ? left_rows : right_rows).push_back(r);

        const int node_index = static_cast<int>(nodes_.size());
        nodes_.push_back({best.feature, best.threshold, -1, -1, -1});
        const int left = build(X, y, left_rows, p, rng, depth + 1);
        const int right = build(X, y, right_rows, p, rng, depth + 1);
        nodes_[node_index].left = left;
        nodes_[node_index].right = right;
        return node_index;
    }

    int make_leaf(const std::vector<std::size_t>& counts) {
        const int index = static_cast<int>(nodes_.size());
        nodes_.push_back({-1, 0.0, -1, -1, detail::majority_class(counts)});
        return index;
    }

    void consider_feature(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                          const std::vector<std::size_t>& rows,
                          const std::vector<std::size_t>& parent_counts, int feature,
                          Split& best) const {
        const double n = static_cast<double>(rows.size());
        const double parent_gini = detail::gini(parent_counts, n);

        std::vector<std::pair<double, int>> ordered;  // (value, class)
        ordered.reserve(rows.size());
        for (std::size_t r : rows) ordered.emplace_back(X[r][feature], y[r]);
        std::sort(ordered.begin(), ordered.end());

        std::vector<std::size_t> left_counts(n_classes_, 0);
        std::vector<std::size_t> right_counts = parent_counts;
        for (std::size_t i = 0; i + 1 < ordered.size(); ++i) {
            const std::size_t cls = static_cast<std::size_t>(ordered[i].second);
            ++left_counts[cls];
            --right_counts[cls];
            if (ordered[i].first == ordered[i + 1].first) continue;  // not a boundary
            const double n_left = static_cast<double>(i + 1);
            const double n_right = n - n_left;
            const double child =
                (n_left / n) * detail::gini(left_counts, n_left) +
                (n_right / n) * detail::gini(right_counts, n_right);
            const double gain = parent_gini - child;
            if (gain > best.gain) {
                best.feature = feature;
                best.threshold = ordered[i].first + (ordered[i + 1].first - ordered[i].first) / 2.0;
                best.gain = gain;
            }
        }
    }

    std::vector<detail::TreeNode> nodes_;
    int n_classes_ = 0;
};

/// Bagged CART trees; prediction is a majority vote with ties resolved by the
/// lowest class index. Training order is fixed, so results are bit-identical
/// for a given (data, params, seed).
class DecisionForest {
public:
    static DecisionForest train(const std::vector<std::vector<double>>& X,
                                const std::vector<int>& y, int n_classes, const ForestParams& p,
                                std::uint64_t seed) {
        if (X.empty()) throw EmptyTable("training matrix");
        DecisionForest forest;
        forest.n_classes_ = n_classes;
        Rng master(seed);
        std::vector<std::uint64_t> tree_seeds(static_cast<std::size_t>(p.n_trees));
        for (auto& s : tree_seeds) s = master.next_u64();

        forest.trees_.resize(static_cast<std::size_t>(p.n_trees));
        for (std::size_t t = 0; t < forest.trees_.size(); ++t) {
            Rng rng(tree_seeds[t]);
            std::vector<std::size_t> rows;
            rows.reserve(X.size());
            if (p.bootstrap) {
                for (std::size_t i = 0; i < X.size(); ++i)
                    rows.push_back(static_cast<std::size_t>(rng.below(X.size())));
            } else {
                for (std::size_t i = 0; i < X.size(); ++i) rows.push_back(i);
            }
            forest.trees_[t].grow(X, y, n_classes, rows, p, rng);
        }
        return forest;
    }

    int predict(const std::vector<double>& x) const {
        std::vector<std::size_t> votes(static_cast<std::size_t>(n_classes_), 0);
        for (const auto& tree : trees_) ++votes[static_cast<std::size_t>(tree.predict(x))];
        return detail::majority_class(votes);
    }

    std::size_t tree_count() const { return trees_.size(); }

    nlohmann::json to_json() const {
        nlohmann::json trees = nlohmann::json::array();
        for (const auto& t : trees_) trees.push_back(t.to_json());
        return {{"n_classes", n_classes_}, {"trees", trees}};
    }

    static DecisionForest from_json(const nlohmann::json& j) {
        DecisionForest f;
        f.n_classes_ = j.at("n_classes").get<int>();
        for (const auto& t : j.at("trees")) f.trees_.push_back(DecisionTree::from_json(t));
        return f;
    }

private:
    std::vector<DecisionTree> trees_;
    int n_classes_ = 0;
};

}  // namespace multisurf
