#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "multisurf/decision_forest.hpp"
#include "multisurf/errors.hpp"
#include "multisurf/linear_svm.hpp"
#include "multisurf/metrics.hpp"
#include "multisurf/radar_table.hpp"
#include "multisurf/rng.hpp"

namespace multisurf {

enum class Algorithm { random_forest, linear_svm };

inline std::string_view to_string(Algorithm a) {
    return a == Algorithm::random_forest ? "random_forest" : "linear_svm";
}

inline std::optional<Algorithm> algorithm_from_string(std::string_view s) {
    if (s == "random_forest" || s == "rf") return Algorithm::random_forest;
    if (s == "linear_svm" || s == "svm") return Algorithm::linear_svm;
    return std::nullopt;
}

struct TrainConfig {
    Algorithm algorithm = Algorithm::random_forest;
    std::uint64_t seed = 0;
    double split_fraction = 0.8;  // train share
    ForestParams rf;
    SvmParams svm;
};

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

namespace detail {

inline void check_train_config(const TrainConfig& config) {
    if (config.algorithm == Algorithm::random_forest) {
        if (config.rf.n_trees < 1 || config.rf.min_samples_split < 1 ||
            config.rf.max_depth < 0 || config.rf.features_per_split < 0)
            throw Error("random forest hyperparameters must be positive");
    } else {
        if (config.svm.lambda <= 0.0 || config.svm.epochs < 1)
            throw Error("svm hyperparameters must be positive");
    }
}

inline std::vector<int> encode_labels(const RadarTable& table) {
    std::map<std::string, int> index;
    for (std::size_t i = 0; i < table.class_labels.size(); ++i)
        index[table.class_labels[i]] = static_cast<int>(i);
    std::vector<int> y;
    y.reserve(table.rows.size());
    for (const auto& row : table.rows) y.push_back(index.at(row.label));
    return y;
}

inline std::vector<std::vector<double>> feature_matrix(const RadarTable& table) {
    std::vector<std::vector<double>> X;
    X.reserve(table.rows.size());
    for (const auto& row : table.rows) X.push_back(row.features);
    return X;
}

}  // namespace detail

/// Per class (manifest order): shuffle that class's row indices with the
/// shared seeded generator, send floor(fraction*n) to train, rest to test,
/// with at least one row on each side. Both index lists come back sorted.
inline SplitIndices stratified_split(const RadarTable& table, double fraction,
                                     std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw Error("split fraction must be in (0,1), got " + std::to_string(fraction));

    std::vector<std::vector<std::size_t>> strata(table.class_labels.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const int c = table.label_index_of(table.rows[i].label);
        if (c < 0) throw UnknownLabel(i + 1, table.rows[i].label);
        strata[static_cast<std::size_t>(c)].push_back(i);
    }

    SplitIndices out;
    Rng rng(seed);
    for (std::size_t c = 0; c < strata.size(); ++c) {
        auto& idx = strata[c];
        if (idx.size() < 2) throw ClassTooSmall(table.class_labels[c], idx.size());
        rng.shuffle(idx);
        std::size_t n_train = static_cast<std::size_t>(
            std::floor(fraction * static_cast<double>(idx.size())));
        n_train = std::max<std::size_t>(1, std::min(n_train, idx.size() - 1));
        out.train.insert(out.train.end(), idx.begin(), idx.begin() + n_train);
        out.test.insert(out.test.end(), idx.begin() + n_train, idx.end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

/// A trained radar classifier. Immutable after training; prediction depends
/// only on the learned parameters.
class RadarModel {
public:
    Algorithm algorithm() const { return algorithm_; }
    const std::vector<std::string>& class_labels() const { return class_labels_; }
    std::uint64_t train_seed() const { return train_seed_; }

    const std::string& predict(const std::vector<double>& features) const {
        const int c = algorithm_ == Algorithm::random_forest ? forest_.predict(features)
                                                             : svm_.predict(features);
        return class_labels_[static_cast<std::size_t>(c)];
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["format_version"] = 1;
        j["algorithm"] = std::string(to_string(algorithm_));
        j["class_labels"] = class_labels_;
        j["train_seed"] = train_seed_;
        if (algorithm_ == Algorithm::random_forest)
            j["forest"] = forest_.to_json();
        else
            j["svm"] = svm_.to_json();
        return j;
    }

    static RadarModel from_json(const nlohmann::json& j) {
        RadarModel m;
        const auto alg = algorithm_from_string(j.at("algorithm").get<std::string>());
        if (!alg) throw Error("unknown algorithm in model document");
        m.algorithm_ = *alg;
        m.class_labels_ = j.at("class_labels").get<std::vector<std::string>>();
        m.train_seed_ = j.at("train_seed").get<std::uint64_t>();
        if (m.algorithm_ == Algorithm::random_forest)
            m.forest_ = DecisionForest::from_json(j.at("forest"));
        else
            m.svm_ = LinearSvm::from_json(j.at("svm"));
        return m;
    }

    /// Per-epoch objective of the averaged iterate; filled by SVM training.
    const std::vector<double>& epoch_objectives() const { return epoch_objectives_; }

private:
    friend RadarModel train_random_forest(const RadarTable&, const TrainConfig&);
    friend RadarModel train_linear_svm(const RadarTable&, const TrainConfig&);

    Algorithm algorithm_ = Algorithm::random_forest;
    std::vector<std::string> class_labels_;
    std::uint64_t train_seed_ = 0;
    DecisionForest forest_;
    LinearSvm svm_;
    std::vector<double> epoch_objectives_;
};

inline RadarModel train_random_forest(const RadarTable& table, const TrainConfig& config) {
    detail::check_train_config(config);
    if (table.rows.empty()) throw EmptyTable(table.source);
    RadarModel m;
    m.algorithm_ = Algorithm::random_forest;
    m.class_labels_ = table.class_labels;
    m.train_seed_ = config.seed;
    m.forest_ = DecisionForest::train(detail::feature_matrix(table), detail::encode_labels(table),
                                      static_cast<int>(table.class_labels.size()), config.rf,
                                      config.seed);
    return m;
}

inline RadarModel train_linear_svm(const RadarTable& table, const TrainConfig& config) {
    detail::check_train_config(config);
    if (table.rows.empty()) throw EmptyTable(table.source);
    if (table.class_labels.size() < 2) throw SingleClass();
    RadarModel m;
    m.algorithm_ = Algorithm::linear_svm;
    m.class_labels_ = table.class_labels;
    m.train_seed_ = config.seed;
    m.svm_ = LinearSvm::train(detail::feature_matrix(table), detail::encode_labels(table),
                              static_cast<int>(table.class_labels.size()), config.svm, config.seed,
                              &m.epoch_objectives_);
    return m;
}

struct HoldoutResult {
    double accuracy = 0.0;
    ConfusionMatrix confusion;
    SplitIndices split;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["accuracy"] = accuracy;
        j["confusion"] = confusion.to_json();
        j["train_indices"] = split.train;
        j["test_indices"] = split.test;
        return j;
    }
};

/// Stratified holdout: train on the train split only, score the test split.
inline HoldoutResult evaluate_holdout(const RadarTable& table, const TrainConfig& config,
                                      RadarModel* model_out = nullptr) {
    const SplitIndices split = stratified_split(table, config.split_fraction, config.seed);
    if (split.test.empty()) throw Error("empty test split");

    RadarTable train_table;
    train_table.feature_names = table.feature_names;
    train_table.source = table.source;
    train_table.class_labels = table.class_labels;
    for (std::size_t i : split.train) train_table.rows.push_back(table.rows[i]);

    const RadarModel model = config.algorithm == Algorithm::random_forest
                                 ? train_random_forest(train_table, config)
                                 : train_linear_svm(train_table, config);

    HoldoutResult result;
    result.split = split;
    result.confusion = ConfusionMatrix(table.class_labels);
    std::size_t correct = 0;
    for (std::size_t i : split.test) {
        const std::string& predicted = model.predict(table.rows[i].features);
        const std::size_t truth =
            static_cast<std::size_t>(table.label_index_of(table.rows[i].label));
        const std::size_t pred = static_cast<std::size_t>(table.label_index_of(predicted));
        result.confusion.add(truth, pred);
        if (predicted == table.rows[i].label) ++correct;
    }
    result.accuracy = static_cast<double>(correct) / static_cast<double>(split.test.size());
    if (model_out) *model_out = model;
    return result;
}

}  // namespace multisurf
