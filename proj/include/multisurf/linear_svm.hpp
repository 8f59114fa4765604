#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "multisurf/errors.hpp"
#include "multisurf/rng.hpp"

namespace multisurf {

struct SvmParams {
    double lambda = 1e-4;
    int epochs = 20;
    bool standardize = true;
};

/// Per-feature zero-mean unit-variance transform fit on the training split.
/// Zero-variance features map to 0.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> stddev;  // 0 marks a constant feature

    static Standardizer fit(const std::vector<std::vector<double>>& X) {
        const std::size_t d = X.empty() ? 0 : X[0].size();
        Standardizer s;
        s.mean.assign(d, 0.0);
        s.stddev.assign(d, 0.0);
        const double n = static_cast<double>(X.size());
        for (const auto& row : X)
            for (std::size_t j = 0; j < d; ++j) s.mean[j] += row[j];
        for (std::size_t j = 0; j < d; ++j) s.mean[j] /= n;
        for (const auto& row : X)
            for (std::size_t j = 0; j < d; ++j) {
                const double dlt = row[j] - s.mean[j];
                s.stddev[j] += dlt * dlt;
            }
        for (std::size_t j = 0; j < d; ++j) s.stddev[j] = std::sqrt(s.stddev[j] / n);
        return s;
    }

    std::vector<double> apply(const std::vector<double>& x) const {
        std::vector<double> out(x.size());
        for (std::size_t j = 0; j < x.size(); ++j)
            out[j] = stddev[j] > 0.0 ? (x[j] - mean[j]) / stddev[j] : 0.0;
        return out;
    }

    static Standardizer identity(std::size_t d) {
        Standardizer s;
        s.mean.assign(d, 0.0);
        s.stddev.assign(d, 1.0);
        return s;
    }
};

/// One-vs-rest linear SVMs trained by Pegasos-style stochastic subgradient
/// descent: step size 1/(lambda * t), one shared per-epoch sample permutation.
/// The bias rides along as an augmented constant feature, so it is shrunk and
/// regularized like every weight. The stored parameters are the averaged
/// iterate.
class LinearSvm {
public:
    static LinearSvm train(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                           int n_classes, const SvmParams& p, std::uint64_t seed,
                           std::vector<double>* epoch_objectives = nullptr) {
        if (X.empty()) throw EmptyTable("training matrix");
        if (n_classes < 2) throw SingleClass();
        const std::size_t n = X.size();
        const std::size_t d = X[0].size();
        const std::size_t da = d + 1;  // + bias slot
        const std::size_t k = static_cast<std::size_t>(n_classes);

        LinearSvm svm;
        svm.params_ = p;
        svm.standardizer_ = p.standardize ? Standardizer::fit(X) : Standardizer::identity(d);
        std::vector<std::vector<double>> Z(n);
        for (std::size_t i = 0; i < n; ++i) {
            Z[i] = svm.standardizer_.apply(X[i]);
            Z[i].push_back(1.0);
        }

        std::vector<std::vector<double>> w(k, std::vector<double>(da, 0.0));
        std::vector<std::vector<double>> w_sum(k, std::vector<double>(da, 0.0));

        Rng rng(seed);
        std::size_t t = 0;
        for (int epoch = 0; epoch < p.epochs; ++epoch) {
            std::vector<std::size_t> order = rng.permutation(n);
            for (std::size_t i : order) {
                ++t;
                const double eta = 1.0 / (p.lambda * static_cast<double>(t));
                const double shrink = 1.0 - eta * p.lambda;
                for (std::size_t c = 0; c < k; ++c) {
                    const double label = y[i] == static_cast<int>(c) ? 1.0 : -1.0;
                    double margin = 0.0;
                    for (std::size_t j = 0; j < da; ++j) margin += w[c][j] * Z[i][j];
                    margin *= label;
                    for (std::size_t j = 0; j < da; ++j) w[c][j] *= shrink;
                    if (margin < 1.0)
                        for (std::size_t j = 0; j < da; ++j) w[c][j] += eta * label * Z[i][j];
                    for (std::size_t j = 0; j < da; ++j) w_sum[c][j] += w[c][j];
                }
            }
            if (epoch_objectives) {
                LinearSvm avg = svm;
                avg.set_averaged(w_sum, t);
                std::vector<std::vector<double>> Zplain(n);
                for (std::size_t i = 0; i < n; ++i)
                    Zplain[i].assign(Z[i].begin(), Z[i].end() - 1);
                epoch_objectives->push_back(avg.objective_standardized(Zplain, y, p.lambda));
            }
        }
        svm.set_averaged(w_sum, t);
        return svm;
    }

    /// Argmax of decision values; ties go to the lowest class index.
    int predict(const std::vector<double>& x) const {
        const std::vector<double> z = standardizer_.apply(x);
        int best = 0;
        double best_value = decision(0, z);
        for (std::size_t c = 1; c < weights_.size(); ++c) {
            const double v = decision(c, z);
            if (v > best_value) {
                best_value = v;
                best = static_cast<int>(c);
            }
        }
        return best;
    }

    /// Mean over classes of the per-class objective in the augmented space:
    /// lambda/2 (||w||^2 + b^2) + mean hinge loss, on pre-standardized rows.
    double objective_standardized(const std::vector<std::vector<double>>& Z,
                                  const std::vector<int>& y, double lambda) const {
        const std::size_t k = weights_.size();
        double total = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            double norm2 = bias_[c] * bias_[c];
            for (double wj : weights_[c]) norm2 += wj * wj;
            double hinge = 0.0;
            for (std::size_t i = 0; i < Z.size(); ++i) {
                const double label = y[i] == static_cast<int>(c) ? 1.0 : -1.0;
                const double margin = label * decision(c, Z[i]);
                hinge += std::max(0.0, 1.0 - margin);
            }
            total += 0.5 * lambda * norm2 + hinge / static_cast<double>(Z.size());
        }
        return total / static_cast<double>(k);
    }

    const Standardizer& standardizer() const { return standardizer_; }

    nlohmann::json to_json() const {
        return {{"weights", weights_},
                {"bias", bias_},
                {"mean", standardizer_.mean},
                {"stddev", standardizer_.stddev},
                {"lambda", params_.lambda},
                {"epochs", params_.epochs}};
    }

    static LinearSvm from_json(const nlohmann::json& j) {
        LinearSvm s;
        s.weights_ = j.at("weights").get<std::vector<std::vector<double>>>();
        s.bias_ = j.at("bias").get<std::vector<double>>();
        s.standardizer_.mean = j.at("mean").get<std::vector<double>>();
        s.standardizer_.stddev = j.at("stddev").get<std::vector<double>>();
        s.params_.lambda = j.at("lambda").get<double>();
        s.params_.epochs = j.at("epochs").get<int>();
        return s;
    }

private:
    double decision(std::size_t c, const std::vector<double>& z) const {
        double v = bias_[c];
        for (std::size_t j = 0; j < z.size(); ++j) v += weights_[c][j] * z[j];
        return v;
    }

    /// w_sum rows are augmented (last entry is the bias accumulator).
    void set_averaged(const std::vector<std::vector<double>>& w_sum, std::size_t steps) {
        const double inv = 1.0 / static_cast<double>(steps);
        weights_.assign(w_sum.size(), {});
        bias_.assign(w_sum.size(), 0.0);
        for (std::size_t c = 0; c < w_sum.size(); ++c) {
            const std::size_t d = w_sum[c].size() - 1;
            weights_[c].resize(d);
            for (std::size_t j = 0; j < d; ++j) weights_[c][j] = w_sum[c][j] * inv;
            bias_[c] = w_sum[c][d] * inv;
        }
    }

    std::vector<std::vector<double>> weights_;
    std::vector<double> bias_;
    Standardizer standardizer_;
    SvmParams params_;
};

}  // namespace multisurf
