#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "multisurf/errors.hpp"

namespace multisurf {

/// Square count matrix, rows = truth, columns = predicted, both in label order.
struct ConfusionMatrix {
    std::vector<std::string> labels;
    std::vector<std::vector<std::uint64_t>> counts;

    ConfusionMatrix() = default;
    explicit ConfusionMatrix(std::vector<std::string> ls)
        : labels(std::move(ls)),
          counts(labels.size(), std::vector<std::uint64_t>(labels.size(), 0)) {}

    void add(std::size_t truth, std::size_t predicted) { ++counts[truth][predicted]; }

    std::uint64_t trace() const {
        std::uint64_t t = 0;
        for (std::size_t i = 0; i < counts.size(); ++i) t += counts[i][i];
        return t;
    }

    std::uint64_t total() const {
        std::uint64_t t = 0;
        for (const auto& row : counts)
            for (auto v : row) t += v;
        return t;
    }

    std::uint64_t row_sum(std::size_t i) const {
        std::uint64_t t = 0;
        for (auto v : counts[i]) t += v;
        return t;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["labels"] = labels;
        j["counts"] = counts;
        return j;
    }

    static ConfusionMatrix from_json(const nlohmann::json& j) {
        ConfusionMatrix m;
        m.labels = j.at("labels").get<std::vector<std::string>>();
        m.counts = j.at("counts").get<std::vector<std::vector<std::uint64_t>>>();
        return m;
    }

    bool operator==(const ConfusionMatrix&) const = default;
};

}  // namespace multisurf
