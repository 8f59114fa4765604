#pragma once

#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "multisurf/errors.hpp"
#include "multisurf/manifest.hpp"
#include "multisurf/strings.hpp"

namespace multisurf {

struct RadarRow {
    std::vector<double> features;
    std::string label;
};

/// Tabular radar data: each row is a feature vector plus a class label.
struct RadarTable {
    std::vector<std::string> feature_names;
    std::vector<RadarRow> rows;
    std::string source;                     // dataset_id
    std::vector<std::string> class_labels;  // label universe, manifest order

    std::size_t feature_arity() const { return feature_names.size(); }

    int label_index_of(std::string_view label) const {
        for (std::size_t i = 0; i < class_labels.size(); ++i)
            if (class_labels[i] == label) return static_cast<int>(i);
        return -1;
    }
};

namespace detail {

inline bool parse_double(const std::string& cell, double& out) {
    const std::string t = trim(cell);
    if (t.empty()) return false;
    const char* begin = t.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    return end == begin + t.size();
}

inline bool all_cells_non_numeric(const std::vector<std::string>& cells, std::size_t n_features) {
    double ignored;
    for (std::size_t i = 0; i < n_features; ++i)
        if (parse_double(cells[i], ignored)) return false;
    return true;
}

/// Core CSV walk shared by the strict loader and checking mode.
/// on_bad_row returns true to continue (checking mode) or throws (strict).
inline RadarTable parse_radar_csv(const DatasetManifest& manifest,
                                  const std::function<bool(const Error&)>& on_bad_row) {
    std::ifstream in(manifest.data_path, std::ios::binary);
    if (!in) throw FileUnreadable(manifest.data_path.string());
    std::stringstream buf;
    buf << in.rdbuf();

    RadarTable table;
    table.source = manifest.dataset_id;
    table.class_labels = manifest.class_labels;

    std::vector<std::vector<std::string>> records;
    for (const auto& line : split_lines(buf.str())) {
        if (trim(line).empty()) continue;
        records.push_back(split_csv_line(line));
    }
    if (records.empty()) throw EmptyTable(manifest.data_path.string());

    // Optional header: first row whose last cell is not a known label and
    // whose other cells are all non-numeric.
    std::size_t first_data = 0;
    const auto& head = records[0];
    if (head.size() >= 2 && manifest.label_index(trim(head.back())) < 0 &&
        all_cells_non_numeric(head, head.size() - 1)) {
        for (std::size_t i = 0; i + 1 < head.size(); ++i) table.feature_names.push_back(trim(head[i]));
        first_data = 1;
    }
    if (first_data == records.size()) throw EmptyTable(manifest.data_path.string());

    const std::size_t arity = records[first_data].size();
    if (table.feature_names.empty()) {
        for (std::size_t i = 0; i + 1 < arity; ++i) table.feature_names.push_back("col" + std::to_string(i));
    }

    for (std::size_t r = first_data; r < records.size(); ++r) {
        const std::size_t data_row = r - first_data + 1;  // 1-based, header excluded
        const auto& cells = records[r];
        if (cells.size() < 2) {
            RaggedRow err(data_row, cells.size(), arity);
            if (!on_bad_row(err)) throw err;
            continue;
        }
        if (cells.size() != arity) {
            RaggedRow err(data_row, cells.size(), arity);
            if (!on_bad_row(err)) throw err;
            continue;
        }
        RadarRow row;
        row.features.reserve(cells.size() - 1);
        bool bad = false;
        for (std::size_t c = 0; c + 1 < cells.size(); ++c) {
            double v;
            if (!parse_double(cells[c], v)) {
                NonNumericFeature err(data_row, c + 1, trim(cells[c]));
                if (!on_bad_row(err)) throw err;
                bad = true;
                break;
            }
            row.features.push_back(v);
        }
        if (bad) continue;
        row.label = trim(cells.back());
        if (manifest.label_index(row.label) < 0) {
            UnknownLabel err(data_row, row.label);
            if (!on_bad_row(err)) throw err;
            continue;
        }
        table.rows.push_back(std::move(row));
    }

    // Header arity wins if present; keep names and data consistent either way.
    if (table.feature_names.size() + 1 != arity) {
        table.feature_names.resize(arity - 1);
        for (std::size_t i = 0; i < table.feature_names.size(); ++i)
            if (table.feature_names[i].empty()) table.feature_names[i] = "col" + std::to_string(i);
    }
    return table;
}

}  // namespace detail

/// Strict loader: throws on the first malformed row.
inline RadarTable load_radar_table(const DatasetManifest& manifest) {
    return detail::parse_radar_csv(manifest, [](const Error&) { return false; });
}

/// Checking mode: collects one message per rejected row instead of aborting.
inline RadarTable scan_radar_csv(const DatasetManifest& manifest,
                                 std::vector<std::string>& row_errors) {
    return detail::parse_radar_csv(manifest, [&row_errors](const Error& e) {
        row_errors.emplace_back(e.what());
        return true;
    });
}

}  // namespace multisurf
