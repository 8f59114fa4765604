#pragma once

#include <string>
#include <vector>

#include "multisurf/errors.hpp"
#include "multisurf/image_corpus.hpp"
#include "multisurf/manifest.hpp"
#include "multisurf/radar_table.hpp"

namespace multisurf {

enum class Severity { error, warning };

struct Issue {
    Severity severity = Severity::error;
    std::string message;
};

struct ValidationReport {
    std::string dataset_id;
    std::vector<Issue> issues;

    std::size_t error_count() const {
        std::size_t n = 0;
        for (const auto& i : issues) n += (i.severity == Severity::error);
        return n;
    }
    std::size_t warning_count() const { return issues.size() - error_count(); }
    /// A dataset is loadable iff nothing error-severity was found.
    bool loadable() const { return error_count() == 0; }
};

/// Run the modality-appropriate loader in checking mode, aggregating every
/// issue instead of stopping at the first.
inline ValidationReport validate_dataset(const DatasetManifest& manifest) {
    ValidationReport report;
    report.dataset_id = manifest.dataset_id;

    if (manifest.modality == Modality::radar_csv) {
        std::vector<std::string> row_errors;
        try {
            scan_radar_csv(manifest, row_errors);
        } catch (const Error& e) {
            report.issues.push_back({Severity::error, e.what()});
        }
        for (auto& msg : row_errors) report.issues.push_back({Severity::error, std::move(msg)});
        return report;
    }

    std::vector<std::string> class_errors;
    try {
        CorpusLoad load = scan_image_corpus(manifest, class_errors);
        for (auto& w : load.warnings) report.issues.push_back({Severity::warning, std::move(w)});
    } catch (const Error& e) {
        report.issues.push_back({Severity::error, e.what()});
    }
    for (auto& msg : class_errors) report.issues.push_back({Severity::error, std::move(msg)});
    return report;
}

}  // namespace multisurf
