#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "multisurf/errors.hpp"
#include "multisurf/strings.hpp"

namespace multisurf {

enum class Modality { radar_csv, microscope_image, multispectral_image };

inline std::string_view to_string(Modality m) {
    switch (m) {
        case Modality::radar_csv: return "radar_csv";
        case Modality::microscope_image: return "microscope_image";
        case Modality::multispectral_image: return "multispectral_image";
    }
    return "?";
}

inline std::optional<Modality> modality_from_string(std::string_view s) {
    if (s == "radar_csv") return Modality::radar_csv;
    if (s == "microscope_image") return Modality::microscope_image;
    if (s == "multispectral_image") return Modality::multispectral_image;
    return std::nullopt;
}

/// Human-readable modality name, used for the <MOD> placeholder.
inline std::string_view modality_display_name(Modality m) {
    switch (m) {
        case Modality::radar_csv: return "radar";
        case Modality::microscope_image: return "microscope image";
        case Modality::multispectral_image: return "multispectral image";
    }
    return "?";
}

inline bool is_image_modality(Modality m) { return m != Modality::radar_csv; }

/// Declares one dataset: where it lives, what its classes are, which task it serves.
struct DatasetManifest {
    std::string dataset_id;
    Modality modality = Modality::radar_csv;
    std::string task;
    std::vector<std::string> class_labels;  // order is significant everywhere downstream
    std::filesystem::path data_path;
    std::optional<std::filesystem::path> document_path;

    /// Index of an exact label, or -1.
    int label_index(std::string_view label) const {
        for (std::size_t i = 0; i < class_labels.size(); ++i)
            if (class_labels[i] == label) return static_cast<int>(i);
        return -1;
    }
};

namespace detail {

inline void check_class_labels(const std::vector<std::string>& labels) {
    if (labels.empty()) throw SchemaViolation("class_labels", "must be non-empty");
    std::set<std::string> seen;
    for (const auto& l : labels) {
        if (trim(l).empty()) throw SchemaViolation("class_labels", "blank label");
        if (!seen.insert(canonical_label(l)).second) throw DuplicateClassLabel(l);
    }
}

}  // namespace detail

/// Parse a manifest object. Relative paths resolve against base_dir.
inline DatasetManifest manifest_from_json(const nlohmann::json& j,
                                          const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw SchemaViolation("<root>", "manifest must be a JSON object");
    static const std::set<std::string> allowed = {"dataset_id", "modality",  "task",
                                                  "class_labels", "data_path", "document_path"};
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!allowed.count(key)) throw SchemaViolation(key, "unknown field");
    }
    for (const char* required : {"dataset_id", "modality", "task", "class_labels", "data_path"}) {
        if (!j.contains(required)) throw SchemaViolation(required, "missing");
    }

    DatasetManifest m;
    if (!j["dataset_id"].is_string() || j["dataset_id"].get<std::string>().empty())
        throw SchemaViolation("dataset_id", "must be a non-empty string");
    m.dataset_id = j["dataset_id"].get<std::string>();

    if (!j["modality"].is_string()) throw SchemaViolation("modality", "must be a string");
    const auto mod = modality_from_string(j["modality"].get<std::string>());
    if (!mod) throw SchemaViolation("modality", "unknown modality '" + j["modality"].get<std::string>() + "'");
    m.modality = *mod;

    if (!j["task"].is_string()) throw SchemaViolation("task", "must be a string");
    m.task = j["task"].get<std::string>();

    if (!j["class_labels"].is_array()) throw SchemaViolation("class_labels", "must be an array");
    for (const auto& l : j["class_labels"]) {
        if (!l.is_string()) throw SchemaViolation("class_labels", "labels must be strings");
        m.class_labels.push_back(l.get<std::string>());
    }
    detail::check_class_labels(m.class_labels);

    if (!j["data_path"].is_string()) throw SchemaViolation("data_path", "must be a string");
    std::filesystem::path dp = j["data_path"].get<std::string>();
    m.data_path = dp.is_absolute() ? dp : base_dir / dp;

    if (j.contains("document_path")) {
        if (!j["document_path"].is_string()) throw SchemaViolation("document_path", "must be a string");
        std::filesystem::path doc = j["document_path"].get<std::string>();
        m.document_path = doc.is_absolute() ? doc : base_dir / doc;
    }
    return m;
}

inline DatasetManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileUnreadable(path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaViolation("<root>", std::string("not valid JSON: ") + e.what());
    }
    return manifest_from_json(j, path.parent_path());
}

}  // namespace multisurf
