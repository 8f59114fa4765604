#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "multisurf/errors.hpp"
#include "multisurf/manifest.hpp"

namespace multisurf {

enum class MediaKind { png, jpeg };

inline std::string_view media_type(MediaKind k) {
    return k == MediaKind::png ? "image/png" : "image/jpeg";
}

/// Signature sniff; extension only decides which files are considered at all.
inline std::optional<MediaKind> sniff_image(std::string_view bytes) {
    static constexpr unsigned char png_sig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
    if (bytes.size() >= 16 &&
        std::equal(std::begin(png_sig), std::end(png_sig),
                   reinterpret_cast<const unsigned char*>(bytes.data())))
        return MediaKind::png;
    if (bytes.size() >= 4 && static_cast<unsigned char>(bytes[0]) == 0xff &&
        static_cast<unsigned char>(bytes[1]) == 0xd8 &&
        static_cast<unsigned char>(bytes[2]) == 0xff)
        return MediaKind::jpeg;
    return std::nullopt;
}

struct ImageSample {
    std::string sample_id;  // "<class>/<file stem>"
    std::string class_label;
    std::string bytes;
    MediaKind media_kind = MediaKind::png;
};

/// All labeled images of one dataset, grouped per class in manifest order.
struct ImageCorpus {
    std::string manifest_ref;
    std::vector<std::string> class_labels;
    std::vector<std::vector<ImageSample>> by_class;  // aligned with class_labels

    std::size_t total_samples() const {
        std::size_t n = 0;
        for (const auto& g : by_class) n += g.size();
        return n;
    }

    std::vector<const ImageSample*> all_samples() const {
        std::vector<const ImageSample*> out;
        out.reserve(total_samples());
        for (const auto& g : by_class)
            for (const auto& s : g) out.push_back(&s);
        return out;
    }
};

struct CorpusLoad {
    ImageCorpus corpus;
    std::vector<std::string> warnings;  // undecodable files, skipped
};

namespace detail {

/// Walk <data_path>/<class>/<file>.{png,jpeg,jpg}. Files are visited in
/// sorted name order so the corpus (and every seeded draw from it) is
/// independent of directory enumeration order.
/// on_class_error returns true to continue past the class (checking mode).
inline CorpusLoad walk_image_corpus(const DatasetManifest& manifest,
                                    const std::function<bool(const Error&)>& on_class_error) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(manifest.data_path)) throw FileUnreadable(manifest.data_path.string());

    CorpusLoad out;
    out.corpus.manifest_ref = manifest.dataset_id;
    out.corpus.class_labels = manifest.class_labels;
    out.corpus.by_class.resize(manifest.class_labels.size());

    for (std::size_t ci = 0; ci < manifest.class_labels.size(); ++ci) {
        const std::string& label = manifest.class_labels[ci];
        const fs::path dir = manifest.data_path / label;
        if (!fs::is_directory(dir)) {
            MissingClassDirectory err(label);
            if (!on_class_error(err)) throw err;
            continue;
        }

        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (!entry.is_regular_file()) continue;
            std::string ext = casefold(entry.path().extension().string());
            if (ext == ".png" || ext == ".jpeg" || ext == ".jpg") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());

        for (const auto& file : files) {
            std::ifstream in(file, std::ios::binary);
            if (!in) {
                out.warnings.push_back("unreadable image skipped: " + file.string());
                continue;
            }
            std::stringstream buf;
            buf << in.rdbuf();
            std::string bytes = buf.str();
            const auto kind = sniff_image(bytes);
            if (!kind) {
                out.warnings.push_back("undecodable image skipped: " + file.string());
                continue;
            }
            ImageSample sample;
            sample.sample_id = label + "/" + file.stem().string();
            sample.class_label = label;
            sample.bytes = std::move(bytes);
            sample.media_kind = *kind;
            out.corpus.by_class[ci].push_back(std::move(sample));
        }
        if (out.corpus.by_class[ci].empty()) {
            EmptyClass err(label);
            if (!on_class_error(err)) throw err;
        }
    }
    return out;
}

}  // namespace detail

/// Strict loader: throws on the first missing or empty class.
inline CorpusLoad load_image_corpus(const DatasetManifest& manifest) {
    return detail::walk_image_corpus(manifest, [](const Error&) { return false; });
}

/// Checking mode: class-level problems land in class_errors, loading continues.
inline CorpusLoad scan_image_corpus(const DatasetManifest& manifest,
                                    std::vector<std::string>& class_errors) {
    return detail::walk_image_corpus(manifest, [&class_errors](const Error& e) {
        class_errors.emplace_back(e.what());
        return true;
    });
}

}  // namespace multisurf
