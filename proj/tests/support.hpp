#pragma once

#include <unistd.h>

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "multisurf/image_corpus.hpp"
#include "multisurf/manifest.hpp"
#include "multisurf/radar_table.hpp"
#include "multisurf/rng.hpp"

namespace testsupport {

/// Unique scratch directory, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<unsigned> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("multisurf_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& sub) const { return path_ / sub; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& bytes) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << bytes;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

/// Bytes that pass the PNG signature sniff; the payload after the signature
/// makes each sample unique.
inline std::string png_bytes(const std::string& payload) {
    std::string sig = {static_cast<char>(0x89), 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    std::string body = payload;
    body.resize(std::max<std::size_t>(payload.size(), 16), '\0');
    return sig + body;
}

inline std::string jpeg_bytes(const std::string& payload) {
    std::string sig = {static_cast<char>(0xff), static_cast<char>(0xd8), static_cast<char>(0xff),
                       static_cast<char>(0xe0)};
    return sig + payload;
}

inline multisurf::ImageSample png_sample(const std::string& id, const std::string& label) {
    return {id, label, png_bytes("img:" + id), multisurf::MediaKind::png};
}

/// In-memory corpus: n_per_class[i] samples for class labels[i].
inline multisurf::ImageCorpus make_corpus(const std::vector<std::string>& labels,
                                          const std::vector<int>& n_per_class) {
    multisurf::ImageCorpus corpus;
    corpus.manifest_ref = "test-corpus";
    corpus.class_labels = labels;
    corpus.by_class.resize(labels.size());
    for (std::size_t c = 0; c < labels.size(); ++c)
        for (int i = 0; i < n_per_class[c]; ++i)
            corpus.by_class[c].push_back(
                png_sample(labels[c] + "/" + std::to_string(i), labels[c]));
    return corpus;
}

/// Two seeded Gaussian blobs: class A centered at +separation, class B at
/// -separation, in every one of `dims` dimensions.
inline multisurf::RadarTable make_blob_table(std::size_t rows_per_class, std::size_t dims,
                                             double separation, std::uint64_t seed) {
    multisurf::RadarTable table;
    table.source = "synthetic-blobs";
    table.class_labels = {"A", "B"};
    for (std::size_t d = 0; d < dims; ++d) table.feature_names.push_back("f" + std::to_string(d));
    multisurf::Rng rng(seed);
    for (std::size_t i = 0; i < rows_per_class * 2; ++i) {
        const bool first = i < rows_per_class;
        multisurf::RadarRow row;
        row.label = first ? "A" : "B";
        for (std::size_t d = 0; d < dims; ++d)
            row.features.push_back((first ? separation : -separation) + rng.gaussian());
        table.rows.push_back(std::move(row));
    }
    return table;
}

/// Independent oracle: classify by the nearest class centroid (computed on
/// the train split only). Returns test-split accuracy.
inline double nearest_centroid_accuracy(const multisurf::RadarTable& table,
                                        const std::vector<std::size_t>& train,
                                        const std::vector<std::size_t>& test) {
    const std::size_t k = table.class_labels.size();
    const std::size_t d = table.rows.front().features.size();
    std::vector<std::vector<double>> centroids(k, std::vector<double>(d, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i : train) {
        const auto c = static_cast<std::size_t>(table.label_index_of(table.rows[i].label));
        for (std::size_t j = 0; j < d; ++j) centroids[c][j] += table.rows[i].features[j];
        ++counts[c];
    }
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t j = 0; j < d; ++j) centroids[c][j] /= static_cast<double>(counts[c]);

    std::size_t correct = 0;
    for (std::size_t i : test) {
        std::size_t best = 0;
        double best_dist = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
            double dist = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                const double delta = table.rows[i].features[j] - centroids[c][j];
                dist += delta * delta;
            }
            if (dist < best_dist) {
                best_dist = dist;
                best = c;
            }
        }
        if (table.class_labels[best] == table.rows[i].label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(test.size());
}

}  // namespace testsupport
