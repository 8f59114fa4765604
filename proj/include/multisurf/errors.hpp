#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace multisurf {

/// Base class for every error the library raises on its own behalf.
class Error : public std::runtime_error {
public:
    explicit Error(std::string message) : std::runtime_error(std::move(message)) {}
};

// ---- dataset loading ----

class FileUnreadable : public Error {
public:
    explicit FileUnreadable(std::string p)
        : Error("file unreadable: " + p), path(std::move(p)) {}
    std::string path;
};

class SchemaViolation : public Error {
public:
    SchemaViolation(std::string f, const std::string& why)
        : Error("manifest schema violation at field '" + f + "': " + why), field(std::move(f)) {}
    std::string field;
};

class DuplicateClassLabel : public Error {
public:
    explicit DuplicateClassLabel(std::string l)
        : Error("duplicate class label (after case-fold/trim): '" + l + "'"), label(std::move(l)) {}
    std::string label;
};

class NonNumericFeature : public Error {
public:
    NonNumericFeature(std::size_t r, std::size_t c, const std::string& cell)
        : Error("row " + std::to_string(r) + ", column " + std::to_string(c) +
                ": non-numeric feature '" + cell + "'"),
          row(r), col(c) {}
    std::size_t row;  // 1-based data row
    std::size_t col;  // 1-based column
};

class UnknownLabel : public Error {
public:
    UnknownLabel(std::size_t r, const std::string& l)
        : Error("row " + std::to_string(r) + ": label '" + l + "' not in class_labels"), row(r) {}
    std::size_t row;
};

class EmptyTable : public Error {
public:
    explicit EmptyTable(const std::string& path) : Error("radar CSV has no data rows: " + path) {}
};

class RaggedRow : public Error {
public:
    RaggedRow(std::size_t r, std::size_t got, std::size_t want)
        : Error("row " + std::to_string(r) + ": has " + std::to_string(got) +
                " cells, expected " + std::to_string(want)),
          row(r) {}
    std::size_t row;
};

class MissingClassDirectory : public Error {
public:
    explicit MissingClassDirectory(std::string l)
        : Error("missing class directory: '" + l + "'"), label(std::move(l)) {}
    std::string label;
};

class EmptyClass : public Error {
public:
    explicit EmptyClass(std::string l)
        : Error("class '" + l + "' has no decodable images"), label(std::move(l)) {}
    std::string label;
};

// ---- prompt rendering ----

class UnknownModelName : public Error {
public:
    explicit UnknownModelName(std::string n)
        : Error("unknown model name '" + n + "' (expected SVM or RF)"), name(std::move(n)) {}
    std::string name;
};

class EmptyAttachment : public Error {
public:
    explicit EmptyAttachment(const std::string& what) : Error("empty attachment: " + what) {}
};

class EmptyClassList : public Error {
public:
    EmptyClassList() : Error("class label list is empty") {}
};

class ExemplarClassMismatch : public Error {
public:
    explicit ExemplarClassMismatch(const std::string& why)
        : Error("exemplar classes do not match class_labels: " + why) {}
};

// ---- model backend ----

class MissingCredential : public Error {
public:
    explicit MissingCredential(std::string v)
        : Error("missing API credential: environment variable " + v + " is not set"),
          variable(std::move(v)) {}
    std::string variable;
};

class EndpointError : public Error {
public:
    EndpointError(int s, std::string b)
        : Error("endpoint returned status " + std::to_string(s) + ": " + b.substr(0, 200)),
          status(s), body_excerpt(std::move(b)) {}
    int status;
    std::string body_excerpt;
};

class TimeoutError : public Error {
public:
    explicit TimeoutError(const std::string& why) : Error("request timed out: " + why) {}
};

class CacheMiss : public Error {
public:
    explicit CacheMiss(std::string d)
        : Error("replay cache miss for digest " + d), digest(std::move(d)) {}
    std::string digest;
};

/// Raised by the experiment runner after a trial hits one or more cache misses.
class ReplayMisses : public Error {
public:
    explicit ReplayMisses(std::vector<std::string> ds)
        : Error("replay cache missing " + std::to_string(ds.size()) + " digest(s); first: " +
                (ds.empty() ? std::string("<none>") : ds.front())),
          digests(std::move(ds)) {}
    std::vector<std::string> digests;
};

class CorruptCacheLine : public Error {
public:
    CorruptCacheLine(std::size_t n, const std::string& why)
        : Error("corrupt cache line " + std::to_string(n) + ": " + why), line(n) {}
    std::size_t line;  // 1-based
};

class ProfileParse : public Error {
public:
    explicit ProfileParse(std::string raw)
        : Error("could not split profile answer into equipment/method/usage segments"),
          raw_text(std::move(raw)) {}
    std::string raw_text;
};

// ---- classification ----

class ClassTooSmall : public Error {
public:
    ClassTooSmall(std::string l, std::size_t n)
        : Error("class '" + l + "' has " + std::to_string(n) +
                " row(s); stratified split needs at least 2"),
          label(std::move(l)) {}
    std::string label;
};

class SingleClass : public Error {
public:
    SingleClass() : Error("linear SVM needs at least 2 classes") {}
};

// ---- evaluation / reporting ----

class EmptyPredictionList : public Error {
public:
    EmptyPredictionList() : Error("cannot compute accuracy of an empty prediction list") {}
};

class DatasetMismatch : public Error {
public:
    DatasetMismatch(const std::string& a, const std::string& b)
        : Error("reports refer to different datasets/tasks: " + a + " vs " + b) {}
};

class WriteFailure : public Error {
public:
    explicit WriteFailure(const std::string& path) : Error("cannot write: " + path) {}
};

// ---- context reasoning ----

class EmptyProfileStore : public Error {
public:
    EmptyProfileStore() : Error("no method profiles to rank") {}
};

}  // namespace multisurf
