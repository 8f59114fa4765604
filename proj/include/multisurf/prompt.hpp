#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "multisurf/errors.hpp"
#include "multisurf/image_corpus.hpp"
#include "multisurf/rng.hpp"
#include "multisurf/strings.hpp"

namespace multisurf {

/// Bump when any built-in template text changes; recorded in report provenance.
inline constexpr std::string_view kTemplateVersion = "table1-v1";

enum class TemplateKind { csv_file, image, document };

struct PromptTemplate {
    TemplateKind kind;
    std::string task_explaining;  // may contain <MOD>, <MODEL>, <CLASS>, <PIC...>
    std::string rules;
};

namespace tmpl {

inline constexpr std::string_view csv_task =
    "The provided CSV is <MOD> data. In the CSV file, columns [0:-1] contain the radar "
    "features, and the last column [-1] contains the labels. Build a model (defaulting to "
    "using <MODEL>) and return the accuracy. Do not output other text.";
inline constexpr std::string_view csv_rules = "[Rules]: Do not output any other text.";

inline constexpr std::string_view image_task =
    "The provided picture is <MOD>. Identify the category of this picture from <CLASS> and "
    "return only one category (only one category can be returned). For example, <PIC1>, "
    "<PIC2>...<PICn> (where n is the number of categories in <CLASS>) are sample images for "
    "each category in <CLASS>.";
inline constexpr std::string_view image_rules =
    "[Rules]: Must return within <CLASS>. Do not output any other text.";

/// The exemplar sentence; deleted for zero-shot prompts.
inline constexpr std::string_view image_example_sentence =
    " For example, <PIC1>, <PIC2>...<PICn> (where n is the number of categories in <CLASS>) "
    "are sample images for each category in <CLASS>.";

/// The run of picture placeholders inside the exemplar sentence.
inline constexpr std::string_view image_pic_run = "<PIC1>, <PIC2>...<PICn>";

inline constexpr std::string_view document_task =
    "According to the given paper, what equipment did they use, what is the method, and what "
    "is the origin usage of the data?";
inline constexpr std::string_view document_rules =
    "[Rules]: Summarize the method and origin usage each in one complete sentence.";

}  // namespace tmpl

inline const PromptTemplate& builtin_template(TemplateKind kind) {
    static const PromptTemplate csv{TemplateKind::csv_file, std::string(tmpl::csv_task),
                                    std::string(tmpl::csv_rules)};
    static const PromptTemplate image{TemplateKind::image, std::string(tmpl::image_task),
                                      std::string(tmpl::image_rules)};
    static const PromptTemplate document{TemplateKind::document, std::string(tmpl::document_task),
                                         std::string(tmpl::document_rules)};
    switch (kind) {
        case TemplateKind::csv_file: return csv;
        case TemplateKind::image: return image;
        case TemplateKind::document: return document;
    }
    return csv;
}

enum class ShotVariant { zero_shot, one_shot };

inline std::string_view to_string(ShotVariant v) {
    return v == ShotVariant::zero_shot ? "zero_shot" : "one_shot";
}

/// zero_shot carries no seed; one_shot always carries one.
struct ShotStrategy {
    ShotVariant variant = ShotVariant::zero_shot;
    std::optional<std::uint64_t> seed;

    static ShotStrategy zero() { return {ShotVariant::zero_shot, std::nullopt}; }
    static ShotStrategy one(std::uint64_t seed) { return {ShotVariant::one_shot, seed}; }
};

enum class AttachmentRole { exemplar, query, csv, document };

inline std::string_view to_string(AttachmentRole r) {
    switch (r) {
        case AttachmentRole::exemplar: return "exemplar";
        case AttachmentRole::query: return "query";
        case AttachmentRole::csv: return "csv";
        case AttachmentRole::document: return "document";
    }
    return "?";
}

struct Attachment {
    AttachmentRole role = AttachmentRole::query;
    std::optional<std::string> label_hint;
    std::string bytes;
    std::string media_type = "application/octet-stream";
};

/// Final prompt: placeholder-free text plus ordered attachments.
struct RenderedPrompt {
    std::string text;
    std::vector<Attachment> attachments;
};

/// Exactly one exemplar per class, in manifest class order.
struct ExemplarSet {
    std::vector<std::pair<std::string, ImageSample>> exemplars;
    std::uint64_t seed = 0;

    const ImageSample* find(std::string_view label) const {
        for (const auto& [l, s] : exemplars)
            if (l == label) return &s;
        return nullptr;
    }
};

struct ExemplarDraw {
    ExemplarSet exemplars;
    std::vector<ImageSample> evaluation_pool;
    /// Classes whose only sample became the exemplar (nothing left to evaluate).
    std::vector<std::string> exhausted_classes;
};

/// <CLASS> rendering: bracketed comma-separated list in manifest order.
inline std::string render_class_list(const std::vector<std::string>& labels) {
    return "[" + join(labels, ", ") + "]";
}

namespace detail {

inline void replace_all(std::string& text, std::string_view token, std::string_view value) {
    std::size_t pos = 0;
    while ((pos = text.find(token, pos)) != std::string::npos) {
        text.replace(pos, token.size(), value);
        pos += value.size();
    }
}

inline void assert_no_placeholder(const std::string& text) {
    for (std::string_view token : {"<MOD>", "<MODEL>", "<CLASS>", "<PIC"}) {
        if (contains(text, token))
            throw Error("internal: rendered prompt still contains placeholder " + std::string(token));
    }
}

}  // namespace detail

/// Table 1, CSV row. model_name must be one of the models the template names.
inline RenderedPrompt render_csv_prompt(const std::string& modality_name,
                                        const std::string& model_name, std::string csv_bytes) {
    if (model_name != "SVM" && model_name != "RF") throw UnknownModelName(model_name);
    if (csv_bytes.empty()) throw EmptyAttachment("csv");

    const PromptTemplate& t = builtin_template(TemplateKind::csv_file);
    std::string task = t.task_explaining;
    detail::replace_all(task, "<MOD>", modality_name);
    detail::replace_all(task, "<MODEL>", model_name);

    RenderedPrompt out;
    out.text = task + "\n" + t.rules;
    detail::assert_no_placeholder(out.text);
    out.attachments.push_back({AttachmentRole::csv, std::nullopt, std::move(csv_bytes), "text/csv"});
    return out;
}

/// Table 1, Image row. Zero-shot when exemplars is null: the example sentence
/// is deleted and only the query image is attached. One-shot: one exemplar per
/// class (manifest order, each announced by an "Example of <label>:" line),
/// query always last.
inline RenderedPrompt render_image_prompt(const std::string& modality_name,
                                          const std::vector<std::string>& class_labels,
                                          const ImageSample& query,
                                          const ExemplarSet* exemplars = nullptr) {
    if (class_labels.empty()) throw EmptyClassList();
    if (query.bytes.empty()) throw EmptyAttachment("query image");
    if (exemplars) {
        if (exemplars->exemplars.size() != class_labels.size())
            throw ExemplarClassMismatch("expected " + std::to_string(class_labels.size()) +
                                        " exemplars, got " + std::to_string(exemplars->exemplars.size()));
        for (const auto& label : class_labels)
            if (!exemplars->find(label)) throw ExemplarClassMismatch("no exemplar for '" + label + "'");
    }

    const PromptTemplate& t = builtin_template(TemplateKind::image);
    const std::string class_list = render_class_list(class_labels);

    std::string task = t.task_explaining;
    if (!exemplars) {
        detail::replace_all(task, tmpl::image_example_sentence, "");
    } else {
        detail::replace_all(task, tmpl::image_pic_run, "the attached example images");
    }
    detail::replace_all(task, "<MOD>", modality_name);
    detail::replace_all(task, "<CLASS>", class_list);

    std::string rules = t.rules;
    detail::replace_all(rules, "<CLASS>", class_list);

    RenderedPrompt out;
    if (!exemplars) {
        out.text = task + "\n" + rules;
    } else {
        std::string captions;
        for (const auto& label : class_labels) captions += "Example of " + label + ":\n";
        out.text = task + "\n" + captions + rules;
        for (const auto& label : class_labels) {
            const ImageSample* s = exemplars->find(label);
            out.attachments.push_back({AttachmentRole::exemplar, label, s->bytes,
                                       std::string(media_type(s->media_kind))});
        }
    }
    out.attachments.push_back({AttachmentRole::query, std::nullopt, query.bytes,
                               std::string(media_type(query.media_kind))});
    detail::assert_no_placeholder(out.text);
    return out;
}

/// Table 1, Document row.
inline RenderedPrompt render_document_prompt(std::string document_bytes) {
    if (document_bytes.empty()) throw EmptyAttachment("document");
    const PromptTemplate& t = builtin_template(TemplateKind::document);
    RenderedPrompt out;
    out.text = t.task_explaining + "\n" + t.rules;
    out.attachments.push_back(
        {AttachmentRole::document, std::nullopt, std::move(document_bytes), "application/pdf"});
    return out;
}

/// Pick one uniformly random exemplar per class (manifest class order drives
/// the draw order, so a seed fully determines the outcome). The evaluation
/// pool is everything that was not chosen.
inline ExemplarDraw sample_exemplars(const ImageCorpus& corpus, std::uint64_t seed) {
    ExemplarDraw draw;
    draw.exemplars.seed = seed;
    Rng rng(seed);
    for (std::size_t ci = 0; ci < corpus.class_labels.size(); ++ci) {
        const auto& group = corpus.by_class[ci];
        if (group.empty()) throw EmptyClass(corpus.class_labels[ci]);
        const std::size_t pick = static_cast<std::size_t>(rng.below(group.size()));
        draw.exemplars.exemplars.emplace_back(corpus.class_labels[ci], group[pick]);
        for (std::size_t i = 0; i < group.size(); ++i)
            if (i != pick) draw.evaluation_pool.push_back(group[i]);
        if (group.size() == 1) draw.exhausted_classes.push_back(corpus.class_labels[ci]);
    }
    return draw;
}

}  // namespace multisurf
