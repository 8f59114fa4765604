#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "multisurf/errors.hpp"
#include "multisurf/image_corpus.hpp"
#include "multisurf/manifest.hpp"
#include "multisurf/metrics.hpp"
#include "multisurf/model_backend.hpp"
#include "multisurf/prompt.hpp"
#include "multisurf/response_parse.hpp"

namespace multisurf {

struct Prediction {
    std::string sample_id;
    std::string truth;
    ParsedLabel parsed;
    bool correct = false;
};

struct Trial {
    std::uint32_t trial_index = 0;
    std::uint64_t seed = 0;
    std::vector<Prediction> predictions;
    double accuracy = 0.0;
};

struct EvaluationReport {
    std::string dataset_id;
    std::string task;
    ShotVariant strategy = ShotVariant::zero_shot;
    std::uint64_t base_seed = 0;
    std::string model_id;
    BackendKind backend = BackendKind::replay;
    std::string template_version;
    std::vector<Trial> trials;
    double mean_accuracy = 0.0;
    double compliant_fraction = 0.0;  // share of outcome == exact
    ConfusionMatrix confusion;        // aggregated over labeled predictions
    /// off_class answers carry no predicted label, so they cannot enter the
    /// square matrix; they are tallied here per truth class instead.
    std::vector<std::uint64_t> off_class_by_truth;
};

/// delta is expressed in percentage points (one_shot - zero_shot).
struct StrategyDelta {
    double zero_shot_accuracy = 0.0;
    double one_shot_accuracy = 0.0;
    double delta_points = 0.0;

    std::string formatted() const { return format_signed(delta_points, 2); }
};

/// Fraction of predictions whose parsed label equals the truth; off_class
/// answers count as incorrect.
inline double compute_accuracy(const std::vector<std::pair<std::string, ParsedLabel>>& predictions) {
    if (predictions.empty()) throw EmptyPredictionList();
    std::size_t correct = 0;
    for (const auto& [truth, parsed] : predictions)
        if (parsed.label && *parsed.label == truth) ++correct;
    return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

inline StrategyDelta compare_strategies(const EvaluationReport& zero_report,
                                        const EvaluationReport& one_report) {
    if (zero_report.dataset_id != one_report.dataset_id || zero_report.task != one_report.task)
        throw DatasetMismatch(zero_report.dataset_id + "/" + zero_report.task,
                              one_report.dataset_id + "/" + one_report.task);
    StrategyDelta d;
    d.zero_shot_accuracy = zero_report.mean_accuracy;
    d.one_shot_accuracy = one_report.mean_accuracy;
    d.delta_points = (d.one_shot_accuracy - d.zero_shot_accuracy) * 100.0;
    return d;
}

namespace detail {

/// Evaluate one list of query images; slot-indexed so concurrent completion
/// order cannot change the result.
inline std::vector<Prediction> evaluate_images(const std::vector<const ImageSample*>& queries,
                                               const DatasetManifest& manifest,
                                               const ExemplarSet* exemplars, Backend& backend,
                                               const std::string& model_id, int concurrency,
                                               std::vector<std::string>& misses) {
    std::vector<Prediction> predictions(queries.size());
    std::vector<std::string> miss_slots(queries.size());

    auto evaluate_one = [&](std::size_t i) {
        ModelRequest request;
        request.model_id = model_id;
        request.prompt = render_image_prompt(std::string(modality_display_name(manifest.modality)),
                                             manifest.class_labels, *queries[i], exemplars);
        try {
            const ModelResponse response = backend.send(request);
            Prediction p;
            p.sample_id = queries[i]->sample_id;
            p.truth = queries[i]->class_label;
            p.parsed = parse_class_label(response.text, manifest.class_labels);
            p.correct = p.parsed.label && *p.parsed.label == p.truth;
            predictions[i] = std::move(p);
        } catch (const CacheMiss& miss) {
            miss_slots[i] = miss.digest;
        }
    };

    if (concurrency <= 1) {
        for (std::size_t i = 0; i < queries.size(); ++i) evaluate_one(i);
    } else {
        std::vector<std::thread> workers;
        std::atomic<std::size_t> next{0};
        const int n_workers = std::min<int>(concurrency, static_cast<int>(queries.size()));
        for (int w = 0; w < n_workers; ++w) {
            workers.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= queries.size()) return;
                    evaluate_one(i);
                }
            });
        }
        for (auto& t : workers) t.join();
    }

    for (auto& m : miss_slots)
        if (!m.empty()) misses.push_back(std::move(m));
    return predictions;
}

}  // namespace detail

/// Run `n_trials` recognition trials over an image dataset. Trial i uses seed
/// base_seed + i; one-shot trials draw exemplars with that seed and evaluate
/// the remaining pool, zero-shot trials evaluate the whole corpus. A trial
/// that hits replay-cache misses aborts the run with the missing digest list.
inline EvaluationReport run_recognition_experiment(const DatasetManifest& manifest,
                                                   ShotVariant strategy, Backend& backend,
                                                   const std::string& model_id, int n_trials,
                                                   std::uint64_t base_seed, int concurrency = 1) {
    if (!is_image_modality(manifest.modality))
        throw Error("run_recognition_experiment needs an image modality; radar tables go through "
                    "the local classifier");
    if (n_trials < 1) throw Error("n_trials must be >= 1");

    const ImageCorpus corpus = load_image_corpus(manifest).corpus;

    EvaluationReport report;
    report.dataset_id = manifest.dataset_id;
    report.task = manifest.task;
    report.strategy = strategy;
    report.base_seed = base_seed;
    report.model_id = model_id;
    report.backend = backend.kind();
    report.template_version = std::string(kTemplateVersion);
    report.confusion = ConfusionMatrix(manifest.class_labels);
    report.off_class_by_truth.assign(manifest.class_labels.size(), 0);

    std::size_t exact_count = 0, total_count = 0;
    for (int i = 0; i < n_trials; ++i) {
        const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(i);
        Trial trial;
        trial.trial_index = static_cast<std::uint32_t>(i);
        trial.seed = seed;

        std::vector<std::string> misses;
        if (strategy == ShotVariant::one_shot) {
            const ExemplarDraw draw = sample_exemplars(corpus, seed);
            std::vector<const ImageSample*> queries;
            queries.reserve(draw.evaluation_pool.size());
            for (const auto& s : draw.evaluation_pool) queries.push_back(&s);
            trial.predictions = detail::evaluate_images(queries, manifest, &draw.exemplars,
                                                        backend, model_id, concurrency, misses);
        } else {
            trial.predictions = detail::evaluate_images(corpus.all_samples(), manifest, nullptr,
                                                        backend, model_id, concurrency, misses);
        }
        if (!misses.empty()) throw ReplayMisses(std::move(misses));
        if (trial.predictions.empty()) throw EmptyPredictionList();

        std::size_t correct = 0;
        for (const auto& p : trial.predictions) {
            const auto truth = static_cast<std::size_t>(manifest.label_index(p.truth));
            if (p.parsed.label) {
                report.confusion.add(truth,
                                     static_cast<std::size_t>(manifest.label_index(*p.parsed.label)));
            } else {
                ++report.off_class_by_truth[truth];
            }
            exact_count += p.parsed.outcome == ParseOutcome::exact;
            correct += p.correct;
            ++total_count;
        }
        trial.accuracy =
            static_cast<double>(correct) / static_cast<double>(trial.predictions.size());
        report.trials.push_back(std::move(trial));
    }

    double sum = 0.0;
    for (const auto& t : report.trials) sum += t.accuracy;
    report.mean_accuracy = sum / static_cast<double>(report.trials.size());
    report.compliant_fraction =
        total_count == 0 ? 0.0 : static_cast<double>(exact_count) / static_cast<double>(total_count);
    return report;
}

// ---- report serialization ----

inline nlohmann::json report_to_json(const EvaluationReport& r) {
    nlohmann::json j;
    j["dataset_id"] = r.dataset_id;
    j["task"] = r.task;
    j["strategy"] = {{"variant", std::string(to_string(r.strategy))}, {"base_seed", r.base_seed}};
    j["model_id"] = r.model_id;
    j["backend"] = std::string(to_string(r.backend));
    j["template_version"] = r.template_version;
    j["mean_accuracy"] = r.mean_accuracy;
    j["compliant_fraction"] = r.compliant_fraction;
    nlohmann::json confusion = r.confusion.to_json();
    confusion["off_class_by_truth"] = r.off_class_by_truth;
    j["confusion"] = confusion;
    j["trials"] = nlohmann::json::array();
    for (const auto& t : r.trials) {
        nlohmann::json tj;
        tj["trial_index"] = t.trial_index;
        tj["seed"] = t.seed;
        tj["accuracy"] = t.accuracy;
        tj["predictions"] = nlohmann::json::array();
        for (const auto& p : t.predictions) {
            nlohmann::json pj;
            pj["sample_id"] = p.sample_id;
            pj["truth"] = p.truth;
            pj["predicted"] = p.parsed.label ? nlohmann::json(*p.parsed.label) : nlohmann::json();
            pj["outcome"] = std::string(to_string(p.parsed.outcome));
            pj["raw_text"] = p.parsed.raw_text;
            pj["correct"] = p.correct;
            tj["predictions"].push_back(std::move(pj));
        }
        j["trials"].push_back(std::move(tj));
    }
    return j;
}

inline EvaluationReport report_from_json(const nlohmann::json& j) {
    EvaluationReport r;
    r.dataset_id = j.at("dataset_id").get<std::string>();
    r.task = j.at("task").get<std::string>();
    r.strategy = j.at("strategy").at("variant").get<std::string>() == "one_shot"
                     ? ShotVariant::one_shot
                     : ShotVariant::zero_shot;
    r.base_seed = j.at("strategy").at("base_seed").get<std::uint64_t>();
    r.model_id = j.at("model_id").get<std::string>();
    r.backend = j.at("backend").get<std::string>() == "live" ? BackendKind::live
                                                             : BackendKind::replay;
    r.template_version = j.at("template_version").get<std::string>();
    r.mean_accuracy = j.at("mean_accuracy").get<double>();
    r.compliant_fraction = j.at("compliant_fraction").get<double>();
    r.confusion = ConfusionMatrix::from_json(j.at("confusion"));
    r.off_class_by_truth = j.at("confusion").at("off_class_by_truth").get<std::vector<std::uint64_t>>();
    for (const auto& tj : j.at("trials")) {
        Trial t;
        t.trial_index = tj.at("trial_index").get<std::uint32_t>();
        t.seed = tj.at("seed").get<std::uint64_t>();
        t.accuracy = tj.at("accuracy").get<double>();
        for (const auto& pj : tj.at("predictions")) {
            Prediction p;
            p.sample_id = pj.at("sample_id").get<std::string>();
            p.truth = pj.at("truth").get<std::string>();
            if (!pj.at("predicted").is_null()) p.parsed.label = pj.at("predicted").get<std::string>();
            const std::string outcome = pj.at("outcome").get<std::string>();
            p.parsed.outcome = outcome == "exact"      ? ParseOutcome::exact
                               : outcome == "salvaged" ? ParseOutcome::salvaged
                                                       : ParseOutcome::off_class;
            p.parsed.raw_text = pj.at("raw_text").get<std::string>();
            p.correct = pj.at("correct").get<bool>();
            t.predictions.push_back(std::move(p));
        }
        r.trials.push_back(std::move(t));
    }
    return r;
}

/// Write the report JSON (and optionally a per-sample CSV). Re-emitting an
/// unchanged report produces identical bytes.
inline void emit_report(const EvaluationReport& report, const std::filesystem::path& json_path,
                        const std::optional<std::filesystem::path>& csv_path = std::nullopt) {
    {
        std::ofstream out(json_path, std::ios::binary | std::ios::trunc);
        if (!out) throw WriteFailure(json_path.string());
        out << report_to_json(report).dump(2) << '\n';
    }
    if (csv_path) {
        std::ofstream out(*csv_path, std::ios::binary | std::ios::trunc);
        if (!out) throw WriteFailure(csv_path->string());
        out << "trial_index,seed,sample_id,truth,predicted,outcome,correct\n";
        for (const auto& t : report.trials)
            for (const auto& p : t.predictions)
                out << t.trial_index << ',' << t.seed << ',' << p.sample_id << ',' << p.truth << ','
                    << (p.parsed.label ? *p.parsed.label : "") << ','
                    << to_string(p.parsed.outcome) << ',' << (p.correct ? "true" : "false") << '\n';
    }
}

inline EvaluationReport load_report(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileUnreadable(path.string());
    nlohmann::json j;
    in >> j;
    return report_from_json(j);
}

}  // namespace multisurf
