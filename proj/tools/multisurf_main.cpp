#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "multisurf/live_backend.hpp"
#include "multisurf/multisurf.hpp"

using namespace multisurf;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOperational = 1;
constexpr int kExitUsage = 2;

/// File-level defaults; every field can be overridden by a flag.
struct AppConfig {
    std::string endpoint_url;
    std::string model_id = "gpt-4o";
    std::string backend_mode = "replay";
    std::string cache_path;
    std::uint64_t seed = 42;
    int trials = 5;
    int concurrency = 4;
};

AppConfig load_app_config(const std::string& path) {
    AppConfig cfg;
    if (path.empty()) return cfg;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileUnreadable(path);
    nlohmann::json j;
    in >> j;
    if (j.contains("endpoint_url")) cfg.endpoint_url = j["endpoint_url"].get<std::string>();
    if (j.contains("model_id")) cfg.model_id = j["model_id"].get<std::string>();
    if (j.contains("backend_mode")) cfg.backend_mode = j["backend_mode"].get<std::string>();
    if (j.contains("cache_path")) cfg.cache_path = j["cache_path"].get<std::string>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("trials")) cfg.trials = j["trials"].get<int>();
    if (j.contains("concurrency")) cfg.concurrency = j["concurrency"].get<int>();
    return cfg;
}

BackendConfig make_backend_config(const AppConfig& app) {
    const auto mode = backend_mode_from_string(app.backend_mode);
    if (!mode) throw Error("unknown backend mode '" + app.backend_mode + "'");
    BackendConfig cfg;
    cfg.mode = *mode;
    cfg.endpoint_url = app.endpoint_url;
    cfg.cache_path = app.cache_path;
    cfg.max_in_flight = app.concurrency;
    if (cfg.mode != BackendMode::replay && cfg.endpoint_url.empty())
        throw Error("live/record mode needs --endpoint (or endpoint_url in the config file)");
    if (cfg.mode != BackendMode::live && cfg.cache_path.empty())
        throw Error("replay/record mode needs --cache");
    return cfg;
}

ScenarioPosture parse_posture(const std::string& s) {
    if (s == "face-up") return ScenarioPosture::face_up;
    if (s == "face-down") return ScenarioPosture::face_down;
    return ScenarioPosture::unknown;
}

// ---- subcommand bodies ----

int run_validate(const std::string& manifest_path) {
    const DatasetManifest manifest = load_manifest(manifest_path);
    const ValidationReport report = validate_dataset(manifest);
    for (const auto& issue : report.issues)
        std::cout << (issue.severity == Severity::error ? "error: " : "warning: ")
                  << issue.message << "\n";
    std::cout << report.issues.size() << " issues (" << report.error_count() << " errors, "
              << report.warning_count() << " warnings)\n";
    return report.loadable() ? kExitOk : kExitOperational;
}

int run_recognition(const AppConfig& app, const std::string& manifest_path,
                    const std::string& strategy_name, const std::string& out_path,
                    const std::string& csv_path) {
    const DatasetManifest manifest = load_manifest(manifest_path);
    const ShotVariant strategy =
        strategy_name == "one-shot" ? ShotVariant::one_shot : ShotVariant::zero_shot;

    const auto backend = make_backend(make_backend_config(app));
    const EvaluationReport report = run_recognition_experiment(
        manifest, strategy, *backend, app.model_id, app.trials, app.seed, app.concurrency);

    if (!out_path.empty())
        emit_report(report, out_path,
                    csv_path.empty() ? std::nullopt
                                     : std::optional<std::filesystem::path>(csv_path));

    std::cout << "dataset " << report.dataset_id << " task " << report.task << " strategy "
              << to_string(report.strategy) << "\n";
    for (const auto& t : report.trials)
        std::cout << "  trial " << t.trial_index << " seed " << t.seed << " accuracy "
                  << format_fixed(t.accuracy, 4) << " (" << t.predictions.size() << " samples)\n";
    std::cout << "mean accuracy " << format_fixed(report.mean_accuracy, 4)
              << ", compliant fraction " << format_fixed(report.compliant_fraction, 4) << "\n";
    if (!out_path.empty()) std::cout << "report written to " << out_path << "\n";
    return kExitOk;
}

int run_train_radar(const AppConfig& app, const std::string& manifest_path,
                    const std::string& algorithm_name, double split_fraction,
                    const std::string& out_path, const std::string& model_out_path) {
    const DatasetManifest manifest = load_manifest(manifest_path);
    if (manifest.modality != Modality::radar_csv)
        throw Error("train-radar needs a radar_csv dataset");
    const RadarTable table = load_radar_table(manifest);

    TrainConfig config;
    const auto algorithm = algorithm_from_string(algorithm_name);
    if (!algorithm) throw Error("unknown algorithm '" + algorithm_name + "' (rf or svm)");
    config.algorithm = *algorithm;
    config.seed = app.seed;
    config.split_fraction = split_fraction;

    RadarModel model;
    const HoldoutResult result = evaluate_holdout(table, config, &model);

    std::cout << "algorithm " << to_string(config.algorithm) << " seed " << config.seed
              << " split " << format_fixed(split_fraction, 2) << "\n";
    std::cout << "train rows " << result.split.train.size() << ", test rows "
              << result.split.test.size() << "\n";
    std::cout << "holdout accuracy " << format_fixed(result.accuracy, 4) << "\n";

    if (!out_path.empty()) {
        nlohmann::json j = result.to_json();
        j["algorithm"] = std::string(to_string(config.algorithm));
        j["seed"] = config.seed;
        j["split_fraction"] = config.split_fraction;
        j["dataset_id"] = manifest.dataset_id;
        j["task"] = manifest.task;
        std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
        if (!out) throw WriteFailure(out_path);
        out << j.dump(2) << '\n';
        std::cout << "holdout result written to " << out_path << "\n";
    }
    if (!model_out_path.empty()) {
        std::ofstream out(model_out_path, std::ios::binary | std::ios::trunc);
        if (!out) throw WriteFailure(model_out_path);
        out << model.to_json().dump(2) << '\n';
        std::cout << "model written to " << model_out_path << "\n";
    }
    return kExitOk;
}

int run_compare(const std::string& zero_path, const std::string& one_path,
                const std::string& out_path) {
    const EvaluationReport zero = load_report(zero_path);
    const EvaluationReport one = load_report(one_path);
    const StrategyDelta delta = compare_strategies(zero, one);
    std::cout << "zero-shot " << format_fixed(delta.zero_shot_accuracy, 4) << ", one-shot "
              << format_fixed(delta.one_shot_accuracy, 4) << ", delta " << delta.formatted()
              << " points\n";
    if (!out_path.empty()) {
        nlohmann::json j;
        j["zero_shot_accuracy"] = delta.zero_shot_accuracy;
        j["one_shot_accuracy"] = delta.one_shot_accuracy;
        j["delta_points"] = delta.delta_points;
        j["formatted"] = delta.formatted();
        std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
        if (!out) throw WriteFailure(out_path);
        out << j.dump(2) << '\n';
    }
    return kExitOk;
}

int run_extract_profile(const AppConfig& app, const std::string& document_path,
                        const std::string& name, const std::string& profiles_out) {
    std::ifstream in(document_path, std::ios::binary);
    if (!in) throw FileUnreadable(document_path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    const auto backend = make_backend(make_backend_config(app));
    const MethodProfile profile = extract_method_profile(bytes, *backend, app.model_id, name);

    std::cout << "method " << profile.method_name << "\n";
    std::cout << "equipment: " << profile.equipment << "\n";
    std::cout << "posture: " << to_string(profile.posture_requirement) << "\n";
    std::cout << "hardware: " << to_string(profile.hardware) << "\n";
    std::cout << "method: " << profile.method_sentence << "\n";
    std::cout << "usage: " << profile.usage_sentence << "\n";

    if (!profiles_out.empty()) {
        std::vector<MethodProfile> store;
        if (std::filesystem::exists(profiles_out)) store = load_profiles(profiles_out);
        for (const auto& existing : store)
            if (existing.method_name == profile.method_name)
                throw Error("profile store already has a method named '" + profile.method_name + "'");
        store.push_back(profile);
        save_profiles(profiles_out, store);
        std::cout << "profile appended to " << profiles_out << "\n";
    }
    return kExitOk;
}

int run_recommend(const AppConfig& app, const std::string& profiles_path,
                  const std::string& posture, const std::string& hardware,
                  const std::string& activity, const std::string& location,
                  const std::string& time_of_day, const std::string& out_path, bool rewrite) {
    const std::vector<MethodProfile> profiles =
        profiles_path.empty() ? builtin_profiles() : load_profiles(profiles_path);

    ScenarioQuery scenario;
    scenario.activity_description = activity;
    scenario.posture = parse_posture(posture);
    scenario.available_hardware = hardware == "specialized-kit"
                                      ? HardwareAvailable::specialized_kit
                                      : HardwareAvailable::consumer_smartphone;
    if (!location.empty()) scenario.location = location;
    if (!time_of_day.empty()) scenario.time_of_day = time_of_day;

    Recommendation rec = rank_methods(scenario, profiles);
    if (rewrite) {
        const auto backend = make_backend(make_backend_config(app));
        rec.rationale = compose_rationale(rec, backend.get(), app.model_id);
    } else {
        rec.rationale = compose_rationale(rec);
    }

    for (std::size_t i = 0; i < rec.ranked.size(); ++i) {
        const auto& rm = rec.ranked[i];
        std::cout << (i + 1) << ". " << rm.method_name << "  score "
                  << format_fixed(rm.score, 2) << "  " << to_string(rm.verdict.verdict);
        if (rm.verdict.aspect) std::cout << " [" << to_string(*rm.verdict.aspect) << " aspect]";
        std::cout << "\n";
    }
    std::cout << "\n" << rec.rationale;

    if (!out_path.empty()) {
        nlohmann::json j;
        j["scenario"] = {{"activity", scenario.activity_description},
                         {"posture", std::string(to_string(scenario.posture))},
                         {"hardware", std::string(to_string(scenario.available_hardware))}};
        if (scenario.location) j["scenario"]["location"] = *scenario.location;
        if (scenario.time_of_day) j["scenario"]["time"] = *scenario.time_of_day;
        j["ranked"] = nlohmann::json::array();
        for (const auto& rm : rec.ranked) {
            nlohmann::json rj;
            rj["method_name"] = rm.method_name;
            rj["score"] = rm.score;
            rj["verdict"] = std::string(to_string(rm.verdict.verdict));
            if (rm.verdict.aspect) rj["aspect"] = std::string(to_string(*rm.verdict.aspect));
            rj["explanation"] = rm.verdict.explanation;
            j["ranked"].push_back(std::move(rj));
        }
        j["rationale"] = rec.rationale;
        std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
        if (!out) throw WriteFailure(out_path);
        out << j.dump(2) << '\n';
    }
    return kExitOk;
}

// cache admin works on raw lines so that verify can diagnose what load rejects
struct RawCacheLine {
    std::size_t line_no;
    nlohmann::json json;
};

std::vector<RawCacheLine> read_cache_lines(const std::string& path, bool strict) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileUnreadable(path);
    std::vector<RawCacheLine> lines;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            lines.push_back({line_no, nlohmann::json::parse(line)});
        } catch (const nlohmann::json::exception& e) {
            if (strict) throw CorruptCacheLine(line_no, e.what());
        }
    }
    return lines;
}

int run_cache_ls(const std::string& path) {
    const ReplayCache cache = ReplayCache::load(path);
    for (const auto& digest : cache.digests()) {
        const CacheEntry& e = cache.at(digest);
        std::cout << digest << "  " << e.model_id << "  " << e.recorded_at << "\n";
    }
    std::cout << cache.size() << " entries\n";
    return kExitOk;
}

int run_cache_verify(const std::string& path) {
    std::size_t mismatches = 0, entries = 0;
    std::map<std::string, std::string> seen;  // digest -> text
    std::vector<RawCacheLine> lines;
    try {
        lines = read_cache_lines(path, /*strict=*/true);
    } catch (const CorruptCacheLine& e) {
        std::cout << e.what() << "\n";
        return kExitOperational;
    }
    for (const auto& raw : lines) {
        const auto& j = raw.json;
        if (!j.is_object() || !j.contains("digest") || !j.contains("model_id") ||
            !j.contains("text") || !j.contains("recorded_at")) {
            std::cout << "corrupt cache line " << raw.line_no << ": missing required field\n";
            ++mismatches;
            continue;
        }
        const std::string digest = j["digest"].get<std::string>();
        if (!detail::is_hex64(digest)) {
            std::cout << "corrupt cache line " << raw.line_no << ": digest is not 64 hex chars\n";
            ++mismatches;
            continue;
        }
        ++entries;
        const std::string text = j["text"].get<std::string>();
        auto [it, inserted] = seen.emplace(digest, text);
        if (!inserted && it->second != text) {
            std::cout << "mismatch at line " << raw.line_no << ": digest " << digest
                      << " recorded with conflicting text\n";
            ++mismatches;
        }
    }
    std::cout << entries << " entries, " << mismatches << " mismatches\n";
    return mismatches == 0 ? kExitOk : kExitOperational;
}

int run_cache_prune(const std::string& path, const std::string& model_id) {
    const std::vector<RawCacheLine> lines = read_cache_lines(path, /*strict=*/true);
    std::vector<std::string> kept;
    std::size_t removed = 0;
    for (const auto& raw : lines) {
        if (raw.json.is_object() && raw.json.contains("model_id") &&
            raw.json["model_id"] == model_id) {
            ++removed;
            continue;
        }
        kept.push_back(raw.json.dump());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw WriteFailure(path);
    for (const auto& line : kept) out << line << '\n';
    std::cout << "removed " << removed << " entries, kept " << kept.size() << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multisurf: multimodal surface sensing recognition and reasoning pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "JSON config file with defaults");

    // shared backend/model flags, attached per subcommand where relevant
    std::string endpoint, model_id, backend_mode, cache_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int trials = 0, concurrency = 0;

    auto add_backend_flags = [&](CLI::App* cmd) {
        cmd->add_option("--endpoint", endpoint, "chat-completion endpoint URL (live/record)");
        cmd->add_option("--model-id", model_id, "hosted model identifier");
        cmd->add_option("--backend", backend_mode, "live | replay | record")
            ->check(CLI::IsMember({"live", "replay", "record"}));
        cmd->add_option("--cache", cache_path, "replay cache file (JSON lines)");
    };

    // validate
    std::string manifest_path;
    auto* validate = app.add_subcommand("validate", "check a dataset against its manifest");
    validate->add_option("--manifest", manifest_path, "dataset manifest JSON")->required();

    // run-recognition
    std::string strategy = "zero-shot", out_path, csv_path;
    auto* recognition =
        app.add_subcommand("run-recognition", "run a recognition experiment over an image dataset");
    recognition->add_option("--manifest", manifest_path, "dataset manifest JSON")->required();
    recognition->add_option("--strategy", strategy, "zero-shot | one-shot")
        ->check(CLI::IsMember({"zero-shot", "one-shot"}))
        ->required();
    recognition->add_option("--trials", trials, "number of repeated trials");
    recognition->add_option("--seed", seed, "base seed; trial i uses seed+i")
        ->each([&](const std::string&) { seed_set = true; });
    recognition->add_option("--out", out_path, "report JSON destination");
    recognition->add_option("--csv", csv_path, "optional per-sample CSV destination");
    recognition->add_option("--concurrency", concurrency, "in-flight request cap");
    add_backend_flags(recognition);

    // train-radar
    std::string algorithm = "rf", model_out;
    double split_fraction = 0.8;
    auto* train = app.add_subcommand("train-radar", "train and score the local radar classifier");
    train->add_option("--manifest", manifest_path, "dataset manifest JSON")->required();
    train->add_option("--algorithm", algorithm, "rf | svm")
        ->check(CLI::IsMember({"rf", "svm", "random_forest", "linear_svm"}));
    train->add_option("--seed", seed, "split/training seed")
        ->each([&](const std::string&) { seed_set = true; });
    train->add_option("--split", split_fraction, "train fraction in (0,1)");
    train->add_option("--out", out_path, "holdout result JSON destination");
    train->add_option("--model-out", model_out, "trained model JSON destination");

    // compare
    std::string zero_path, one_path;
    auto* compare = app.add_subcommand("compare", "compare zero-shot and one-shot reports");
    compare->add_option("--zero", zero_path, "zero-shot report JSON")->required();
    compare->add_option("--one", one_path, "one-shot report JSON")->required();
    compare->add_option("--out", out_path, "delta JSON destination");

    // extract-profile
    std::string document_path, profile_name, profiles_out;
    auto* extract =
        app.add_subcommand("extract-profile", "extract a method profile from a description paper");
    extract->add_option("--document", document_path, "description document (e.g. PDF)")->required();
    extract->add_option("--name", profile_name, "method name for the stored profile")->required();
    extract->add_option("--profiles-out", profiles_out, "profile store JSON to append to");
    add_backend_flags(extract);

    // recommend
    std::string profiles_path, posture, hardware, activity, location, time_of_day;
    bool rewrite = false;
    auto* recommend =
        app.add_subcommand("recommend", "rank sensing methods for a scenario");
    recommend->add_option("--profiles", profiles_path,
                          "profile store JSON (defaults to the bundled profiles)");
    recommend->add_option("--scenario-posture", posture, "face-up | face-down | unknown")
        ->check(CLI::IsMember({"face-up", "face-down", "unknown"}))
        ->required();
    recommend->add_option("--hardware", hardware, "consumer | specialized-kit")
        ->check(CLI::IsMember({"consumer", "specialized-kit"}))
        ->required();
    recommend->add_option("--activity", activity, "free-text activity description");
    recommend->add_option("--location", location, "location note (rationale only)");
    recommend->add_option("--time", time_of_day, "time note (rationale only)");
    recommend->add_option("--out", out_path, "recommendation JSON destination");
    recommend->add_flag("--rewrite", rewrite, "rewrite the rationale through the backend");
    add_backend_flags(recommend);

    // cache admin
    auto* cache = app.add_subcommand("cache", "inspect or maintain a replay cache");
    cache->require_subcommand(1);
    std::string admin_cache_path, prune_model_id;
    auto* cache_ls = cache->add_subcommand("ls", "list cached digests");
    cache_ls->add_option("--cache", admin_cache_path, "cache file")->required();
    auto* cache_verify = cache->add_subcommand("verify", "check cache integrity");
    cache_verify->add_option("--cache", admin_cache_path, "cache file")->required();
    auto* cache_prune = cache->add_subcommand("prune", "drop entries for one model id");
    cache_prune->add_option("--cache", admin_cache_path, "cache file")->required();
    cache_prune->add_option("--model-id", prune_model_id, "model id to drop")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        AppConfig cfg = load_app_config(config_path);
        if (!endpoint.empty()) cfg.endpoint_url = endpoint;
        if (!model_id.empty()) cfg.model_id = model_id;
        if (!backend_mode.empty()) cfg.backend_mode = backend_mode;
        if (!cache_path.empty()) cfg.cache_path = cache_path;
        if (seed_set) cfg.seed = seed;
        if (trials > 0) cfg.trials = trials;
        if (concurrency > 0) cfg.concurrency = concurrency;

        if (*validate) return run_validate(manifest_path);
        if (*recognition) return run_recognition(cfg, manifest_path, strategy, out_path, csv_path);
        if (*train) return run_train_radar(cfg, manifest_path, algorithm, split_fraction, out_path,
                                           model_out);
        if (*compare) return run_compare(zero_path, one_path, out_path);
        if (*extract) return run_extract_profile(cfg, document_path, profile_name, profiles_out);
        if (*recommend)
            return run_recommend(cfg, profiles_path, posture, hardware, activity, location,
                                 time_of_day, out_path, rewrite);
        if (*cache_ls) return run_cache_ls(admin_cache_path);
        if (*cache_verify) return run_cache_verify(admin_cache_path);
        if (*cache_prune) return run_cache_prune(admin_cache_path, prune_model_id);
    } catch (const ReplayMisses& e) {
        std::cerr << "error: " << e.what() << "\n";
        for (const auto& digest : e.digests) std::cerr << "  missing digest " << digest << "\n";
        std::cerr << "record these requests first (backend mode 'record')\n";
        return kExitOperational;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitOperational;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitOperational;
    }
    return kExitUsage;
}
