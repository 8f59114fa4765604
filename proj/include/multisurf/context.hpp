#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "multisurf/errors.hpp"
#include "multisurf/model_backend.hpp"
#include "multisurf/prompt.hpp"
#include "multisurf/response_parse.hpp"
#include "multisurf/strings.hpp"

namespace multisurf {

enum class Posture { face_up, face_down, none };
enum class ScenarioPosture { face_up, face_down, unknown };
enum class HardwareClass { consumer_smartphone, specialized };
enum class HardwareAvailable { consumer_smartphone, specialized_kit };
enum class AccuracyClass { moderate, high, unknown };
enum class ProfileSource { fixture, extracted };

inline std::string_view to_string(Posture p) {
    switch (p) {
        case Posture::face_up: return "face_up";
        case Posture::face_down: return "face_down";
        case Posture::none: return "none";
    }
    return "?";
}

inline std::string_view to_string(ScenarioPosture p) {
    switch (p) {
        case ScenarioPosture::face_up: return "face_up";
        case ScenarioPosture::face_down: return "face_down";
        case ScenarioPosture::unknown: return "unknown";
    }
    return "?";
}

inline std::string_view to_string(HardwareClass h) {
    return h == HardwareClass::consumer_smartphone ? "consumer_smartphone" : "specialized";
}

inline std::string_view to_string(HardwareAvailable h) {
    return h == HardwareAvailable::consumer_smartphone ? "consumer_smartphone" : "specialized_kit";
}

inline std::string_view to_string(AccuracyClass a) {
    switch (a) {
        case AccuracyClass::moderate: return "moderate";
        case AccuracyClass::high: return "high";
        case AccuracyClass::unknown: return "unknown";
    }
    return "?";
}

inline std::string_view to_string(ProfileSource s) {
    return s == ProfileSource::fixture ? "fixture" : "extracted";
}

/// Structured summary of one sensing method, from a bundled fixture or
/// extracted out of the method's description paper.
struct MethodProfile {
    std::string method_name;
    std::string equipment;
    Posture posture_requirement = Posture::none;
    HardwareClass hardware = HardwareClass::consumer_smartphone;
    AccuracyClass accuracy_class = AccuracyClass::unknown;
    std::string method_sentence;
    std::string usage_sentence;
    ProfileSource source = ProfileSource::fixture;
    std::string raw_response;  // retained for extracted profiles
};

/// The four context aspects; only activity (posture) and identity (hardware)
/// carry built-in constraint rules. Location and time notes surface in the
/// rationale when supplied.
struct ScenarioQuery {
    std::string activity_description;
    ScenarioPosture posture = ScenarioPosture::unknown;
    HardwareAvailable available_hardware = HardwareAvailable::consumer_smartphone;
    std::optional<std::string> location;
    std::optional<std::string> time_of_day;
};

enum class Verdict { compatible, posture_conflict, hardware_unavailable };
enum class Aspect { location, activity, time, identity };

inline std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::compatible: return "compatible";
        case Verdict::posture_conflict: return "posture_conflict";
        case Verdict::hardware_unavailable: return "hardware_unavailable";
    }
    return "?";
}

inline std::string_view to_string(Aspect a) {
    switch (a) {
        case Aspect::location: return "location";
        case Aspect::activity: return "activity";
        case Aspect::time: return "time";
        case Aspect::identity: return "identity";
    }
    return "?";
}

struct ConstraintVerdict {
    std::string method_name;
    Verdict verdict = Verdict::compatible;
    std::optional<Aspect> aspect;  // set whenever the verdict is a conflict
    std::string explanation;
};

struct RankedMethod {
    std::string method_name;
    double score = 0.0;
    ConstraintVerdict verdict;
};

struct Recommendation {
    std::vector<RankedMethod> ranked;
    std::string rationale;
    ScenarioQuery scenario;
};

struct RankWeights {
    double constraint = 0.5;
    double accuracy = 0.3;
    double convenience = 0.2;
};

/// Hardware rules out a method before posture does; an unknown scenario
/// posture never conflicts.
inline ConstraintVerdict check_constraints(const MethodProfile& profile,
                                           const ScenarioQuery& scenario) {
    ConstraintVerdict v;
    v.method_name = profile.method_name;

    if (profile.hardware == HardwareClass::specialized &&
        scenario.available_hardware == HardwareAvailable::consumer_smartphone) {
        v.verdict = Verdict::hardware_unavailable;
        v.aspect = Aspect::identity;
        v.explanation = profile.method_name + " requires specialized hardware (" +
                        profile.equipment + ") that a consumer smartphone does not provide.";
        return v;
    }

    const bool posture_known = profile.posture_requirement != Posture::none &&
                               scenario.posture != ScenarioPosture::unknown;
    if (posture_known) {
        const bool wants_up = profile.posture_requirement == Posture::face_up;
        const bool scenario_up = scenario.posture == ScenarioPosture::face_up;
        if (wants_up != scenario_up) {
            v.verdict = Verdict::posture_conflict;
            v.aspect = Aspect::activity;
            v.explanation = profile.method_name + " requires the phone " +
                            (wants_up ? "face-up" : "face-down") + " but the scenario posture is " +
                            (scenario_up ? "face-up" : "face-down") + ".";
            return v;
        }
    }

    v.verdict = Verdict::compatible;
    v.explanation = profile.method_name + " violates no posture or hardware constraint.";
    return v;
}

namespace detail {

inline int accuracy_rank(AccuracyClass a) {
    switch (a) {
        case AccuracyClass::high: return 2;
        case AccuracyClass::moderate: return 1;
        case AccuracyClass::unknown: return 0;
    }
    return 0;
}

inline double accuracy_score(AccuracyClass a) {
    switch (a) {
        case AccuracyClass::high: return 1.0;
        case AccuracyClass::moderate: return 0.6;
        case AccuracyClass::unknown: return 0.3;
    }
    return 0.3;
}

/// Measured accuracy (when an evaluation report is available) overrides the
/// profile's coarse accuracy class.
inline AccuracyClass accuracy_class_from_measurement(double accuracy) {
    if (accuracy >= 0.85) return AccuracyClass::high;
    if (accuracy >= 0.55) return AccuracyClass::moderate;
    return AccuracyClass::unknown;
}

}  // namespace detail

/// Rank sensing methods for a scenario. Incompatible methods score 0 and sort
/// strictly below every compatible one; compatible methods get a weighted sum
/// of constraint fitness, accuracy class and a convenience proxy (consumer
/// hardware). Ties break by accuracy class, then method name.
inline Recommendation rank_methods(const ScenarioQuery& scenario,
                                   const std::vector<MethodProfile>& profiles,
                                   const std::map<std::string, double>* measured_accuracy = nullptr,
                                   const RankWeights& weights = {}) {
    if (profiles.empty()) throw EmptyProfileStore();

    struct Entry {
        RankedMethod rm;
        bool compatible;
        int accuracy_rank;
    };
    std::vector<Entry> entries;
    for (const auto& profile : profiles) {
        Entry e;
        e.rm.method_name = profile.method_name;
        e.rm.verdict = check_constraints(profile, scenario);
        e.compatible = e.rm.verdict.verdict == Verdict::compatible;

        AccuracyClass acc = profile.accuracy_class;
        if (measured_accuracy) {
            auto it = measured_accuracy->find(profile.method_name);
            if (it != measured_accuracy->end())
                acc = detail::accuracy_class_from_measurement(it->second);
        }
        e.accuracy_rank = detail::accuracy_rank(acc);
        if (e.compatible) {
            const double convenience =
                profile.hardware == HardwareClass::consumer_smartphone ? 1.0 : 0.0;
            e.rm.score = weights.constraint * 1.0 + weights.accuracy * detail::accuracy_score(acc) +
                         weights.convenience * convenience;
        } else {
            e.rm.score = 0.0;
        }
        entries.push_back(std::move(e));
    }

    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.compatible != b.compatible) return a.compatible;  // hard-constraint dominance
        if (a.rm.score != b.rm.score) return a.rm.score > b.rm.score;
        if (a.accuracy_rank != b.accuracy_rank) return a.accuracy_rank > b.accuracy_rank;
        return a.rm.method_name < b.rm.method_name;
    });

    Recommendation rec;
    rec.scenario = scenario;
    for (auto& e : entries) rec.ranked.push_back(std::move(e.rm));
    return rec;
}

namespace detail {

/// Keyword each verdict must keep through any fluency rewrite.
inline std::string_view verdict_keyword(Verdict v) {
    switch (v) {
        case Verdict::compatible: return "compatible";
        case Verdict::posture_conflict: return "posture";
        case Verdict::hardware_unavailable: return "hardware";
    }
    return "?";
}

inline std::string rationale_template(const Recommendation& rec) {
    std::string text;
    const bool any_compatible =
        !rec.ranked.empty() && rec.ranked.front().verdict.verdict == Verdict::compatible;
    if (any_compatible) {
        text = "Recommended method: " + rec.ranked.front().method_name + " (score " +
               format_fixed(rec.ranked.front().score, 2) + ").\n";
    } else {
        text = "No compatible sensing method for this scenario.\n";
    }
    if (!rec.scenario.activity_description.empty())
        text += "Activity: " + rec.scenario.activity_description + " (posture " +
                std::string(to_string(rec.scenario.posture)) + ").\n";
    else
        text += "Posture: " + std::string(to_string(rec.scenario.posture)) + ".\n";
    text += "Available hardware: " + std::string(to_string(rec.scenario.available_hardware)) + ".\n";
    if (rec.scenario.location) text += "Location: " + *rec.scenario.location + ".\n";
    if (rec.scenario.time_of_day) text += "Time: " + *rec.scenario.time_of_day + ".\n";
    for (const auto& rm : rec.ranked) {
        text += "- " + rm.method_name + ": ";
        switch (rm.verdict.verdict) {
            case Verdict::compatible:
                text += "compatible. ";
                break;
            case Verdict::posture_conflict:
                text += "posture conflict (activity aspect). ";
                break;
            case Verdict::hardware_unavailable:
                text += "hardware unavailable (identity aspect). ";
                break;
        }
        text += rm.verdict.explanation + "\n";
    }
    return text;
}

inline bool rewrite_keeps_facts(const std::string& rewritten, const Recommendation& rec) {
    const std::string folded = casefold(rewritten);
    for (const auto& rm : rec.ranked) {
        if (!contains(folded, casefold(rm.method_name))) return false;
        if (!contains(folded, verdict_keyword(rm.verdict.verdict))) return false;
    }
    return true;
}

}  // namespace detail

/// Deterministic narrative for a recommendation. With a backend, the template
/// may be rewritten for fluency, but every method name and verdict keyword
/// must survive; otherwise (or on any backend error) the template stands.
inline std::string compose_rationale(const Recommendation& rec, Backend* backend = nullptr,
                                     const std::string& model_id = "") {
    const std::string text = detail::rationale_template(rec);
    if (backend == nullptr) return text;
    try {
        ModelRequest request;
        request.model_id = model_id;
        request.prompt.text =
            "Rewrite the following recommendation for fluency. Keep every method name and every "
            "verdict fact unchanged.\n" +
            text;
        const ModelResponse response = backend->send(request);
        if (detail::rewrite_keeps_facts(response.text, rec)) return response.text;
    } catch (const Error&) {
        // fall through to the template
    }
    return text;
}

/// Render the document prompt, query the backend, split the answer, then map
/// the text onto posture/hardware enums with keyword rules.
inline MethodProfile extract_method_profile(const std::string& document_bytes, Backend& backend,
                                            const std::string& model_id,
                                            const std::string& method_name) {
    ModelRequest request;
    request.model_id = model_id;
    request.prompt = render_document_prompt(document_bytes);

    const ModelResponse response = backend.send(request);
    const ProfileFields fields = parse_profile_text(response.text);

    MethodProfile profile;
    profile.method_name = method_name;
    profile.equipment = fields.equipment;
    profile.method_sentence = fields.method_sentence;
    profile.usage_sentence = fields.usage_sentence;
    profile.source = ProfileSource::extracted;
    profile.raw_response = response.text;

    const std::string haystack =
        casefold(fields.equipment + " " + fields.method_sentence + " " + fields.usage_sentence);
    const bool up = contains(haystack, "face-up") || contains(haystack, "face up");
    const bool down = contains(haystack, "face-down") || contains(haystack, "facing down") ||
                      contains(haystack, "face down");
    if (up && !down)
        profile.posture_requirement = Posture::face_up;
    else if (down && !up)
        profile.posture_requirement = Posture::face_down;
    else
        profile.posture_requirement = Posture::none;

    profile.hardware = contains(haystack, "radar") ? HardwareClass::specialized
                                                   : HardwareClass::consumer_smartphone;
    profile.accuracy_class = AccuracyClass::unknown;
    return profile;
}

// ---- profile store ----

inline nlohmann::json profile_to_json(const MethodProfile& p) {
    nlohmann::json j;
    j["method_name"] = p.method_name;
    j["equipment"] = p.equipment;
    j["posture_requirement"] = std::string(to_string(p.posture_requirement));
    j["hardware"] = std::string(to_string(p.hardware));
    j["accuracy_class"] = std::string(to_string(p.accuracy_class));
    j["method_sentence"] = p.method_sentence;
    j["usage_sentence"] = p.usage_sentence;
    j["source"] = std::string(to_string(p.source));
    if (!p.raw_response.empty()) j["raw_response"] = p.raw_response;
    return j;
}

inline MethodProfile profile_from_json(const nlohmann::json& j) {
    MethodProfile p;
    p.method_name = j.at("method_name").get<std::string>();
    p.equipment = j.at("equipment").get<std::string>();
    const std::string posture = j.at("posture_requirement").get<std::string>();
    p.posture_requirement = posture == "face_up"     ? Posture::face_up
                            : posture == "face_down" ? Posture::face_down
                                                     : Posture::none;
    p.hardware = j.at("hardware").get<std::string>() == "specialized"
                     ? HardwareClass::specialized
                     : HardwareClass::consumer_smartphone;
    const std::string acc = j.at("accuracy_class").get<std::string>();
    p.accuracy_class = acc == "high"       ? AccuracyClass::high
                       : acc == "moderate" ? AccuracyClass::moderate
                                           : AccuracyClass::unknown;
    p.method_sentence = j.at("method_sentence").get<std::string>();
    p.usage_sentence = j.at("usage_sentence").get<std::string>();
    p.source = j.at("source").get<std::string>() == "extracted" ? ProfileSource::extracted
                                                                : ProfileSource::fixture;
    if (j.contains("raw_response")) p.raw_response = j["raw_response"].get<std::string>();
    return p;
}

inline std::vector<MethodProfile> load_profiles(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileUnreadable(path.string());
    nlohmann::json j;
    in >> j;
    if (!j.is_array()) throw Error("profile store must be a JSON array: " + path.string());
    std::vector<MethodProfile> profiles;
    std::set<std::string> names;
    for (const auto& pj : j) {
        MethodProfile p = profile_from_json(pj);
        if (!names.insert(p.method_name).second)
            throw Error("duplicate method_name in profile store: " + p.method_name);
        profiles.push_back(std::move(p));
    }
    return profiles;
}

inline void save_profiles(const std::filesystem::path& path,
                          const std::vector<MethodProfile>& profiles) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : profiles) arr.push_back(profile_to_json(p));
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw WriteFailure(path.string());
    out << arr.dump(2) << '\n';
}

/// The three bundled method profiles used by the recommendation examples.
inline std::vector<MethodProfile> builtin_profiles() {
    std::vector<MethodProfile> out;
    {
        MethodProfile p;
        p.method_name = "MicroCam";
        p.equipment = "smartphone with a clip-on microscope camera, phone face-up";
        p.posture_requirement = Posture::face_up;
        p.hardware = HardwareClass::consumer_smartphone;
        p.accuracy_class = AccuracyClass::moderate;
        p.method_sentence = "Captures high-magnification images of the surface texture through a "
                            "microscope camera while the phone lies face-up.";
        p.usage_sentence = "Used for fine-grained identification of surface materials under and "
                           "around the phone.";
        out.push_back(std::move(p));
    }
    {
        MethodProfile p;
        p.method_name = "SpeCam";
        p.equipment = "smartphone front camera and screen, phone face-down";
        p.posture_requirement = Posture::face_down;
        p.hardware = HardwareClass::consumer_smartphone;
        p.accuracy_class = AccuracyClass::high;
        p.method_sentence = "Flashes screen colors with the phone face-down and reads the light "
                            "reflected off the surface with the front camera.";
        p.usage_sentence = "Used to recognize surface materials from their multispectral "
                           "reflections.";
        out.push_back(std::move(p));
    }
    {
        MethodProfile p;
        p.method_name = "Tangible Radar";
        p.equipment = "multi-channel radar transceiver kit";
        p.posture_requirement = Posture::none;
        p.hardware = HardwareClass::specialized;
        p.accuracy_class = AccuracyClass::high;
        p.method_sentence = "Classifies nearby objects from multi-channel radar reflections that "
                            "carry distance, thickness, shape and density cues.";
        p.usage_sentence = "Used to recognize tangible objects and surfaces around a device.";
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace multisurf
