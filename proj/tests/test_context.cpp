#include <catch2/catch_amalgamated.hpp>

#include "multisurf/context.hpp"
#include "support.hpp"

using namespace multisurf;
using testsupport::TempDir;

namespace {

ScenarioQuery figure2_scenario() {
    ScenarioQuery s;
    s.activity_description = "browsing news on his phone";
    s.posture = ScenarioPosture::face_up;
    s.available_hardware = HardwareAvailable::consumer_smartphone;
    return s;
}

const MethodProfile& by_name(const std::vector<MethodProfile>& ps, const std::string& name) {
    for (const auto& p : ps)
        if (p.method_name == name) return p;
    throw std::runtime_error("no profile " + name);
}

}  // namespace

TEST_CASE("bundled profiles reproduce the reference verdicts") {
    const auto profiles = builtin_profiles();
    REQUIRE(profiles.size() == 3);
    const ScenarioQuery scenario = figure2_scenario();

    const ConstraintVerdict micro = check_constraints(by_name(profiles, "MicroCam"), scenario);
    CHECK(micro.verdict == Verdict::compatible);

    const ConstraintVerdict spe = check_constraints(by_name(profiles, "SpeCam"), scenario);
    CHECK(spe.verdict == Verdict::posture_conflict);
    CHECK(spe.aspect == Aspect::activity);
    CHECK_FALSE(spe.explanation.empty());

    const ConstraintVerdict radar = check_constraints(by_name(profiles, "Tangible Radar"), scenario);
    CHECK(radar.verdict == Verdict::hardware_unavailable);
    CHECK(radar.aspect == Aspect::identity);
    CHECK_FALSE(radar.explanation.empty());
}

TEST_CASE("unknown scenario posture never conflicts") {
    const auto profiles = builtin_profiles();
    ScenarioQuery s;
    s.posture = ScenarioPosture::unknown;
    s.available_hardware = HardwareAvailable::consumer_smartphone;
    CHECK(check_constraints(by_name(profiles, "SpeCam"), s).verdict == Verdict::compatible);
    CHECK(check_constraints(by_name(profiles, "MicroCam"), s).verdict == Verdict::compatible);
    // hardware still rules radar out
    CHECK(check_constraints(by_name(profiles, "Tangible Radar"), s).verdict ==
          Verdict::hardware_unavailable);

    // with a specialized kit available, radar becomes compatible
    s.available_hardware = HardwareAvailable::specialized_kit;
    CHECK(check_constraints(by_name(profiles, "Tangible Radar"), s).verdict == Verdict::compatible);
}

TEST_CASE("constraint check ignores fields the rules never read") {
    const auto profiles = builtin_profiles();
    ScenarioQuery a = figure2_scenario();
    ScenarioQuery b = a;
    b.activity_description = "completely different words";
    b.location = "kitchen";
    b.time_of_day = "2am";
    for (const auto& p : profiles) {
        CHECK(check_constraints(p, a).verdict == check_constraints(p, b).verdict);
    }
}

TEST_CASE("figure-2 ranking: MicroCam first, violators at the bottom") {
    const Recommendation rec = rank_methods(figure2_scenario(), builtin_profiles());
    REQUIRE(rec.ranked.size() == 3);
    CHECK(rec.ranked[0].method_name == "MicroCam");
    CHECK(rec.ranked[0].verdict.verdict == Verdict::compatible);
    CHECK(rec.ranked[0].score > 0.0);
    CHECK(rec.ranked[0].score <= 1.0);

    // both violators score 0; tie broken by accuracy class then name
    CHECK(rec.ranked[1].method_name == "SpeCam");
    CHECK(rec.ranked[1].verdict.verdict == Verdict::posture_conflict);
    CHECK(rec.ranked[1].score == 0.0);
    CHECK(rec.ranked[2].method_name == "Tangible Radar");
    CHECK(rec.ranked[2].verdict.verdict == Verdict::hardware_unavailable);
    CHECK(rec.ranked[2].score == 0.0);
}

TEST_CASE("all-incompatible ranking keeps scores at zero with a clear rationale") {
    ScenarioQuery s;
    s.posture = ScenarioPosture::face_down;  // conflicts with MicroCam
    s.available_hardware = HardwareAvailable::consumer_smartphone;
    std::vector<MethodProfile> profiles;
    for (const auto& p : builtin_profiles())
        if (p.method_name != "SpeCam") profiles.push_back(p);

    Recommendation rec = rank_methods(s, profiles);
    for (const auto& rm : rec.ranked) CHECK(rm.score == 0.0);
    rec.rationale = compose_rationale(rec);
    CHECK(contains(rec.rationale, "No compatible sensing method"));
}

TEST_CASE("deterministic tie-break by accuracy class then name") {
    MethodProfile a, b;
    a.method_name = "Beta";
    b.method_name = "Alpha";
    a.accuracy_class = AccuracyClass::moderate;
    b.accuracy_class = AccuracyClass::moderate;
    ScenarioQuery s;
    s.posture = ScenarioPosture::unknown;
    const Recommendation rec = rank_methods(s, {a, b});
    REQUIRE(rec.ranked.size() == 2);
    CHECK(rec.ranked[0].method_name == "Alpha");
    CHECK(rec.ranked[0].score == rec.ranked[1].score);

    // higher accuracy class wins the tie before the name does
    a.accuracy_class = AccuracyClass::high;
    const Recommendation rec2 = rank_methods(s, {a, b});
    CHECK(rec2.ranked[0].method_name == "Beta");
}

TEST_CASE("property: hard-constraint dominance for random profiles and scenarios") {
    Rng rng(5150);
    for (int trial = 0; trial < 150; ++trial) {
        std::vector<MethodProfile> profiles;
        const std::size_t n = 2 + rng.below(6);
        for (std::size_t i = 0; i < n; ++i) {
            MethodProfile p;
            p.method_name = "m" + std::to_string(i);
            p.equipment = "equipment " + std::to_string(i);
            p.posture_requirement = static_cast<Posture>(rng.below(3));
            p.hardware = rng.below(2) ? HardwareClass::specialized
                                      : HardwareClass::consumer_smartphone;
            p.accuracy_class = static_cast<AccuracyClass>(rng.below(3));
            profiles.push_back(std::move(p));
        }
        ScenarioQuery s;
        s.posture = static_cast<ScenarioPosture>(rng.below(3));
        s.available_hardware = rng.below(2) ? HardwareAvailable::specialized_kit
                                            : HardwareAvailable::consumer_smartphone;

        const Recommendation rec = rank_methods(s, profiles);
        bool seen_incompatible = false;
        for (const auto& rm : rec.ranked) {
            if (rm.verdict.verdict != Verdict::compatible) {
                seen_incompatible = true;
                CHECK(rm.score == 0.0);
            } else {
                CHECK_FALSE(seen_incompatible);  // no compatible method below a violator
            }
            if (rm.verdict.verdict != Verdict::compatible) CHECK(rm.verdict.aspect.has_value());
        }
    }
}

TEST_CASE("property: ranking order is invariant to a positive weight scale") {
    Rng rng(777);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<MethodProfile> profiles;
        const std::size_t n = 3 + rng.below(4);
        for (std::size_t i = 0; i < n; ++i) {
            MethodProfile p;
            p.method_name = "m" + std::to_string(i);
            p.posture_requirement = static_cast<Posture>(rng.below(3));
            p.hardware = rng.below(3) == 0 ? HardwareClass::specialized
                                           : HardwareClass::consumer_smartphone;
            p.accuracy_class = static_cast<AccuracyClass>(rng.below(3));
            profiles.push_back(std::move(p));
        }
        ScenarioQuery s;
        s.posture = static_cast<ScenarioPosture>(rng.below(3));

        const double scale = 0.25 + rng.unit() * 8.0;
        RankWeights scaled;
        scaled.constraint *= scale;
        scaled.accuracy *= scale;
        scaled.convenience *= scale;

        const Recommendation base = rank_methods(s, profiles, nullptr, RankWeights{});
        const Recommendation scaled_rec = rank_methods(s, profiles, nullptr, scaled);
        REQUIRE(base.ranked.size() == scaled_rec.ranked.size());
        for (std::size_t i = 0; i < base.ranked.size(); ++i)
            CHECK(base.ranked[i].method_name == scaled_rec.ranked[i].method_name);
    }
}

TEST_CASE("measured accuracy overrides the profile accuracy class") {
    auto profiles = builtin_profiles();
    std::map<std::string, double> measured{{"MicroCam", 0.99}};
    ScenarioQuery s = figure2_scenario();
    const Recommendation with = rank_methods(s, profiles, &measured);
    const Recommendation without = rank_methods(s, profiles);
    CHECK(with.ranked[0].method_name == "MicroCam");
    CHECK(with.ranked[0].score > without.ranked[0].score);  // high beats moderate
}

TEST_CASE("rank_methods rejects an empty store") {
    CHECK_THROWS_AS(rank_methods(figure2_scenario(), {}), EmptyProfileStore);
}

TEST_CASE("rationale template names every method, verdict and aspect") {
    Recommendation rec = rank_methods(figure2_scenario(), builtin_profiles());
    rec.rationale = compose_rationale(rec);
    CHECK(contains(rec.rationale, "MicroCam"));
    CHECK(contains(rec.rationale, "SpeCam"));
    CHECK(contains(rec.rationale, "Tangible Radar"));
    CHECK(contains(rec.rationale, "compatible"));
    CHECK(contains(rec.rationale, "posture conflict (activity aspect)"));
    CHECK(contains(rec.rationale, "hardware unavailable (identity aspect)"));
    CHECK(contains(rec.rationale, "browsing news on his phone"));

    // deterministic
    CHECK(compose_rationale(rec) == rec.rationale);

    // location/time notes surface only when supplied
    ScenarioQuery s = figure2_scenario();
    s.location = "office desk";
    s.time_of_day = "morning";
    Recommendation rec2 = rank_methods(s, builtin_profiles());
    const std::string text = compose_rationale(rec2);
    CHECK(contains(text, "office desk"));
    CHECK(contains(text, "morning"));
}

TEST_CASE("backend rewrite keeps verdict facts or falls back to the template") {
    const Recommendation rec = rank_methods(figure2_scenario(), builtin_profiles());
    const std::string tmpl = compose_rationale(rec);

    // a rewrite that keeps all facts is accepted
    {
        ModelRequest probe;
        probe.model_id = "gpt-4o";
        probe.prompt.text =
            "Rewrite the following recommendation for fluency. Keep every method name and every "
            "verdict fact unchanged.\n" +
            tmpl;
        ReplayCache cache;
        cache.record(cache_key(probe), "gpt-4o",
                     "Use MicroCam: it is compatible with the scenario. SpeCam has a posture "
                     "conflict. Tangible Radar needs hardware you do not have.");
        ReplayBackend backend(std::move(cache));
        const std::string text = compose_rationale(rec, &backend, "gpt-4o");
        CHECK(contains(text, "Use MicroCam"));
    }

    // a rewrite that drops a verdict keyword is discarded
    {
        ModelRequest probe;
        probe.model_id = "gpt-4o";
        probe.prompt.text =
            "Rewrite the following recommendation for fluency. Keep every method name and every "
            "verdict fact unchanged.\n" +
            tmpl;
        ReplayCache cache;
        cache.record(cache_key(probe), "gpt-4o", "Just use MicroCam, trust me.");
        ReplayBackend backend(std::move(cache));
        CHECK(compose_rationale(rec, &backend, "gpt-4o") == tmpl);
    }

    // backend errors degrade to the template
    {
        ReplayBackend backend{ReplayCache{}};
        CHECK(compose_rationale(rec, &backend, "gpt-4o") == tmpl);
    }
}

TEST_CASE("extract_method_profile maps keywords onto posture and hardware") {
    auto run = [](const std::string& document, const std::string& answer) {
        ModelRequest request;
        request.model_id = "gpt-4o";
        request.prompt = render_document_prompt(document);
        ReplayCache cache;
        cache.record(cache_key(request), "gpt-4o", answer);
        ReplayBackend backend(std::move(cache));
        return extract_method_profile(document, backend, "gpt-4o", "TestMethod");
    };

    const MethodProfile micro = run("%PDF microcam paper",
                                    "Equipment: a smartphone microscope camera used face-up.\n"
                                    "Method: captures magnified surface texture images.\n"
                                    "Usage: identifying surface materials.");
    CHECK(micro.method_name == "TestMethod");
    CHECK(micro.posture_requirement == Posture::face_up);
    CHECK(micro.hardware == HardwareClass::consumer_smartphone);
    CHECK(micro.source == ProfileSource::extracted);
    CHECK(contains(micro.equipment, "microscope camera"));
    CHECK_FALSE(micro.raw_response.empty());

    const MethodProfile spe = run("%PDF specam paper",
                                  "Equipment: smartphone screen and front camera, facing down.\n"
                                  "Method: flashes colors and reads reflected light.\n"
                                  "Usage: recognizing surface materials.");
    CHECK(spe.posture_requirement == Posture::face_down);
    CHECK(spe.hardware == HardwareClass::consumer_smartphone);

    const MethodProfile radar = run("%PDF radar paper",
                                    "Equipment: a multi-channel radar transceiver.\n"
                                    "Method: classifies objects from radar reflections.\n"
                                    "Usage: recognizing tangible objects.");
    CHECK(radar.hardware == HardwareClass::specialized);
    CHECK(radar.posture_requirement == Posture::none);
}

TEST_CASE("profile store round-trips and rejects duplicates") {
    TempDir dir("profiles");
    const auto path = dir / "profiles.json";
    save_profiles(path, builtin_profiles());
    const auto loaded = load_profiles(path);
    REQUIRE(loaded.size() == 3);
    CHECK(loaded[0].method_name == "MicroCam");
    CHECK(loaded[0].posture_requirement == Posture::face_up);
    CHECK(loaded[1].method_name == "SpeCam");
    CHECK(loaded[1].posture_requirement == Posture::face_down);
    CHECK(loaded[2].method_name == "Tangible Radar");
    CHECK(loaded[2].hardware == HardwareClass::specialized);

    auto dup = builtin_profiles();
    dup.push_back(dup.front());
    save_profiles(path, dup);
    CHECK_THROWS_AS(load_profiles(path), Error);
}
