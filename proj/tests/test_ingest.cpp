#include <catch2/catch_amalgamated.hpp>

#include "multisurf/image_corpus.hpp"
#include "multisurf/manifest.hpp"
#include "multisurf/radar_table.hpp"
#include "multisurf/validate.hpp"
#include "support.hpp"

using namespace multisurf;
using testsupport::TempDir;
using testsupport::write_file;

namespace {

std::string manifest_json(const std::string& modality, const std::string& data_path,
                          const std::string& classes = R"(["a0","a90","a180","a270"])") {
    return std::string("{\"dataset_id\":\"ds1\",\"modality\":\"") + modality +
           "\",\"task\":\"Rotation\",\"class_labels\":" + classes + ",\"data_path\":\"" +
           data_path + "\"}";
}

}  // namespace

TEST_CASE("load_manifest accepts a minimal radar manifest") {
    TempDir dir("manifest");
    write_file(dir / "m.json", manifest_json("radar_csv", "radar.csv"));
    const DatasetManifest m = load_manifest(dir / "m.json");
    CHECK(m.dataset_id == "ds1");
    CHECK(m.modality == Modality::radar_csv);
    CHECK(m.task == "Rotation");
    CHECK(m.class_labels == std::vector<std::string>{"a0", "a90", "a180", "a270"});
    CHECK(m.data_path == dir / "radar.csv");  // relative paths resolve against the manifest
    CHECK_FALSE(m.document_path.has_value());
}

TEST_CASE("load_manifest rejects case-fold duplicate labels") {
    TempDir dir("manifest");
    write_file(dir / "m.json", manifest_json("radar_csv", "radar.csv", R"(["Wood","wood"])"));
    CHECK_THROWS_AS(load_manifest(dir / "m.json"), DuplicateClassLabel);
}

TEST_CASE("load_manifest names the first offending field") {
    TempDir dir("manifest");

    write_file(dir / "m.json",
               R"({"dataset_id":"x","modality":"radar_csv","task":"t","class_labels":["a","b"],"data_path":"d","surprise":1})");
    try {
        load_manifest(dir / "m.json");
        FAIL("expected SchemaViolation");
    } catch (const SchemaViolation& e) {
        CHECK(e.field == "surprise");
    }

    write_file(dir / "m2.json", R"({"dataset_id":"x","modality":"sonar","task":"t","class_labels":["a"],"data_path":"d"})");
    try {
        load_manifest(dir / "m2.json");
        FAIL("expected SchemaViolation");
    } catch (const SchemaViolation& e) {
        CHECK(e.field == "modality");
    }

    CHECK_THROWS_AS(load_manifest(dir / "missing.json"), FileUnreadable);
}

TEST_CASE("microscope manifest with optional document path") {
    TempDir dir("manifest");
    write_file(dir / "m.json",
               R"({"dataset_id":"microcam","modality":"microscope_image","task":"Material",)"
               R"("class_labels":["wood","metal"],"data_path":"imgs","document_path":"paper.pdf"})");
    const DatasetManifest m = load_manifest(dir / "m.json");
    CHECK(m.modality == Modality::microscope_image);
    REQUIRE(m.document_path.has_value());
    CHECK(*m.document_path == dir / "paper.pdf");
}

TEST_CASE("load_radar_table parses a minimal body") {
    TempDir dir("radar");
    write_file(dir / "m.json", manifest_json("radar_csv", "radar.csv", R"(["A","B"])"));
    write_file(dir / "radar.csv", "0.1,0.2,A\n0.3,0.4,B\n");
    const RadarTable t = load_radar_table(load_manifest(dir / "m.json"));
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0].features == std::vector<double>{0.1, 0.2});
    CHECK(t.rows[0].label == "A");
    CHECK(t.rows[1].label == "B");
    CHECK(t.feature_arity() == 2);
    CHECK(t.class_labels == std::vector<std::string>{"A", "B"});
}

TEST_CASE("load_radar_table detects an optional header row") {
    TempDir dir("radar");
    write_file(dir / "m.json", manifest_json("radar_csv", "radar.csv", R"(["A","B"])"));
    write_file(dir / "radar.csv", "ch1,ch2,label\n0.1,0.2,A\n0.3,0.4,B\n");
    const RadarTable t = load_radar_table(load_manifest(dir / "m.json"));
    REQUIRE(t.rows.size() == 2);
    CHECK(t.feature_names == std::vector<std::string>{"ch1", "ch2"});

    // a first row with numeric cells is data, not a header, even when its
    // label is unknown - so it must fail loudly instead of being skipped
    write_file(dir / "radar2.csv", "0.5,0.6,X\n0.1,0.2,B\n");
    write_file(dir / "m2.json", manifest_json("radar_csv", "radar2.csv", R"(["A","B"])"));
    CHECK_THROWS_AS(load_radar_table(load_manifest(dir / "m2.json")), UnknownLabel);
}

TEST_CASE("load_radar_table reports typed row errors") {
    TempDir dir("radar");
    write_file(dir / "m.json", manifest_json("radar_csv", "radar.csv", R"(["A","B"])"));

    write_file(dir / "radar.csv", "0.1,x,A\n");
    try {
        load_radar_table(load_manifest(dir / "m.json"));
        FAIL("expected NonNumericFeature");
    } catch (const NonNumericFeature& e) {
        CHECK(e.row == 1);
        CHECK(e.col == 2);
    }

    write_file(dir / "radar.csv", "0.1,0.2,C\n");
    try {
        load_radar_table(load_manifest(dir / "m.json"));
        FAIL("expected UnknownLabel");
    } catch (const UnknownLabel& e) {
        CHECK(e.row == 1);
    }

    write_file(dir / "radar.csv", "0.1,0.2,A\n0.3,B\n");
    try {
        load_radar_table(load_manifest(dir / "m.json"));
        FAIL("expected RaggedRow");
    } catch (const RaggedRow& e) {
        CHECK(e.row == 2);
    }

    write_file(dir / "radar.csv", "\n\n");
    CHECK_THROWS_AS(load_radar_table(load_manifest(dir / "m.json")), EmptyTable);
}

TEST_CASE("identical csv bytes load to identical tables") {
    TempDir dir("radar");
    write_file(dir / "m.json", manifest_json("radar_csv", "radar.csv", R"(["A","B"])"));
    write_file(dir / "radar.csv", "1,2,A\n3,4,B\n5,6,A\n");
    const DatasetManifest m = load_manifest(dir / "m.json");
    const RadarTable t1 = load_radar_table(m);
    const RadarTable t2 = load_radar_table(m);
    REQUIRE(t1.rows.size() == t2.rows.size());
    for (std::size_t i = 0; i < t1.rows.size(); ++i) {
        CHECK(t1.rows[i].features == t2.rows[i].features);
        CHECK(t1.rows[i].label == t2.rows[i].label);
    }
}

TEST_CASE("load_image_corpus walks class subdirectories") {
    TempDir dir("corpus");
    write_file(dir / "m.json",
               manifest_json("microscope_image", "imgs", R"(["wood","metal"])"));
    write_file(dir / "imgs/wood/1.png", testsupport::png_bytes("w1"));
    write_file(dir / "imgs/wood/2.png", testsupport::png_bytes("w2"));
    write_file(dir / "imgs/metal/1.jpg", testsupport::jpeg_bytes("m1"));
    write_file(dir / "imgs/metal/notes.txt", "not an image, ignored");

    const CorpusLoad load = load_image_corpus(load_manifest(dir / "m.json"));
    CHECK(load.warnings.empty());
    CHECK(load.corpus.total_samples() == 3);
    REQUIRE(load.corpus.by_class.size() == 2);
    CHECK(load.corpus.by_class[0].size() == 2);
    CHECK(load.corpus.by_class[0][0].sample_id == "wood/1");
    CHECK(load.corpus.by_class[0][0].media_kind == MediaKind::png);
    CHECK(load.corpus.by_class[1][0].sample_id == "metal/1");
    CHECK(load.corpus.by_class[1][0].media_kind == MediaKind::jpeg);

    // per-class groups partition the corpus
    std::size_t sum = 0;
    for (const auto& g : load.corpus.by_class) sum += g.size();
    CHECK(sum == load.corpus.total_samples());
}

TEST_CASE("load_image_corpus class-level errors") {
    TempDir dir("corpus");
    write_file(dir / "m.json",
               manifest_json("microscope_image", "imgs", R"(["wood","metal","fabric"])"));
    write_file(dir / "imgs/wood/1.png", testsupport::png_bytes("w1"));
    write_file(dir / "imgs/metal/1.png", testsupport::png_bytes("m1"));

    try {
        load_image_corpus(load_manifest(dir / "m.json"));
        FAIL("expected MissingClassDirectory");
    } catch (const MissingClassDirectory& e) {
        CHECK(e.label == "fabric");
    }

    write_file(dir / "imgs/fabric/bogus.png", "not an image at all");
    try {
        load_image_corpus(load_manifest(dir / "m.json"));
        FAIL("expected EmptyClass");
    } catch (const EmptyClass& e) {
        CHECK(e.label == "fabric");
    }
}

TEST_CASE("undecodable image becomes a warning, not a failure") {
    TempDir dir("corpus");
    write_file(dir / "m.json", manifest_json("microscope_image", "imgs", R"(["wood"])"));
    write_file(dir / "imgs/wood/good.png", testsupport::png_bytes("ok"));
    write_file(dir / "imgs/wood/bad.png", "truncated junk");
    const CorpusLoad load = load_image_corpus(load_manifest(dir / "m.json"));
    REQUIRE(load.warnings.size() == 1);
    CHECK(load.warnings[0].find("bad.png") != std::string::npos);
    CHECK(load.corpus.total_samples() == 1);
}

TEST_CASE("validate_dataset aggregates issues without aborting") {
    TempDir dir("validate");

    SECTION("fully valid radar dataset") {
        write_file(dir / "m.json", manifest_json("radar_csv", "radar.csv", R"(["A","B"])"));
        write_file(dir / "radar.csv", "1,2,A\n3,4,B\n");
        const ValidationReport r = validate_dataset(load_manifest(dir / "m.json"));
        CHECK(r.issues.empty());
        CHECK(r.loadable());
    }

    SECTION("radar csv with two bad rows yields two row-addressed errors") {
        write_file(dir / "m.json", manifest_json("radar_csv", "radar.csv", R"(["A","B"])"));
        write_file(dir / "radar.csv", "1,2,A\n1,x,A\n3,4,C\n5,6,B\n");
        const ValidationReport r = validate_dataset(load_manifest(dir / "m.json"));
        REQUIRE(r.error_count() == 2);
        CHECK(r.issues[0].message.find("row 2") != std::string::npos);
        CHECK(r.issues[1].message.find("row 3") != std::string::npos);
        CHECK_FALSE(r.loadable());
    }

    SECTION("one undecodable image is a warning; dataset still loadable") {
        write_file(dir / "m.json", manifest_json("microscope_image", "imgs", R"(["wood"])"));
        write_file(dir / "imgs/wood/good.png", testsupport::png_bytes("ok"));
        write_file(dir / "imgs/wood/bad.png", "junk");
        const ValidationReport r = validate_dataset(load_manifest(dir / "m.json"));
        CHECK(r.error_count() == 0);
        CHECK(r.warning_count() == 1);
        CHECK(r.loadable());
    }

    SECTION("missing class directories are all reported") {
        write_file(dir / "m.json",
                   manifest_json("microscope_image", "imgs", R"(["wood","metal","fabric"])"));
        write_file(dir / "imgs/wood/1.png", testsupport::png_bytes("w"));
        const ValidationReport r = validate_dataset(load_manifest(dir / "m.json"));
        CHECK(r.error_count() == 2);
    }
}

TEST_CASE("checking mode keeps exact row bookkeeping") {
    TempDir dir("radarbook");
    write_file(dir / "m.json", manifest_json("radar_csv", "radar.csv", R"(["A","B"])"));
    // 6 data rows, 3 bad (non-numeric, unknown label, ragged)
    write_file(dir / "radar.csv", "1,2,A\n1,x,A\n3,4,C\n5,6\n7,8,B\n9,10,A\n");
    std::vector<std::string> row_errors;
    const RadarTable t = scan_radar_csv(load_manifest(dir / "m.json"), row_errors);
    CHECK(row_errors.size() == 3);
    CHECK(t.rows.size() == 6 - row_errors.size());  // loaded + rejected = data rows
}

TEST_CASE("sniff_image recognizes signatures only") {
    CHECK(sniff_image(testsupport::png_bytes("x")) == MediaKind::png);
    CHECK(sniff_image(testsupport::jpeg_bytes("x")) == MediaKind::jpeg);
    CHECK_FALSE(sniff_image("random bytes").has_value());
    CHECK_FALSE(sniff_image("").has_value());
}
