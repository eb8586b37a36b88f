#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

#include "mvkit/motion_io.hpp"

#include "test_support.hpp"

using nlohmann::json;
using testsup::TempDir;
using testsup::read_file;
using testsup::run_cli;
using testsup::validate_against_schema;

namespace {

json parse_report(const std::string& text) { return json::parse(text); }

// Generates a small binary motion file via the CLI itself and returns its path.
std::string make_synth_file(const TempDir& dir, const std::string& rel,
                            const std::string& extra_flags) {
    const std::string path = dir.str(rel);
    std::string out;
    const int rc = run_cli("synth --out " + path + " " + extra_flags, &out);
    REQUIRE(rc == 0);
    REQUIRE(std::filesystem::exists(path));
    return path;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("help and subcommand help exit zero") {
    REQUIRE(std::filesystem::exists(testsup::cli_path()));
    std::string out;
    CHECK(run_cli("--help", &out) == 0);
    CHECK(out.find("synth") != std::string::npos);
    CHECK(run_cli("synth --help", &out) == 0);
    CHECK(out.find("--frames") != std::string::npos);
}

TEST_CASE("usage errors exit with code 1") {
    TempDir dir;
    CHECK(run_cli("") == 1);                 // a subcommand is required
    CHECK(run_cli("no-such-command") == 1);  // unknown subcommand
    CHECK(run_cli("synth --out " + dir.str("x.mvkt") + " --bogus-flag") == 1);
    CHECK(run_cli("synth --out " + dir.str("x.mvkt") + " --kind spiral") == 1);
    CHECK(run_cli("synth --out " + dir.str("x.mvkt") + " --format yaml") == 1);
    CHECK(run_cli("stitch --out " + dir.str("x.mvkt")) == 1);  // --index missing
}

TEST_CASE("missing and malformed inputs exit with code 2") {
    TempDir dir;
    CHECK(run_cli("convert --in " + dir.str("absent.mvkt") + " --out " +
                  dir.str("y.mvkt")) == 2);
    CHECK(run_cli("evaluate --pred " + dir.str("a.mvkt") + " --gt " + dir.str("b.mvkt")) ==
          2);

    // Truncated binary payload.
    const std::string whole = make_synth_file(dir, "whole.mvkt", "--frames 10 --joints 4");
    const std::string bytes = read_file(whole);
    std::ofstream cut(dir.str("cut.mvkt"), std::ios::binary);
    cut.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 5));
    cut.close();
    CHECK(run_cli("convert --in " + dir.str("cut.mvkt") + " --out " + dir.str("y.mvkt")) ==
          2);

    // Out-of-range smoothing ratio comes from the data layer, not the parser.
    CHECK(run_cli("smooth --in " + whole + " --out " + dir.str("s.mvkt") +
                  " --ratio 1.5") == 2);
}

TEST_CASE("synth emits a schema-valid report and a readable file") {
    TempDir dir;
    std::string out;
    const std::string path = dir.str("seq.mvkt");
    REQUIRE(run_cli("synth --out " + path +
                        " --kind single_axis_sine --frames 18 --joints 5 --joint 2 --seed 7",
                    &out) == 0);
    const json rep = parse_report(out);
    CHECK(validate_against_schema(rep, "file_report.schema.json").empty());
    CHECK(rep["command"] == "synth");
    CHECK(rep["frames"] == 18);
    CHECK(rep["joints"] == 5);

    const mvkit::MotionSequence seq = mvkit::read_motion(path);
    CHECK(seq.frame_count() == 18);
    CHECK(seq.joint_count() == 5);
    CHECK(seq.name == "single_axis_sine_7");
}

TEST_CASE("convert preserves geometry across representations") {
    TempDir dir;
    const std::string src =
        make_synth_file(dir, "src.mvkt", "--kind random_walk_slerp --frames 16 --seed 3");
    std::string out;
    REQUIRE(run_cli("convert --in " + src + " --out " + dir.str("q.json") +
                        " --format json --repr quaternion",
                    &out) == 0);
    const json rep = parse_report(out);
    CHECK(validate_against_schema(rep, "file_report.schema.json").empty());
    CHECK(rep["representation"] == "quaternion");

    REQUIRE(run_cli("evaluate --pred " + dir.str("q.json") + " --gt " + src, &out) == 0);
    const json metrics = parse_report(out);
    CHECK(metrics["mpjpe_mm"].get<double>() < 1e-6);
    CHECK(metrics["pa_mpjpe_mm"].get<double>() < 1e-6);
}

TEST_CASE("evaluate of a file against itself reports zeros with exactly six keys") {
    TempDir dir;
    const std::string path =
        make_synth_file(dir, "gt.mvkt", "--kind multi_joint_sine --frames 20 --seed 5");
    const std::string rep_path = dir.str("report.json");
    REQUIRE(run_cli("evaluate --pred " + path + " --gt " + path + " --out " + rep_path) ==
            0);
    const json rep = json::parse(read_file(rep_path));
    CHECK(validate_against_schema(rep, "evaluate_report.schema.json").empty());
    CHECK(rep.size() == 6);
    CHECK(rep["mpjpe_mm"].get<double>() == 0.0);
    CHECK(rep["accel_err_mm_s2"].get<double>() == 0.0);
    CHECK(rep["pa_mpjpe_mm"].get<double>() < 1e-9);
    CHECK(rep["frames"] == 20);
    CHECK(rep["joints"] == 24);
    CHECK(rep["fps"] == 30.0);
}

TEST_CASE("augment is byte-deterministic for a fixed seed") {
    TempDir dir;
    const std::string src =
        make_synth_file(dir, "base.mvkt", "--kind single_axis_sine --frames 24 --seed 2");
    const std::string flags =
        " --speeds 1.5 --flip --root-rotations 2 --seed 9";
    std::string out1, out2;
    REQUIRE(run_cli("augment --in " + src + " --out-dir " + dir.str("a1") + flags, &out1) ==
            0);
    REQUIRE(run_cli("augment --in " + src + " --out-dir " + dir.str("a2") + flags, &out2) ==
            0);

    const json rep1 = parse_report(out1);
    const json rep2 = parse_report(out2);
    CHECK(validate_against_schema(rep1, "augment_report.schema.json").empty());
    CHECK(rep1["count"].get<int>() == static_cast<int>(rep1["files"].size()));
    CHECK(rep1["count"].get<int>() > 1);
    REQUIRE(rep1["files"] == rep2["files"]);
    for (const json& f : rep1["files"]) {
        const std::string name = f["file"].get<std::string>();
        CHECK(read_file(dir.str("a1") + "/" + name) == read_file(dir.str("a2") + "/" + name));
    }
}

TEST_CASE("augment rejects a non-positive speed factor") {
    TempDir dir;
    const std::string src = make_synth_file(dir, "base.mvkt", "--frames 12");
    CHECK(run_cli("augment --in " + src + " --out-dir " + dir.str("out") + " --speeds 0") ==
          2);
}

TEST_CASE("window and stitch round-trip a file byte for byte") {
    TempDir dir;
    const std::string src = make_synth_file(
        dir, "src.mvkt",
        "--kind random_walk_slerp --frames 45 --seed 11 --with-betas --with-translation");
    std::string out;
    REQUIRE(run_cli("window --in " + src + " --out-dir " + dir.str("win") +
                        " --width 16 --stride 7",
                    &out) == 0);
    const json rep = parse_report(out);
    CHECK(validate_against_schema(rep, "window_report.schema.json").empty());
    CHECK(rep["source_frames"] == 45);
    CHECK(rep["windows"] == 6);

    const std::string index_path = rep["index"].get<std::string>();
    const json index = json::parse(read_file(index_path));
    CHECK(validate_against_schema(index, "window_index.schema.json").empty());
    CHECK(index["windows"].size() == 6);
    CHECK(index["windows"].back()["padding"] == 6);

    for (const char* policy : {"take_first", "take_last", "slerp_blend"}) {
        const std::string out_path = dir.str(std::string("re_") + policy + ".mvkt");
        std::string sout;
        REQUIRE(run_cli("stitch --index " + index_path + " --out " + out_path +
                            " --policy " + policy,
                        &sout) == 0);
        CHECK(validate_against_schema(parse_report(sout), "file_report.schema.json")
                  .empty());
        CHECK(read_file(out_path) == read_file(src));
    }
}

TEST_CASE("stitch rejects a corrupt index") {
    TempDir dir;
    std::ofstream(dir.str("garbage.json")) << "{]";
    CHECK(run_cli("stitch --index " + dir.str("garbage.json") + " --out " +
                  dir.str("x.mvkt")) == 2);

    std::ofstream(dir.str("hollow.json")) << R"({"width": 4})";
    CHECK(run_cli("stitch --index " + dir.str("hollow.json") + " --out " +
                  dir.str("x.mvkt")) == 2);

    CHECK(run_cli("stitch --index " + dir.str("absent.json") + " --out " +
                  dir.str("x.mvkt")) == 2);
}

TEST_CASE("vae-train then vae-reconstruct runs end to end") {
    TempDir dir;
    const std::string a = make_synth_file(
        dir, "a.mvkt", "--kind multi_joint_sine --frames 12 --joints 4 --seed 1");
    const std::string b = make_synth_file(
        dir, "b.mvkt", "--kind random_walk_slerp --frames 12 --joints 4 --seed 2");
    const std::string model = dir.str("model.mvkm");
    const std::string hist = dir.str("history.json");

    std::string out;
    REQUIRE(run_cli("vae-train --in " + a + " " + b + " --model " + model +
                        " --window 4 --latent 2 --hidden 4 --epochs 2 --batch 2" +
                        " --lr 0.001 --kl-weight 0.01 --seed 13 --history " + hist,
                    &out) == 0);
    const json rep = parse_report(out);
    CHECK(validate_against_schema(rep, "train_report.schema.json").empty());
    CHECK(rep["sequences"] == 2);
    CHECK(rep["windows"] == 6);
    CHECK(rep["steps"] == 6);
    CHECK(std::isfinite(rep["final"]["total"].get<double>()));

    const json hist_doc = json::parse(read_file(hist));
    CHECK(hist_doc["epochs"] == 2);
    CHECK(hist_doc["history"].size() == 2);

    REQUIRE(run_cli("vae-reconstruct --model " + model + " --in " + a + " --out " +
                        dir.str("rec.mvkt"),
                    &out) == 0);
    const json rec = parse_report(out);
    CHECK(validate_against_schema(rec, "file_report.schema.json").empty());
    CHECK(rec["frames"] == 12);
    CHECK(rec["joints"] == 4);
    const mvkit::MotionSequence seq = mvkit::read_motion(dir.str("rec.mvkt"));
    CHECK(seq.frame_count() == 12);
}

TEST_CASE("vae-train rejects mixed joint counts") {
    TempDir dir;
    const std::string a = make_synth_file(dir, "a.mvkt", "--frames 8 --joints 4");
    const std::string b = make_synth_file(dir, "b.mvkt", "--frames 8 --joints 5");
    CHECK(run_cli("vae-train --in " + a + " " + b + " --model " + dir.str("m.mvkm") +
                  " --window 4 --epochs 1") == 2);
}

TEST_CASE("vae-gradcheck reports and honors the tolerance") {
    TempDir dir;
    const std::string rep_path = dir.str("grad.json");
    REQUIRE(run_cli("vae-gradcheck --models 2 --seed 3 --out " + rep_path) == 0);
    const json rep = json::parse(read_file(rep_path));
    CHECK(validate_against_schema(rep, "gradcheck_report.schema.json").empty());
    CHECK(rep["passed"] == true);
    CHECK(rep["max_rel_error"].get<double>() < 1e-4);
    CHECK(rep["parameters_checked"].get<int>() > 0);

    // An absurd tolerance flips the same computation into a numeric failure.
    CHECK(run_cli("vae-gradcheck --models 1 --seed 3 --tolerance 1e-15") == 3);
}

TEST_CASE("skeleton-check validates builtin and written skeletons") {
    TempDir dir;
    const std::string rep_path = dir.str("skel.json");
    const std::string written = dir.str("skel.txt");
    REQUIRE(run_cli("skeleton-check --write " + written + " --out " + rep_path) == 0);
    const json rep = json::parse(read_file(rep_path));
    CHECK(validate_against_schema(rep, "skeleton_report.schema.json").empty());
    CHECK(rep["ok"] == true);
    CHECK(rep["skeleton"] == "builtin");
    CHECK(rep["joints"] == 24);

    std::string out;
    REQUIRE(run_cli("skeleton-check --skeleton " + written, &out) == 0);
    CHECK(parse_report(out)["skeleton"] == written);
}

}  // TEST_SUITE("cli")
