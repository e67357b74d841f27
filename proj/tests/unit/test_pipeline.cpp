#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "oracles.hpp"
#include "reptex/pipeline.hpp"
#include "reptex/report.hpp"

using namespace reptex;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

nlohmann::json read_report(const fs::path& dir) { return nlohmann::json::parse(slurp(dir / "report.json")); }

PipelineConfig small_config(const fs::path& image, const fs::path& out) {
    PipelineConfig cfg;
    cfg.image_path = image;
    cfg.out_dir = out;
    cfg.sampler.sample_count = 300;
    cfg.embedder = EmbedderKind::Descriptor;
    cfg.seed = 7;
    return cfg;
}

fs::path synthetic_image(const fs::path& dir, int size) {
    SynthSpec spec;
    spec.tile = make_brick_tile(32, 7);
    spec.reps_x = spec.reps_y = size / 32;
    spec.jitter_amp = 0.02;
    spec.seed = 7;
    save_image(generate_tiled_image(spec).image, dir / "image.png");
    save_image(spec.tile, dir / "truth.png");
    return dir / "image.png";
}

// 128x128 labels: background everywhere except a cornice band at rows 60..67
// and a window block in the upper half.
void cornice_fixture(const fs::path& dir) {
    const int w = 128, h = 128;
    std::vector<ClassId> labels(w * h, 0);
    for (int y = 60; y < 68; ++y)
        for (int x = 0; x < w; ++x) labels[y * w + x] = 2;
    for (int y = 20; y < 36; ++y)
        for (int x = 50; x < 70; ++x) labels[y * w + x] = 1;
    save_labels(labels, w, h, dir / "labels.png");
    std::ofstream(dir / "classes.json") << R"({"0": "background", "1": "window", "2": "cornice"})";
}

void check_report_arithmetic(const nlohmann::json& region) {
    for (const auto& m : region["members"]) {
        const double d = m["D"], t = m["T"], b = m["B"], v = m["V"], w = m["W"];
        CHECK(std::abs(d * (t * b) - w) <= 1e-9);
        CHECK(std::abs(t * b - v) <= 1e-12);
        CHECK(w <= d * v + 1e-12);
    }
}

} // namespace

TEST_SUITE("pipeline") {

TEST_CASE("mask-free run on a 256x256 synthetic image") {
    const auto dir = oracle::temp_dir("pipeline_maskfree");
    PipelineConfig cfg = small_config(synthetic_image(dir, 256), dir / "out");
    cfg.overlay = true;
    cfg.tile_preview = std::pair{100, 60};
    cfg.eval_truth = dir / "truth.png";
    REQUIRE(run_pipeline(cfg) == 0);
    for (const char* f : {"texture_weighted_0.png", "texture_plain_0.png", "overlay_0.png", "tiled_0.png", "report.json"})
        CHECK(fs::exists(cfg.out_dir / f));
    CHECK(load_image(cfg.out_dir / "tiled_0.png").width() == 100);

    const auto r = read_report(cfg.out_dir);
    CHECK(r["version"] == kReportVersion);
    CHECK(r["status"] == "ok");
    CHECK(r["error"].is_null());
    CHECK(r["mode"] == "mask_free");
    REQUIRE(r["regions"].size() == 1);
    const auto& region = r["regions"][0];
    CHECK(region["candidate_count"] == 300);
    CHECK(region["k_scores"].size() == cfg.k_set.size());
    CHECK(region["members"].size() == region["cluster_sizes"][region["largest_cluster_id"].get<int>()]);
    check_report_arithmetic(region);
    CHECK(region["eval"]["ncc_plain"].is_number());
    CHECK(r["corpus_stats"]["images"] == 1);
    CHECK_FALSE(region.contains("timing_ms"));

    // The plain texture on disk is the chosen crop.
    const int plain = region["chosen"]["plain"]["index"];
    bool found = false;
    for (const auto& m : region["members"])
        if (m["index"] == plain) {
            found = true;
            CHECK(load_image(cfg.out_dir / "texture_plain_0.png").width() == m["side"].get<int>());
        }
    CHECK(found);
}

TEST_CASE("cornice labels give two subareas") {
    const auto dir = oracle::temp_dir("pipeline_labels");
    cornice_fixture(dir);
    SynthSpec spec;
    spec.tile = make_brick_tile(32, 1);
    spec.reps_x = spec.reps_y = 4;
    save_image(generate_tiled_image(spec).image, dir / "image.png");
    PipelineConfig cfg = small_config(dir / "image.png", dir / "out");
    cfg.labels_path = dir / "labels.png";
    cfg.class_map_path = dir / "classes.json";
    cfg.separator_classes = {"cornice"};
    cfg.sampler.sample_count = 200;
    REQUIRE(run_pipeline(cfg) == 0);
    const auto r = read_report(cfg.out_dir);
    REQUIRE(r["regions"].size() == 2);
    CHECK(r["regions"][0]["subarea_id"] != r["regions"][1]["subarea_id"]);
    for (int id : {0, 1}) {
        CHECK(fs::exists(cfg.out_dir / ("texture_weighted_" + std::to_string(id) + ".png")));
        CHECK(fs::exists(cfg.out_dir / ("texture_plain_" + std::to_string(id) + ".png")));
    }
    CHECK(r["regions"][0]["bordering_separators"] == nlohmann::json::array({"cornice"}));
}

TEST_CASE("byte-identical reruns across worker counts") {
    const auto dir = oracle::temp_dir("pipeline_determinism");
    const fs::path image = synthetic_image(dir, 128);
    PipelineConfig a = small_config(image, dir / "a");
    a.embedder = EmbedderKind::Autoencoder;
    a.training.epochs = 1;
    a.sampler.sample_count = 150;
    a.overlay = true;
    PipelineConfig b = a;
    b.out_dir = dir / "b";
    b.workers = 3;
    REQUIRE(run_pipeline(a) == 0);
    REQUIRE(run_pipeline(b) == 0);
    for (const char* f : {"report.json", "texture_weighted_0.png", "texture_plain_0.png", "overlay_0.png"})
        CHECK(slurp(a.out_dir / f) == slurp(b.out_dir / f));
}

TEST_CASE("failures are reported with a stage and an exit status") {
    const auto dir = oracle::temp_dir("pipeline_errors");
    const fs::path image = synthetic_image(dir, 64);
    SUBCASE("empty mask is a pipeline error") {
        save_mask(MaskRaster(64, 64, false), dir / "mask.png");
        PipelineConfig cfg = small_config(image, dir / "out");
        cfg.mask_path = dir / "mask.png";
        CHECK(run_pipeline(cfg) == 3);
        const auto r = read_report(cfg.out_dir);
        CHECK(r["status"] == "error");
        CHECK(r["error"]["stage"] == "sample");
        CHECK(r["error"]["code"] == "MaskEmpty");
    }
    SUBCASE("missing image is a configuration error") {
        PipelineConfig cfg = small_config(dir / "nope.png", dir / "out2");
        CHECK(run_pipeline(cfg) == 2);
        const auto r = read_report(cfg.out_dir);
        CHECK(r["error"]["stage"] == "load");
        CHECK(r["error"]["code"] == "UnreadableFile");
    }
    SUBCASE("unknown background class") {
        cornice_fixture(dir);
        SynthSpec spec;
        spec.tile = make_brick_tile(32, 1);
        spec.reps_x = spec.reps_y = 4;
        save_image(generate_tiled_image(spec).image, dir / "big.png");
        PipelineConfig cfg = small_config(dir / "big.png", dir / "out3");
        cfg.labels_path = dir / "labels.png";
        cfg.class_map_path = dir / "classes.json";
        cfg.background_class = "sky";
        CHECK(run_pipeline(cfg) == 2);
        CHECK(read_report(cfg.out_dir)["error"]["code"] == "UnknownClass");
    }
    SUBCASE("labels and mask together") {
        PipelineConfig cfg = small_config(image, dir / "out4");
        cfg.labels_path = dir / "l.png";
        cfg.class_map_path = dir / "c.json";
        cfg.mask_path = dir / "m.png";
        CHECK(run_pipeline(cfg) == 2);
    }
    SUBCASE("too few candidates for training") {
        PipelineConfig cfg = small_config(image, dir / "out5");
        cfg.embedder = EmbedderKind::Autoencoder;
        cfg.sampler.sample_count = 10;
        CHECK(run_pipeline(cfg) == 3);
        CHECK(read_report(cfg.out_dir)["error"]["code"] == "TooFewCandidates");
    }
}

TEST_CASE("command line") {
    const auto dir = oracle::temp_dir("pipeline_cli");
    const fs::path image = synthetic_image(dir, 128);
    const std::string cli = REPTEX_CLI_PATH;
    const auto run = [&](const std::string& args) {
        const int rc = std::system((cli + " " + args + " > /dev/null 2>&1").c_str());
        return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    };
    CHECK(run("--help") == 0);
    CHECK(run("--image " + image.string() + " --tile-preview 12by4 --out-dir " + (dir / "x").string()) == 2);
    CHECK(run("--image " + image.string() + " --embedder magic") == 2);
    const fs::path out = dir / "ok";
    CHECK(run("--image " + image.string() + " --samples 200 --embedder descriptor --k-set 3,4 --seed 2 --overlay "
              "--tile-preview 64x32 --out-dir " + out.string()) == 0);
    const auto r = read_report(out);
    CHECK(r["config"]["k_set"] == nlohmann::json::array({3, 4}));
    CHECK(r["regions"][0]["k_scores"].size() == 2);
    CHECK(fs::exists(out / "tiled_0.png"));
}

}
