#include <iostream>
#include <regex>
#include <thread>

#include <CLI11.hpp>

#include "reptex/pipeline.hpp"

namespace {

std::pair<int, int> parse_dims(const std::string& text) {
    static const std::regex re(R"((\d+)[xX](\d+))");
    std::smatch m;
    if (!std::regex_match(text, m, re))
        throw reptex::Error(reptex::Errc::InvalidConfig, "--tile-preview expects WxH, got '" + text + "'");
    return {std::stoi(m[1]), std::stoi(m[2])};
}

} // namespace

int main(int argc, char** argv) {
    reptex::PipelineConfig cfg;
    CLI::App app{"Extract a representative region texture from a repetitive image"};
    app.set_config("--config", "", "TOML/INI file with option values");

    std::string image, labels, class_map, mask, model, eval_truth, embedder = "autoencoder", tile_preview;
    std::string out_dir = ".";
    std::vector<std::string> separators;
    std::vector<int> k_set = cfg.k_set;
    int threads = 1;

    app.add_option("--image", image, "input RGB image (PNG)")->required();
    app.add_option("--labels", labels, "label raster (PNG, one class per pixel value)");
    app.add_option("--class-map", class_map, "JSON object from pixel value to class name");
    app.add_option("--background-class", cfg.background_class, "class sampled as background")
        ->capture_default_str();
    app.add_option("--separator-classes", separators, "classes reported as subarea separators")->delimiter(',');
    app.add_option("--mask", mask, "binary background mask (PNG)");
    app.add_option("--samples", cfg.sampler.sample_count, "candidates to accept")->capture_default_str();
    app.add_option("--min-side", cfg.sampler.min_side, "smallest crop side")->capture_default_str();
    app.add_option("--max-side", cfg.sampler.max_side, "largest crop side")->capture_default_str();
    app.add_option("--coverage", cfg.sampler.coverage_threshold, "minimum mask coverage of a crop")
        ->capture_default_str();
    app.add_option("--max-attempts", cfg.sampler.max_attempts, "sampling attempt budget")->capture_default_str();
    app.add_option("--seed", cfg.seed, "global seed")->capture_default_str();
    app.add_option("--embedder", embedder, "embedding method")
        ->check(CLI::IsMember({"autoencoder", "descriptor"}))
        ->capture_default_str();
    app.add_option("--epochs", cfg.training.epochs, "autoencoder training epochs")->capture_default_str();
    app.add_option("--batch-size", cfg.training.batch_size, "autoencoder batch size")->capture_default_str();
    app.add_option("--learning-rate", cfg.training.learning_rate, "Adam step size")->capture_default_str();
    app.add_option("--canonical-size", cfg.training.canonical_size, "patch size fed to the network")
        ->capture_default_str();
    app.add_option("--model", model, "pre-trained autoencoder file; skips training");
    app.add_option("--k-set", k_set, "cluster counts tried")->delimiter(',')->capture_default_str();
    app.add_option("--kmeans-max-iters", cfg.kmeans.max_iterations, "Lloyd iteration cap")->capture_default_str();
    app.add_option("--out-dir", out_dir, "output directory")->capture_default_str();
    app.add_flag("--overlay", cfg.overlay, "write overlay_<id>.png");
    app.add_option("--tile-preview", tile_preview, "write tiled_<id>.png of size WxH");
    app.add_option("--eval-truth", eval_truth, "ground-truth tile for NCC scoring");
    app.add_flag("--save-models", cfg.save_models, "write model_<id>.bin for trained autoencoders");
    app.add_flag("--timing", cfg.report_timing, "add per-stage wall times to the report");
    app.add_option("--threads", threads, "worker threads (0 = hardware concurrency)")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    cfg.image_path = image;
    if (!labels.empty()) cfg.labels_path = labels;
    if (!class_map.empty()) cfg.class_map_path = class_map;
    if (!mask.empty()) cfg.mask_path = mask;
    if (!model.empty()) cfg.model_path = model;
    if (!eval_truth.empty()) cfg.eval_truth = eval_truth;
    cfg.separator_classes = separators;
    cfg.k_set = k_set;
    cfg.out_dir = out_dir;
    cfg.embedder = embedder == "descriptor" ? reptex::EmbedderKind::Descriptor : reptex::EmbedderKind::Autoencoder;
    cfg.workers = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    try {
        if (!tile_preview.empty()) cfg.tile_preview = parse_dims(tile_preview);
    } catch (const reptex::Error& e) {
        std::cerr << e.what() << '\n';
        return 2;
    }

    const int rc = reptex::run_pipeline(cfg);
    if (rc != 0) std::cerr << "failed; see " << (cfg.out_dir / "report.json").string() << '\n';
    return rc;
}
