#include <iostream>

#include <CLI11.hpp>

#include "reptex/evalkit.hpp"

// Writes a synthetic periodic image, its ground-truth tile and noise mask.
int main(int argc, char** argv) {
    CLI::App app{"Generate a synthetic tiled brick image"};
    int tile = 32, size = 512, blocks = 0, block_size = 16;
    double jitter = 0.02;
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    app.add_option("--tile", tile, "tile side")->capture_default_str();
    app.add_option("--size", size, "image side, a multiple of --tile")->capture_default_str();
    app.add_option("--jitter", jitter, "uniform noise amplitude")->capture_default_str();
    app.add_option("--blocks", blocks, "contamination block count")->capture_default_str();
    app.add_option("--block-size", block_size, "contamination block side")->capture_default_str();
    app.add_option("--seed", seed, "seed")->capture_default_str();
    app.add_option("--out-dir", out_dir, "output directory")->capture_default_str();
    CLI11_PARSE(app, argc, argv);

    try {
        reptex::SynthSpec spec;
        spec.tile = reptex::make_brick_tile(tile, seed);
        spec.reps_x = spec.reps_y = size / tile;
        spec.jitter_amp = jitter;
        spec.seed = seed;
        if (blocks > 0) spec.contamination = reptex::Contamination{block_size, blocks, {{0, 0, 0}, {128, 128, 128}}};
        const reptex::SynthImage s = reptex::generate_tiled_image(spec);
        const std::filesystem::path dir = out_dir;
        std::filesystem::create_directories(dir);
        reptex::save_image(s.image, dir / "image.png");
        reptex::save_image(s.truth_tile, dir / "truth.png");
        reptex::save_mask(s.noise_mask, dir / "noise_mask.png");
    } catch (const reptex::Error& e) {
        std::cerr << e.what() << '\n';
        return 2;
    }
    return 0;
}
