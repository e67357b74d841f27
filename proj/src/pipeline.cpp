#include "reptex/pipeline.hpp"

#include <chrono>
#include <set>

#include "reptex/report.hpp"
#include "reptex/rng.hpp"
#include "reptex/texops.hpp"

namespace reptex {

const char* region_mode_name(RegionMode mode) noexcept {
    switch (mode) {
    case RegionMode::Labels: return "labels";
    case RegionMode::Mask: return "mask";
    case RegionMode::MaskFree: return "mask_free";
    }
    return "unknown";
}

RegionMode PipelineConfig::mode() const noexcept {
    if (labels_path) return RegionMode::Labels;
    if (mask_path) return RegionMode::Mask;
    return RegionMode::MaskFree;
}

void PipelineConfig::validate() const {
    sampler.validate();
    training.validate();
    if (k_set.empty()) throw Error(Errc::InvalidConfig, "k_set is empty");
    for (int k : k_set)
        if (k < 2) throw Error(Errc::InvalidConfig, "every k must be >= 2");
    if (kmeans.max_iterations < 1) throw Error(Errc::InvalidConfig, "kmeans_max_iters must be >= 1");
    if (labels_path && mask_path) throw Error(Errc::InvalidConfig, "--labels and --mask are mutually exclusive");
    if (labels_path && !class_map_path) throw Error(Errc::InvalidConfig, "--labels requires --class-map");
    if (!labels_path && !separator_classes.empty())
        throw Error(Errc::InvalidConfig, "--separator-classes only applies with --labels");
    if (tile_preview && (tile_preview->first < 1 || tile_preview->second < 1))
        throw Error(Errc::InvalidConfig, "--tile-preview dimensions must be positive");
    if (workers < 1) throw Error(Errc::InvalidConfig, "worker count must be >= 1");
    if (model_path && embedder != EmbedderKind::Autoencoder)
        throw Error(Errc::InvalidConfig, "a model file only applies to the autoencoder embedder");
}

int exit_status(Errc code) noexcept {
    switch (code) {
    case Errc::InvalidConfig:
    case Errc::UnknownClass:
    case Errc::UnreadableFile:
    case Errc::UnsupportedFormat:
    case Errc::ZeroDimension:
    case Errc::UnknownLabelValue:
        return 2;
    default:
        return 3;
    }
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
    return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

template <typename Fn>
auto run_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const Error& e) {
        throw StageError(stage, e);
    }
}

struct PlannedRegion {
    int id;
    Rect box;
    std::size_t pixels;
    std::vector<std::string> separators;
    MaskRaster mask;
};

std::vector<PlannedRegion> plan_regions(const RasterImage& image, const RegionSource& source,
                                        const PipelineConfig& cfg, PipelineResult& out) {
    std::vector<PlannedRegion> planned;
    const int w = image.width(), h = image.height();
    if (source.labels) {
        const LabelRaster& labels = *source.labels;
        if (labels.width() != w || labels.height() != h)
            throw Error(Errc::InvalidConfig, "label raster dimensions differ from the image");
        const ClassId background = labels.class_id(cfg.background_class);
        std::set<ClassId> separators;
        for (const auto& name : cfg.separator_classes) separators.insert(labels.class_id(name));
        for (Subarea& sub : find_subareas(labels, background, separators)) {
            if (sub.size() < min_subarea_pixels(cfg.sampler.min_side)) {
                out.skipped.push_back({sub.id, sub.size(), "fewer than 2*min_side^2 pixels"});
                continue;
            }
            std::vector<std::string> names;
            for (ClassId c : sub.bordering_separators) names.push_back(labels.class_name(c));
            planned.push_back({sub.id, sub.bounding_box, sub.size(), std::move(names), subarea_mask(sub, w, h)});
        }
        if (planned.empty()) throw Error(Errc::MaskEmpty, "no subarea is large enough to host a crop");
    } else if (source.mask) {
        if (source.mask->width() != w || source.mask->height() != h)
            throw Error(Errc::InvalidConfig, "mask dimensions differ from the image");
        planned.push_back({0, Rect{0, 0, w, h}, source.mask->count(), {}, *source.mask});
    } else {
        planned.push_back({0, Rect{0, 0, w, h}, static_cast<std::size_t>(w) * h, {}, MaskRaster(w, h, true)});
    }
    return planned;
}

void process_region(const RasterImage& image, PlannedRegion& plan, const PipelineConfig& cfg,
                    const std::optional<EmbedderModel>& preset, const RasterImage* truth, RegionResult& r) {
    r.subarea_id = plan.id;
    r.bounding_box = plan.box;
    r.pixel_count = plan.pixels;
    r.bordering_separators = plan.separators;
    r.mask = std::move(plan.mask);
    const auto region_tag = static_cast<std::uint64_t>(plan.id);

    auto t0 = Clock::now();
    SamplerConfig sampler = cfg.sampler;
    sampler.seed = derive_seed(cfg.seed, derive_seed(tag_of("sampler"), region_tag));
    r.candidates = run_stage("sample", [&] { return sample_candidates(image, r.mask, sampler, plan.id, cfg.workers); });
    r.timing_ms["sample"] = elapsed_ms(t0);

    t0 = Clock::now();
    r.model = run_stage("embed", [&] {
        if (cfg.embedder == EmbedderKind::Descriptor) return EmbedderModel::descriptor();
        if (preset) return *preset;
        return train_autoencoder(std::span<const Candidate>(r.candidates), cfg.training,
                                 derive_seed(cfg.seed, derive_seed(tag_of("train"), region_tag)));
    });
    r.timing_ms["train"] = elapsed_ms(t0);

    t0 = Clock::now();
    const auto embeddings = run_stage("embed", [&] { return embed_candidates(r.model, r.candidates, cfg.workers); });
    r.timing_ms["embed"] = elapsed_ms(t0);

    t0 = Clock::now();
    r.clustering = run_stage("cluster", [&] {
        return select_k(embeddings, cfg.k_set, derive_seed(cfg.seed, derive_seed(tag_of("kmeans"), region_tag)),
                        cfg.kmeans, cfg.workers);
    });
    r.timing_ms["cluster"] = elapsed_ms(t0);

    t0 = Clock::now();
    r.selection = run_stage("select", [&] { return select(r.candidates, embeddings, r.clustering.model); });
    r.timing_ms["select"] = elapsed_ms(t0);

    if (truth) {
        r.ncc_plain = ncc_score(r.candidate(r.selection.chosen_plain).patch, *truth);
        r.ncc_weighted = ncc_score(r.candidate(r.selection.chosen_weighted).patch, *truth);
    }
}

void extract_into(const RasterImage& image, const RegionSource& source, const PipelineConfig& cfg,
                  const RasterImage* truth, PipelineResult& out) {
    run_stage("config", [&] { cfg.validate(); });
    out.mode = source.labels ? RegionMode::Labels : source.mask ? RegionMode::Mask : RegionMode::MaskFree;
    out.image_width = image.width();
    out.image_height = image.height();

    std::optional<EmbedderModel> preset;
    if (cfg.embedder == EmbedderKind::Autoencoder && cfg.model_path) {
        preset = run_stage("load", [&] { return load_model(*cfg.model_path); });
        if (preset->kind != EmbedderKind::Autoencoder)
            throw StageError("load", Error(Errc::InvalidConfig, "model file does not hold an autoencoder"));
    }

    auto planned = run_stage("regions", [&] { return plan_regions(image, source, cfg, out); });
    for (PlannedRegion& plan : planned) {
        out.regions.emplace_back();
        process_region(image, plan, cfg, preset, truth, out.regions.back());
    }

    if (truth) {
        std::vector<SelectionResult> results;
        std::vector<std::vector<Candidate>> candidates;
        for (const RegionResult& r : out.regions) {
            results.push_back(r.selection);
            candidates.push_back(r.candidates);
        }
        out.stats = corpus_stats(results, candidates);
    }
}

} // namespace

PipelineResult extract(const RasterImage& image, const RegionSource& source, const PipelineConfig& cfg,
                       const RasterImage* truth_tile) {
    PipelineResult out;
    extract_into(image, source, cfg, truth_tile, out);
    return out;
}

int run_pipeline(const PipelineConfig& cfg) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    const auto report_path = cfg.out_dir / "report.json";

    PipelineResult result;
    std::optional<ReportError> failure;
    int status = 0;
    try {
        const auto inputs = run_stage("load", [&] {
            cfg.validate();
            RegionSource source;
            RasterImage image = load_image(cfg.image_path);
            if (cfg.mode() == RegionMode::Labels)
                source.labels = load_labels(*cfg.labels_path, load_class_map(*cfg.class_map_path));
            else if (cfg.mode() == RegionMode::Mask)
                source.mask = load_mask(*cfg.mask_path);
            std::optional<RasterImage> truth;
            if (cfg.eval_truth) truth = load_image(*cfg.eval_truth);
            return std::tuple{std::move(image), std::move(source), std::move(truth)};
        });
        const auto& [image, source, truth] = inputs;
        extract_into(image, source, cfg, truth ? &*truth : nullptr, result);

        run_stage("write", [&] {
            if (ec) throw Error(Errc::UnwritableOutput, "cannot create " + cfg.out_dir.string());
            for (RegionResult& r : result.regions) {
                const auto t0 = Clock::now();
                const RegionFiles files = region_files(cfg, r.subarea_id);
                const Candidate& weighted = r.candidate(r.selection.chosen_weighted);
                save_image(weighted.patch, cfg.out_dir / files.texture_weighted);
                save_image(r.candidate(r.selection.chosen_plain).patch, cfg.out_dir / files.texture_plain);
                if (files.overlay)
                    save_image(render_cluster_overlay(image, r.candidates, r.clustering.model, r.selection),
                               cfg.out_dir / *files.overlay);
                if (files.tiled)
                    save_image(tile_texture(weighted.patch, cfg.tile_preview->first, cfg.tile_preview->second),
                               cfg.out_dir / *files.tiled);
                if (files.model) save_model(r.model, cfg.out_dir / *files.model);
                r.timing_ms["write"] = elapsed_ms(t0);
            }
        });
    } catch (const StageError& e) {
        failure = ReportError{e.stage(), errc_name(e.code()), e.what()};
        status = exit_status(e.code());
    }

    try {
        if (ec) throw Error(Errc::UnwritableOutput, "cannot create " + cfg.out_dir.string());
        write_report(build_report(cfg, &result, failure), report_path);
    } catch (const Error&) {
        return status != 0 ? status : 3;
    }
    return status;
}

} // namespace reptex
