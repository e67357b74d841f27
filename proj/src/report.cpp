#include "reptex/report.hpp"

#include <cmath>
#include <fstream>

namespace reptex {

namespace {

OrderedJson real(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

OrderedJson rect_json(const Rect& r) {
    return OrderedJson{{"x", r.x}, {"y", r.y}, {"w", r.w}, {"h", r.h}};
}

OrderedJson optional_path(const std::optional<std::filesystem::path>& p) {
    if (!p) return nullptr;
    return p->generic_string();
}

OrderedJson config_echo(const PipelineConfig& cfg) {
    OrderedJson c;
    c["image"] = cfg.image_path.generic_string();
    c["labels"] = optional_path(cfg.labels_path);
    c["class_map"] = optional_path(cfg.class_map_path);
    c["background_class"] = cfg.background_class;
    c["separator_classes"] = cfg.separator_classes;
    c["mask"] = optional_path(cfg.mask_path);
    c["mode"] = region_mode_name(cfg.mode());
    c["samples"] = cfg.sampler.sample_count;
    c["min_side"] = cfg.sampler.min_side;
    c["max_side"] = cfg.sampler.max_side;
    c["coverage"] = cfg.sampler.coverage_threshold;
    c["max_attempts"] = cfg.sampler.max_attempts;
    c["embedder"] = cfg.embedder == EmbedderKind::Autoencoder ? "autoencoder" : "descriptor";
    if (cfg.embedder == EmbedderKind::Autoencoder) {
        const TrainingConfig& t = cfg.training;
        const AugmentationSpec& a = t.augmentation;
        c["training"] = OrderedJson{{"canonical_size", t.canonical_size},
                                    {"epochs", t.epochs},
                                    {"batch_size", t.batch_size},
                                    {"learning_rate", t.learning_rate},
                                    {"min_candidates", t.min_candidates},
                                    {"augmentation",
                                     {{"flip_prob", a.flip_prob},
                                      {"translate_max", a.translate_max},
                                      {"scale_lo", a.scale_lo},
                                      {"scale_hi", a.scale_hi},
                                      {"crop_jitter", a.crop_jitter}}}};
        c["model"] = optional_path(cfg.model_path);
    }
    c["k_set"] = cfg.k_set;
    c["kmeans_max_iters"] = cfg.kmeans.max_iterations;
    c["seed"] = cfg.seed;
    c["overlay"] = cfg.overlay;
    if (cfg.tile_preview)
        c["tile_preview"] = OrderedJson{{"w", cfg.tile_preview->first}, {"h", cfg.tile_preview->second}};
    else
        c["tile_preview"] = nullptr;
    c["eval_truth"] = optional_path(cfg.eval_truth);
    c["save_models"] = cfg.save_models;
    return c;
}

OrderedJson region_json(const PipelineConfig& cfg, const RegionResult& r) {
    OrderedJson j;
    j["subarea_id"] = r.subarea_id;
    j["bounding_box"] = rect_json(r.bounding_box);
    j["pixel_count"] = r.pixel_count;
    j["bordering_separators"] = r.bordering_separators;
    j["candidate_count"] = r.candidates.size();

    OrderedJson emb;
    emb["kind"] = r.model.kind == EmbedderKind::Autoencoder ? "autoencoder" : "descriptor";
    emb["embed_dim"] = r.model.embed_dim();
    if (r.model.kind == EmbedderKind::Autoencoder) {
        emb["initial_loss"] = real(r.model.initial_loss);
        OrderedJson losses = OrderedJson::array();
        for (double l : r.model.epoch_losses) losses.push_back(real(l));
        emb["epoch_losses"] = std::move(losses);
    }
    j["embedder"] = std::move(emb);

    OrderedJson scores = OrderedJson::array();
    for (const KScore& s : r.clustering.scores)
        scores.push_back(OrderedJson{{"k", s.k}, {"dbi", real(s.dbi)}, {"inertia", real(s.inertia)}});
    j["k_scores"] = std::move(scores);
    j["selected_k"] = r.clustering.model.k;
    j["kmeans_iterations"] = r.clustering.model.iterations;
    j["cluster_sizes"] = r.clustering.model.cluster_sizes();
    j["largest_cluster_id"] = r.selection.cluster_id;

    const SelectionResult& s = r.selection;
    OrderedJson members = OrderedJson::array();
    for (std::size_t i = 0; i < s.member_indices.size(); ++i) {
        const Candidate& c = r.candidate(s.member_indices[i]);
        members.push_back(OrderedJson{{"index", c.index},
                                      {"center", {c.center.x, c.center.y}},
                                      {"side", c.side},
                                      {"D", real(s.distances[i])},
                                      {"T", real(s.width_factors[i])},
                                      {"B", real(s.boundary_factors[i])},
                                      {"V", real(s.weights[i])},
                                      {"W", real(s.weighted_distances[i])}});
    }
    j["members"] = std::move(members);

    OrderedJson chosen;
    for (const auto& [name, index] : {std::pair{"plain", s.chosen_plain}, std::pair{"weighted", s.chosen_weighted},
                                      std::pair{"median", s.chosen_median}}) {
        const Candidate& c = r.candidate(index);
        chosen[name] = OrderedJson{{"index", index}, {"rect", rect_json(c.rect())}};
    }
    j["chosen"] = std::move(chosen);

    const RegionFiles files = region_files(cfg, r.subarea_id);
    OrderedJson f;
    f["texture_weighted"] = files.texture_weighted;
    f["texture_plain"] = files.texture_plain;
    f["overlay"] = files.overlay ? OrderedJson(*files.overlay) : OrderedJson(nullptr);
    f["tiled"] = files.tiled ? OrderedJson(*files.tiled) : OrderedJson(nullptr);
    f["model"] = files.model ? OrderedJson(*files.model) : OrderedJson(nullptr);
    j["files"] = std::move(f);

    if (r.ncc_plain || r.ncc_weighted) {
        j["eval"] = OrderedJson{{"ncc_plain", r.ncc_plain ? real(*r.ncc_plain) : OrderedJson(nullptr)},
                                {"ncc_weighted", r.ncc_weighted ? real(*r.ncc_weighted) : OrderedJson(nullptr)}};
    }
    if (cfg.report_timing) {
        OrderedJson t;
        for (const char* stage : {"sample", "train", "embed", "cluster", "select", "write"}) {
            const auto it = r.timing_ms.find(stage);
            if (it != r.timing_ms.end()) t[stage] = it->second;
        }
        j["timing_ms"] = std::move(t);
    }
    return j;
}

} // namespace

RegionFiles region_files(const PipelineConfig& cfg, int subarea_id) {
    const std::string id = std::to_string(subarea_id);
    RegionFiles f{"texture_weighted_" + id + ".png", "texture_plain_" + id + ".png", {}, {}, {}};
    if (cfg.overlay) f.overlay = "overlay_" + id + ".png";
    if (cfg.tile_preview) f.tiled = "tiled_" + id + ".png";
    if (cfg.save_models && cfg.embedder == EmbedderKind::Autoencoder) f.model = "model_" + id + ".bin";
    return f;
}

OrderedJson build_report(const PipelineConfig& cfg, const PipelineResult* result,
                         const std::optional<ReportError>& error) {
    OrderedJson j;
    j["version"] = kReportVersion;
    j["status"] = error ? "error" : "ok";
    j["config"] = config_echo(cfg);
    if (result) {
        j["mode"] = region_mode_name(result->mode);
        j["image"] = OrderedJson{{"width", result->image_width}, {"height", result->image_height}};
        OrderedJson regions = OrderedJson::array();
        for (const RegionResult& r : result->regions) {
            // A region interrupted by an error has no selection yet.
            if (r.selection.chosen_weighted < 0) continue;
            regions.push_back(region_json(cfg, r));
        }
        j["regions"] = std::move(regions);
        OrderedJson skipped = OrderedJson::array();
        for (const SkippedRegion& s : result->skipped)
            skipped.push_back(OrderedJson{{"subarea_id", s.subarea_id}, {"pixel_count", s.pixel_count},
                                          {"reason", s.reason}});
        j["skipped_regions"] = std::move(skipped);
        if (result->stats) {
            const CorpusStats& s = *result->stats;
            j["corpus_stats"] = OrderedJson{{"images", s.images},
                                            {"plain_mean_side", real(s.plain_mean_side)},
                                            {"weighted_mean_side", real(s.weighted_mean_side)},
                                            {"plain_boundary_similarity", real(s.plain_boundary_similarity)},
                                            {"weighted_boundary_similarity", real(s.weighted_boundary_similarity)}};
        }
    }
    if (error)
        j["error"] = OrderedJson{{"stage", error->stage}, {"code", error->code}, {"message", error->message}};
    else
        j["error"] = nullptr;
    return j;
}

void write_report(const OrderedJson& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::UnwritableOutput, "cannot open " + path.string());
    out << report.dump(2) << '\n';
    if (!out.flush()) throw Error(Errc::UnwritableOutput, "cannot write " + path.string());
}

} // namespace reptex
