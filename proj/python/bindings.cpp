#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "reptex/pipeline.hpp"
#include "reptex/texops.hpp"

namespace py = pybind11;
using namespace reptex;

namespace {

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using F64Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// (H, W, 3) uint8 <-> RasterImage.
RasterImage to_image(const U8Array& a) {
    if (a.ndim() != 3 || a.shape(2) != 3) throw py::value_error("expected an (H, W, 3) uint8 array");
    const auto h = static_cast<int>(a.shape(0)), w = static_cast<int>(a.shape(1));
    return RasterImage(w, h, std::vector<std::uint8_t>(a.data(), a.data() + a.size()));
}

U8Array from_image(const RasterImage& img) {
    U8Array out({img.height(), img.width(), 3});
    std::copy(img.channels().begin(), img.channels().end(), out.mutable_data());
    return out;
}

MaskRaster to_mask(const py::array_t<bool, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2) throw py::value_error("expected an (H, W) boolean array");
    const auto h = static_cast<int>(a.shape(0)), w = static_cast<int>(a.shape(1));
    MaskRaster m(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) m.set(x, y, a.at(y, x));
    return m;
}

py::array_t<bool> from_mask(const MaskRaster& m) {
    py::array_t<bool> out({m.height(), m.width()});
    auto v = out.mutable_unchecked<2>();
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x) v(y, x) = m.at(x, y);
    return out;
}

std::vector<EmbeddingVector> to_vectors(const F64Array& a) {
    if (a.ndim() != 2) throw py::value_error("expected an (n, d) float array");
    std::vector<EmbeddingVector> out(static_cast<std::size_t>(a.shape(0)));
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i].values.assign(a.data() + i * a.shape(1), a.data() + (i + 1) * a.shape(1));
    return out;
}

F64Array from_vectors(const std::vector<EmbeddingVector>& v) {
    const std::size_t d = v.empty() ? 0 : v.front().size();
    F64Array out({v.size(), d});
    for (std::size_t i = 0; i < v.size(); ++i) std::copy(v[i].values.begin(), v[i].values.end(), out.mutable_data() + i * d);
    return out;
}

py::tuple rect_tuple(const Rect& r) { return py::make_tuple(r.x, r.y, r.w, r.h); }

py::dict candidate_dict(const Candidate& c) {
    py::dict d;
    d["index"] = c.index;
    d["center"] = py::make_tuple(c.center.x, c.center.y);
    d["side"] = c.side;
    d["rect"] = rect_tuple(c.rect());
    d["mask_coverage"] = c.mask_coverage;
    d["patch"] = from_image(c.patch);
    return d;
}

py::dict cluster_dict(const ClusterModel& m) {
    py::dict d;
    d["k"] = m.k;
    d["centroids"] = from_vectors(m.centroids);
    d["assignments"] = m.assignments;
    d["inertia"] = m.inertia;
    d["dbi"] = m.dbi;
    d["iterations"] = m.iterations;
    d["inertia_history"] = m.inertia_history;
    return d;
}

py::dict selection_dict(const SelectionResult& s) {
    py::dict d;
    d["cluster_id"] = s.cluster_id;
    d["member_indices"] = s.member_indices;
    d["D"] = s.distances;
    d["T"] = s.width_factors;
    d["B"] = s.boundary_factors;
    d["V"] = s.weights;
    d["W"] = s.weighted_distances;
    d["chosen_plain"] = s.chosen_plain;
    d["chosen_weighted"] = s.chosen_weighted;
    d["chosen_median"] = s.chosen_median;
    return d;
}

EmbedderKind embedder_kind(const std::string& name) {
    if (name == "autoencoder") return EmbedderKind::Autoencoder;
    if (name == "descriptor") return EmbedderKind::Descriptor;
    throw py::value_error("embedder must be 'autoencoder' or 'descriptor'");
}

PipelineConfig make_config(int samples, int min_side, int max_side, double coverage, std::uint64_t seed,
                           const std::string& embedder, int epochs, const std::vector<int>& k_set, int workers) {
    PipelineConfig cfg;
    cfg.sampler.sample_count = samples;
    cfg.sampler.min_side = min_side;
    cfg.sampler.max_side = max_side;
    cfg.sampler.coverage_threshold = coverage;
    cfg.sampler.max_attempts = std::max(cfg.sampler.max_attempts, 20 * samples);
    cfg.seed = seed;
    cfg.embedder = embedder_kind(embedder);
    cfg.training.epochs = epochs;
    cfg.k_set = k_set;
    cfg.workers = workers;
    return cfg;
}

} // namespace

PYBIND11_MODULE(_reptex, m) {
    m.doc() = "Representative texture extraction";

    static py::exception<Error> error(m, "ReptexError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const StageError& e) {
            PyErr_SetObject(error.ptr(), py::make_tuple(e.what(), errc_name(e.code()), e.stage()).ptr());
        } catch (const Error& e) {
            PyErr_SetObject(error.ptr(), py::make_tuple(e.what(), errc_name(e.code())).ptr());
        }
    });

    m.def("load_image", [](const std::filesystem::path& p) { return from_image(load_image(p)); }, py::arg("path"));
    m.def("save_image", [](const U8Array& a, const std::filesystem::path& p) { save_image(to_image(a), p); },
          py::arg("image"), py::arg("path"));

    m.def("make_brick_tile", [](int size, std::uint64_t seed) { return from_image(make_brick_tile(size, seed)); },
          py::arg("size") = 32, py::arg("seed") = 0);
    m.def(
        "generate_tiled_image",
        [](const U8Array& tile, int reps_x, int reps_y, double jitter, int blocks, int block_size, std::uint64_t seed) {
            SynthSpec spec;
            spec.tile = to_image(tile);
            spec.reps_x = reps_x;
            spec.reps_y = reps_y;
            spec.jitter_amp = jitter;
            spec.seed = seed;
            if (blocks > 0) spec.contamination = Contamination{block_size, blocks, {{0, 0, 0}, {128, 128, 128}}};
            const SynthImage s = generate_tiled_image(spec);
            py::dict d;
            d["image"] = from_image(s.image);
            d["noise_mask"] = from_mask(s.noise_mask);
            d["truth_tile"] = from_image(s.truth_tile);
            return d;
        },
        py::arg("tile"), py::arg("reps_x"), py::arg("reps_y"), py::arg("jitter") = 0.0, py::arg("blocks") = 0,
        py::arg("block_size") = 16, py::arg("seed") = 0);

    m.def(
        "sample_candidates",
        [](const U8Array& image, py::object mask, int samples, int min_side, int max_side, double coverage,
           std::uint64_t seed, int workers) {
            const RasterImage img = to_image(image);
            const MaskRaster mk = mask.is_none() ? MaskRaster(img.width(), img.height(), true)
                                                 : to_mask(mask.cast<py::array_t<bool>>());
            SamplerConfig cfg;
            cfg.sample_count = samples;
            cfg.min_side = min_side;
            cfg.max_side = max_side;
            cfg.coverage_threshold = coverage;
            cfg.max_attempts = std::max(cfg.max_attempts, 20 * samples);
            cfg.seed = seed;
            py::list out;
            for (const Candidate& c : sample_candidates(img, mk, cfg, 0, workers)) out.append(candidate_dict(c));
            return out;
        },
        py::arg("image"), py::arg("mask") = py::none(), py::arg("samples") = 10000, py::arg("min_side") = 16,
        py::arg("max_side") = 48, py::arg("coverage") = 0.9, py::arg("seed") = 0, py::arg("workers") = 1);

    m.def("descriptor_embed",
          [](const U8Array& patch) { return from_vectors({descriptor_embed(to_image(patch))}); }, py::arg("patch"));

    m.def(
        "kmeans",
        [](const F64Array& vectors, int k, std::uint64_t seed, int max_iterations) {
            return cluster_dict(kmeans(to_vectors(vectors), k, seed, KMeansOptions{max_iterations}));
        },
        py::arg("vectors"), py::arg("k"), py::arg("seed") = 0, py::arg("max_iterations") = 300);
    m.def(
        "select_k",
        [](const F64Array& vectors, const std::vector<int>& k_set, std::uint64_t seed) {
            const KSelection s = select_k(to_vectors(vectors), k_set, seed);
            py::list scores;
            for (const KScore& sc : s.scores) scores.append(py::make_tuple(sc.k, sc.dbi, sc.inertia));
            py::dict d = cluster_dict(s.model);
            d["scores"] = scores;
            return d;
        },
        py::arg("vectors"), py::arg("k_set") = std::vector<int>{3, 4, 5, 6}, py::arg("seed") = 0);
    m.def(
        "davies_bouldin",
        [](const F64Array& vectors, const std::vector<int>& labels, int k) {
            const auto v = to_vectors(vectors);
            if (labels.size() != v.size()) throw py::value_error("one label per vector");
            ClusterModel model;
            model.k = k;
            model.assignments = labels;
            model.centroids.assign(k, EmbeddingVector{std::vector<double>(v.empty() ? 0 : v.front().size(), 0.0)});
            const auto sizes = model.cluster_sizes();
            for (std::size_t i = 0; i < v.size(); ++i)
                for (std::size_t d = 0; d < v[i].size(); ++d)
                    model.centroids[labels[i]].values[d] += v[i].values[d] / sizes[labels[i]];
            return davies_bouldin(v, model);
        },
        py::arg("vectors"), py::arg("labels"), py::arg("k"));

    m.def("width_factor", py::overload_cast<int, int>(&width_factor), py::arg("width"), py::arg("height"));
    m.def("boundary_factor", [](const U8Array& patch) { return boundary_factor(to_grayscale(to_image(patch))); },
          py::arg("patch"));
    m.def("ncc_score", [](const U8Array& a, const U8Array& b) { return ncc_score(to_image(a), to_image(b)); },
          py::arg("extracted"), py::arg("truth_tile"));
    m.def("tile_texture", [](const U8Array& t, int w, int h) { return from_image(tile_texture(to_image(t), w, h)); },
          py::arg("texture"), py::arg("width"), py::arg("height"));

    m.def(
        "extract",
        [](const U8Array& image, py::object mask, int samples, int min_side, int max_side, double coverage,
           std::uint64_t seed, const std::string& embedder, int epochs, const std::vector<int>& k_set, int workers) {
            const PipelineConfig cfg =
                make_config(samples, min_side, max_side, coverage, seed, embedder, epochs, k_set, workers);
            RegionSource source;
            if (!mask.is_none()) source.mask = to_mask(mask.cast<py::array_t<bool>>());
            PipelineResult r;
            {
                py::gil_scoped_release release;
                r = extract(to_image(image), source, cfg);
            }
            py::list regions;
            for (const RegionResult& region : r.regions) {
                py::dict d;
                d["subarea_id"] = region.subarea_id;
                d["bounding_box"] = rect_tuple(region.bounding_box);
                d["candidate_count"] = region.candidates.size();
                d["selected_k"] = region.clustering.model.k;
                d["selection"] = selection_dict(region.selection);
                d["texture_plain"] = from_image(region.candidate(region.selection.chosen_plain).patch);
                d["texture_weighted"] = from_image(region.candidate(region.selection.chosen_weighted).patch);
                d["rect_plain"] = rect_tuple(region.candidate(region.selection.chosen_plain).rect());
                d["rect_weighted"] = rect_tuple(region.candidate(region.selection.chosen_weighted).rect());
                regions.append(d);
            }
            return regions;
        },
        py::arg("image"), py::arg("mask") = py::none(), py::arg("samples") = 10000, py::arg("min_side") = 16,
        py::arg("max_side") = 48, py::arg("coverage") = 0.9, py::arg("seed") = 0, py::arg("embedder") = "autoencoder",
        py::arg("epochs") = 30, py::arg("k_set") = std::vector<int>{3, 4, 5, 6}, py::arg("workers") = 1);

    m.def(
        "run_pipeline",
        [](const std::filesystem::path& image, const std::filesystem::path& out_dir, py::object mask, int samples,
           std::uint64_t seed, const std::string& embedder, int epochs, const std::vector<int>& k_set, bool overlay,
           int workers) {
            PipelineConfig cfg = make_config(samples, 16, 48, 0.9, seed, embedder, epochs, k_set, workers);
            cfg.image_path = image;
            cfg.out_dir = out_dir;
            if (!mask.is_none()) cfg.mask_path = mask.cast<std::filesystem::path>();
            cfg.overlay = overlay;
            py::gil_scoped_release release;
            return run_pipeline(cfg);
        },
        py::arg("image"), py::arg("out_dir"), py::arg("mask") = py::none(), py::arg("samples") = 10000,
        py::arg("seed") = 0, py::arg("embedder") = "autoencoder", py::arg("epochs") = 30,
        py::arg("k_set") = std::vector<int>{3, 4, 5, 6}, py::arg("overlay") = false, py::arg("workers") = 1);
}
