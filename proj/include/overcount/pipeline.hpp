#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "overcount/analytics.hpp"
#include "overcount/aoi_io.hpp"
#include "overcount/detail/text.hpp"
#include "overcount/detection.hpp"
#include "overcount/error.hpp"
#include "overcount/evaluation.hpp"
#include "overcount/image.hpp"
#include "overcount/ingestion.hpp"
#include "overcount/interchange.hpp"
#include "overcount/merger.hpp"
#include "overcount/tiler.hpp"

namespace overcount {

struct PipelineConfig {
    std::string manifest;
    std::string locations;
    std::string aoi;
    std::string detector = "blob";  // blob | oracle | file
    std::string detections_in;
    std::string annotations;  // directory of <scene_id>.txt COWC point files
    std::string out_dir = ".";

    int tile_size = 256;
    int tile_stride = 192;
    double nms_iou = 0.3;
    double match_iou = 0.25;
    double box_size = 32.0;
    std::uint64_t seed = 0;
    bool seam_filter = true;
    bool include_grayscale = false;
    DetectorConfig blob;

    /// Worker cap; 0 means OVERCOUNT_THREADS or the hardware concurrency.
    unsigned threads = 0;

    void validate() const {
        TileGrid(tile_size, tile_stride);
        if (!(nms_iou > 0.0 && nms_iou <= 1.0)) throw Error("--nms-iou must be in (0, 1]");
        if (!(match_iou > 0.0 && match_iou <= 1.0)) throw Error("--match-iou must be in (0, 1]");
        if (!(box_size >= 2.0)) throw Error("--box-size must be >= 2");
        blob.validate();
    }

    /// Parameters that determine results, one `key=value` per entry, in fixed order.
    std::vector<std::string> parameter_lines() const {
        using detail::format_shortest;
        return {"detector=" + detector,
                "tile_size=" + std::to_string(tile_size),
                "tile_stride=" + std::to_string(tile_stride),
                "nms_iou=" + format_shortest(nms_iou),
                "match_iou=" + format_shortest(match_iou),
                "box_size=" + format_shortest(box_size),
                "seed=" + std::to_string(seed),
                "seam_filter=" + std::string(seam_filter ? "1" : "0"),
                "include_grayscale=" + std::string(include_grayscale ? "1" : "0"),
                "blob_threshold=" + format_shortest(blob.threshold),
                "blob_min_area=" + format_shortest(blob.min_area_px),
                "blob_max_area=" + format_shortest(blob.max_area_px),
                "blob_min_fill=" + format_shortest(blob.min_fill)};
    }

    std::string config_hash() const {
        std::uint64_t h = detail::fnv1a64("");
        for (const auto& l : parameter_lines()) h = detail::fnv1a64(l + "\n", h);
        return "fnv1a64:" + detail::hex64(h);
    }
};

inline unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("OVERCOUNT_THREADS"); env && *env) {
        try {
            const auto v = detail::parse_int(env, "OVERCOUNT_THREADS");
            if (v >= 1) return unsigned(v);
        } catch (const Error&) {
        }
        throw Error("OVERCOUNT_THREADS must be a positive integer");
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(0..n-1) on up to `threads` workers. Callers write results by index so output order
/// never depends on scheduling.
inline void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
    const unsigned workers = unsigned(std::min<std::size_t>(std::max(1u, threads), n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        });
}

/// Tile -> detect -> (seam filter) -> globalize -> NMS for one scene.
template <TileDetector D>
std::vector<Detection> detect_scene(const D& detector, int width, int height, const RgbImage* scene_pixels,
                                    const PipelineConfig& cfg) {
    const TileGrid grid(cfg.tile_size, cfg.tile_stride);
    const auto tiles = plan_tiles(width, height, grid);
    std::vector<Detection> per_tile;
    const RgbImage none;
    for (const auto& tile : tiles) {
        std::vector<Detection> dets;
        if constexpr (D::needs_pixels) {
            if (!scene_pixels) throw Error("detector needs pixels but no image was loaded");
            dets = detector.detect(tile, scene_pixels->crop(tile.x0, tile.y0, tile.width, tile.height));
        } else {
            dets = detector.detect(tile, none);
        }
        for (auto& d : dets) {
            d.frame = Frame::TileLocal;
            d.tile_index = tile.index;
            per_tile.push_back(std::move(d));
        }
    }
    if (cfg.seam_filter) per_tile = drop_seam_truncated(per_tile, tiles, width, height);
    return dedupe(globalize_all(per_tile, tiles), cfg.nms_iou);
}

namespace detail {

inline std::string resolve_relative(const std::string& base_file, const std::string& path) {
    namespace fs = std::filesystem;
    const fs::path p(path);
    if (p.is_absolute()) return path;
    return (fs::path(base_file).parent_path() / p).string();
}

inline std::string annotation_path(const PipelineConfig& cfg, const std::string& scene_id) {
    return (std::filesystem::path(cfg.annotations) / (scene_id + ".txt")).string();
}

inline std::ofstream open_output(const std::string& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    const auto path = (std::filesystem::path(dir) / name).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    return out;
}

inline void write_metadata(std::ostream& out, const std::string& command, const PipelineConfig& cfg,
                           const std::vector<std::pair<std::string, std::string>>& inputs) {
    out << "# overcount " << command << '\n';
    for (const auto& [k, v] : inputs)
        if (!v.empty()) out << "# " << k << '=' << v << '\n';
    for (const auto& l : cfg.parameter_lines()) out << "# " << l << '\n';
    out << "# config_hash=" << cfg.config_hash() << '\n';
}

inline std::map<std::string, std::vector<Detection>> group_by_scene(std::vector<Detection> dets) {
    std::map<std::string, std::vector<Detection>> out;
    for (auto& d : dets) out[d.scene_id].push_back(std::move(d));
    return out;
}

}  // namespace detail

struct SceneError {
    std::string scene_id;
    std::string message;
};

struct CountRun {
    std::vector<CountRecord> records;
    std::vector<Detection> detections;  // merged, scene-global, manifest order
    std::vector<SceneError> errors;
    std::size_t scenes = 0;

    /// Nonzero only when there was work and every scene failed.
    int exit_code() const { return (scenes > 0 && errors.size() == scenes) ? 1 : 0; }
};

/// Counts vehicles per scene and AOI. Per-scene failures are collected, not fatal; malformed
/// top-level inputs throw.
inline CountRun run_count(const PipelineConfig& cfg) {
    cfg.validate();
    if (cfg.manifest.empty()) throw Error("--manifest is required");
    if (cfg.detector != "blob" && cfg.detector != "oracle" && cfg.detector != "file")
        throw Error("--detector must be one of blob, oracle, file");
    if (cfg.detector == "file" && cfg.detections_in.empty()) throw Error("--detector file requires --detections-in");
    if (cfg.detector == "oracle" && cfg.annotations.empty()) throw Error("--detector oracle requires --annotations");

    std::vector<Location> registry;
    ManifestOptions mopts;
    mopts.include_grayscale = cfg.include_grayscale;
    if (!cfg.locations.empty()) {
        registry = read_locations_file(cfg.locations);
        mopts.registry = &registry;
    }
    const auto scenes = read_manifest_file(cfg.manifest, mopts);
    const auto aois = cfg.aoi.empty() ? std::vector<AoiEntry>{} : read_aoi_file(cfg.aoi);
    std::map<std::string, std::vector<Detection>> external;
    if (cfg.detector == "file") external = detail::group_by_scene(read_detections_file(cfg.detections_in));

    struct SceneResult {
        std::vector<CountRecord> records;
        std::vector<Detection> detections;
        std::optional<std::string> error;
    };
    std::vector<SceneResult> results(scenes.size());

    parallel_for(scenes.size(), resolve_threads(cfg.threads), [&](std::size_t i) {
        const Scene& s = scenes[i];
        auto& res = results[i];
        try {
            std::vector<Detection> merged;
            if (cfg.detector == "file") {
                const auto it = external.find(s.scene_id);
                merged = dedupe(it == external.end() ? std::vector<Detection>{} : it->second, cfg.nms_iou);
            } else if (cfg.detector == "oracle") {
                const auto pts = read_cowc_points_file(detail::annotation_path(cfg, s.scene_id));
                const OracleDetector det(cowc_points_to_boxes(s.scene_id, pts, cfg.box_size, s.width, s.height));
                merged = detect_scene(det, s.width, s.height, nullptr, cfg);
            } else {
                const auto image = read_png(detail::resolve_relative(cfg.manifest, s.image_path));
                if (image.width() != s.width || image.height() != s.height)
                    throw Error("image is " + std::to_string(image.width()) + "x" + std::to_string(image.height()) +
                                ", manifest says " + std::to_string(s.width) + "x" + std::to_string(s.height));
                merged = detect_scene(BlobDetector(cfg.blob), s.width, s.height, &image, cfg);
            }
            for (auto& d : merged) d.scene_id = s.scene_id;
            for (const auto& aoi : aois_for_location(aois, s.location_id, s.width, s.height))
                res.records.push_back({s.scene_id, s.location_id, s.capture_date, count_in_aoi(merged, aoi), aoi.name()});
            res.detections = std::move(merged);
        } catch (const std::exception& e) {
            res.records.clear();
            res.detections.clear();
            res.error = e.what();
        }
    });

    CountRun run;
    run.scenes = scenes.size();
    for (std::size_t i = 0; i < scenes.size(); ++i) {
        auto& r = results[i];
        if (r.error) {
            run.errors.push_back({scenes[i].scene_id, *r.error});
            continue;
        }
        std::move(r.records.begin(), r.records.end(), std::back_inserter(run.records));
        std::move(r.detections.begin(), r.detections.end(), std::back_inserter(run.detections));
    }
    return run;
}

/// run_count plus `counts.csv` and `detections.jsonl` in cfg.out_dir.
inline CountRun cmd_count(const PipelineConfig& cfg) {
    auto run = run_count(cfg);
    auto out = detail::open_output(cfg.out_dir, "counts.csv");
    detail::write_metadata(out, "count", cfg,
                           {{"manifest", cfg.manifest}, {"locations", cfg.locations}, {"aoi", cfg.aoi},
                            {"annotations", cfg.annotations}, {"detections_in", cfg.detections_in}});
    out << kCountsHeader << '\n';
    write_count_rows(out, run.records);
    if (!run.errors.empty()) {
        out << "# errors\n";
        for (const auto& e : run.errors) out << "# " << e.scene_id << ": " << e.message << '\n';
    }
    auto dets = detail::open_output(cfg.out_dir, "detections.jsonl");
    write_detections(dets, run.detections);
    return run;
}

struct EvalRun {
    std::vector<EvalRow> rows;
    std::vector<SceneError> skipped;
};

/// Scores --detections-in against per-scene COWC annotations. Detections are NMS-deduplicated
/// per scene first, so raw per-tile outputs and merged outputs evaluate the same way.
inline EvalRun run_eval(const PipelineConfig& cfg) {
    cfg.validate();
    if (cfg.manifest.empty()) throw Error("--manifest is required");
    if (cfg.annotations.empty()) throw Error("eval requires --annotations");
    if (cfg.detections_in.empty()) throw Error("eval requires --detections-in");
    ManifestOptions mopts;
    mopts.include_grayscale = cfg.include_grayscale;
    const auto scenes = read_manifest_file(cfg.manifest, mopts);
    const auto by_scene = detail::group_by_scene(read_detections_file(cfg.detections_in));

    std::vector<std::optional<EvalRow>> rows(scenes.size());
    std::vector<std::optional<std::string>> errs(scenes.size());
    parallel_for(scenes.size(), resolve_threads(cfg.threads), [&](std::size_t i) {
        const auto& s = scenes[i];
        try {
            const auto path = detail::annotation_path(cfg, s.scene_id);
            if (!std::filesystem::exists(path)) throw Error("missing annotations " + path);
            const auto truth =
                cowc_points_to_boxes(s.scene_id, read_cowc_points_file(path), cfg.box_size, s.width, s.height);
            const auto it = by_scene.find(s.scene_id);
            const auto preds = dedupe(it == by_scene.end() ? std::vector<Detection>{} : it->second, cfg.nms_iou);
            rows[i] = evaluate_scene(s.scene_id, preds, truth.boxes, cfg.match_iou);
        } catch (const std::exception& e) {
            errs[i] = e.what();
        }
    });
    EvalRun run;
    for (std::size_t i = 0; i < scenes.size(); ++i) {
        if (rows[i]) run.rows.push_back(std::move(*rows[i]));
        if (errs[i]) run.skipped.push_back({scenes[i].scene_id, *errs[i]});
    }
    return run;
}

inline EvalRun cmd_eval(const PipelineConfig& cfg) {
    auto run = run_eval(cfg);
    auto out = detail::open_output(cfg.out_dir, "eval.csv");
    detail::write_metadata(out, "eval", cfg,
                           {{"manifest", cfg.manifest}, {"annotations", cfg.annotations},
                            {"detections_in", cfg.detections_in}});
    write_eval_report(out, run.rows);
    if (!run.skipped.empty()) {
        out << "# skipped\n";
        for (const auto& e : run.skipped) out << "# " << e.scene_id << ": " << e.message << '\n';
    }
    return run;
}

/// Reads a counts CSV and writes `trend.csv` and `trend.json`.
inline TrendReport cmd_trend(const std::string& counts_path, int year_a, int year_b, const std::string& out_dir) {
    std::istringstream in(detail::slurp(counts_path, "counts file"));
    const auto report = change_report(parse_counts(in), year_a, year_b);
    auto csv = detail::open_output(out_dir, "trend.csv");
    write_trend_csv(csv, report);
    auto js = detail::open_output(out_dir, "trend.json");
    js << trend_json(report).dump(2) << '\n';
    return report;
}

/// Writes `train.csv` and `test.csv` manifests.
inline std::pair<std::size_t, std::size_t> cmd_split(const PipelineConfig& cfg, double train_fraction) {
    if (cfg.manifest.empty()) throw Error("--manifest is required");
    ManifestOptions mopts;
    mopts.include_grayscale = cfg.include_grayscale;
    const auto [train, test] = split_scenes(read_manifest_file(cfg.manifest, mopts), train_fraction, cfg.seed);
    auto tr = detail::open_output(cfg.out_dir, "train.csv");
    write_manifest(tr, train);
    auto te = detail::open_output(cfg.out_dir, "test.csv");
    write_manifest(te, test);
    return {train.size(), test.size()};
}

}  // namespace overcount
