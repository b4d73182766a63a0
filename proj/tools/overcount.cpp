// overcount: tile scenes, detect and deduplicate vehicles, count per AOI, report year-over-year change.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "overcount/overcount.hpp"

int main(int argc, char** argv) {
    overcount::PipelineConfig cfg;
    std::string counts_path;
    int year_a = 0, year_b = 0;
    double train_fraction = 0.7;

    CLI::App app{"Vehicle counting over tiled overhead imagery"};
    app.set_config("--config", "", "Flat key=value config file; command-line flags override it");
    app.require_subcommand(1);

    app.add_option("--manifest", cfg.manifest, "Scene manifest CSV");
    app.add_option("--locations", cfg.locations, "Location registry CSV");
    app.add_option("--aoi", cfg.aoi, "GeoJSON AOI polygons (default: whole image)");
    app.add_option("--detector", cfg.detector, "blob | oracle | file")->check(CLI::IsMember({"blob", "oracle", "file"}));
    app.add_option("--detections-in", cfg.detections_in, "Detection interchange file (JSON lines)");
    app.add_option("--annotations", cfg.annotations, "Directory of <scene_id>.txt COWC point files");
    app.add_option("--out-dir", cfg.out_dir, "Output directory");
    app.add_option("--tile-size", cfg.tile_size, "Tile edge in pixels")->capture_default_str();
    app.add_option("--tile-stride", cfg.tile_stride, "Tile stride in pixels")->capture_default_str();
    app.add_option("--nms-iou", cfg.nms_iou, "Duplicate suppression IoU")->capture_default_str();
    app.add_option("--match-iou", cfg.match_iou, "Evaluation matching IoU")->capture_default_str();
    app.add_option("--box-size", cfg.box_size, "Box side for COWC center points, pixels")->capture_default_str();
    app.add_option("--seed", cfg.seed, "Seed for the train/test split")->capture_default_str();
    app.add_option("--blob-threshold", cfg.blob.threshold, "Blob detector luminance threshold")->capture_default_str();
    app.add_option("--blob-min-area", cfg.blob.min_area_px, "Blob detector minimum area")->capture_default_str();
    app.add_option("--blob-max-area", cfg.blob.max_area_px, "Blob detector maximum area")->capture_default_str();
    app.add_option("--blob-min-fill", cfg.blob.min_fill, "Blob detector minimum fill ratio")->capture_default_str();
    app.add_flag("!--no-seam-filter", cfg.seam_filter, "Keep detections truncated at interior tile seams");
    app.add_flag("--include-grayscale", cfg.include_grayscale, "Process scenes flagged grayscale");

    auto* count = app.add_subcommand("count", "Count vehicles per scene and AOI")->fallthrough();
    auto* eval = app.add_subcommand("eval", "Score detections against annotations")->fallthrough();
    auto* trend = app.add_subcommand("trend", "Year-over-year change from a counts CSV")->fallthrough();
    trend->add_option("--counts", counts_path, "counts.csv from `count`")->required();
    trend->add_option("--year-a", year_a, "Baseline year")->required();
    trend->add_option("--year-b", year_b, "Comparison year")->required();
    auto* split = app.add_subcommand("split", "Deterministic train/test manifests")->fallthrough();
    split->add_option("--train-fraction", train_fraction, "Share of scenes in train")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (count->parsed()) {
            const auto run = overcount::cmd_count(cfg);
            for (const auto& e : run.errors) std::cerr << "scene " << e.scene_id << ": " << e.message << '\n';
            std::cerr << run.records.size() << " count rows, " << run.errors.size() << " failed scenes\n";
            return run.exit_code();
        }
        if (eval->parsed()) {
            const auto run = overcount::cmd_eval(cfg);
            for (const auto& e : run.skipped) std::cerr << "skipped " << e.scene_id << ": " << e.message << '\n';
            return 0;
        }
        if (trend->parsed()) {
            const auto rep = overcount::cmd_trend(counts_path, year_a, year_b, cfg.out_dir);
            std::cout << "overall_change_ratio=" << overcount::detail::format_shortest(rep.overall_change_ratio) << '\n';
            return 0;
        }
        if (split->parsed()) {
            const auto [n_train, n_test] = overcount::cmd_split(cfg, train_fraction);
            std::cout << "train=" << n_train << " test=" << n_test << '\n';
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
