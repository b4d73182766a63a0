#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "overcount/image.hpp"
#include "overcount/ingestion.hpp"
#include "oracles.hpp"

namespace fixture {

namespace fs = std::filesystem;

inline fs::path temp_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("overcount_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

inline void write_text(const fs::path& p, const std::string& text) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << text;
}

inline std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct SyntheticScene {
    std::string scene_id;
    std::string location_id;
    std::string date;
    int width, height;
    std::vector<overcount::Point> centers;
};

/// Writes manifest.csv, annotations/<id>.txt and images/<id>.png under `dir`. Each car is a bright
/// 30x15 rectangle centred on its annotation point; annotation boxes (32 px) never overlap.
inline std::vector<SyntheticScene> write_scenes(const fs::path& dir, std::size_t n_scenes, std::uint64_t seed,
                                                bool with_images = true) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> dim(300, 700), cars(3, 40);
    const char* locs[] = {"uh", "jcc", "katy_mills"};
    std::vector<SyntheticScene> scenes;
    std::string manifest = "scene_id,location_id,capture_date,gsd_m,width,height,image_path\n";
    for (std::size_t i = 0; i < n_scenes; ++i) {
        SyntheticScene s{"scene_" + std::to_string(i), locs[i % 3], (i % 2 ? "2020-04-" : "2019-04-") + std::string("1") + std::to_string(i % 10),
                         dim(rng), dim(rng), {}};
        // 34 px squares keep a 2 px dark gap between the drawn cars.
        for (const auto& b : oracle::random_disjoint_squares(rng, s.width, s.height, std::size_t(cars(rng)), 34.0)) {
            const auto c = b.center();
            s.centers.push_back({std::round(c.x), std::round(c.y)});
        }
        std::string pts;
        for (const auto& c : s.centers) pts += std::to_string(int(c.x)) + " " + std::to_string(int(c.y)) + "\n";
        write_text(dir / "annotations" / (s.scene_id + ".txt"), pts);
        if (with_images) {
            overcount::RgbImage img(s.width, s.height, 35);
            for (const auto& c : s.centers) img.fill_rect(int(c.x) - 15, int(c.y) - 7, 30, 15, 235, 230, 220);
            fs::create_directories(dir / "images");
            overcount::write_png((dir / "images" / (s.scene_id + ".png")).string(), img);
        }
        manifest += s.scene_id + "," + s.location_id + "," + s.date + ",0.15," + std::to_string(s.width) + "," +
                    std::to_string(s.height) + ",images/" + s.scene_id + ".png\n";
        scenes.push_back(std::move(s));
    }
    write_text(dir / "manifest.csv", manifest);
    return scenes;
}

}  // namespace fixture
