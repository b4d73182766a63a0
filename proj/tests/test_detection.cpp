#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "overcount/detection.hpp"
#include "overcount/interchange.hpp"
#include "support/oracles.hpp"

using namespace overcount;

namespace {
const std::string kFixtures = OVERCOUNT_FIXTURES;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}
}  // namespace

TEST(BlobDetect, UniformDarkTileIsEmpty) {
    EXPECT_TRUE(blob_detect(RgbImage(256, 256, 30), {}).empty());
}

TEST(BlobDetect, SingleRectangle) {
    RgbImage img(256, 256, 20);
    img.fill_rect(50, 60, 30, 15, 230, 230, 230);
    const auto dets = blob_detect(img, {});
    ASSERT_EQ(dets.size(), 1u);
    EXPECT_GE(iou(dets[0].box, PixelBox(50, 60, 80, 75)), 0.9);
    EXPECT_EQ(dets[0].box, PixelBox(50, 60, 80, 75));
    EXPECT_DOUBLE_EQ(dets[0].score, 1.0);
    EXPECT_EQ(dets[0].frame, Frame::TileLocal);
}

TEST(BlobDetect, TwoRectanglesTwoPixelsApart) {
    RgbImage img(128, 64, 0);
    img.fill_rect(10, 10, 30, 15, 255, 255, 255);
    img.fill_rect(42, 10, 30, 15, 255, 255, 255);
    const auto dets = blob_detect(img, {});
    ASSERT_EQ(dets.size(), 2u);
    const auto comps = oracle::components(img, 128.0);
    ASSERT_EQ(comps.size(), 2u);
    for (std::size_t i = 0; i < 2; ++i)
        EXPECT_EQ(dets[i].box, PixelBox(comps[i].x0, comps[i].y0, comps[i].x1 + 1, comps[i].y1 + 1));
}

TEST(BlobDetect, DiagonalPixelsAreSeparateComponents) {
    RgbImage img(40, 40, 0);
    DetectorConfig cfg;
    cfg.min_area_px = 1;
    img.set(5, 5, 255, 255, 255);
    img.set(6, 6, 255, 255, 255);
    EXPECT_EQ(blob_detect(img, cfg).size(), 2u);
}

TEST(BlobDetect, AreaFilterAndFillScore) {
    RgbImage img(100, 100, 0);
    // L shape: 20x4 + 4x16 = 144 px in a 20x20 box
    img.fill_rect(10, 10, 20, 4, 200, 200, 200);
    img.fill_rect(10, 14, 4, 16, 200, 200, 200);
    img.fill_rect(60, 60, 3, 3, 200, 200, 200);  // 9 px speck, below min area
    const auto dets = blob_detect(img, {});
    ASSERT_EQ(dets.size(), 1u);
    EXPECT_DOUBLE_EQ(dets[0].score, 144.0 / 400.0);
    DetectorConfig strict;
    strict.min_fill = 0.5;
    EXPECT_TRUE(blob_detect(img, strict).empty());
    DetectorConfig bad;
    bad.min_area_px = 10, bad.max_area_px = 5;
    EXPECT_THROW(blob_detect(img, bad), Error);
}

TEST(BlobDetect, MatchesUnionFindOracleOnRandomImages) {
    std::mt19937_64 rng(77);
    std::bernoulli_distribution on(0.35);
    DetectorConfig cfg;
    cfg.min_area_px = 0, cfg.max_area_px = 1e9;
    for (int trial = 0; trial < 20; ++trial) {
        RgbImage img(61, 47, 0);
        for (int y = 0; y < img.height(); ++y)
            for (int x = 0; x < img.width(); ++x)
                if (on(rng)) img.set(x, y, 200, 180, 220);
        const auto dets = blob_detect(img, cfg);
        const auto comps = oracle::components(img, cfg.threshold);
        ASSERT_EQ(dets.size(), comps.size());
        for (std::size_t i = 0; i < comps.size(); ++i) {
            const auto& c = comps[i];
            ASSERT_EQ(dets[i].box, PixelBox(c.x0, c.y0, c.x1 + 1, c.y1 + 1));
            ASSERT_DOUBLE_EQ(dets[i].score, double(c.area) / ((c.x1 - c.x0 + 1) * (c.y1 - c.y0 + 1)));
        }
    }
}

TEST(BlobDetect, TranslationEquivariant) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const auto lot = oracle::synth_parking_lot(rng, 200, 12);
        const int dx = 17, dy = 9;
        RgbImage shifted(260, 260, 0);
        RgbImage base(260, 260, 0);
        for (int y = 0; y < 200; ++y)
            for (int x = 0; x < 200; ++x) {
                const auto* p = lot.image.pixel(x, y);
                base.set(x + 20, y + 20, p[0], p[1], p[2]);
                shifted.set(x + 20 + dx, y + 20 + dy, p[0], p[1], p[2]);
            }
        const auto a = blob_detect(base, {});
        const auto b = blob_detect(shifted, {});
        ASSERT_EQ(a.size(), b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            ASSERT_EQ(a[i].box.translated(dx, dy), b[i].box);
            ASSERT_EQ(a[i].score, b[i].score);
        }
    }
}

TEST(OracleDetect, EmptyInsideAndStraddle) {
    const Tile left{{0, 0}, 0, 0, 256, 256}, right{{0, 1}, 192, 0, 256, 256};
    AnnotationSet truth{"s", {}, {PixelBox(300, 10, 332, 42)}, 32};
    EXPECT_TRUE(oracle_detect(left, truth).empty());

    truth.boxes = {PixelBox(20, 30, 52, 62)};
    const auto inside = oracle_detect(left, truth);
    ASSERT_EQ(inside.size(), 1u);
    EXPECT_EQ(inside[0].box, PixelBox(20, 30, 52, 62));
    EXPECT_EQ(inside[0].score, 1.0);
    EXPECT_EQ(inside[0].tile_index, (TileIndex{0, 0}));

    truth.boxes = {PixelBox(180, 10, 212, 42)};
    const auto a = oracle_detect(left, truth), b = oracle_detect(right, truth);
    ASSERT_EQ(a.size(), 1u);
    ASSERT_EQ(b.size(), 1u);
    EXPECT_EQ(a[0].box, PixelBox(180, 10, 212, 42));
    EXPECT_EQ(b[0].box, PixelBox(0, 10, 20, 42));
}

TEST(Interchange, EmptyFile) {
    std::istringstream in("");
    EXPECT_TRUE(read_detections(in).empty());
}

TEST(Interchange, BridgeFixtureParsesAndRoundTripsBytes) {
    const auto path = kFixtures + "/detections_bridge_12.jsonl";
    const auto dets = read_detections_file(path);
    ASSERT_EQ(dets.size(), 12u);
    EXPECT_EQ(dets[0].scene_id, "houston_uh_2019");
    EXPECT_EQ(dets[0].box, PixelBox(485.5, 673.5, 515.5, 703.5));
    EXPECT_EQ(dets[0].score, 0.5053);
    for (const auto& d : dets) EXPECT_EQ(d.frame, Frame::SceneGlobal);
    std::ostringstream out;
    write_detections(out, dets);
    EXPECT_EQ(out.str(), slurp(path));
}

TEST(Interchange, LosslessAtTwoDecimals) {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> cents(0, 400000);
    std::uniform_real_distribution<double> score(0.0, 1.0);
    std::vector<Detection> dets;
    for (int i = 0; i < 500; ++i) {
        const double x = cents(rng) / 100.0, y = cents(rng) / 100.0;
        dets.push_back({PixelBox(x, y, x + cents(rng) % 5000 / 100.0 + 0.01, y + 12.5), score(rng), "car",
                        Frame::SceneGlobal, std::nullopt, "s" + std::to_string(i % 3)});
    }
    std::ostringstream out;
    write_detections(out, dets);
    std::istringstream in(out.str());
    const auto back = read_detections(in);
    ASSERT_EQ(back.size(), dets.size());
    for (std::size_t i = 0; i < dets.size(); ++i) {
        ASSERT_NEAR(back[i].box.x_min(), dets[i].box.x_min(), 1e-9);
        ASSERT_NEAR(back[i].box.x_max(), dets[i].box.x_max(), 1e-9);
        ASSERT_NEAR(back[i].box.y_max(), dets[i].box.y_max(), 1e-9);
        ASSERT_EQ(back[i].score, dets[i].score);
        ASSERT_EQ(back[i].scene_id, dets[i].scene_id);
    }
}

TEST(Interchange, ErrorsCarryLineNumbers) {
    const std::string good = R"({"scene_id": "a", "x_min": 1, "y_min": 1, "x_max": 5, "y_max": 5, "score": 0.5, "class": "car"})";
    auto expect_error = [](const std::string& text, const std::string& needle) {
        std::istringstream in(text);
        try {
            read_detections(in);
            ADD_FAILURE() << "no error for: " << text;
        } catch (const Error& e) {
            EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
        }
    };
    expect_error(good + "\n{broken\n", "line 2");
    expect_error(good + "\n" + good + "\n" +
                     R"({"scene_id": "a", "x_min": 1, "y_min": 1, "x_max": 5, "y_max": 5, "score": 1.5, "class": "car"})",
                 "line 3");
    expect_error(R"({"scene_id": "a", "x_min": 1, "y_min": 1, "x_max": 5, "y_max": 5, "score": -0.1})", "outside");
    expect_error(R"({"scene_id": "a", "x_min": 1, "y_min": 1, "x_max": 1, "y_max": 5, "score": 0.1})", "degenerate");
    expect_error(R"({"scene_id": "a", "x_min": 1, "y_min": 1, "x_max": 3, "y_max": 5, "score": 0.1, "class": "truck"})",
                 "class");
    expect_error(R"({"x_min": 1, "y_min": 1, "x_max": 3, "y_max": 5, "score": 0.1})", "scene_id");
    expect_error(good + "\r\n", "CRLF");
}
