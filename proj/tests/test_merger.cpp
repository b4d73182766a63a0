#include <random>

#include <gtest/gtest.h>

#include "overcount/merger.hpp"
#include "support/oracles.hpp"

using namespace overcount;

namespace {
Detection global(double x0, double y0, double x1, double y1, double score) {
    return {PixelBox(x0, y0, x1, y1), score, "car", Frame::SceneGlobal, std::nullopt, "s"};
}

Detection local(double x0, double y0, double x1, double y1, TileIndex t) {
    return {PixelBox(x0, y0, x1, y1), 1.0, "car", Frame::TileLocal, t, "s"};
}

std::vector<Detection> random_boxes(std::mt19937_64& rng, std::size_t n, double extent) {
    std::uniform_real_distribution<double> pos(0.0, extent), side(2.0, 40.0);
    std::uniform_int_distribution<int> score(0, 20);  // coarse scores to force ties
    std::vector<Detection> out;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = std::round(pos(rng)), y = std::round(pos(rng));
        out.push_back(global(x, y, x + std::round(side(rng)), y + std::round(side(rng)), score(rng) / 20.0));
    }
    return out;
}

std::vector<std::tuple<double, double, double, double, double>> keys(const std::vector<Detection>& d) {
    std::vector<std::tuple<double, double, double, double, double>> out;
    for (const auto& x : d) out.emplace_back(x.score, x.box.x_min(), x.box.y_min(), x.box.x_max(), x.box.y_max());
    return out;
}
}  // namespace

TEST(GlobalizeAll, SingleTileIdentity) {
    const auto tiles = plan_tiles(256, 256, TileGrid());
    const auto out = globalize_all({local(1, 2, 30, 40, {0, 0})}, tiles);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].box, PixelBox(1, 2, 30, 40));
    EXPECT_EQ(out[0].frame, Frame::SceneGlobal);
}

TEST(GlobalizeAll, TranslatesByTileOrigin) {
    const auto tiles = plan_tiles(512, 512, TileGrid(256, 192));
    const auto out = globalize_all({local(8, 10, 38, 40, {1, 1})}, tiles);
    EXPECT_EQ(out.at(0).box, PixelBox(200, 202, 230, 232));
}

TEST(GlobalizeAll, NineTilesDeterministicOrder) {
    const auto tiles = plan_tiles(512, 512, TileGrid(256, 192));
    std::vector<Detection> in;
    // Feed tiles in reverse to mimic out-of-order completion.
    for (auto it = tiles.rbegin(); it != tiles.rend(); ++it)
        for (int k = 0; k < 3; ++k) in.push_back(local(10.0 * k, 5, 10.0 * k + 8, 20, it->index));
    const auto out = globalize_all(in, tiles);
    ASSERT_EQ(out.size(), 27u);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const Tile& t = tiles[i / 3];
        EXPECT_EQ(out[i].tile_index, t.index);
        EXPECT_EQ(out[i].box, PixelBox(t.x0 + 10.0 * (i % 3), t.y0 + 5, t.x0 + 10.0 * (i % 3) + 8, t.y0 + 20));
    }
}

TEST(GlobalizeAll, UnknownTileIsError) {
    const auto tiles = plan_tiles(256, 256, TileGrid());
    EXPECT_THROW(globalize_all({local(1, 1, 5, 5, {3, 3})}, tiles), Error);
    auto no_index = local(1, 1, 5, 5, {0, 0});
    no_index.tile_index.reset();
    EXPECT_THROW(globalize_all({no_index}, tiles), Error);
}

TEST(Dedupe, IdenticalBoxesKeepHigherScore) {
    const auto out = dedupe({global(0, 0, 10, 10, 0.8), global(0, 0, 10, 10, 0.9)}, 0.3);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].score, 0.9);
}

TEST(Dedupe, DisjointSetReorderedByScore) {
    const auto out = dedupe({global(0, 0, 10, 10, 0.2), global(20, 0, 30, 10, 0.9), global(40, 0, 50, 10, 0.5)}, 0.3);
    ASSERT_EQ(out.size(), 3u);
    EXPECT_EQ(out[0].score, 0.9);
    EXPECT_EQ(out[1].score, 0.5);
    EXPECT_EQ(out[2].score, 0.2);
}

TEST(Dedupe, ThresholdIsInclusive) {
    // IoU exactly 1/3
    EXPECT_EQ(dedupe({global(0, 0, 10, 10, 0.9), global(5, 0, 15, 10, 0.8)}, 1.0 / 3.0).size(), 1u);
    EXPECT_EQ(dedupe({global(0, 0, 10, 10, 0.9), global(5, 0, 15, 10, 0.8)}, 0.34).size(), 2u);
}

TEST(Dedupe, RejectsBadThreshold) {
    EXPECT_THROW(dedupe({}, 0.0), Error);
    EXPECT_THROW(dedupe({}, 1.1), Error);
    EXPECT_NO_THROW(dedupe({}, 1.0));
}

TEST(Dedupe, MatchesBruteForceOracle) {
    std::mt19937_64 rng(1234);
    for (int set = 0; set < 200; ++set) {
        const auto boxes = random_boxes(rng, 200, 150.0);
        for (double t : {0.1, 0.3, 0.5, 0.9}) {
            const auto got = dedupe(boxes, t);
            const auto idx = oracle::nms(boxes, t);
            ASSERT_EQ(got.size(), idx.size());
            for (std::size_t i = 0; i < idx.size(); ++i) {
                ASSERT_EQ(got[i].box, boxes[idx[i]].box);
                ASSERT_EQ(got[i].score, boxes[idx[i]].score);
            }
        }
    }
}

TEST(Dedupe, OutputPropertiesAndPermutationInvariance) {
    std::mt19937_64 rng(55);
    for (int set = 0; set < 50; ++set) {
        auto boxes = random_boxes(rng, 150, 120.0);
        const double t = 0.3;
        const auto kept = dedupe(boxes, t);
        for (std::size_t i = 0; i < kept.size(); ++i)
            for (std::size_t j = i + 1; j < kept.size(); ++j) ASSERT_LT(iou(kept[i].box, kept[j].box), t);
        // every suppressed box is covered by a kept box that precedes it in suppression order
        for (const auto& b : boxes) {
            if (std::any_of(kept.begin(), kept.end(), [&](const Detection& k) { return k.box == b.box && k.score == b.score; }))
                continue;
            ASSERT_TRUE(std::any_of(kept.begin(), kept.end(), [&](const Detection& k) {
                return iou(k.box, b.box) >= t && !suppression_order(b, k);
            }));
        }
        for (int p = 0; p < 5; ++p) {
            std::shuffle(boxes.begin(), boxes.end(), rng);
            ASSERT_EQ(keys(dedupe(boxes, t)), keys(kept));
        }
    }
}

TEST(SeamFilter, SliverWouldSurviveNmsWithoutIt) {
    // A 32 px car at x in [250, 282]: the left tile sees a 6 px sliver, the middle tile sees it whole.
    const auto tiles = plan_tiles(512, 256, TileGrid(256, 192));
    const AnnotationSet truth{"s", {}, {PixelBox(250, 100, 282, 132)}, 32};
    std::vector<Detection> per_tile;
    for (const auto& t : tiles)
        for (auto& d : oracle_detect(t, truth)) per_tile.push_back(d);
    ASSERT_EQ(per_tile.size(), 3u);
    EXPECT_EQ(dedupe(globalize_all(per_tile, tiles), 0.3).size(), 2u);
    const auto filtered = drop_seam_truncated(per_tile, tiles, 512, 256);
    EXPECT_EQ(dedupe(globalize_all(filtered, tiles), 0.3).size(), 1u);
}
