#include "pure/edges.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <utility>

using pure::EdgeMap;
using pure::GrayImage;

namespace {

// Anti-aliased disk: each pixel is the mean of 8x8 samples around its centre.
GrayImage render_disk(int w, int h, double cx, double cy, double r, std::uint8_t inside, std::uint8_t outside) {
    GrayImage img(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            int hits = 0;
            for (int j = 0; j < 8; ++j)
                for (int i = 0; i < 8; ++i) {
                    const double sx = x - 0.5 + (i + 0.5) / 8.0, sy = y - 0.5 + (j + 0.5) / 8.0;
                    if (std::hypot(sx - cx, sy - cy) <= r) ++hits;
                }
            img.at(x, y) = static_cast<std::uint8_t>(std::lround(outside + (inside - outside) * hits / 64.0));
        }
    }
    return img;
}

EdgeMap from_points(int w, int h, std::initializer_list<std::pair<int, int>> pts) {
    EdgeMap e(w, h);
    for (const auto& [x, y] : pts) e.set(x, y, true);
    return e;
}

bool has_full_block(const EdgeMap& e) {
    for (int y = 0; y + 1 < e.height; ++y)
        for (int x = 0; x + 1 < e.width; ++x)
            if (e.get(x, y) && e.get(x + 1, y) && e.get(x, y + 1) && e.get(x + 1, y + 1)) return true;
    return false;
}

int max_neighbors(const EdgeMap& e) {
    int m = 0;
    for (int y = 0; y < e.height; ++y)
        for (int x = 0; x < e.width; ++x)
            if (e.get(x, y)) m = std::max(m, e.neighbors(x, y));
    return m;
}

EdgeMap random_map(int w, int h, double density, std::mt19937& rng) {
    std::bernoulli_distribution on(density);
    EdgeMap e(w, h);
    for (auto& v : e.mask) v = on(rng) ? 1 : 0;
    return e;
}

EdgeMap disk_ring() { return pure::morph_manipulate(pure::detect_edges(render_disk(320, 240, 160, 120, 40, 0, 255))); }

}  // namespace

TEST(Canny, DiskOutlineLiesOnTheCircle) {
    const auto e = pure::detect_edges(render_disk(320, 240, 160, 120, 40, 0, 255));
    ASSERT_GT(e.count(), 200u);
    for (int y = 0; y < e.height; ++y)
        for (int x = 0; x < e.width; ++x)
            if (e.get(x, y)) { EXPECT_LE(std::abs(std::hypot(x - 160.0, y - 120.0) - 40.0), 1.5) << x << "," << y; }
}

TEST(Canny, ConstantImageHasNoEdges) {
    EXPECT_EQ(pure::detect_edges(GrayImage(64, 48, 128)).count(), 0u);
}

TEST(Canny, VerticalStepGivesOneColumn) {
    GrayImage img(320, 240, 0);
    for (int y = 0; y < 240; ++y)
        for (int x = 160; x < 320; ++x) img.at(x, y) = 255;
    const auto e = pure::detect_edges(img);
    // The step lies between columns 159 and 160.
    for (int y = 0; y < 240; ++y) {
        int n = 0;
        for (int x = 0; x < 320; ++x) {
            if (!e.get(x, y)) continue;
            ++n;
            EXPECT_LE(std::abs(x - 159.5), 1.5) << x << "," << y;
        }
        EXPECT_EQ(n, 1) << "row " << y;
    }
}

TEST(Canny, TranslationMovesEdgesAlong) {
    const int dx = 7, dy = 5;
    const auto a = pure::detect_edges(render_disk(200, 160, 90, 70, 30, 20, 220));
    const auto b = pure::detect_edges(render_disk(200, 160, 90 + dx, 70 + dy, 30, 20, 220));
    auto near = [](const EdgeMap& m, int x, int y) {
        for (int j = -1; j <= 1; ++j)
            for (int i = -1; i <= 1; ++i)
                if (m.get(x + i, y + j)) return true;
        return false;
    };
    for (int y = 0; y < a.height; ++y)
        for (int x = 0; x < a.width; ++x) {
            if (a.get(x, y)) { EXPECT_TRUE(near(b, x + dx, y + dy)) << x << "," << y; }
            if (b.get(x, y)) { EXPECT_TRUE(near(a, x - dx, y - dy)) << x << "," << y; }
        }
}

TEST(Canny, PercentileControlsEdgeCount) {
    std::mt19937 rng(2);
    std::normal_distribution<double> noise(0.0, 6.0);
    auto img = render_disk(160, 120, 80, 60, 25, 40, 200);
    for (auto& p : img.pixels()) p = static_cast<std::uint8_t>(std::clamp(p + noise(rng), 0.0, 255.0));
    pure::CannyParams loose, strict;
    loose.high_percentile = 0.5;
    strict.high_percentile = 0.95;
    EXPECT_GT(pure::detect_edges(img, loose).count(), pure::detect_edges(img, strict).count());
}

TEST(Morphology, FullBlockLosesOnePixel) {
    const auto in = from_points(6, 6, {{2, 2}, {3, 2}, {2, 3}, {3, 3}});
    const auto out = pure::morph_manipulate(in);
    EXPECT_EQ(out.count(), 3u);
    EXPECT_FALSE(has_full_block(out));
    EXPECT_FALSE(out.get(2, 2));  // first in scan order
}

TEST(Morphology, PlusJunctionLosesCentre) {
    const auto in = from_points(7, 7, {{3, 3}, {3, 2}, {3, 4}, {2, 3}, {4, 3}});
    const auto out = pure::morph_manipulate(in);
    EXPECT_FALSE(out.get(3, 3));
    EXPECT_LE(max_neighbors(out), 2);
}

TEST(Morphology, ThinDiagonalIsUnchanged) {
    EdgeMap in(40, 40);
    for (int i = 5; i < 35; ++i) in.set(i, i, true);
    EXPECT_EQ(pure::morph_manipulate(in), in);
}

TEST(Morphology, ThinCircleIsUnchanged) {
    // A smooth closed curve has no junctions and no sharp corners.
    const auto ring = disk_ring();
    EXPECT_EQ(pure::morph_manipulate(ring), ring);
}

TEST(Morphology, BreaksSharpCorner) {
    // An L of two straight 12 px legs meeting at a right angle.
    EdgeMap in(30, 30);
    for (int i = 0; i < 12; ++i) {
        in.set(5 + i, 5, true);
        in.set(5, 6 + i, true);
    }
    const auto out = pure::morph_manipulate(in);
    EXPECT_LT(out.count(), in.count());
    EXPECT_EQ(pure::extract_segments(out).size(), 2u);

    // Without corner breaking only the redundant corner pixel goes and the L stays whole.
    pure::MorphParams off;
    off.corner_span = 0;
    const auto kept = pure::morph_manipulate(in, off);
    EXPECT_EQ(kept.count(), in.count() - 1);
    EXPECT_FALSE(kept.get(5, 5));
    EXPECT_EQ(pure::extract_segments(kept).size(), 1u);
}

TEST(Morphology, PostconditionsHoldOnRandomMaps) {
    std::mt19937 rng(1234);
    std::uniform_real_distribution<double> density(0.02, 0.7);
    std::uniform_int_distribution<int> dim(1, 48);
    for (int t = 0; t < 1000; ++t) {
        const auto in = random_map(dim(rng), dim(rng), density(rng), rng);
        const auto out = pure::morph_manipulate(in);
        ASSERT_LE(max_neighbors(out), 2) << "case " << t;
        ASSERT_FALSE(has_full_block(out)) << "case " << t;
        for (std::size_t i = 0; i < in.mask.size(); ++i) ASSERT_LE(out.mask[i], in.mask[i]) << "case " << t;
    }
}

TEST(Morphology, PostconditionsHoldOnNoiseEdges) {
    std::mt19937 rng(99);
    std::uniform_int_distribution<int> px(0, 255);
    for (int t = 0; t < 20; ++t) {
        GrayImage img(120, 90);
        for (auto& p : img.pixels()) p = static_cast<std::uint8_t>(px(rng));
        const auto out = pure::morph_manipulate(pure::detect_edges(img));
        ASSERT_LE(max_neighbors(out), 2);
        ASSERT_FALSE(has_full_block(out));
    }
}

TEST(Segments, DiskRingIsOneClosedSegment) {
    const auto segs = pure::extract_segments(disk_ring());
    ASSERT_EQ(segs.size(), 1u);
    EXPECT_TRUE(segs[0].closed);
    // Topmost, then leftmost pixel first.
    const auto& pts = segs[0].points;
    const auto first = pts.front();
    for (const auto& p : pts) EXPECT_TRUE(p.y > first.y || (p.y == first.y && p.x >= first.x));
}

TEST(Segments, TwoLinesTwoSegments) {
    EdgeMap e(40, 20);
    for (int i = 0; i < 10; ++i) {
        e.set(2 + i, 3, true);
        e.set(20 + i, 15, true);
    }
    const auto segs = pure::extract_segments(e);
    ASSERT_EQ(segs.size(), 2u);
    for (const auto& s : segs) {
        EXPECT_EQ(s.points.size(), 10u);
        EXPECT_FALSE(s.closed);
    }
    EXPECT_EQ(segs[0].points.front(), (pure::Pixel{2, 3}));
}

TEST(Segments, EmptyMapNoSegments) { EXPECT_TRUE(pure::extract_segments(EdgeMap(10, 10)).empty()); }

TEST(Segments, SingletonsAreDropped) {
    const auto segs = pure::extract_segments(from_points(10, 10, {{1, 1}, {5, 5}, {8, 2}}));
    EXPECT_TRUE(segs.empty());
}

TEST(Segments, PartitionOfEdgePixels) {
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> density(0.02, 0.6);
    for (int t = 0; t < 300; ++t) {
        // Raw maps break the thinness assumptions; segments must still be disjoint chains.
        const auto raw = random_map(40, 30, density(rng), rng);
        const auto morphed = pure::morph_manipulate(raw);
        for (const auto* map : {&raw, &morphed}) {
            const auto& e = *map;
            const bool thin = map == &morphed;
            std::set<std::pair<int, int>> seen;
            for (const auto& s : pure::extract_segments(e)) {
                ASSERT_GE(s.points.size(), 2u);
                for (std::size_t i = 0; i < s.points.size(); ++i) {
                    const auto& p = s.points[i];
                    ASSERT_TRUE(e.get(p.x, p.y));
                    ASSERT_TRUE(seen.insert({p.x, p.y}).second) << "pixel in two segments";
                    if (i > 0) {
                        const auto& q = s.points[i - 1];
                        ASSERT_LE(std::max(std::abs(p.x - q.x), std::abs(p.y - q.y)), 1);
                    }
                }
            }
            for (int y = 0; y < e.height; ++y)
                for (int x = 0; x < e.width; ++x) {
                    if (!e.get(x, y) || seen.count({x, y})) continue;
                    // Thin maps lose only isolated pixels. Otherwise a pixel is left out
                    // only when nothing untraced is next to it.
                    if (thin) {
                        EXPECT_EQ(e.neighbors(x, y), 0) << x << "," << y;
                    }
                    for (int dy = -1; dy <= 1; ++dy)
                        for (int dx = -1; dx <= 1; ++dx) {
                            if ((dx || dy) && e.get(x + dx, y + dy)) {
                                EXPECT_TRUE(seen.count({x + dx, y + dy})) << x << "," << y;
                            }
                        }
                }
        }
    }
}

TEST(Segments, OpenChainsStartAtEndpoint) {
    std::mt19937 rng(8);
    for (int t = 0; t < 200; ++t) {
        const auto e = pure::morph_manipulate(random_map(40, 30, 0.3, rng));
        for (const auto& s : pure::extract_segments(e)) {
            if (s.closed) continue;
            EXPECT_LE(e.neighbors(s.points.front().x, s.points.front().y), 1);
        }
    }
}
