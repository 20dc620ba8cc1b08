#include "lvamm/amm.hpp"
#include "lvamm/metrics.hpp"
#include "lvamm/phantom.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace lvamm;

namespace {

Image random_image(std::mt19937_64& rng, std::size_t w, std::size_t h) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Image img(w, h);
    for (double& px : img.pixels()) px = u(rng);
    return img;
}

Scanline random_scanline(std::mt19937_64& rng, double w, double h) {
    std::uniform_real_distribution<double> ux(0.0, w - 1.0), uy(0.0, h - 1.0);
    Scanline sl;
    do {
        sl = {{ux(rng), uy(rng)}, {ux(rng), uy(rng)}};
    } while (sl.length() < 1.0);
    return sl;
}

void expect_error(ErrorKind kind, const auto& fn) {
    try {
        fn();
        ADD_FAILURE() << "expected " << to_string(kind);
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), kind) << e.what();
    }
}

} // namespace

TEST(SampleScanline, AxisAlignedEqualDivision) {
    const SamplePath path = sample_scanline({{0, 0}, {0, 10}}, 11);
    ASSERT_EQ(path.size(), 11u);
    for (std::size_t k = 0; k <= 10; ++k) {
        EXPECT_EQ(path.points[k], (Point2{0.0, static_cast<double>(k)}));
    }
    EXPECT_DOUBLE_EQ(path.spacing, 1.0);
}

TEST(SampleScanline, EndpointsOnly) {
    const SamplePath path = sample_scanline({{0, 0}, {3, 4}}, 2);
    ASSERT_EQ(path.size(), 2u);
    EXPECT_EQ(path.points[0], (Point2{0, 0}));
    EXPECT_EQ(path.points[1], (Point2{3, 4}));
    EXPECT_DOUBLE_EQ(path.spacing, 5.0);
}

TEST(SampleScanline, Errors) {
    expect_error(ErrorKind::DegenerateScanline, [] { sample_scanline({{5, 5}, {5, 5}}, 10); });
    expect_error(ErrorKind::OutOfFrame, [] { sample_scanline({{0, 0}, {0, 300}}, 10, FrameSize{256, 256}); });
    expect_error(ErrorKind::OutOfFrame, [] { sample_scanline({{-0.1, 0}, {0, 30}}, 10, FrameSize{256, 256}); });
    expect_error(ErrorKind::InvalidArgument, [] { sample_scanline({{0, 0}, {0, 3}}, 1); });
}

TEST(SampleScanline, EquidistantAndOnSegment) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const Scanline sl = random_scanline(rng, 256, 256);
        const SamplePath path = sample_scanline(sl, 2 + trial % 300, FrameSize{256, 256});
        for (std::size_t k = 1; k < path.size(); ++k) {
            EXPECT_NEAR(distance(path.points[k], path.points[k - 1]), path.spacing, 1e-9);
            EXPECT_LE(perpendicular_distance(path.points[k], sl), 1e-9);
        }
    }
}

TEST(BilinearSample, IntegerPointIsLookup) {
    std::mt19937_64 rng(1);
    const Image img = random_image(rng, 16, 12);
    EXPECT_EQ(bilinear_sample(img, {3, 7}), img.at(3, 7));
    EXPECT_EQ(bilinear_sample(img, {15, 11}), img.at(15, 11));
    EXPECT_EQ(bilinear_sample(img, {0, 0}), img.at(0, 0));
}

TEST(BilinearSample, CenterOfBlockAverages) {
    Image img(2, 2);
    img.at(0, 0) = 0;
    img.at(1, 0) = 0;
    img.at(0, 1) = 100;
    img.at(1, 1) = 100;
    EXPECT_DOUBLE_EQ(bilinear_sample(img, {0.5, 0.5}), 50.0);
}

TEST(BilinearSample, MatchesTentKernelOracle) {
    std::mt19937_64 rng(2);
    const Image img = random_image(rng, 40, 30);
    std::uniform_real_distribution<double> ux(0.0, 39.0), uy(0.0, 29.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const Point2 p{ux(rng), uy(rng)};
        worst = std::max(worst, std::abs(bilinear_sample(img, p) - oracle::tent_bilinear(img, p)));
    }
    EXPECT_LE(worst, 1e-9);
}

TEST(BilinearSample, NoExtrapolation) {
    const Image img(8, 8, 0.5);
    expect_error(ErrorKind::OutOfFrame, [&] { bilinear_sample(img, {7.0001, 3}); });
    expect_error(ErrorKind::OutOfFrame, [&] { bilinear_sample(img, {3, -1e-9}); });
}

TEST(ExtractClip, CentersAnchor) {
    std::vector<Image> video;
    for (int i = 0; i < 100; ++i) video.emplace_back(2, 2, static_cast<double>(i));
    const EchoClip clip = extract_clip(video, 50, 64);
    ASSERT_EQ(clip.frame_count(), 64u);
    EXPECT_EQ(clip.anchor_index, 32u);
    EXPECT_EQ(clip.frames.front().at(0, 0), 18.0);
    EXPECT_EQ(clip.frames.back().at(0, 0), 81.0);
    EXPECT_EQ(clip.anchor_frame().at(0, 0), 50.0);
}

TEST(ExtractClip, ClampPaddingAtLeftEdge) {
    EXPECT_EQ(clip_window(10, 0, 8), (std::vector<std::size_t>{0, 0, 0, 0, 0, 1, 2, 3}));
    EXPECT_EQ(clip_window(10, 9, 4), (std::vector<std::size_t>{7, 8, 9, 9}));
}

TEST(ExtractClip, SingleFrameWindow) {
    std::vector<Image> video;
    for (int i = 0; i < 5; ++i) video.emplace_back(2, 2, static_cast<double>(i));
    const EchoClip clip = extract_clip(video, 3, 1);
    ASSERT_EQ(clip.frame_count(), 1u);
    EXPECT_EQ(clip.anchor_index, 0u);
    EXPECT_EQ(clip.frames[0].at(0, 0), 3.0);
}

TEST(ExtractClip, Errors) {
    std::vector<Image> empty;
    expect_error(ErrorKind::EmptyVideo, [&] { extract_clip(empty, 0, 4); });
    std::vector<Image> video(3, Image(2, 2));
    expect_error(ErrorKind::IndexOutOfRange, [&] { extract_clip(video, 3, 4); });
}

TEST(SynthesizeAmm, ConstantClip) {
    EchoClip clip{std::vector<Image>(8, Image(32, 32, 0.4)), 4, 0.05, 0.03};
    const AmmImage amm = synthesize_amm(clip, {{3, 2}, {20, 30}}, 50);
    EXPECT_EQ(amm.v_count(), 50u);
    EXPECT_EQ(amm.w_count(), 8u);
    EXPECT_EQ(amm.anchor_column, 4u);
    for (double v : amm.data.pixels()) EXPECT_NEAR(v, 0.4, 1e-15);
}

TEST(SynthesizeAmm, StaticClipHasIdenticalColumns) {
    std::mt19937_64 rng(3);
    const Image frame = random_image(rng, 32, 32);
    EchoClip clip{std::vector<Image>(9, frame), 4, 0.05, 0.03};
    const AmmImage amm = synthesize_amm(clip, {{1, 1}, {30, 25}}, 64);
    for (std::size_t v = 0; v < amm.v_count(); ++v) {
        for (std::size_t w = 1; w < amm.w_count(); ++w) {
            EXPECT_EQ(amm.at(v, w), amm.at(v, 0));
        }
    }
}

TEST(SynthesizeAmm, AnchorColumnIsAnchorFrameAlongPath) {
    std::mt19937_64 rng(4);
    std::vector<Image> frames;
    for (int i = 0; i < 7; ++i) frames.push_back(random_image(rng, 20, 24));
    EchoClip clip{frames, 3, 0.05, 0.03};
    const AmmImage amm = synthesize_amm(clip, {{2.5, 1.25}, {17.0, 22.75}}, 33);
    for (std::size_t v = 0; v < amm.v_count(); ++v) {
        EXPECT_NEAR(amm.at(v, amm.anchor_column), bilinear_sample(clip.frames[3], amm.path.points[v]), 1e-12);
    }
}

TEST(SynthesizeAmm, PhantomEdgeTracksAnalyticRow) {
    PhantomSpec spec;
    spec.noise_sd = 0.0;
    spec.frame_count = 30;
    const auto video = render_video(spec);
    const EchoClip clip = extract_clip(video, 15, 30, 0.05, spec.frame_interval_s);
    // vertical line through every row: path index equals the row
    const AmmImage amm = synthesize_amm(clip, {{128, 0}, {128, 255}}, 256);
    for (std::size_t w = 0; w < amm.w_count(); ++w) {
        const std::size_t source = clip_window(video.size(), 15, 30)[w];
        const double row = wall_rows(spec, frame_time(spec, source))[0];
        // first sample reaching half the wall intensity
        std::size_t step = 0;
        while (amm.at(step, w) < spec.wall_intensity / 2) ++step;
        EXPECT_LE(std::abs(static_cast<double>(step) - row), 1.0) << "column " << w;
    }
}

TEST(BmodeToAmm, SampleMapsToItself) {
    const SamplePath path = sample_scanline({{10, 10}, {40, 200}}, 100);
    const AmmPoint a = bmode_to_amm(path.points[7], path, 64);
    EXPECT_EQ(a.x, 32.0);
    EXPECT_EQ(a.y, 7.0);
}

TEST(BmodeToAmm, ColumnIsHalfW) {
    const SamplePath path = sample_scanline({{10, 10}, {40, 200}}, 100);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 255.0);
    for (int i = 0; i < 50; ++i) {
        EXPECT_EQ(bmode_to_amm({u(rng), u(rng)}, path, 64).x, 32.0);
    }
    EXPECT_EQ(bmode_to_amm({1, 1}, path, 63).x, 31.0);
}

TEST(BmodeToAmm, MatchesExhaustiveNearestNeighbour) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 255.0);
    for (int i = 0; i < 1000; ++i) {
        const Scanline sl = random_scanline(rng, 256, 256);
        if (sl.p_start.y == sl.p_end.y) continue;
        const SamplePath path = sample_scanline(sl, 2 + i % 256);
        std::vector<double> ys;
        for (Point2 p : path.points) ys.push_back(p.y);
        const Point2 c{u(rng), u(rng)};
        EXPECT_EQ(bmode_to_amm(c, path, 64).y, static_cast<double>(oracle::nearest_index(ys, c.y)));
    }
}

TEST(BmodeToAmm, HorizontalPathUsesX) {
    const SamplePath path = sample_scanline({{0, 5}, {10, 5}}, 11);
    EXPECT_EQ(bmode_to_amm({6.2, 5}, path, 8).y, 6.0);
}

TEST(BmodeToAmm, TiesGoToLowerIndex) {
    const SamplePath path = sample_scanline({{0, 0}, {0, 10}}, 11);
    EXPECT_EQ(bmode_to_amm({0, 2.5}, path, 4).y, 2.0);
}

TEST(AmmToBmode, Rounding) {
    const SamplePath path = sample_scanline({{0, 0}, {0, 10}}, 11);
    EXPECT_EQ(amm_to_bmode({32, 7.0}, path), path.points[7]);
    EXPECT_EQ(amm_to_bmode({32, 2.4}, path), path.points[2]);
    EXPECT_EQ(amm_to_bmode({32, 2.5}, path), path.points[2]);
    EXPECT_EQ(amm_to_bmode({32, 2.51}, path), path.points[3]);
    EXPECT_EQ(amm_to_bmode({32, 0.0}, path), path.points[0]);
    EXPECT_EQ(amm_to_bmode({32, 10.0}, path), path.points[10]);
}

TEST(AmmToBmode, OutOfRange) {
    const SamplePath path = sample_scanline({{0, 0}, {0, 10}}, 11);
    expect_error(ErrorKind::IndexOutOfRange, [&] { amm_to_bmode({0, -0.01}, path); });
    expect_error(ErrorKind::IndexOutOfRange, [&] { amm_to_bmode({0, 10.01}, path); });
}

TEST(Transforms, RoundTripWithinHalfSpacing) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> t(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        const Scanline sl = random_scanline(rng, 256, 256);
        const SamplePath path = sample_scanline(sl, 256);
        for (int j = 0; j < 10; ++j) {
            const Point2 c = sl.p_start + t(rng) * sl.direction();
            const BModePoint back = amm_to_bmode(bmode_to_amm(c, path, 64), path);
            EXPECT_LE(distance(back, c), path.spacing / 2 + 1e-9);
        }
    }
}

TEST(Transforms, MonotoneAlongScanline) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> t(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const Scanline sl = random_scanline(rng, 256, 256);
        const SamplePath path = sample_scanline(sl, 128);
        const Point2 d = sl.direction();
        for (std::size_t k = 1; k < path.size(); ++k) {
            EXPECT_GT(dot(path.points[k] - path.points[k - 1], d), 0.0);
        }
        if (sl.p_start.y == sl.p_end.y) continue;
        double ta = t(rng), tb = t(rng);
        if (ta > tb) std::swap(ta, tb);
        const Point2 a = sl.p_start + ta * d;
        const Point2 b = sl.p_start + tb * d;
        EXPECT_LE(bmode_to_amm(a, path, 8).y, bmode_to_amm(b, path, 8).y);
    }
}
