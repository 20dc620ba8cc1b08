#include "lvamm/phantom.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace lvamm;

TEST(Phantom, WallRowsFollowTheCycle) {
    PhantomSpec spec;
    const auto r0 = wall_rows(spec, 0.0);
    EXPECT_EQ(r0, (std::array<double, 4>{60, 90, 180, 210}));
    const auto r1 = wall_rows(spec, 0.25);
    EXPECT_NEAR(r1[0], 63, 1e-12);
    EXPECT_NEAR(r1[1], 95, 1e-12);
    EXPECT_NEAR(r1[2], 172, 1e-12);
    EXPECT_NEAR(r1[3], 205, 1e-12);
    const auto r2 = wall_rows(spec, 0.5);
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(r2[k], r0[k], 1e-12);
}

TEST(Phantom, BandsWithoutNoise) {
    PhantomSpec spec;
    spec.noise_sd = 0.0;
    const Image f = render_frame(spec, 0);
    EXPECT_DOUBLE_EQ(f.at(17, 75), 0.8);
    EXPECT_DOUBLE_EQ(f.at(200, 195), 0.8);
    EXPECT_DOUBLE_EQ(f.at(3, 130), 0.1);
    EXPECT_EQ(f.at(3, 20), 0.0);
    // row 60 straddles the background/wall edge at 60.0
    EXPECT_NEAR(f.at(40, 60), 0.4, 1e-12);
    EXPECT_NEAR(f.at(40, 90), 0.45, 1e-12);
    for (std::size_t x = 1; x < f.width(); ++x) EXPECT_EQ(f.at(x, 100), f.at(0, 100));
}

TEST(Phantom, NoiseIsSeededAndBounded) {
    PhantomSpec spec;
    spec.frame_count = 3;
    spec.seed = 99;
    const auto a = render_video(spec), b = render_video(spec);
    EXPECT_EQ(a, b);
    spec.seed = 100;
    EXPECT_NE(render_video(spec)[0], a[0]);
    EXPECT_NE(a[0], a[1]);
    for (double v : a[1].pixels()) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
}

TEST(Phantom, VerticalGroundTruth) {
    const LandmarkSet gt = ground_truth_landmarks(PhantomSpec{}, 0.0, {{128, 0}, {128, 255}});
    const double rows[4] = {60, 90, 180, 210};
    for (int k = 0; k < 4; ++k) {
        EXPECT_EQ(gt[k].x, 128.0);
        EXPECT_EQ(gt[k].y, rows[k]);
    }
}

TEST(Phantom, TiltedGroundTruthMatchesLinearSolve) {
    std::mt19937_64 rng(41);
    PhantomSpec spec;
    for (int i = 0; i < 100; ++i) {
        const double angle = (i % 2 ? 30.0 : -30.0);
        const Scanline sl = random_phantom_scanline(rng, spec, angle);
        const double t = 0.01 * i;
        const LandmarkSet gt = ground_truth_landmarks(spec, t, sl);
        const auto rows = wall_rows(spec, t);
        for (int k = 0; k < 4; ++k) {
            const Point2 want = oracle::intersect_row(sl.p_start, sl.p_end, rows[k]);
            EXPECT_NEAR(gt[k].x, want.x, 1e-9);
            EXPECT_NEAR(gt[k].y, want.y, 1e-9);
        }
    }
}

TEST(Phantom, ReversedScanlineOrdersFromStart) {
    const LandmarkSet gt = ground_truth_landmarks(PhantomSpec{}, 0.0, {{128, 255}, {128, 0}});
    EXPECT_EQ(gt[0].y, 210.0);
    EXPECT_EQ(gt[3].y, 60.0);
}

TEST(Phantom, NoIntersection) {
    try {
        ground_truth_landmarks(PhantomSpec{}, 0.0, {{128, 0}, {128, 100}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NoIntersection);
    }
    EXPECT_THROW(ground_truth_landmarks(PhantomSpec{}, 0.0, {{0, 70}, {200, 70}}), Error);
}

TEST(Phantom, OrderingViolation) {
    PhantomSpec spec;
    spec.amplitudes_px = {0, 40, -40, 0};
    try {
        validate_phantom(spec);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::OrderingViolation);
    }
}

TEST(Phantom, EdEsFramesAreExtremal) {
    PhantomSpec spec;
    const std::size_t ed = phantom_ed_frame(spec), es = phantom_es_frame(spec);
    for (std::size_t i = 0; i < spec.frame_count; ++i) {
        EXPECT_LE(phantom_lvid_px(spec, i), phantom_lvid_px(spec, ed));
        EXPECT_GE(phantom_lvid_px(spec, i), phantom_lvid_px(spec, es));
    }
    EXPECT_GT(phantom_lvid_px(spec, ed), phantom_lvid_px(spec, es));
}

TEST(Phantom, RandomSpecsAreValid) {
    std::mt19937_64 rng(42);
    for (int i = 0; i < 200; ++i) {
        const PhantomSpec spec = random_phantom_spec(rng);
        EXPECT_NO_THROW(validate_phantom(spec));
        const Scanline sl = random_phantom_scanline(rng, spec, 30.0);
        EXPECT_TRUE(inside_frame(sl.p_start, {spec.width, spec.height}));
        EXPECT_TRUE(inside_frame(sl.p_end, {spec.width, spec.height}));
        EXPECT_NO_THROW(ground_truth_landmarks(spec, 0.3, sl));
    }
}
