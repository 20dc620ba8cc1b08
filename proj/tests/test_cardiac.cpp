#include "lvamm/cardiac.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace lvamm;

namespace {

ErrorKind kind_of(const auto& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::InvalidArgument;
}

} // namespace

TEST(Cardiac, WorkedExample) {
    const CardiacIndices ci = cardiac_indices({{1.0, 4.6, 0.9}, {1.3, 3.0, 1.2}});
    EXPECT_NEAR(ci.lvm_g, 148.104, 1e-3);
    EXPECT_NEAR(ci.edv_ml, 97.336, 1e-9);
    EXPECT_NEAR(ci.esv_ml, 35.0, 1e-9);
    EXPECT_NEAR(ci.ef_fraction, 62.336 / 97.336, 1e-9);
    EXPECT_NEAR(ci.fs_fraction, 1.6 / 4.6, 1e-12);
    EXPECT_NEAR(ci.rwt_ratio, 1.8 / 4.6, 1e-12);
}

TEST(Cardiac, TrivialBounds) {
    EXPECT_EQ(fractional_shortening(4.0, 4.0), 0.0);
    EXPECT_EQ(fractional_shortening(4.0, 0.0), 1.0);
    EXPECT_EQ(relative_wall_thickness(0.0, 4.6), 0.0);
    EXPECT_DOUBLE_EQ(relative_wall_thickness(1.8, 9.2), relative_wall_thickness(0.9, 4.6));
    EXPECT_EQ(ejection_fraction(50.0, 50.0), 0.0);
    EXPECT_EQ(ejection_fraction(50.0, 0.0), 1.0);
    EXPECT_LT(teichholz_volume(1e-4), 1e-10);
}

TEST(Cardiac, MassFloorAndMonotone) {
    EXPECT_DOUBLE_EQ(lv_mass({0.0, 4.6, 0.0}), 0.6);
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.1, 2.0), d(2.0, 7.0), step(1e-3, 0.5);
    for (int i = 0; i < 200; ++i) {
        const SegmentLengths s{u(rng), d(rng), u(rng)};
        EXPECT_LT(lv_mass(s), lv_mass({s.ivs_cm + step(rng), s.lvid_cm, s.lvpw_cm}));
        EXPECT_LT(lv_mass(s), lv_mass({s.ivs_cm, s.lvid_cm, s.lvpw_cm + step(rng)}));
    }
}

TEST(Cardiac, FractionsInUnitInterval) {
    std::mt19937_64 rng(32);
    std::uniform_real_distribution<double> d(0.5, 7.0), f(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        const double ed = d(rng), es = ed * f(rng);
        const double fs = fractional_shortening(ed, es);
        EXPECT_GE(fs, 0.0);
        EXPECT_LE(fs, 1.0);
        const double edv = teichholz_volume(ed), esv = teichholz_volume(es > 0 ? es : 1e-6);
        EXPECT_GE(edv, esv);
        EXPECT_NEAR(ejection_fraction(edv, esv), 1.0 - esv / edv, 1e-12);
    }
}

TEST(Cardiac, Errors) {
    EXPECT_EQ(kind_of([] { fractional_shortening(0.0, 1.0); }), ErrorKind::ZeroDiastolicDiameter);
    EXPECT_EQ(kind_of([] { relative_wall_thickness(1.0, 0.0); }), ErrorKind::ZeroDiastolicDiameter);
    EXPECT_EQ(kind_of([] { lv_mass({1.0, 0.0, 1.0}); }), ErrorKind::NonPositiveLength);
    EXPECT_EQ(kind_of([] { lv_mass({-0.1, 4.0, 1.0}); }), ErrorKind::NonPositiveLength);
    EXPECT_EQ(kind_of([] { teichholz_volume(0.0); }), ErrorKind::NonPositiveLength);
    EXPECT_EQ(kind_of([] { ejection_fraction(0.0, 0.0); }), ErrorKind::ZeroEDV);
}
