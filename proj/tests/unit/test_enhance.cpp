#include "rsbench/enhance.hpp"
#include "rsbench/error.hpp"
#include "rsbench/random.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

namespace rsbench::enhance {
namespace {

std::vector<double> iota(std::size_t n) {
    std::vector<double> v(n);
    std::iota(v.begin(), v.end(), 0.0);
    return v;
}

TEST(StretchConfig, Validation) {
    EXPECT_NO_THROW((StretchConfig{0.0, 100.0}.validate()));
    EXPECT_ERROR_KIND((StretchConfig{5.0, 5.0}.validate()), ErrorKind::InvalidArgument);
    EXPECT_ERROR_KIND((StretchConfig{-1.0, 50.0}.validate()), ErrorKind::InvalidArgument);
    EXPECT_ERROR_KIND((StretchConfig{1.0, 101.0}.validate()), ErrorKind::InvalidArgument);
}

TEST(Percentile, LinearInterpolationBetweenOrderStatistics) {
    const std::vector<double> v = {4.0, 1.0, 3.0, 2.0};
    EXPECT_DOUBLE_EQ(percentile(v, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(percentile(v, 25.0), 1.75);
    EXPECT_DOUBLE_EQ(percentile(v, 50.0), 2.5);
    EXPECT_DOUBLE_EQ(percentile(v, 100.0), 4.0);
    EXPECT_ERROR_KIND(percentile(std::vector<double>{}, 50.0), ErrorKind::InvalidArgument);
}

TEST(PercentileClip, HundredSamples) {
    const auto v = iota(100);
    const auto r = percentile_clip(v, {});
    EXPECT_NEAR(r.i_min, 0.99, 1e-12);
    EXPECT_NEAR(r.i_max, 98.01, 1e-12);
    EXPECT_NEAR(r.values[0], 0.99, 1e-12);
    EXPECT_NEAR(r.values[99], 98.01, 1e-12);
    EXPECT_EQ(r.values[50], 50.0);
}

TEST(PercentileClip, ConstantAndFullRange) {
    const std::vector<double> c(10, 7.0);
    const auto r = percentile_clip(c, {});
    EXPECT_EQ(r.i_min, 7.0);
    EXPECT_EQ(r.i_max, 7.0);
    EXPECT_EQ(r.values, c);
    const auto v = iota(37);
    EXPECT_EQ(percentile_clip(v, {0.0, 100.0}).values, v);
}

TEST(LinearStretch, HandCase) {
    const std::vector<double> v = {0.0, 50.0, 100.0};
    const auto r = linear_stretch(v, 0.0, 100.0);
    EXPECT_EQ(r.values, (std::vector<std::uint8_t>{0, 128, 255}));
    EXPECT_FALSE(r.degenerate);
}

TEST(LinearStretch, BoundsAndDegenerate) {
    EXPECT_EQ(linear_stretch(std::vector<double>(3, 2.0), 2.0, 9.0).values, std::vector<std::uint8_t>(3, 0));
    EXPECT_EQ(linear_stretch(std::vector<double>(3, 9.0), 2.0, 9.0).values, std::vector<std::uint8_t>(3, 255));
    const auto d = linear_stretch(std::vector<double>(4, 5.0), 5.0, 5.0);
    EXPECT_TRUE(d.degenerate);
    EXPECT_EQ(d.values, std::vector<std::uint8_t>(4, 0));
    EXPECT_ERROR_KIND(linear_stretch(std::vector<double>{1.0}, 2.0, 1.0), ErrorKind::InvalidArgument);
}

raster::GeoGrid flat_histogram_image() {
    // Every value 0..255 appears 16 times per channel, in channel-specific order.
    return testing::rgb_from(64, 64, [](int r, int c, int b) {
        const int i = r * 64 + c;
        return static_cast<std::uint8_t>((i * (2 * b + 1) + 37 * b) % 256);
    });
}

TEST(EnhanceRgb, FlatHistogramIsAFixedPointWithoutClipping) {
    const auto img = flat_histogram_image();
    const auto out = enhance_rgb(img, {0.0, 100.0});
    for (std::size_t i = 0; i < img.u8().size(); ++i) {
        EXPECT_LE(std::abs(int{out.grid.u8()[i]} - int{img.u8()[i]}), 1);
    }
}

TEST(EnhanceRgb, FlatHistogramDefaultClipStaysClose) {
    // The 1/99 clip removes about 2.5 levels at each end, so values move by up to ~2.6 steps.
    const auto img = flat_histogram_image();
    const auto out = enhance_rgb(img);
    int worst = 0;
    for (std::size_t i = 0; i < img.u8().size(); ++i) {
        worst = std::max(worst, std::abs(int{out.grid.u8()[i]} - int{img.u8()[i]}));
    }
    EXPECT_LE(worst, 3);
}

TEST(EnhanceRgb, ConstantChannelsAreDegenerate) {
    const auto img = testing::rgb_from(8, 8, [](int, int, int b) { return static_cast<std::uint8_t>(40 * b + 3); });
    const auto out = enhance_rgb(img);
    EXPECT_EQ(out.degenerate, (std::array<bool, 3>{true, true, true}));
    for (const auto v : out.grid.u8()) EXPECT_EQ(v, 0);
}

TEST(EnhanceRgb, FullRangeAndChannelIndependence) {
    Rng rng(8);
    std::vector<std::uint8_t> px(32 * 32 * 3);
    for (auto& v : px) v = static_cast<std::uint8_t>(60 + rng.below(90));
    const auto img = raster::GeoGrid::rgb(32, 32, {}, raster::CrsId::lv95(), px);
    const auto out = enhance_rgb(img);

    std::vector<std::uint8_t> rotated(px.size());
    for (std::size_t i = 0; i < px.size(); i += 3) {
        rotated[i] = px[i + 2];
        rotated[i + 1] = px[i];
        rotated[i + 2] = px[i + 1];
    }
    const auto out_rot = enhance_rgb(img.with_samples(rotated));
    for (std::size_t i = 0; i < px.size(); i += 3) {
        EXPECT_EQ(out_rot.grid.u8()[i], out.grid.u8()[i + 2]);
        EXPECT_EQ(out_rot.grid.u8()[i + 1], out.grid.u8()[i]);
    }
    for (int b = 0; b < 3; ++b) {
        std::uint8_t lo = 255;
        std::uint8_t hi = 0;
        for (std::size_t i = b; i < px.size(); i += 3) {
            lo = std::min(lo, out.grid.u8()[i]);
            hi = std::max(hi, out.grid.u8()[i]);
        }
        EXPECT_EQ(lo, 0);
        EXPECT_EQ(hi, 255);
    }
}

TEST(EnhanceRgb, RejectsDem) {
    const auto dem = testing::dem_from(2, 2, [](int, int) { return 0.0; });
    EXPECT_ERROR_KIND(enhance_rgb(dem), ErrorKind::BandMismatch);
}

}  // namespace
}  // namespace rsbench::enhance
