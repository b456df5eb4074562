#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <array>
#include <cmath>

#include "test_util.hpp"
#include "wbc/raster.hpp"
#include "wbc/regions.hpp"
#include "wbc/rng.hpp"

using namespace wbc;
using Catch::Approx;

TEST_CASE("split_channels projects planes unchanged") {
    RasterImage img = RasterImage::rgb(1, 1);
    testutil::set_pixel(img, 0, 0, 10, 20, 30);
    auto [r, g, b] = split_channels(img);
    CHECK(r.at(0, 0, 0) == 10);
    CHECK(g.at(0, 0, 0) == 20);
    CHECK(b.at(0, 0, 0) == 30);

    RasterImage black = testutil::solid_rgb(2, 2, 0, 0, 0);
    for (auto& ch : split_channels(black))
        for (double v : ch.plane(0)) CHECK(v == 0.0);

    // Recombination restores the original bit-exactly.
    RasterImage rebuilt = RasterImage::rgb(1, 1);
    rebuilt.plane(0) = r.plane(0);
    rebuilt.plane(1) = g.plane(0);
    rebuilt.plane(2) = b.plane(0);
    for (int p = 0; p < 3; ++p) CHECK(rebuilt.plane(p) == img.plane(p));

    CHECK_THROWS_AS(split_channels(RasterImage::gray(2, 2)), ColorspaceError);
}

TEST_CASE("black_to_yellow remaps only exact black") {
    RasterImage img = RasterImage::rgb(2, 1);
    testutil::set_pixel(img, 0, 0, 0, 0, 0);
    testutil::set_pixel(img, 0, 1, 0, 0, 1);
    RasterImage out = black_to_yellow(img);
    CHECK(out.at(0, 0, 0) == 255);
    CHECK(out.at(1, 0, 0) == 255);
    CHECK(out.at(2, 0, 0) == 0);
    CHECK(out.at(0, 0, 1) == 0);
    CHECK(out.at(1, 0, 1) == 0);
    CHECK(out.at(2, 0, 1) == 1);

    RasterImage twice = black_to_yellow(out);
    for (int p = 0; p < 3; ++p) CHECK(twice.plane(p) == out.plane(p));
}

TEST_CASE("rgb_to_cmyk primary and singular cases") {
    RasterImage img = RasterImage::rgb(3, 1);
    testutil::set_pixel(img, 0, 0, 255, 255, 0);  // yellow
    testutil::set_pixel(img, 0, 1, 0, 0, 0);      // black, K=1 singular
    testutil::set_pixel(img, 0, 2, 255, 255, 255);
    RasterImage out = rgb_to_cmyk(img);
    CHECK(out.at(0, 0, 0) == Approx(0.0));
    CHECK(out.at(1, 0, 0) == Approx(0.0));
    CHECK(out.at(2, 0, 0) == Approx(255.0));
    CHECK(out.at(3, 0, 0) == Approx(0.0));
    for (int p = 0; p < 3; ++p) CHECK(out.at(p, 0, 1) == Approx(0.0));
    CHECK(out.at(3, 0, 1) == Approx(255.0));
    for (int p = 0; p < 4; ++p) CHECK(out.at(p, 0, 2) == Approx(0.0));
}

TEST_CASE("rgb_to_cmyk naive inverse reconstructs within one level") {
    Rng rng = make_stream(11);
    RasterImage img = RasterImage::rgb(16, 16);
    for (int p = 0; p < 3; ++p)
        for (double& v : img.plane(p)) v = static_cast<double>(uniform_index(rng, 256));
    RasterImage cmyk = rgb_to_cmyk(img);
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        const double c = cmyk.plane(0)[i] / 255.0, m = cmyk.plane(1)[i] / 255.0;
        const double y = cmyk.plane(2)[i] / 255.0, k = cmyk.plane(3)[i] / 255.0;
        CHECK(255.0 * (1 - c) * (1 - k) == Approx(img.plane(0)[i]).margin(1.0));
        CHECK(255.0 * (1 - m) * (1 - k) == Approx(img.plane(1)[i]).margin(1.0));
        CHECK(255.0 * (1 - y) * (1 - k) == Approx(img.plane(2)[i]).margin(1.0));
    }
}

TEST_CASE("local_max_filter window semantics") {
    RasterImage img = RasterImage::gray(5, 5);
    img.at(0, 2, 2) = 255;

    RasterImage identity = local_max_filter(img, 1);
    CHECK(identity.plane(0) == img.plane(0));

    RasterImage out = local_max_filter(img, 5);
    for (double v : out.plane(0)) CHECK(v == 255.0);

    RasterImage constant = RasterImage::gray(7, 4, 42.0);
    CHECK(local_max_filter(constant, 5).plane(0) == constant.plane(0));

    CHECK_THROWS_AS(local_max_filter(img, 4), ParameterError);
    CHECK_THROWS_AS(local_max_filter(img, 0), ParameterError);
}

TEST_CASE("local_max_filter dominates input pointwise") {
    Rng rng = make_stream(12);
    RasterImage img = RasterImage::gray(20, 20);
    for (double& v : img.plane(0)) v = uniform_range(rng, 0.0, 255.0);
    RasterImage out = local_max_filter(img, 3);
    for (std::size_t i = 0; i < img.pixel_count(); ++i) CHECK(out.plane(0)[i] >= img.plane(0)[i]);
}

TEST_CASE("contrast_stretch percentile mapping") {
    // Full-range gradient stays close to itself away from the clipped tails.
    RasterImage gradient = RasterImage::gray(256, 1);
    for (int c = 0; c < 256; ++c) gradient.at(0, 0, c) = c;
    RasterImage stretched = contrast_stretch(gradient);
    for (int c = 16; c < 240; ++c)
        CHECK(stretched.at(0, 0, c) == Approx(gradient.at(0, 0, c)).margin(8.0));
    for (double v : stretched.plane(0)) {
        CHECK(v >= 0.0);
        CHECK(v <= 255.0);
    }

    RasterImage constant = RasterImage::gray(4, 4, 99.0);
    RasterImage flat = contrast_stretch(constant);
    for (double v : flat.plane(0)) CHECK(v == 0.0);

    // Two-level image: 2nd percentile = 50, 98th = 150 under linear
    // interpolation, so levels map to the extremes.
    RasterImage two = RasterImage::gray(10, 10);
    for (std::size_t i = 0; i < 100; ++i) two.plane(0)[i] = i < 50 ? 50.0 : 150.0;
    RasterImage mapped = contrast_stretch(two);
    for (std::size_t i = 0; i < 100; ++i) CHECK(mapped.plane(0)[i] == (i < 50 ? 0.0 : 255.0));

    CHECK_THROWS_AS(contrast_stretch(two, 90.0, 10.0), ParameterError);
}

TEST_CASE("equalize_histogram CDF mapping") {
    RasterImage constant = RasterImage::gray(6, 6, 42.0);
    RasterImage eq = equalize_histogram(constant);
    const double level = eq.plane(0)[0];
    for (double v : eq.plane(0)) CHECK(v == level);

    // 75% zeros, 25% full-scale: lut(0) = round(255*0.75) = 191, lut(255) = 255.
    RasterImage two = RasterImage::gray(10, 10);
    for (std::size_t i = 0; i < 100; ++i) two.plane(0)[i] = i < 75 ? 0.0 : 255.0;
    RasterImage out = equalize_histogram(two);
    for (std::size_t i = 0; i < 100; ++i) CHECK(out.plane(0)[i] == (i < 75 ? 191.0 : 255.0));
}

TEST_CASE("equalize_histogram drives the CDF onto the diagonal") {
    // Every occupied output level w sits at round(255 * cdf), so 255 times
    // the cumulative fraction at w can differ from w by at most one half.
    // The quadratically skewed input violates that bound by a wide margin.
    Rng rng = make_stream(13);
    RasterImage img = RasterImage::gray(128, 128);
    for (double& v : img.plane(0)) {
        const double u = uniform_double(rng);
        v = std::floor(255.0 * u * u);
    }
    auto max_cdf_gap = [](const RasterImage& image) {
        std::array<std::size_t, 256> hist{};
        for (double v : image.plane(0))
            ++hist[static_cast<int>(std::clamp(v, 0.0, 255.0))];
        double gap = 0.0;
        std::size_t cum = 0;
        for (int w = 0; w < 256; ++w) {
            cum += hist[w];
            if (hist[w] == 0) continue;
            const double frac =
                static_cast<double>(cum) / static_cast<double>(image.pixel_count());
            gap = std::max(gap, std::abs(255.0 * frac - w));
        }
        return gap;
    };
    CHECK(max_cdf_gap(img) > 10.0);
    CHECK(max_cdf_gap(equalize_histogram(img)) <= 0.5);
}

TEST_CASE("combine_stretch_equalize is 2s + e") {
    RasterImage s = RasterImage::gray(3, 3, 0.0);
    RasterImage e = RasterImage::gray(3, 3, 17.0);
    CHECK(combine_stretch_equalize(s, e).plane(0) == e.plane(0));

    RasterImage s2 = RasterImage::gray(3, 3, 120.0);
    RasterImage e2 = RasterImage::gray(3, 3, 0.0);
    RasterImage doubled = combine_stretch_equalize(s2, e2);
    for (double v : doubled.plane(0)) CHECK(v == 240.0);

    RasterImage s3 = RasterImage::gray(1, 1, 100.0);
    RasterImage e3 = RasterImage::gray(1, 1, 55.0);
    CHECK(combine_stretch_equalize(s3, e3).at(0, 0, 0) == 255.0);

    // Range above 255 must survive uncapped.
    RasterImage s4 = RasterImage::gray(1, 1, 255.0);
    RasterImage e4 = RasterImage::gray(1, 1, 255.0);
    CHECK(combine_stretch_equalize(s4, e4).at(0, 0, 0) == 765.0);

    CHECK_THROWS_AS(combine_stretch_equalize(s, RasterImage::gray(4, 3)), DimensionError);
}

TEST_CASE("threshold_below keeps values under min + delta") {
    RasterImage constant = RasterImage::gray(4, 4, 7.0);
    RasterImage all_kept = threshold_below(constant);
    for (double v : all_kept.plane(0)) CHECK(v == 1.0);

    RasterImage img = RasterImage::gray(10, 1, 100.0);
    img.at(0, 0, 3) = 0.0;
    RasterImage mask = threshold_below(img);
    for (int c = 0; c < 10; ++c) CHECK(mask.at(0, 0, c) == (c == 3 ? 1.0 : 0.0));

    RasterImage close = RasterImage::gray(3, 1);
    close.at(0, 0, 0) = 5.0;
    close.at(0, 0, 1) = 5.005;
    close.at(0, 0, 2) = 100.0;
    RasterImage m2 = threshold_below(close);
    CHECK(m2.at(0, 0, 0) == 1.0);
    CHECK(m2.at(0, 0, 1) == 1.0);
    CHECK(m2.at(0, 0, 2) == 0.0);
}

TEST_CASE("rgb_to_gray luminance") {
    RasterImage img = RasterImage::rgb(3, 1);
    testutil::set_pixel(img, 0, 0, 255, 255, 255);
    testutil::set_pixel(img, 0, 1, 0, 0, 0);
    testutil::set_pixel(img, 0, 2, 255, 0, 0);
    RasterImage gray = rgb_to_gray(img);
    CHECK(gray.at(0, 0, 0) == 255.0);
    CHECK(gray.at(0, 0, 1) == 0.0);
    CHECK(gray.at(0, 0, 2) == 76.0);
}

TEST_CASE("dilate with 3x3 structuring element") {
    RasterImage mask = RasterImage::binary(5, 5);
    mask.at(0, 2, 2) = 1.0;
    RasterImage grown = dilate(mask);
    CHECK(foreground_count(grown) == 9);
    for (int r = 1; r <= 3; ++r)
        for (int c = 1; c <= 3; ++c) CHECK(grown.at(0, r, c) == 1.0);

    RasterImage ones = RasterImage::binary(4, 4, 1.0);
    CHECK(dilate(ones).plane(0) == ones.plane(0));

    RasterImage empty = RasterImage::binary(4, 4);
    CHECK(foreground_count(dilate(empty)) == 0);
}

TEST_CASE("connected_components labeling and centroids") {
    RasterImage empty = RasterImage::binary(6, 6);
    CHECK(connected_components(empty).region_count == 0);

    RasterImage blocks = RasterImage::binary(10, 6);
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) {
            blocks.at(0, r, c) = 1.0;
            blocks.at(0, r + 4, c + 8) = 1.0;
        }
    LabeledRegions regions = connected_components(blocks);
    REQUIRE(regions.region_count == 2);
    CHECK(regions.centroids[0].first == Approx(0.5));
    CHECK(regions.centroids[0].second == Approx(0.5));
    CHECK(regions.centroids[1].first == Approx(4.5));
    CHECK(regions.centroids[1].second == Approx(8.5));
    CHECK(regions.pixel_counts[0] == 4);
    CHECK(regions.pixel_counts[1] == 4);

    RasterImage diag = RasterImage::binary(4, 4);
    diag.at(0, 1, 1) = 1.0;
    diag.at(0, 2, 2) = 1.0;
    CHECK(connected_components(diag, 8).region_count == 1);
    CHECK(connected_components(diag, 4).region_count == 2);
}

TEST_CASE("connected_components partitions the foreground") {
    Rng rng = make_stream(14);
    RasterImage mask = RasterImage::binary(32, 32);
    for (double& v : mask.plane(0)) v = uniform_double(rng) < 0.35 ? 1.0 : 0.0;
    LabeledRegions regions = connected_components(mask);
    std::size_t total = 0;
    for (std::size_t n : regions.pixel_counts) total += n;
    CHECK(total == foreground_count(mask));
    for (std::size_t i = 0; i < mask.pixel_count(); ++i) {
        const bool fg = mask.plane(0)[i] != 0.0;
        CHECK((regions.label_grid[i] != 0) == fg);
        CHECK(regions.label_grid[i] <= regions.region_count);
    }
    for (const auto& [cr, cc] : regions.centroids) {
        CHECK(cr >= 0.0);
        CHECK(cr <= 31.0);
        CHECK(cc >= 0.0);
        CHECK(cc <= 31.0);
    }
}

TEST_CASE("select_center_object picks nearest centroid, ties to lowest label") {
    RasterImage one = RasterImage::binary(9, 9);
    one.at(0, 1, 1) = 1.0;
    LabeledRegions single = connected_components(one);
    CHECK(foreground_count(select_center_object(single, 4.0, 4.0)) == 1);

    RasterImage two = RasterImage::binary(40, 40);
    two.at(0, 21, 21) = 1.0;  // distance ~1.4 from center (20,20)
    two.at(0, 0, 0) = 1.0;    // far corner
    LabeledRegions both = connected_components(two);
    RasterImage chosen = select_center_object(both, 20.0, 20.0);
    CHECK(chosen.at(0, 21, 21) == 1.0);
    CHECK(chosen.at(0, 0, 0) == 0.0);

    // Equidistant regions: label 1 (first in scan order) wins.
    RasterImage tie = RasterImage::binary(11, 11);
    tie.at(0, 5, 2) = 1.0;
    tie.at(0, 5, 8) = 1.0;
    LabeledRegions tied = connected_components(tie);
    RasterImage picked = select_center_object(tied, 5.0, 5.0);
    CHECK(picked.at(0, 5, 2) == 1.0);
    CHECK(picked.at(0, 5, 8) == 0.0);

    CHECK_THROWS_AS(select_center_object(connected_components(RasterImage::binary(3, 3)), 1, 1),
                    SegmentationFailure);
}

TEST_CASE("operators preserve dimensions") {
    RasterImage img = testutil::solid_rgb(13, 7, 10, 20, 30);
    auto check_dims = [&](const RasterImage& out) {
        CHECK(out.width() == 13);
        CHECK(out.height() == 7);
    };
    check_dims(black_to_yellow(img));
    check_dims(rgb_to_cmyk(img));
    check_dims(rgb_to_gray(img));
    RasterImage gray = rgb_to_gray(img);
    check_dims(local_max_filter(gray, 3));
    check_dims(equalize_histogram(gray));
    check_dims(contrast_stretch(gray));
    check_dims(threshold_below(gray));
}
