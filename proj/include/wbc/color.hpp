#pragma once

#include <cmath>
#include <cstddef>
#include <utility>

#include "wbc/error.hpp"
#include "wbc/raster.hpp"

namespace wbc {

enum class SdConvention {
    Population,  ///< divide by n (the default)
    Sample,      ///< divide by n-1
};

/// Mean and standard deviation of a single-plane image restricted to the
/// mask's foreground pixels.
inline std::pair<double, double> masked_stats(const RasterImage& channel, const BinaryMask& mask,
                                              SdConvention sd = SdConvention::Population) {
    if (channel.planes() != 1) throw ColorspaceError("masked_stats: expected a one-plane channel");
    if (!channel.same_size(mask))
        throw DimensionError("masked_stats: channel and mask dimensions differ");
    double n = 0.0, sum = 0.0;
    const std::size_t total = channel.pixel_count();
    for (std::size_t i = 0; i < total; ++i)
        if (mask.plane(0)[i] != 0.0) {
            n += 1.0;
            sum += channel.plane(0)[i];
        }
    if (n == 0.0) throw ParameterError("masked_stats: empty mask");
    const double mean = sum / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < total; ++i)
        if (mask.plane(0)[i] != 0.0) {
            const double d = channel.plane(0)[i] - mean;
            ss += d * d;
        }
    const double divisor = sd == SdConvention::Sample ? std::max(1.0, n - 1.0) : n;
    return {mean, std::sqrt(ss / divisor)};
}

/// The 14 color statistics in feature-vector order: mean/SD of R, G, B from
/// the original image, then of C, M, Y, K.
struct ColorFeatures {
    double mean_r = 0, sd_r = 0;
    double mean_g = 0, sd_g = 0;
    double mean_b = 0, sd_b = 0;
    double mean_c = 0, sd_c = 0;
    double mean_m = 0, sd_m = 0;
    double mean_y = 0, sd_y = 0;
    double mean_k = 0, sd_k = 0;
};

/// RGB statistics come from the raw image; CMYK statistics come from the
/// black-to-yellow remapped image, matching the channels the segmenter sees.
inline ColorFeatures extract_color_features(const RasterImage& img, const BinaryMask& mask,
                                            SdConvention sd = SdConvention::Population) {
    img.require(Colorspace::RGB, "extract_color_features");
    if (!img.same_size(mask))
        throw DimensionError("extract_color_features: image and mask dimensions differ");
    ColorFeatures out;
    const RasterImage cmyk = rgb_to_cmyk(black_to_yellow(img));

    double* slots[14] = {&out.mean_r, &out.sd_r, &out.mean_g, &out.sd_g, &out.mean_b,
                         &out.sd_b,   &out.mean_c, &out.sd_c, &out.mean_m, &out.sd_m,
                         &out.mean_y, &out.sd_y,   &out.mean_k, &out.sd_k};
    for (int ch = 0; ch < 7; ++ch) {
        const RasterImage plane =
            ch < 3 ? extract_plane(img, ch) : extract_plane(cmyk, ch - 3);
        const auto [mean, dev] = masked_stats(plane, mask, sd);
        *slots[2 * ch] = mean;
        *slots[2 * ch + 1] = dev;
    }
    return out;
}

}  // namespace wbc
