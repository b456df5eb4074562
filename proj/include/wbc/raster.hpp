#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "wbc/error.hpp"

namespace wbc {

enum class Colorspace { RGB, CMYK, Gray, Binary };

inline int plane_count(Colorspace cs) {
    switch (cs) {
        case Colorspace::RGB: return 3;
        case Colorspace::CMYK: return 4;
        default: return 1;
    }
}

inline const char* colorspace_name(Colorspace cs) {
    switch (cs) {
        case Colorspace::RGB: return "rgb";
        case Colorspace::CMYK: return "cmyk";
        case Colorspace::Gray: return "gray";
        default: return "binary";
    }
}

/// Multi-channel pixel grid. Intensities are reals on a nominal 0-255 scale;
/// Binary planes hold only 0 or 1. Planes are stored row-major.
class RasterImage {
public:
    RasterImage() = default;

    RasterImage(int width, int height, Colorspace cs, double fill = 0.0)
        : width_(width), height_(height), colorspace_(cs) {
        if (width <= 0 || height <= 0)
            throw ParameterError("image dimensions must be positive");
        planes_.assign(static_cast<std::size_t>(plane_count(cs)),
                       std::vector<double>(static_cast<std::size_t>(width) * height, fill));
    }

    static RasterImage rgb(int w, int h, double fill = 0.0) { return {w, h, Colorspace::RGB, fill}; }
    static RasterImage gray(int w, int h, double fill = 0.0) { return {w, h, Colorspace::Gray, fill}; }
    static RasterImage binary(int w, int h, double fill = 0.0) { return {w, h, Colorspace::Binary, fill}; }
    static RasterImage cmyk(int w, int h, double fill = 0.0) { return {w, h, Colorspace::CMYK, fill}; }

    int width() const { return width_; }
    int height() const { return height_; }
    Colorspace colorspace() const { return colorspace_; }
    int planes() const { return static_cast<int>(planes_.size()); }
    std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }

    double at(int plane, int row, int col) const {
        return planes_[plane][static_cast<std::size_t>(row) * width_ + col];
    }
    double& at(int plane, int row, int col) {
        return planes_[plane][static_cast<std::size_t>(row) * width_ + col];
    }

    const std::vector<double>& plane(int p) const { return planes_[p]; }
    std::vector<double>& plane(int p) { return planes_[p]; }

    bool same_size(const RasterImage& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }

    void require(Colorspace cs, const char* op) const {
        if (colorspace_ != cs)
            throw ColorspaceError(std::string(op) + ": expected " + colorspace_name(cs) +
                                  " input, got " + colorspace_name(colorspace_));
    }

private:
    int width_ = 0;
    int height_ = 0;
    Colorspace colorspace_ = Colorspace::Gray;
    std::vector<std::vector<double>> planes_;
};

/// Single-channel {0,1} image marking the extracted cell.
using BinaryMask = RasterImage;

// ---------------------------------------------------------------------------
// Channel plumbing

inline std::array<RasterImage, 3> split_channels(const RasterImage& img) {
    img.require(Colorspace::RGB, "split_channels");
    std::array<RasterImage, 3> out{RasterImage::gray(img.width(), img.height()),
                                   RasterImage::gray(img.width(), img.height()),
                                   RasterImage::gray(img.width(), img.height())};
    for (int c = 0; c < 3; ++c) out[c].plane(0) = img.plane(c);
    return out;
}

/// Remap exactly-black pixels (r=g=b=0) to pure yellow (255,255,0);
/// everything else passes through. Idempotent.
inline RasterImage black_to_yellow(const RasterImage& img) {
    img.require(Colorspace::RGB, "black_to_yellow");
    RasterImage out = img;
    const std::size_t n = img.pixel_count();
    auto& r = out.plane(0);
    auto& g = out.plane(1);
    auto& b = out.plane(2);
    for (std::size_t i = 0; i < n; ++i) {
        if (r[i] == 0.0 && g[i] == 0.0 && b[i] == 0.0) {
            r[i] = 255.0;
            g[i] = 255.0;
            b[i] = 0.0;
        }
    }
    return out;
}

/// Naive device-independent RGB -> CMYK, scaled to 0-255. K=1 (pure black)
/// maps to C=M=Y=0.
inline RasterImage rgb_to_cmyk(const RasterImage& img) {
    img.require(Colorspace::RGB, "rgb_to_cmyk");
    RasterImage out = RasterImage::cmyk(img.width(), img.height());
    const std::size_t n = img.pixel_count();
    const auto& r = img.plane(0);
    const auto& g = img.plane(1);
    const auto& b = img.plane(2);
    for (std::size_t i = 0; i < n; ++i) {
        const double rn = r[i] / 255.0, gn = g[i] / 255.0, bn = b[i] / 255.0;
        const double k = 1.0 - std::max({rn, gn, bn});
        double c = 0.0, m = 0.0, y = 0.0;
        if (k < 1.0) {
            c = (1.0 - rn - k) / (1.0 - k);
            m = (1.0 - gn - k) / (1.0 - k);
            y = (1.0 - bn - k) / (1.0 - k);
        }
        out.plane(0)[i] = c * 255.0;
        out.plane(1)[i] = m * 255.0;
        out.plane(2)[i] = y * 255.0;
        out.plane(3)[i] = k * 255.0;
    }
    return out;
}

inline RasterImage extract_plane(const RasterImage& img, int plane) {
    if (plane < 0 || plane >= img.planes())
        throw ParameterError("extract_plane: plane index out of range");
    RasterImage out = RasterImage::gray(img.width(), img.height());
    out.plane(0) = img.plane(plane);
    return out;
}

/// Luminance grayscale: round(0.299 R + 0.587 G + 0.114 B), clamped to 0-255.
inline RasterImage rgb_to_gray(const RasterImage& img) {
    img.require(Colorspace::RGB, "rgb_to_gray");
    RasterImage out = RasterImage::gray(img.width(), img.height());
    const std::size_t n = img.pixel_count();
    for (std::size_t i = 0; i < n; ++i) {
        double v = 0.299 * img.plane(0)[i] + 0.587 * img.plane(1)[i] + 0.114 * img.plane(2)[i];
        out.plane(0)[i] = std::clamp(std::round(v), 0.0, 255.0);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Windowed operators (border policy: edge replication)

/// Sliding-window maximum over a window x window neighborhood.
inline RasterImage local_max_filter(const RasterImage& img, int window = 5) {
    img.require(Colorspace::Gray, "local_max_filter");
    if (window < 1 || window % 2 == 0)
        throw ParameterError("local_max_filter: window must be odd and >= 1");
    if (window == 1) return img;
    const int w = img.width(), h = img.height(), radius = window / 2;
    RasterImage out = RasterImage::gray(w, h);
    for (int r = 0; r < h; ++r) {
        const int r0 = std::max(0, r - radius), r1 = std::min(h - 1, r + radius);
        for (int c = 0; c < w; ++c) {
            const int c0 = std::max(0, c - radius), c1 = std::min(w - 1, c + radius);
            double m = img.at(0, r0, c0);
            for (int rr = r0; rr <= r1; ++rr)
                for (int cc = c0; cc <= c1; ++cc) m = std::max(m, img.at(0, rr, cc));
            out.at(0, r, c) = m;
        }
    }
    return out;
}

namespace detail {

/// Percentile by linear interpolation between order statistics
/// (rank = p/100 * (n-1)), over an already sorted vector.
inline double percentile_sorted(const std::vector<double>& sorted, double p) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double rank = p / 100.0 * static_cast<double>(n - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(rank));
    const std::size_t hi = std::min(lo + 1, n - 1);
    const double frac = rank - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace detail

/// Linear stretch mapping the [p_low, p_high] percentile range onto [0, 255],
/// clipped. Degenerate images (equal percentiles) map to all zeros.
inline RasterImage contrast_stretch(const RasterImage& img, double p_low = 2.0,
                                    double p_high = 98.0) {
    img.require(Colorspace::Gray, "contrast_stretch");
    if (!(p_low < p_high))
        throw ParameterError("contrast_stretch: p_low must be below p_high");
    if (img.pixel_count() == 0) throw ParameterError("contrast_stretch: empty image");
    std::vector<double> sorted = img.plane(0);
    std::sort(sorted.begin(), sorted.end());
    const double eps = detail::percentile_sorted(sorted, p_low);
    const double delta = detail::percentile_sorted(sorted, p_high);
    RasterImage out = RasterImage::gray(img.width(), img.height());
    if (delta == eps) return out;
    // Normalize before scaling so the percentile endpoints land exactly on
    // 0 and 255 (x/x == 1 in IEEE arithmetic).
    const double range = delta - eps;
    const std::size_t n = img.pixel_count();
    for (std::size_t i = 0; i < n; ++i)
        out.plane(0)[i] =
            std::clamp((img.plane(0)[i] - eps) / range * 255.0, 0.0, 255.0);
    return out;
}

/// 256-bin histogram equalization: values are binned by rounding and mapped
/// through round(255 * cdf). A constant image maps to a constant image.
inline RasterImage equalize_histogram(const RasterImage& img) {
    img.require(Colorspace::Gray, "equalize_histogram");
    const std::size_t n = img.pixel_count();
    std::array<std::size_t, 256> hist{};
    auto bin_of = [](double v) {
        return static_cast<int>(std::clamp(std::lround(v), 0l, 255l));
    };
    for (std::size_t i = 0; i < n; ++i) ++hist[bin_of(img.plane(0)[i])];
    std::array<double, 256> lut{};
    std::size_t cum = 0;
    for (int b = 0; b < 256; ++b) {
        cum += hist[b];
        lut[b] = std::round(255.0 * static_cast<double>(cum) / static_cast<double>(n));
    }
    RasterImage out = RasterImage::gray(img.width(), img.height());
    for (std::size_t i = 0; i < n; ++i) out.plane(0)[i] = lut[bin_of(img.plane(0)[i])];
    return out;
}

/// Pixelwise 2*stretched + equalized. Kept as reals (range up to 765);
/// deliberately not clipped.
inline RasterImage combine_stretch_equalize(const RasterImage& stretched,
                                            const RasterImage& equalized) {
    stretched.require(Colorspace::Gray, "combine_stretch_equalize");
    equalized.require(Colorspace::Gray, "combine_stretch_equalize");
    if (!stretched.same_size(equalized))
        throw DimensionError("combine_stretch_equalize: image dimensions differ");
    RasterImage out = RasterImage::gray(stretched.width(), stretched.height());
    const std::size_t n = out.pixel_count();
    for (std::size_t i = 0; i < n; ++i)
        out.plane(0)[i] = 2.0 * stretched.plane(0)[i] + equalized.plane(0)[i];
    return out;
}

/// Keep pixels strictly below (global minimum + delta) as foreground.
inline RasterImage threshold_below(const RasterImage& img, double delta = 0.01) {
    img.require(Colorspace::Gray, "threshold_below");
    const auto& v = img.plane(0);
    const double cut = *std::min_element(v.begin(), v.end()) + delta;
    RasterImage out = RasterImage::binary(img.width(), img.height());
    for (std::size_t i = 0; i < v.size(); ++i) out.plane(0)[i] = v[i] < cut ? 1.0 : 0.0;
    return out;
}

/// Morphological dilation with a 3x3 square structuring element.
inline RasterImage dilate(const RasterImage& mask) {
    mask.require(Colorspace::Binary, "dilate");
    const int w = mask.width(), h = mask.height();
    RasterImage out = RasterImage::binary(w, h);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            if (mask.at(0, r, c) == 0.0) continue;
            for (int rr = std::max(0, r - 1); rr <= std::min(h - 1, r + 1); ++rr)
                for (int cc = std::max(0, c - 1); cc <= std::min(w - 1, c + 1); ++cc)
                    out.at(0, rr, cc) = 1.0;
        }
    }
    return out;
}

inline std::size_t foreground_count(const RasterImage& mask) {
    mask.require(Colorspace::Binary, "foreground_count");
    std::size_t n = 0;
    for (double v : mask.plane(0)) n += v != 0.0;
    return n;
}

}  // namespace wbc
