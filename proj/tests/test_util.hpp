#pragma once

// Shared helpers for drawing synthetic cells and comparing masks.

#include <cmath>
#include <utility>

#include "wbc/raster.hpp"

namespace testutil {

inline void set_pixel(wbc::RasterImage& img, int row, int col, double r, double g, double b) {
    img.at(0, row, col) = r;
    img.at(1, row, col) = g;
    img.at(2, row, col) = b;
}

inline wbc::RasterImage solid_rgb(int w, int h, double r, double g, double b) {
    wbc::RasterImage img = wbc::RasterImage::rgb(w, h);
    for (int row = 0; row < h; ++row)
        for (int col = 0; col < w; ++col) set_pixel(img, row, col, r, g, b);
    return img;
}

/// Paint a filled disk of the given color; returns the painted pixel count.
inline std::size_t paint_disk(wbc::RasterImage& img, double center_row, double center_col,
                              double radius, double r, double g, double b) {
    std::size_t painted = 0;
    for (int row = 0; row < img.height(); ++row) {
        for (int col = 0; col < img.width(); ++col) {
            const double dr = row - center_row, dc = col - center_col;
            if (dr * dr + dc * dc <= radius * radius) {
                set_pixel(img, row, col, r, g, b);
                ++painted;
            }
        }
    }
    return painted;
}

inline wbc::RasterImage disk_mask(int w, int h, double center_row, double center_col,
                                  double radius) {
    wbc::RasterImage mask = wbc::RasterImage::binary(w, h);
    for (int row = 0; row < h; ++row) {
        for (int col = 0; col < w; ++col) {
            const double dr = row - center_row, dc = col - center_col;
            if (dr * dr + dc * dc <= radius * radius) mask.at(0, row, col) = 1.0;
        }
    }
    return mask;
}

inline wbc::RasterImage rect_mask(int w, int h, int r0, int c0, int r1, int c1) {
    wbc::RasterImage mask = wbc::RasterImage::binary(w, h);
    for (int row = r0; row <= r1; ++row)
        for (int col = c0; col <= c1; ++col) mask.at(0, row, col) = 1.0;
    return mask;
}

inline wbc::RasterImage ellipse_mask(int w, int h, double center_row, double center_col,
                                     double semi_row, double semi_col) {
    wbc::RasterImage mask = wbc::RasterImage::binary(w, h);
    for (int row = 0; row < h; ++row) {
        for (int col = 0; col < w; ++col) {
            const double dr = (row - center_row) / semi_row, dc = (col - center_col) / semi_col;
            if (dr * dr + dc * dc <= 1.0) mask.at(0, row, col) = 1.0;
        }
    }
    return mask;
}

/// Dice overlap 2|A∩B| / (|A|+|B|); 1.0 when both masks are empty.
inline double dice(const wbc::RasterImage& a, const wbc::RasterImage& b) {
    std::size_t inter = 0, total = 0;
    for (std::size_t i = 0; i < a.plane(0).size(); ++i) {
        const bool fa = a.plane(0)[i] != 0.0, fb = b.plane(0)[i] != 0.0;
        inter += fa && fb;
        total += fa;
        total += fb;
    }
    if (total == 0) return 1.0;
    return 2.0 * static_cast<double>(inter) / static_cast<double>(total);
}

}  // namespace testutil
