#pragma once

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "wbc/raster.hpp"

namespace wbc {

/// Connected foreground components. Labels run 1..region_count in the grid,
/// 0 is background; centroids/pixel_counts are indexed by label-1.
struct LabeledRegions {
    int width = 0;
    int height = 0;
    std::vector<int> label_grid;
    int region_count = 0;
    std::vector<std::pair<double, double>> centroids;  // (row, col)
    std::vector<std::size_t> pixel_counts;
};

/// Label maximal connected foreground regions with 4- or 8-connectivity.
inline LabeledRegions connected_components(const RasterImage& mask, int connectivity = 8) {
    mask.require(Colorspace::Binary, "connected_components");
    if (connectivity != 4 && connectivity != 8)
        throw ParameterError("connected_components: connectivity must be 4 or 8");
    const int w = mask.width(), h = mask.height();
    LabeledRegions out;
    out.width = w;
    out.height = h;
    out.label_grid.assign(static_cast<std::size_t>(w) * h, 0);

    static constexpr int dr8[8] = {-1, -1, -1, 0, 0, 1, 1, 1};
    static constexpr int dc8[8] = {-1, 0, 1, -1, 1, -1, 0, 1};
    static constexpr int dr4[4] = {-1, 0, 0, 1};
    static constexpr int dc4[4] = {0, -1, 1, 0};
    const int* dr = connectivity == 8 ? dr8 : dr4;
    const int* dc = connectivity == 8 ? dc8 : dc4;
    const int nd = connectivity;

    std::vector<std::pair<int, int>> stack;
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const std::size_t idx = static_cast<std::size_t>(r) * w + c;
            if (mask.plane(0)[idx] == 0.0 || out.label_grid[idx] != 0) continue;
            const int label = ++out.region_count;
            double sum_r = 0.0, sum_c = 0.0;
            std::size_t count = 0;
            stack.push_back({r, c});
            out.label_grid[idx] = label;
            while (!stack.empty()) {
                auto [cr, cc] = stack.back();
                stack.pop_back();
                sum_r += cr;
                sum_c += cc;
                ++count;
                for (int k = 0; k < nd; ++k) {
                    const int nr = cr + dr[k], nc = cc + dc[k];
                    if (nr < 0 || nr >= h || nc < 0 || nc >= w) continue;
                    const std::size_t nidx = static_cast<std::size_t>(nr) * w + nc;
                    if (mask.plane(0)[nidx] == 0.0 || out.label_grid[nidx] != 0) continue;
                    out.label_grid[nidx] = label;
                    stack.push_back({nr, nc});
                }
            }
            out.centroids.emplace_back(sum_r / count, sum_c / count);
            out.pixel_counts.push_back(count);
        }
    }
    return out;
}

/// Label of the region whose centroid is nearest to (row, col);
/// ties go to the lowest label.
inline int nearest_region(const LabeledRegions& regions, double row, double col) {
    if (regions.region_count == 0)
        throw SegmentationFailure("nearest_region: no regions to select from");
    int best = 1;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (int label = 1; label <= regions.region_count; ++label) {
        const auto& [cr, cc] = regions.centroids[label - 1];
        const double d2 = (cr - row) * (cr - row) + (cc - col) * (cc - col);
        if (d2 < best_d2) {
            best_d2 = d2;
            best = label;
        }
    }
    return best;
}

inline RasterImage region_mask(const LabeledRegions& regions, int label) {
    RasterImage out = RasterImage::binary(regions.width, regions.height);
    for (std::size_t i = 0; i < regions.label_grid.size(); ++i)
        out.plane(0)[i] = regions.label_grid[i] == label ? 1.0 : 0.0;
    return out;
}

/// Binary mask of the region closest to the given image center.
inline RasterImage select_center_object(const LabeledRegions& regions, double center_row,
                                        double center_col) {
    return region_mask(regions, nearest_region(regions, center_row, center_col));
}

}  // namespace wbc
