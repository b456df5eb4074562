#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstddef>
#include <utility>
#include <vector>

#include "wbc/error.hpp"
#include "wbc/raster.hpp"

namespace wbc {

/// 256x256 gray-level co-occurrence counts.
struct CooccurrenceMatrix {
    static constexpr int kLevels = 256;
    std::vector<std::int64_t> counts =
        std::vector<std::int64_t>(static_cast<std::size_t>(kLevels) * kLevels, 0);
    std::vector<std::pair<int, int>> offsets;  ///< (drow, dcol) shifts accumulated

    std::int64_t& at(int a, int b) { return counts[static_cast<std::size_t>(a) * kLevels + b]; }
    std::int64_t at(int a, int b) const {
        return counts[static_cast<std::size_t>(a) * kLevels + b];
    }
    std::int64_t total() const {
        std::int64_t t = 0;
        for (std::int64_t c : counts) t += c;
        return t;
    }
};

/// Co-occurrence counts of the masked grayscale image (background forced to
/// zero by multiplication) under right (0,+1) and down (+1,0) unit shifts.
/// Background zeros participate in pair counting, so the total mass depends
/// only on the image dimensions: h*(w-1) + (h-1)*w.
inline CooccurrenceMatrix cooccurrence(const RasterImage& gray, const BinaryMask& mask) {
    gray.require(Colorspace::Gray, "cooccurrence");
    if (!gray.same_size(mask)) throw DimensionError("cooccurrence: gray and mask dimensions differ");
    const int w = gray.width(), h = gray.height();

    std::vector<int> p(gray.pixel_count());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double v = gray.plane(0)[i] * (mask.plane(0)[i] != 0.0 ? 1.0 : 0.0);
        const int q = static_cast<int>(v);
        if (static_cast<double>(q) != v || q < 0 || q > 255)
            throw ParameterError("cooccurrence: gray image must hold integers in 0..255");
        p[i] = q;
    }

    CooccurrenceMatrix out;
    out.offsets = {{0, 1}, {1, 0}};
    for (const auto& [dr, dc] : out.offsets)
        for (int r = 0; r + dr < h; ++r)
            for (int c = 0; c + dc < w; ++c)
                ++out.at(p[static_cast<std::size_t>(r) * w + c],
                         p[static_cast<std::size_t>(r + dr) * w + (c + dc)]);
    return out;
}

/// Mean and population SD over all 65,536 count cells (raw counts, not
/// normalized probabilities). Smoother images concentrate their mass in
/// fewer cells and so score a larger SD per unit mass -- the pair (mean, sd)
/// summarizes how spread-out the gray-level transitions are.
inline std::pair<double, double> texture_stats(const CooccurrenceMatrix& matrix) {
    const double n = static_cast<double>(matrix.counts.size());
    double sum = 0.0;
    for (std::int64_t c : matrix.counts) sum += static_cast<double>(c);
    const double mean = sum / n;
    double ss = 0.0;
    for (std::int64_t c : matrix.counts) {
        const double d = static_cast<double>(c) - mean;
        ss += d * d;
    }
    return {mean, std::sqrt(ss / n)};
}

}  // namespace wbc
