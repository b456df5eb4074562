#pragma once

#include <cmath>
#include <cstddef>
#include <exception>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wbc/error.hpp"
#include "wbc/raster.hpp"
#include "wbc/regions.hpp"

namespace wbc {

/// Parameters of the cell-extraction chain. Defaults are the reference
/// configuration; every knob is exposed for experiments.
struct SegmentationConfig {
    int local_max_window = 5;
    double stretch_low_percentile = 2.0;
    double stretch_high_percentile = 98.0;
    double threshold_delta = 0.01;
    int connectivity = 8;
    bool keep_trace = false;
};

/// Intermediate stage images, in execution order, for debugging dumps.
struct SegmentationTrace {
    RasterImage remapped;    ///< black pixels turned yellow
    RasterImage yellow;      ///< Y plane of the CMYK conversion
    RasterImage filtered;    ///< local-maximum filtered
    RasterImage stretched;   ///< contrast stretched
    RasterImage equalized;   ///< histogram equalized
    RasterImage combined;    ///< 2*stretched + equalized
    RasterImage candidates;  ///< thresholded, before object selection
};

/// Names matching SegmentationTrace fields, for stage dumps.
inline const std::vector<std::pair<std::string, const RasterImage SegmentationTrace::*>>&
trace_stages() {
    static const std::vector<std::pair<std::string, const RasterImage SegmentationTrace::*>> k = {
        {"1_remapped", &SegmentationTrace::remapped},
        {"2_yellow", &SegmentationTrace::yellow},
        {"3_filtered", &SegmentationTrace::filtered},
        {"4_stretched", &SegmentationTrace::stretched},
        {"5_equalized", &SegmentationTrace::equalized},
        {"6_combined", &SegmentationTrace::combined},
        {"7_candidates", &SegmentationTrace::candidates},
    };
    return k;
}

struct SegmentationResult {
    BinaryMask mask;
    std::size_t cell_pixel_count = 0;
    double center_distance = 0.0;  ///< selected centroid to image center, pixels
    int region_count = 0;          ///< candidate objects before selection
    std::optional<SegmentationTrace> trace;
};

/// Extract the cell nearest the image center as a binary mask.
///
/// Chain: remap black to yellow, convert to CMYK and keep the yellow plane,
/// local-maximum filter, then combine a contrast-stretched and an equalized
/// copy as 2s + e, keep pixels within delta of the global minimum, label
/// connected components, and select the one closest to the center. Cell
/// pixels score a yellow value of zero (blue dominant), while backgrounds --
/// warm-tinted or black-remapped-to-yellow -- score high, so the minimum
/// band isolates the cell on both acquisition styles unchanged.
inline SegmentationResult segment_cell(const RasterImage& img,
                                       const SegmentationConfig& cfg = {}) {
    img.require(Colorspace::RGB, "segment_cell");
    if (img.width() < 16 || img.height() < 16)
        throw DimensionError("segment_cell: input must be at least 16x16, got " +
                             std::to_string(img.width()) + "x" + std::to_string(img.height()));

    RasterImage remapped = black_to_yellow(img);
    RasterImage yellow = extract_plane(rgb_to_cmyk(remapped), 2);
    RasterImage filtered = local_max_filter(yellow, cfg.local_max_window);
    RasterImage stretched =
        contrast_stretch(filtered, cfg.stretch_low_percentile, cfg.stretch_high_percentile);
    RasterImage equalized = equalize_histogram(filtered);
    RasterImage combined = combine_stretch_equalize(stretched, equalized);
    RasterImage candidates = threshold_below(combined, cfg.threshold_delta);
    if (foreground_count(candidates) == 0)
        throw SegmentationFailure("segment_cell: no foreground after thresholding");

    LabeledRegions regions = connected_components(candidates, cfg.connectivity);
    const double center_row = img.height() / 2.0;
    const double center_col = img.width() / 2.0;
    const int label = nearest_region(regions, center_row, center_col);
    BinaryMask mask = region_mask(regions, label);

    const auto& [cr, cc] = regions.centroids[static_cast<std::size_t>(label) - 1];
    SegmentationResult result{std::move(mask),
                              regions.pixel_counts[static_cast<std::size_t>(label) - 1],
                              std::hypot(cr - center_row, cc - center_col),
                              regions.region_count,
                              std::nullopt};
    if (cfg.keep_trace)
        result.trace.emplace(SegmentationTrace{std::move(remapped), std::move(yellow),
                                               std::move(filtered), std::move(stretched),
                                               std::move(equalized), std::move(combined),
                                               std::move(candidates)});
    return result;
}

/// One failed entry of a batch run.
struct BatchFailure {
    std::size_t index = 0;
    std::string path;
    std::string message;
};

/// Batch results in input order; failed entries are null and logged.
struct SegmentationBatch {
    std::vector<std::optional<SegmentationResult>> results;
    std::vector<BatchFailure> failures;
};

/// Segment every path via a caller-supplied loader (path -> RasterImage).
/// Per-entry failures are recorded, never fatal.
template <typename Loader>
SegmentationBatch segment_batch(const std::vector<std::string>& paths, Loader&& load,
                                const SegmentationConfig& cfg = {}) {
    SegmentationBatch batch;
    batch.results.reserve(paths.size());
    for (std::size_t i = 0; i < paths.size(); ++i) {
        try {
            batch.results.emplace_back(segment_cell(load(paths[i]), cfg));
        } catch (const std::exception& ex) {
            batch.results.emplace_back(std::nullopt);
            batch.failures.push_back({i, paths[i], ex.what()});
        }
    }
    return batch;
}

}  // namespace wbc
