#pragma once

#include <exception>
#include <string>
#include <vector>

#include "wbc/features.hpp"
#include "wbc/manifest.hpp"
#include "wbc/matrix.hpp"
#include "wbc/segmentation.hpp"

namespace wbc {

struct ExtractOutcome {
    FeatureMatrix matrix;                ///< successful entries, manifest order
    std::vector<BatchFailure> failures;  ///< skipped entries with reasons
};

/// Segment and featurize every manifest entry via a caller-supplied loader
/// (path -> RasterImage). Failures -- decode errors, segmentation failures,
/// degenerate shapes with undefined metrics -- are logged and excluded, never
/// fatal. Successful rows carry the entry path as source id.
template <typename Loader>
ExtractOutcome extract_all(const DatasetManifest& manifest, Loader&& load,
                           const ExtractorConfig& extractor_cfg = {},
                           const SegmentationConfig& segmentation_cfg = {}) {
    ExtractOutcome out;
    for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
        const ManifestEntry& entry = manifest.entries[i];
        try {
            const RasterImage img = load(entry.path);
            const SegmentationResult seg = segment_cell(img, segmentation_cfg);
            const FeatureVector features = extract_features(img, seg.mask, extractor_cfg);
            if (has_undefined_values(features)) {
                out.failures.push_back(
                    {i, entry.path, "degenerate shape: undefined feature value"});
                continue;
            }
            out.matrix.source_ids.push_back(entry.path);
            out.matrix.rows.push_back(features);
            out.matrix.labels.push_back(entry.label);
        } catch (const std::exception& ex) {
            out.failures.push_back({i, entry.path, ex.what()});
        }
    }
    return out;
}

}  // namespace wbc
