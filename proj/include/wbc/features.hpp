#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>

#include "wbc/color.hpp"
#include "wbc/error.hpp"
#include "wbc/raster.hpp"
#include "wbc/shape.hpp"
#include "wbc/texture.hpp"

namespace wbc {

inline constexpr std::size_t kFeatureCount = 24;

/// Canonical metric names, frozen in this order everywhere: feature matrix
/// columns, model serialization, importance reports.
inline constexpr std::array<const char*, kFeatureCount> kFeatureNames = {
    "White EI",     "Black EI",       "SP value", "1st Eigenvalue", "2nd Eigenvalue",
    "Eccentricity", "Circularity",    "Number of Corners",
    "Mean R",       "SD R",           "Mean G",   "SD G",           "Mean B",
    "SD B",         "Mean C",         "SD C",     "Mean M",         "SD M",
    "Mean Y",       "SD Y",           "Mean K",   "SD K",           "Mean P",
    "SD P"};

using FeatureVector = std::array<double, kFeatureCount>;

enum class FeatureCategory { Shape, Color, Texture };

/// Features 0-7 are shape, 8-21 color, 22-23 texture.
inline constexpr FeatureCategory category_of(std::size_t index) {
    return index < 8    ? FeatureCategory::Shape
           : index < 22 ? FeatureCategory::Color
                        : FeatureCategory::Texture;
}

inline constexpr const char* category_name(FeatureCategory c) {
    switch (c) {
        case FeatureCategory::Shape: return "Shape";
        case FeatureCategory::Color: return "Color";
        default: return "Texture";
    }
}

enum class CellLabel { Healthy = 0, Malignant = 1 };

inline constexpr const char* label_name(CellLabel label) {
    return label == CellLabel::Healthy ? "Healthy" : "Malignant";
}

inline CellLabel parse_label(const std::string& text) {
    if (text == "Healthy") return CellLabel::Healthy;
    if (text == "Malignant") return CellLabel::Malignant;
    throw SchemaError("unknown label '" + text + "' (expected Healthy or Malignant)");
}

/// Knobs of the three extractors, bundled for the full-vector call.
struct ExtractorConfig {
    HarrisConfig harris;
    CircularityVariant circularity_variant = CircularityVariant::DilationPerimeter;
    SdConvention sd_convention = SdConvention::Population;
};

/// All 24 metrics of one segmented cell, in canonical order. Degenerate
/// shapes surface as a NaN eccentricity; callers decide whether to reject.
inline FeatureVector extract_features(const RasterImage& img, const BinaryMask& mask,
                                      const ExtractorConfig& cfg = {}) {
    img.require(Colorspace::RGB, "extract_features");
    if (!img.same_size(mask))
        throw DimensionError("extract_features: image and mask dimensions differ");

    const ShapeFeatures shape =
        extract_shape_features(mask, cfg.harris, cfg.circularity_variant);
    const ColorFeatures color = extract_color_features(img, mask, cfg.sd_convention);
    const auto [mean_p, sd_p] = texture_stats(cooccurrence(rgb_to_gray(img), mask));

    return {static_cast<double>(shape.white_ei),
            static_cast<double>(shape.black_ei),
            shape.sp,
            shape.eig1,
            shape.eig2,
            shape.eccentricity,
            shape.circularity,
            static_cast<double>(shape.corner_count),
            color.mean_r,
            color.sd_r,
            color.mean_g,
            color.sd_g,
            color.mean_b,
            color.sd_b,
            color.mean_c,
            color.sd_c,
            color.mean_m,
            color.sd_m,
            color.mean_y,
            color.sd_y,
            color.mean_k,
            color.sd_k,
            mean_p,
            sd_p};
}

inline bool has_undefined_values(const FeatureVector& f) {
    for (double v : f)
        if (!std::isfinite(v)) return true;
    return false;
}

}  // namespace wbc
