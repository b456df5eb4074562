#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

#include "wbc/color.hpp"
#include "wbc/error.hpp"
#include "wbc/segmentation.hpp"
#include "wbc/shape.hpp"
#include "wbc/tuning.hpp"

namespace wbc {

/// Protocol constants shared by the command-line workflow. A config file is
/// the single source of these values; command-line flags override it.
struct RunConfig {
    std::uint64_t seed = 0;
    int n_trees = 500;
    int folds = 5;
    int grid_max = 10;
    double train_fraction = 0.8;
    SegmentationConfig segmentation;
    HarrisConfig harris;
    CircularityVariant circularity_variant = CircularityVariant::DilationPerimeter;
    SdConvention sd_convention = SdConvention::Population;
    int importance_repeats = 5;

    ProtocolConfig protocol() const {
        ProtocolConfig p;
        p.train_fraction = train_fraction;
        p.folds = folds;
        p.grid_max = grid_max;
        p.n_trees = n_trees;
        p.seed = seed;
        return p;
    }

    ExtractorConfig extractor() const {
        ExtractorConfig e;
        e.harris = harris;
        e.circularity_variant = circularity_variant;
        e.sd_convention = sd_convention;
        return e;
    }
};

inline std::string serialize_run_config(const RunConfig& cfg) {
    std::ostringstream out;
    out << "seed " << cfg.seed << "\n";
    out << "trees " << cfg.n_trees << "\n";
    out << "folds " << cfg.folds << "\n";
    out << "grid_max " << cfg.grid_max << "\n";
    out << "train_fraction " << cfg.train_fraction << "\n";
    out << "delta " << cfg.segmentation.threshold_delta << "\n";
    out << "local_max_window " << cfg.segmentation.local_max_window << "\n";
    out << "stretch_percentiles " << cfg.segmentation.stretch_low_percentile << " "
        << cfg.segmentation.stretch_high_percentile << "\n";
    out << "connectivity " << cfg.segmentation.connectivity << "\n";
    out << "harris_k " << cfg.harris.k << "\n";
    out << "harris_sigma " << cfg.harris.sigma << "\n";
    out << "harris_threshold " << cfg.harris.response_threshold << "\n";
    out << "harris_floor " << cfg.harris.min_response << "\n";
    out << "harris_nms " << cfg.harris.nms_window << "\n";
    out << "circularity "
        << (cfg.circularity_variant == CircularityVariant::Isoperimetric ? "isoperimetric"
                                                                         : "dilation")
        << "\n";
    out << "sd_convention "
        << (cfg.sd_convention == SdConvention::Sample ? "sample" : "population") << "\n";
    out << "importance_repeats " << cfg.importance_repeats << "\n";
    return out.str();
}

inline RunConfig parse_run_config(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream row(line);
        std::string key;
        if (!(row >> key)) continue;
        bool ok = true;
        if (key == "seed") ok = static_cast<bool>(row >> cfg.seed);
        else if (key == "trees") ok = static_cast<bool>(row >> cfg.n_trees);
        else if (key == "folds") ok = static_cast<bool>(row >> cfg.folds);
        else if (key == "grid_max") ok = static_cast<bool>(row >> cfg.grid_max);
        else if (key == "train_fraction") ok = static_cast<bool>(row >> cfg.train_fraction);
        else if (key == "delta") ok = static_cast<bool>(row >> cfg.segmentation.threshold_delta);
        else if (key == "local_max_window")
            ok = static_cast<bool>(row >> cfg.segmentation.local_max_window);
        else if (key == "stretch_percentiles")
            ok = static_cast<bool>(row >> cfg.segmentation.stretch_low_percentile >>
                                   cfg.segmentation.stretch_high_percentile);
        else if (key == "connectivity")
            ok = static_cast<bool>(row >> cfg.segmentation.connectivity);
        else if (key == "harris_k") ok = static_cast<bool>(row >> cfg.harris.k);
        else if (key == "harris_sigma") ok = static_cast<bool>(row >> cfg.harris.sigma);
        else if (key == "harris_threshold")
            ok = static_cast<bool>(row >> cfg.harris.response_threshold);
        else if (key == "harris_floor") ok = static_cast<bool>(row >> cfg.harris.min_response);
        else if (key == "harris_nms") ok = static_cast<bool>(row >> cfg.harris.nms_window);
        else if (key == "circularity") {
            std::string v;
            ok = static_cast<bool>(row >> v);
            if (ok && v == "isoperimetric")
                cfg.circularity_variant = CircularityVariant::Isoperimetric;
            else if (ok && v == "dilation")
                cfg.circularity_variant = CircularityVariant::DilationPerimeter;
            else if (ok)
                throw SchemaError("config: unknown circularity variant '" + v + "'");
        } else if (key == "sd_convention") {
            std::string v;
            ok = static_cast<bool>(row >> v);
            if (ok && v == "sample") cfg.sd_convention = SdConvention::Sample;
            else if (ok && v == "population") cfg.sd_convention = SdConvention::Population;
            else if (ok) throw SchemaError("config: unknown sd convention '" + v + "'");
        } else if (key == "importance_repeats") {
            ok = static_cast<bool>(row >> cfg.importance_repeats);
        } else {
            throw SchemaError("config: unknown key '" + key + "'");
        }
        if (!ok) throw SchemaError("config: malformed value for '" + key + "'");
    }
    return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str());
}

}  // namespace wbc
