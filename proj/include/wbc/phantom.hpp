#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "wbc/error.hpp"
#include "wbc/features.hpp"
#include "wbc/manifest.hpp"
#include "wbc/raster.hpp"
#include "wbc/rng.hpp"

namespace wbc {

/// How one class of synthetic cells is drawn. Cells are wobbled disks:
/// radius(theta) = radius + wobble * cos(lobes * theta + phase). Colors keep
/// blue strictly dominant by construction (base gaps exceed the sum of all
/// jitter and noise amplitudes), which is what makes the blobs behave like
/// stained cells under the segmenter.
struct ClassRecipe {
    std::array<int, 3> base_rgb{128, 60, 172};
    int color_jitter = 8;          ///< per-image, per-channel, uniform +-
    double radius_min = 80.0;
    double radius_max = 92.0;
    double wobble_min = 0.5;
    double wobble_max = 2.0;
    int lobes_min = 3;
    int lobes_max = 4;
    double luminance_noise = 8.0;  ///< per-pixel, shared across channels
    double channel_noise = 4.0;    ///< per-pixel, per-channel
};

enum class BackgroundStyle {
    Tissue,  ///< warm near-white with per-pixel noise (stained-smear style)
    Black,   ///< exact zeros (pre-masked acquisition style)
};

inline const char* background_name(BackgroundStyle b) {
    return b == BackgroundStyle::Tissue ? "tissue" : "black";
}

inline BackgroundStyle parse_background(const std::string& text) {
    if (text == "tissue") return BackgroundStyle::Tissue;
    if (text == "black") return BackgroundStyle::Black;
    throw SchemaError("unknown background style '" + text + "' (tissue or black)");
}

struct PhantomSpec {
    int per_class = 40;
    int width = 256;
    int height = 256;
    std::uint64_t seed = 7;
    BackgroundStyle background = BackgroundStyle::Tissue;
    ClassRecipe healthy;     // near-circular, mildly textured, darker purple
    ClassRecipe malignant;   // irregular boundary, lighter, strongly textured

    static PhantomSpec defaults() {
        PhantomSpec spec;
        spec.healthy = ClassRecipe{};
        spec.malignant = ClassRecipe{{170, 115, 198}, 6, 82.0, 95.0, 3.0, 6.0, 3, 5, 24.0, 5.0};
        return spec;
    }
};

struct PhantomImage {
    RasterImage image;
    BinaryMask mask;
    CellLabel label = CellLabel::Healthy;
    std::string name;
};

namespace detail {

inline constexpr std::array<int, 3> kTissueBase{235, 215, 218};
inline constexpr double kTissueNoise = 8.0;  ///< keeps red strictly dominant

inline double clamp255(double v) { return std::clamp(v, 0.0, 255.0); }

}  // namespace detail

/// Draw one phantom. Pure and deterministic: blob geometry, color, and
/// pixel noise come from stream (seed, class, index) while background noise
/// comes from stream (seed, 10 + class, index), so switching the background
/// style never changes the cell itself.
inline PhantomImage make_phantom(const PhantomSpec& spec, CellLabel label, int index) {
    if (spec.width < 32 || spec.height < 32)
        throw ParameterError("make_phantom: canvas must be at least 32x32");
    const ClassRecipe& recipe = label == CellLabel::Malignant ? spec.malignant : spec.healthy;
    const auto cls = static_cast<std::uint64_t>(label == CellLabel::Malignant ? 1 : 0);
    Rng blob_rng = make_stream(spec.seed, cls, static_cast<std::uint64_t>(index));
    Rng bg_rng = make_stream(spec.seed, 10 + cls, static_cast<std::uint64_t>(index));

    const double center_row = spec.height / 2.0 + uniform_range(blob_rng, -3.0, 3.0);
    const double center_col = spec.width / 2.0 + uniform_range(blob_rng, -3.0, 3.0);
    const double radius = uniform_range(blob_rng, recipe.radius_min, recipe.radius_max);
    const double wobble = uniform_range(blob_rng, recipe.wobble_min, recipe.wobble_max);
    const int lobes =
        recipe.lobes_min +
        static_cast<int>(uniform_index(blob_rng, static_cast<std::size_t>(recipe.lobes_max -
                                                                          recipe.lobes_min + 1)));
    const double phase = uniform_range(blob_rng, 0.0, 2.0 * M_PI);

    std::array<double, 3> base{};
    for (int ch = 0; ch < 3; ++ch)
        base[static_cast<std::size_t>(ch)] =
            recipe.base_rgb[static_cast<std::size_t>(ch)] +
            static_cast<double>(uniform_index(blob_rng, 2 * recipe.color_jitter + 1)) -
            recipe.color_jitter;

    PhantomImage out{RasterImage::rgb(spec.width, spec.height),
                     RasterImage::binary(spec.width, spec.height), label, ""};
    char name[40];
    std::snprintf(name, sizeof name, "%s_%03d",
                  label == CellLabel::Malignant ? "malignant" : "healthy", index);
    out.name = name;

    for (int r = 0; r < spec.height; ++r)
        for (int c = 0; c < spec.width; ++c) {
            const double dr = r - center_row, dc = c - center_col;
            const double theta = std::atan2(dr, dc);
            const double boundary = radius + wobble * std::cos(lobes * theta + phase);
            if (std::hypot(dr, dc) <= boundary) {
                out.mask.at(0, r, c) = 1.0;
                const double lum =
                    uniform_range(blob_rng, -recipe.luminance_noise, recipe.luminance_noise);
                for (int ch = 0; ch < 3; ++ch)
                    out.image.at(ch, r, c) = detail::clamp255(std::round(
                        base[static_cast<std::size_t>(ch)] + lum +
                        uniform_range(blob_rng, -recipe.channel_noise, recipe.channel_noise)));
            } else if (spec.background == BackgroundStyle::Tissue) {
                for (int ch = 0; ch < 3; ++ch)
                    out.image.at(ch, r, c) = detail::clamp255(std::round(
                        detail::kTissueBase[static_cast<std::size_t>(ch)] +
                        uniform_range(bg_rng, -detail::kTissueNoise, detail::kTissueNoise)));
            }
            // Black background: planes stay 0 (remapped to bright yellow by
            // the segmenter).
        }
    return out;
}

// ---------------------------------------------------------------------------
// Spec (de)serialization: plain "key value" lines, '#' comments

inline std::string serialize_phantom_spec(const PhantomSpec& spec) {
    std::ostringstream out;
    out << "per_class " << spec.per_class << "\n";
    out << "width " << spec.width << "\n";
    out << "height " << spec.height << "\n";
    out << "seed " << spec.seed << "\n";
    out << "background " << background_name(spec.background) << "\n";
    auto recipe = [&](const char* prefix, const ClassRecipe& r) {
        out << prefix << ".base_rgb " << r.base_rgb[0] << " " << r.base_rgb[1] << " "
            << r.base_rgb[2] << "\n";
        out << prefix << ".color_jitter " << r.color_jitter << "\n";
        out << prefix << ".radius " << r.radius_min << " " << r.radius_max << "\n";
        out << prefix << ".wobble " << r.wobble_min << " " << r.wobble_max << "\n";
        out << prefix << ".lobes " << r.lobes_min << " " << r.lobes_max << "\n";
        out << prefix << ".luminance_noise " << r.luminance_noise << "\n";
        out << prefix << ".channel_noise " << r.channel_noise << "\n";
    };
    recipe("healthy", spec.healthy);
    recipe("malignant", spec.malignant);
    return out.str();
}

inline PhantomSpec parse_phantom_spec(const std::string& text) {
    PhantomSpec spec = PhantomSpec::defaults();
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream row(line);
        std::string key;
        if (!(row >> key)) continue;
        auto recipe_of = [&](const std::string& k) -> ClassRecipe* {
            if (k.rfind("healthy.", 0) == 0) return &spec.healthy;
            if (k.rfind("malignant.", 0) == 0) return &spec.malignant;
            return nullptr;
        };
        ClassRecipe* r = recipe_of(key);
        const std::string field = r ? key.substr(key.find('.') + 1) : key;
        bool ok = true;
        if (!r) {
            if (key == "per_class") ok = static_cast<bool>(row >> spec.per_class);
            else if (key == "width") ok = static_cast<bool>(row >> spec.width);
            else if (key == "height") ok = static_cast<bool>(row >> spec.height);
            else if (key == "seed") ok = static_cast<bool>(row >> spec.seed);
            else if (key == "background") {
                std::string b;
                ok = static_cast<bool>(row >> b);
                if (ok) spec.background = parse_background(b);
            } else {
                throw SchemaError("phantom spec: unknown key '" + key + "'");
            }
        } else if (field == "base_rgb") {
            ok = static_cast<bool>(row >> r->base_rgb[0] >> r->base_rgb[1] >> r->base_rgb[2]);
        } else if (field == "color_jitter") ok = static_cast<bool>(row >> r->color_jitter);
        else if (field == "radius") ok = static_cast<bool>(row >> r->radius_min >> r->radius_max);
        else if (field == "wobble") ok = static_cast<bool>(row >> r->wobble_min >> r->wobble_max);
        else if (field == "lobes") ok = static_cast<bool>(row >> r->lobes_min >> r->lobes_max);
        else if (field == "luminance_noise") ok = static_cast<bool>(row >> r->luminance_noise);
        else if (field == "channel_noise") ok = static_cast<bool>(row >> r->channel_noise);
        else throw SchemaError("phantom spec: unknown key '" + key + "'");
        if (!ok) throw SchemaError("phantom spec: malformed value for '" + key + "'");
    }
    return spec;
}

/// Everything a generation run produced.
struct PhantomOutput {
    DatasetManifest manifest;               ///< entries point at images/
    std::vector<std::string> mask_paths;    ///< ground truth, parallel to entries
};

/// Write the full phantom dataset: images/, masks/ (ground truth),
/// manifest.csv, and an echo of the generating spec. The writer callable
/// (path, RasterImage) performs the actual encoding.
template <typename Writer>
PhantomOutput generate_phantoms(const PhantomSpec& spec, const std::string& outdir,
                                Writer&& write_image) {
    namespace fs = std::filesystem;
    if (spec.per_class < 1) throw ParameterError("generate_phantoms: per_class must be >= 1");
    fs::create_directories(fs::path(outdir) / "images");
    fs::create_directories(fs::path(outdir) / "masks");

    PhantomOutput out;
    out.manifest.root = outdir;
    for (const CellLabel label : {CellLabel::Healthy, CellLabel::Malignant}) {
        for (int i = 0; i < spec.per_class; ++i) {
            PhantomImage phantom = make_phantom(spec, label, i);
            const std::string image_path =
                (fs::path(outdir) / "images" / (phantom.name + ".png")).string();
            const std::string mask_path =
                (fs::path(outdir) / "masks" / (phantom.name + ".png")).string();
            write_image(image_path, phantom.image);
            write_image(mask_path, phantom.mask);
            out.manifest.entries.push_back({image_path, label, SourceKind::Phantom});
            out.mask_paths.push_back(mask_path);
        }
    }
    save_manifest(out.manifest, (fs::path(outdir) / "manifest.csv").string());
    std::ofstream echo((fs::path(outdir) / "phantom_spec.txt").string(), std::ios::binary);
    if (!echo) throw Error("cannot write phantom spec echo in " + outdir);
    echo << serialize_phantom_spec(spec);
    return out;
}

}  // namespace wbc
