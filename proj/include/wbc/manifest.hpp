#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "wbc/error.hpp"
#include "wbc/features.hpp"

namespace wbc {

enum class SourceKind { AllIdb2, CNmc, Phantom, Other };

inline const char* source_name(SourceKind s) {
    switch (s) {
        case SourceKind::AllIdb2: return "ALL_IDB2";
        case SourceKind::CNmc: return "C_NMC";
        case SourceKind::Phantom: return "PHANTOM";
        default: return "OTHER";
    }
}

inline SourceKind parse_source(const std::string& text) {
    if (text == "ALL_IDB2") return SourceKind::AllIdb2;
    if (text == "C_NMC") return SourceKind::CNmc;
    if (text == "PHANTOM") return SourceKind::Phantom;
    if (text == "OTHER") return SourceKind::Other;
    throw SchemaError("unknown source '" + text + "'");
}

struct ManifestEntry {
    std::string path;
    CellLabel label = CellLabel::Healthy;
    SourceKind source = SourceKind::Other;
};

struct DatasetManifest {
    std::string root;
    std::vector<ManifestEntry> entries;
};

/// How labels are inferred from a directory tree.
enum class LayoutRule {
    FilenameSuffix,  ///< stem ending "_1" = Malignant, "_0" = Healthy
    ParentDir,       ///< parent directory "all" = Malignant, "hem" = Healthy
};

/// Files that carried no recognizable label.
struct SkipReport {
    std::vector<std::string> skipped;
};

namespace detail {

inline bool has_image_extension(const std::filesystem::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext == ".png" || ext == ".bmp" || ext == ".jpg" || ext == ".jpeg" || ext == ".tif" ||
           ext == ".tiff";
}

inline bool infer_label(const std::filesystem::path& p, LayoutRule rule, CellLabel& out) {
    if (rule == LayoutRule::FilenameSuffix) {
        const std::string stem = p.stem().string();
        if (stem.size() >= 2 && stem.compare(stem.size() - 2, 2, "_1") == 0) {
            out = CellLabel::Malignant;
            return true;
        }
        if (stem.size() >= 2 && stem.compare(stem.size() - 2, 2, "_0") == 0) {
            out = CellLabel::Healthy;
            return true;
        }
        return false;
    }
    const std::string parent = p.parent_path().filename().string();
    if (parent == "all") {
        out = CellLabel::Malignant;
        return true;
    }
    if (parent == "hem") {
        out = CellLabel::Healthy;
        return true;
    }
    return false;
}

}  // namespace detail

/// Scan a directory tree for image files and label them by the given rule.
/// Output is sorted by path; unlabeled files land in the skip report.
inline DatasetManifest build_manifest(const std::string& root, LayoutRule rule,
                                      SourceKind source = SourceKind::Other,
                                      SkipReport* skips = nullptr) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(root)) throw Error("build_manifest: not a directory: " + root);
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(root))
        if (entry.is_regular_file() && detail::has_image_extension(entry.path()))
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    DatasetManifest manifest;
    manifest.root = root;
    for (const fs::path& p : files) {
        CellLabel label;
        if (detail::infer_label(p, rule, label))
            manifest.entries.push_back({p.string(), label, source});
        else if (skips)
            skips->skipped.push_back(p.string());
    }
    return manifest;
}

inline void save_manifest(const DatasetManifest& manifest, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open manifest for writing: " + path);
    out << "path,label,source\n";
    for (const ManifestEntry& e : manifest.entries)
        out << e.path << "," << label_name(e.label) << "," << source_name(e.source) << "\n";
    if (!out) throw Error("failed writing manifest: " + path);
}

inline DatasetManifest load_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open manifest: " + path);
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("manifest is empty: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "path,label,source")
        throw SchemaError("manifest header mismatch in " + path + ": got '" + line + "'");

    DatasetManifest manifest;
    manifest.root = std::filesystem::path(path).parent_path().string();
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::size_t c2 = line.rfind(',');
        const std::size_t c1 = c2 == std::string::npos ? c2 : line.rfind(',', c2 - 1);
        if (c1 == std::string::npos || c2 == std::string::npos || c1 == 0)
            throw SchemaError("manifest row malformed: " + line);
        manifest.entries.push_back({line.substr(0, c1),
                                    parse_label(line.substr(c1 + 1, c2 - c1 - 1)),
                                    parse_source(line.substr(c2 + 1))});
    }
    return manifest;
}

}  // namespace wbc
