#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "wbc/error.hpp"
#include "wbc/raster.hpp"

namespace wbc::io {

/// Decode BMP/TIFF/JPEG/PNG to an 8-bit RGB raster. Grayscale files are
/// promoted to RGB with equal channels.
inline RasterImage load_image(const std::string& path) {
    const cv::Mat bgr = cv::imread(path, cv::IMREAD_COLOR);
    if (bgr.empty()) throw DecodeError("cannot decode image: " + path);
    RasterImage out = RasterImage::rgb(bgr.cols, bgr.rows);
    for (int r = 0; r < bgr.rows; ++r) {
        const auto* row = bgr.ptr<cv::Vec3b>(r);
        for (int c = 0; c < bgr.cols; ++c) {
            out.at(0, r, c) = row[c][2];
            out.at(1, r, c) = row[c][1];
            out.at(2, r, c) = row[c][0];
        }
    }
    return out;
}

/// Encode a raster by colorspace: RGB as 8-bit color, Binary as 0/255 gray,
/// Gray as clamped 8-bit gray (values above 255 are first rescaled by the
/// image maximum so debug dumps of wide-range stages stay viewable).
inline void save_image(const std::string& path, const RasterImage& img) {
    cv::Mat mat;
    if (img.colorspace() == Colorspace::RGB) {
        mat.create(img.height(), img.width(), CV_8UC3);
        for (int r = 0; r < img.height(); ++r) {
            auto* row = mat.ptr<cv::Vec3b>(r);
            for (int c = 0; c < img.width(); ++c) {
                row[c][2] = cv::saturate_cast<uchar>(img.at(0, r, c));
                row[c][1] = cv::saturate_cast<uchar>(img.at(1, r, c));
                row[c][0] = cv::saturate_cast<uchar>(img.at(2, r, c));
            }
        }
    } else if (img.colorspace() == Colorspace::Binary || img.colorspace() == Colorspace::Gray) {
        const bool binary = img.colorspace() == Colorspace::Binary;
        double scale = 1.0;
        if (!binary) {
            const double max_v = *std::max_element(img.plane(0).begin(), img.plane(0).end());
            if (max_v > 255.0) scale = 255.0 / max_v;
        }
        mat.create(img.height(), img.width(), CV_8UC1);
        for (int r = 0; r < img.height(); ++r) {
            auto* row = mat.ptr<uchar>(r);
            for (int c = 0; c < img.width(); ++c)
                row[c] = binary ? (img.at(0, r, c) != 0.0 ? 255 : 0)
                                : cv::saturate_cast<uchar>(img.at(0, r, c) * scale);
        }
    } else {
        throw ColorspaceError("save_image: cannot encode a CMYK raster");
    }
    if (!cv::imwrite(path, mat)) throw Error("cannot write image: " + path);
}

/// Interpret a 0/255 (or 0/1) gray or color file as a binary mask.
inline BinaryMask load_mask(const std::string& path) {
    const RasterImage img = load_image(path);
    BinaryMask mask = RasterImage::binary(img.width(), img.height());
    for (std::size_t i = 0; i < img.pixel_count(); ++i)
        mask.plane(0)[i] = img.plane(0)[i] > 127.0 ? 1.0 : 0.0;
    return mask;
}

}  // namespace wbc::io
