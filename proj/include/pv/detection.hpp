#pragma once

#include "pv/confidence_map.hpp"
#include "pv/features.hpp"

#include <compare>
#include <span>
#include <string>
#include <vector>

namespace pv {

struct PPParams {
    int nms_side = 9;       // L_s
    double c0 = 0.375;      // global threshold applied to surviving maxima
    int otsu_side = 19;     // L_g
    int close_radius = 5;   // r_1
    int dilate_radius = 2;  // r_2

    void validate() const;
    friend bool operator==(const PPParams&, const PPParams&) = default;
};

struct Maximum {
    int x = 0;
    int y = 0;
    float value = 0;
    friend bool operator==(const Maximum&, const Maximum&) = default;
};

/// A pixel survives iff no pixel of its clamped side x side neighbourhood is
/// larger, and no equal-valued neighbour precedes it in (y,x) order.
/// Returned in raster order.
std::vector<Maximum> nonmax_suppress(const ConfidenceMap& map, int side);

/// Keeps maxima with value >= c0.
std::vector<Maximum> filter_maxima(std::span<const Maximum> maxima, double c0);

inline constexpr int kOtsuBins = 256;

/// Histogram bin of a confidence value over [0,1].
int otsu_bin(double v) noexcept;

struct OtsuThreshold {
    int bin = 0;          // foreground: otsu_bin(v) >= bin; may be 256 (empty foreground)
    double edge = 0;      // bin / 256
};

/// Otsu's method on a fixed 256-bin histogram of [0,1]. Ties go to the lowest
/// edge; a single occupied bin b yields bin b+1.
OtsuThreshold otsu_threshold(std::span<const float> values);

/// Offsets with dx^2 + dy^2 <= r^2, row-major.
std::vector<Offset> disk_element(int radius);

/// Full post-processing: NMS, global threshold, Otsu region growing around
/// each surviving maximum, then closing(r_1) and dilation(r_2) of the support.
/// Collisions and morphology-added pixels take the largest contributing value.
EnhancedMap postprocess(const ConfidenceMap& map, const PPParams& params);

namespace serial {
EnhancedMap postprocess(const ConfidenceMap& map, const PPParams& params);
}

/// Step 3 alone: the grown region of one maximum (pixels in raster order).
std::vector<std::size_t> grow_region(const ConfidenceMap& map, const Maximum& seed, int otsu_side);

/// Binary closing/dilation of the positive support with max-value fill.
ConfidenceMap close_support(const ConfidenceMap& map, int radius);
ConfidenceMap dilate_support(const ConfidenceMap& map, int radius);

struct Pixel {
    int y = 0;
    int x = 0;
    friend auto operator<=>(const Pixel&, const Pixel&) = default;
};

/// Sorted, duplicate-free.
using PixelSet = std::vector<Pixel>;

struct DetectionObject {
    std::string tile_id;
    PixelSet pixels;
    double confidence = 0;

    std::size_t area() const noexcept { return pixels.size(); }
    int min_x() const;
    int max_x() const;
    int min_y() const { return pixels.front().y; }
    int max_y() const { return pixels.back().y; }
    std::pair<double, double> centroid() const;

    friend bool operator==(const DetectionObject&, const DetectionObject&) = default;
};

/// 8-connected components of the strictly positive support, ordered by
/// their first pixel in raster order.
std::vector<DetectionObject> extract_objects(const ConfidenceMap& enhanced, const std::string& tile_id = {});

// Detections CSV: tile_id,object_id,confidence,area,min_x,min_y,max_x,max_y,rle_pixels
// rle_pixels: space-separated runs "y:x:length", raster order.
std::string encode_rle(const PixelSet& pixels);
PixelSet decode_rle(std::string_view rle);
std::string format_detections(std::span<const DetectionObject> objects);
std::vector<DetectionObject> parse_detections(const std::string& text);

} // namespace pv
