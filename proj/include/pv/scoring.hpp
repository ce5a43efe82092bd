#pragma once

#include "pv/confidence_map.hpp"
#include "pv/detection.hpp"
#include "pv/imagery.hpp"

#include <span>
#include <string>
#include <vector>

namespace pv {

/// |A n B| / |A u B| over sorted pixel sets. Throws EmptySets when both are empty.
double jaccard(const PixelSet& a, const PixelSet& b);

PixelSet set_union(const PixelSet& a, const PixelSet& b);
std::size_t intersection_size(const PixelSet& a, const PixelSet& b);

struct PRPoint {
    double threshold = 0;
    double precision = 0;
    double recall = 0;
    friend bool operator==(const PRPoint&, const PRPoint&) = default;
};

/// Thresholds strictly decreasing, recall non-decreasing.
struct PRCurve {
    std::vector<PRPoint> points;
    /// Positive fraction among the scored candidates: the random-detector precision.
    double prevalence = 0;
    bool quantized = false;

    double max_recall() const noexcept;
    /// Largest precision among points with recall >= r (0 when none).
    double precision_at_recall(double r) const noexcept;
};

enum class SweepMode { Exact, Quantized };

/// Pools all pixels. Exact mode sweeps every distinct confidence; quantized
/// mode uses the 1001 thresholds 1.000, 0.999, ..., 0.000.
PRCurve pixel_pr(std::span<const ConfidenceMap> maps, std::span<const LabelMask> masks, SweepMode mode = SweepMode::Exact);

struct TruthObject {
    std::string tile_id;
    std::string polygon_id;
    PixelSet pixels;
};

/// Rasterizes each polygon separately (pixels clipped to the tile).
std::vector<TruthObject> truth_objects(std::span<const PolygonAnnotation> annotations, int width, int height);

struct MatchResult {
    std::vector<bool> accepted;                         // per detection
    std::vector<double> jaccard;                        // per detection, against its union (0 when none)
    std::vector<std::vector<std::size_t>> overlapped;   // per detection: annotations sharing >= 1 pixel
    std::vector<std::vector<std::size_t>> detected_by;  // per annotation: accepted detections covering it

    std::size_t true_detections() const noexcept;
    std::size_t false_detections() const noexcept { return accepted.size() - true_detections(); }
    std::size_t detected_annotations() const noexcept;
};

/// Union rule: each detection is compared with the union of every annotation
/// (same tile) it overlaps; accepted iff that union is non-empty and J >= j_star.
MatchResult match_objects(std::span<const DetectionObject> detections, std::span<const TruthObject> annotations, double j_star);

/// Sweeps the distinct detection confidences, descending.
PRCurve object_pr(std::span<const DetectionObject> detections, std::span<const TruthObject> annotations, double j_star);

/// Header "threshold,precision,recall"; 17 significant digits.
std::string format_pr_csv(const PRCurve& curve);
PRCurve parse_pr_csv(const std::string& text);

/// Recall on x, precision on y, with the prevalence baseline drawn dashed.
std::string format_pr_svg(std::span<const PRCurve> curves, std::span<const std::string> labels, const std::string& title);

} // namespace pv
