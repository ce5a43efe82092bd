#pragma once

#include "pv/imagery.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pv {

/// Per-channel summed-area tables of samples and squared samples. Entry (x,y)
/// holds the sum over [0,x)x[0,y); row and column 0 are zero.
class IntegralImage {
public:
    IntegralImage() = default;
    explicit IntegralImage(const ImageTile& tile);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

    std::uint64_t sum_at(int c, int x, int y) const noexcept { return sum_[c][index(x, y)]; }
    std::uint64_t sq_at(int c, int x, int y) const noexcept { return sq_[c][index(x, y)]; }

    /// Sum over the half-open rectangle [x0,x1)x[y0,y1), coordinates inside the tile.
    std::uint64_t rect_sum(int c, int x0, int y0, int x1, int y1) const noexcept
    {
        return sum_at(c, x1, y1) - sum_at(c, x0, y1) - sum_at(c, x1, y0) + sum_at(c, x0, y0);
    }
    std::uint64_t rect_sq(int c, int x0, int y0, int x1, int y1) const noexcept
    {
        return sq_at(c, x1, y1) - sq_at(c, x0, y1) - sq_at(c, x1, y0) + sq_at(c, x0, y0);
    }

private:
    std::size_t index(int x, int y) const noexcept { return static_cast<std::size_t>(y) * (width_ + 1) + x; }

    int width_ = 0;
    int height_ = 0;
    std::array<std::vector<std::uint64_t>, 3> sum_;
    std::array<std::vector<std::uint64_t>, 3> sq_;
};

IntegralImage build_integral(const ImageTile& tile);

struct FeatureSpec {
    int window_side = 3;
    std::vector<int> ring_radii{2, 4};

    /// Throws InvalidSpec unless side is odd >= 3 and radii strictly increase from >= 1.
    void validate() const;
    /// 9*6*|radii| - 6*(|radii|-1)
    std::size_t feature_count() const noexcept;
    /// Compact identifier recorded in model files, e.g. "w3;r2,4".
    std::string fingerprint() const;

    friend bool operator==(const FeatureSpec&, const FeatureSpec&) = default;
};

struct Offset {
    int x = 0;
    int y = 0;
    friend bool operator==(const Offset&, const Offset&) = default;
};

/// The 9 window centers of one ring, x-major over the sequence (0,-r,r).
std::array<Offset, 9> ring_offsets(int r);

/// All window offsets of a spec in feature order (duplicate centers dropped).
std::vector<Offset> window_offsets(const FeatureSpec& spec);

struct ChannelStats {
    double mean = 0;
    double variance = 0;
};

/// Population mean/variance of a side x side window; coordinates outside the
/// tile are clamped (edge replication).
std::array<ChannelStats, 3> window_stats(const IntegralImage& integral, int center_x, int center_y, int window_side);

/// Per window: (mean R, mean G, mean B, var R, var G, var B).
std::vector<double> extract_pixel_features(const IntegralImage& integral, const FeatureSpec& spec, int x, int y);
void extract_pixel_features(const IntegralImage& integral, const FeatureSpec& spec, std::span<const Offset> offsets, int x, int y,
                            std::span<double> out);

/// Row-major pixels, each a contiguous run of `count()` features.
class FeatureImage {
public:
    FeatureImage() = default;
    FeatureImage(int width, int height, std::size_t count)
        : width_(width), height_(height), count_(count), values_(static_cast<std::size_t>(width) * height * count)
    {
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t count() const noexcept { return count_; }

    std::span<const double> at(int x, int y) const noexcept
    {
        return {values_.data() + (static_cast<std::size_t>(y) * width_ + x) * count_, count_};
    }
    std::span<double> at(int x, int y) noexcept
    {
        return {values_.data() + (static_cast<std::size_t>(y) * width_ + x) * count_, count_};
    }
    std::span<const double> values() const noexcept { return values_; }

    friend bool operator==(const FeatureImage&, const FeatureImage&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::size_t count_ = 0;
    std::vector<double> values_;
};

/// OpenMP over rows.
FeatureImage extract_feature_image(const ImageTile& tile, const FeatureSpec& spec);

namespace serial {
FeatureImage extract_feature_image(const ImageTile& tile, const FeatureSpec& spec);
}

} // namespace pv
