#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace pv {

/// Per-pixel confidence in [0,1], row-major. Stored as float so the on-disk
/// CMAP form round-trips exactly.
class ConfidenceMap {
public:
    ConfidenceMap() = default;
    ConfidenceMap(int width, int height) : width_(width), height_(height), values_(static_cast<std::size_t>(width) * height, 0.0f) {}
    ConfidenceMap(int width, int height, std::vector<float> values);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return values_.size(); }

    float at(int x, int y) const noexcept { return values_[static_cast<std::size_t>(y) * width_ + x]; }
    float& at(int x, int y) noexcept { return values_[static_cast<std::size_t>(y) * width_ + x]; }
    float operator[](std::size_t i) const noexcept { return values_[i]; }
    float& operator[](std::size_t i) noexcept { return values_[i]; }

    std::span<const float> values() const noexcept { return values_; }
    std::span<float> values() noexcept { return values_; }

    friend bool operator==(const ConfidenceMap&, const ConfidenceMap&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<float> values_;
};

/// Post-processed map; same storage, distinct role.
class EnhancedMap : public ConfidenceMap {
public:
    using ConfidenceMap::ConfidenceMap;
    EnhancedMap() = default;
    explicit EnhancedMap(ConfidenceMap m) : ConfidenceMap(std::move(m)) {}
};

// CMAP: "CMAP", version byte (1), u32 width, u32 height (little-endian),
// then width*height little-endian float32, row-major.
inline constexpr std::uint8_t kCmapVersion = 1;

std::vector<std::uint8_t> encode_cmap(const ConfidenceMap& map);
ConfidenceMap decode_cmap(std::span<const std::uint8_t> bytes);
void save_cmap(const ConfidenceMap& map, const std::filesystem::path& path);
ConfidenceMap load_cmap(const std::filesystem::path& path);

} // namespace pv
