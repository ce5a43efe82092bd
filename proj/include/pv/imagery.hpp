#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace pv {

/// 8-bit RGB raster, row-major, interleaved samples.
class ImageTile {
public:
    ImageTile() = default;
    ImageTile(int width, int height, std::string tile_id = {});
    ImageTile(int width, int height, std::vector<std::uint8_t> data, std::string tile_id = {});

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    static constexpr int channels() noexcept { return 3; }
    const std::string& tile_id() const noexcept { return tile_id_; }
    void set_tile_id(std::string id) { tile_id_ = std::move(id); }

    std::uint8_t at(int x, int y, int c) const noexcept
    {
        return data_[(static_cast<std::size_t>(y) * width_ + x) * 3 + c];
    }
    std::uint8_t& at(int x, int y, int c) noexcept
    {
        return data_[(static_cast<std::size_t>(y) * width_ + x) * 3 + c];
    }

    std::span<const std::uint8_t> data() const noexcept { return data_; }
    std::span<std::uint8_t> data() noexcept { return data_; }

    friend bool operator==(const ImageTile&, const ImageTile&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
    std::string tile_id_;
};

struct Point {
    double x = 0;
    double y = 0;
    friend bool operator==(const Point&, const Point&) = default;
};

struct PolygonAnnotation {
    std::string tile_id;
    std::string polygon_id;
    std::vector<Point> vertices;
    friend bool operator==(const PolygonAnnotation&, const PolygonAnnotation&) = default;
};

/// One boolean per pixel, true = PV.
class LabelMask {
public:
    LabelMask() = default;
    LabelMask(int width, int height) : width_(width), height_(height), bits_(static_cast<std::size_t>(width) * height, 0) {}

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool at(int x, int y) const noexcept { return bits_[static_cast<std::size_t>(y) * width_ + x] != 0; }
    void set(int x, int y, bool v = true) noexcept { bits_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0; }
    std::span<const std::uint8_t> bits() const noexcept { return bits_; }
    std::size_t count() const noexcept;

    friend bool operator==(const LabelMask&, const LabelMask&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> bits_;
};

enum class Role { Train, Test };

struct ManifestEntry {
    Role role = Role::Train;
    std::filesystem::path image;
    std::filesystem::path annotations;
    std::string tile_id;
};

struct DatasetManifest {
    std::vector<ManifestEntry> entries;

    std::vector<const ManifestEntry*> with_role(Role role) const;
};

// P6 (binary PPM, maxval 255) is the canonical raster format.
ImageTile load_tile(const std::filesystem::path& path);
ImageTile decode_ppm(std::span<const std::uint8_t> bytes, std::string tile_id = {});
std::vector<std::uint8_t> encode_ppm(const ImageTile& tile);
void save_tile(const ImageTile& tile, const std::filesystem::path& path);

// Annotation CSV: tile_id,polygon_id,x1,y1,x2,y2,...  ('#' lines are comments).
std::vector<PolygonAnnotation> load_annotations(const std::filesystem::path& path);
std::vector<PolygonAnnotation> parse_annotations(const std::string& text);
std::string format_annotations(std::span<const PolygonAnnotation> annotations);
void save_annotations(std::span<const PolygonAnnotation> annotations, const std::filesystem::path& path);

/// True when no two non-adjacent edges touch and no adjacent edges overlap.
bool is_simple_polygon(std::span<const Point> vertices);

/// Even-odd point in polygon; points exactly on an edge count as inside.
bool point_in_polygon(std::span<const Point> vertices, Point p);

/// Pixel (i,j) is set iff its center (i+0.5, j+0.5) lies inside any polygon.
LabelMask rasterize(std::span<const PolygonAnnotation> annotations, int width, int height);

/// Linear pixel indices (y*width+x, ascending) covered by one polygon.
std::vector<std::uint32_t> rasterize_pixels(const PolygonAnnotation& annotation, int width, int height);

// Manifest: one line per entry, train|test,<image>,<annotations>. Relative
// paths resolve against the manifest's directory. tile_id = image file stem.
DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

/// Loads the annotations of one entry and checks every tile_id is listed.
std::vector<PolygonAnnotation> load_entry_annotations(const DatasetManifest& manifest, const ManifestEntry& entry);

} // namespace pv
