#include "pv/imagery.hpp"

#include "pv/error.hpp"
#include "pv/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

namespace pv {

ImageTile::ImageTile(int width, int height, std::string tile_id)
    : ImageTile(width, height, std::vector<std::uint8_t>(static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0) * 3, 0),
                std::move(tile_id))
{
}

ImageTile::ImageTile(int width, int height, std::vector<std::uint8_t> data, std::string tile_id)
    : width_(width), height_(height), data_(std::move(data)), tile_id_(std::move(tile_id))
{
    if (width < 1 || height < 1)
        throw Error(ErrorCode::InvalidParams, "tile dimensions must be positive");
    if (data_.size() != static_cast<std::size_t>(width) * height * 3)
        throw Error(ErrorCode::DimensionMismatch, "tile data length does not match width*height*3");
}

std::size_t LabelMask::count() const noexcept
{
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::vector<const ManifestEntry*> DatasetManifest::with_role(Role role) const
{
    std::vector<const ManifestEntry*> out;
    for (const auto& e : entries)
        if (e.role == role)
            out.push_back(&e);
    return out;
}

// ---------------------------------------------------------------------------
// PPM

namespace {

class HeaderReader {
public:
    explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    void skip_space_and_comments()
    {
        while (pos_ < bytes_.size()) {
            const auto c = bytes_[pos_];
            if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n')
                    ++pos_;
            } else if (std::isspace(c)) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    long read_uint()
    {
        skip_space_and_comments();
        long v = 0;
        std::size_t digits = 0;
        while (pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
            v = v * 10 + (bytes_[pos_] - '0');
            if (v > 1'000'000'000)
                throw Error(ErrorCode::MalformedHeader, "PPM header value out of range");
            ++pos_;
            ++digits;
        }
        if (digits == 0)
            throw Error(ErrorCode::MalformedHeader, "PPM header: expected integer");
        return v;
    }

    std::size_t pos() const noexcept { return pos_; }
    void advance(std::size_t n) noexcept { pos_ += n; }
    bool at_end() const noexcept { return pos_ >= bytes_.size(); }
    std::uint8_t peek() const noexcept { return bytes_[pos_]; }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

} // namespace

ImageTile decode_ppm(std::span<const std::uint8_t> bytes, std::string tile_id)
{
    if (bytes.size() < 2 || bytes[0] != 'P')
        throw Error(ErrorCode::MalformedHeader, "not a PNM file");
    switch (bytes[1]) {
    case '6':
        break;
    case '1': case '2': case '4': case '5':
        throw Error(ErrorCode::ChannelCount, "single-channel PNM; expected 3-channel P6");
    default:
        throw Error(ErrorCode::MalformedHeader, "unsupported PNM magic");
    }

    HeaderReader reader(bytes);
    reader.advance(2);
    if (reader.at_end() || !(std::isspace(reader.peek()) || reader.peek() == '#'))
        throw Error(ErrorCode::MalformedHeader, "PPM magic must be followed by whitespace");
    const long width = reader.read_uint();
    const long height = reader.read_uint();
    const long maxval = reader.read_uint();
    if (width < 1 || height < 1)
        throw Error(ErrorCode::MalformedHeader, "PPM dimensions must be positive");
    if (maxval != 255)
        throw Error(ErrorCode::MalformedHeader, "PPM maxval must be 255");
    if (reader.at_end() || !std::isspace(reader.peek()))
        throw Error(ErrorCode::MalformedHeader, "PPM header must end with one whitespace byte");
    reader.advance(1);

    const std::size_t need = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3;
    if (bytes.size() - reader.pos() < need)
        throw Error(ErrorCode::TruncatedData, "PPM raster truncated");
    std::vector<std::uint8_t> data(bytes.begin() + static_cast<std::ptrdiff_t>(reader.pos()),
                                   bytes.begin() + static_cast<std::ptrdiff_t>(reader.pos() + need));
    return ImageTile(static_cast<int>(width), static_cast<int>(height), std::move(data), std::move(tile_id));
}

ImageTile load_tile(const std::filesystem::path& path)
{
    return decode_ppm(read_bytes(path), path.stem().string());
}

std::vector<std::uint8_t> encode_ppm(const ImageTile& tile)
{
    const std::string header = "P6\n" + std::to_string(tile.width()) + " " + std::to_string(tile.height()) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), tile.data().begin(), tile.data().end());
    return out;
}

void save_tile(const ImageTile& tile, const std::filesystem::path& path)
{
    write_atomic(path, encode_ppm(tile));
}

// ---------------------------------------------------------------------------
// Annotations

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto at = s.find(sep, start);
        out.push_back(trim(s.substr(start, at == std::string_view::npos ? std::string_view::npos : at - start)));
        if (at == std::string_view::npos)
            break;
        start = at + 1;
    }
    return out;
}

double cross(Point o, Point a, Point b) noexcept
{
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

int sign(double v) noexcept { return (v > 0) - (v < 0); }

bool within_box(Point a, Point b, Point p) noexcept
{
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

bool on_segment(Point a, Point b, Point p) noexcept
{
    return cross(a, b, p) == 0.0 && within_box(a, b, p);
}

bool segments_touch(Point a, Point b, Point c, Point d) noexcept
{
    const int d1 = sign(cross(a, b, c));
    const int d2 = sign(cross(a, b, d));
    const int d3 = sign(cross(c, d, a));
    const int d4 = sign(cross(c, d, b));
    if (d1 * d2 < 0 && d3 * d4 < 0)
        return true;
    return (d1 == 0 && within_box(a, b, c)) || (d2 == 0 && within_box(a, b, d)) || (d3 == 0 && within_box(c, d, a)) ||
           (d4 == 0 && within_box(c, d, b));
}

// Edge crossing abscissa, written once so scanline fill and point tests agree bit for bit.
double crossing_x(Point a, Point b, double y) noexcept
{
    return (b.x - a.x) * (y - a.y) / (b.y - a.y) + a.x;
}

} // namespace

bool is_simple_polygon(std::span<const Point> v)
{
    const std::size_t n = v.size();
    if (n < 3)
        return false;
    for (std::size_t i = 0; i < n; ++i)
        if (v[i] == v[(i + 1) % n])
            return false;
    for (std::size_t i = 0; i < n; ++i) {
        const Point a = v[i], b = v[(i + 1) % n];
        for (std::size_t j = i + 1; j < n; ++j) {
            const Point c = v[j], d = v[(j + 1) % n];
            const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
            if (!adjacent) {
                if (segments_touch(a, b, c, d))
                    return false;
                continue;
            }
            // Adjacent edges share exactly one vertex; reject collinear fold-backs.
            const Point shared = (j == i + 1) ? b : a;
            const Point p = (j == i + 1) ? a : b;
            const Point q = (j == i + 1) ? d : c;
            if (cross(shared, p, q) == 0.0) {
                const double dot = (p.x - shared.x) * (q.x - shared.x) + (p.y - shared.y) * (q.y - shared.y);
                if (dot > 0)
                    return false;
            }
        }
    }
    return true;
}

bool point_in_polygon(std::span<const Point> v, Point p)
{
    const std::size_t n = v.size();
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        if (on_segment(v[j], v[i], p))
            return true;
        if ((v[i].y > p.y) != (v[j].y > p.y) && p.x >= crossing_x(v[j], v[i], p.y))
            inside = !inside;
    }
    return inside;
}

std::vector<std::uint32_t> rasterize_pixels(const PolygonAnnotation& annotation, int width, int height)
{
    const auto& v = annotation.vertices;
    const std::size_t n = v.size();
    std::vector<std::uint32_t> out;
    if (n < 3 || width < 1 || height < 1)
        return out;

    double miny = v[0].y, maxy = v[0].y;
    for (const auto& p : v) {
        miny = std::min(miny, p.y);
        maxy = std::max(maxy, p.y);
    }
    const int row0 = std::max(0, static_cast<int>(std::floor(miny - 0.5)));
    const int row1 = std::min(height - 1, static_cast<int>(std::ceil(maxy - 0.5)));

    std::vector<double> xs;
    std::vector<std::uint8_t> row(static_cast<std::size_t>(width));
    for (int j = row0; j <= row1; ++j) {
        const double yc = j + 0.5;
        std::fill(row.begin(), row.end(), 0);

        // Interior: a center is inside iff an odd number of crossings lie at or left of it.
        xs.clear();
        for (std::size_t i = 0, k = n - 1; i < n; k = i++)
            if ((v[i].y > yc) != (v[k].y > yc))
                xs.push_back(crossing_x(v[k], v[i], yc));
        std::sort(xs.begin(), xs.end());
        for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
            // i + 0.5 in [xs[k], xs[k+1])
            const int lo = std::max(0, static_cast<int>(std::ceil(xs[k] - 0.5)));
            const int hi = std::min(width - 1, static_cast<int>(std::ceil(xs[k + 1] - 0.5)) - 1);
            for (int i = lo; i <= hi; ++i)
                row[static_cast<std::size_t>(i)] = 1;
        }

        // Boundary: centers lying exactly on an edge.
        for (std::size_t i = 0, k = n - 1; i < n; k = i++) {
            const Point a = v[k], b = v[i];
            if (yc < std::min(a.y, b.y) || yc > std::max(a.y, b.y))
                continue;
            int lo, hi;
            if (a.y == b.y) {
                lo = static_cast<int>(std::ceil(std::min(a.x, b.x) - 0.5));
                hi = static_cast<int>(std::floor(std::max(a.x, b.x) - 0.5));
            } else {
                const double x = a.x + (b.x - a.x) * (yc - a.y) / (b.y - a.y);
                lo = static_cast<int>(std::floor(x - 0.5)) - 1;
                hi = lo + 2;
            }
            lo = std::max(lo, 0);
            hi = std::min(hi, width - 1);
            for (int c = lo; c <= hi; ++c)
                if (on_segment(a, b, Point{c + 0.5, yc}))
                    row[static_cast<std::size_t>(c)] = 1;
        }

        for (int i = 0; i < width; ++i)
            if (row[static_cast<std::size_t>(i)])
                out.push_back(static_cast<std::uint32_t>(j) * static_cast<std::uint32_t>(width) + static_cast<std::uint32_t>(i));
    }
    return out;
}

LabelMask rasterize(std::span<const PolygonAnnotation> annotations, int width, int height)
{
    LabelMask mask(width, height);
    for (const auto& a : annotations)
        for (auto idx : rasterize_pixels(a, width, height))
            mask.set(static_cast<int>(idx % static_cast<std::uint32_t>(width)), static_cast<int>(idx / static_cast<std::uint32_t>(width)));
    return mask;
}

std::vector<PolygonAnnotation> parse_annotations(const std::string& text)
{
    std::vector<PolygonAnnotation> out;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = trim(line);
        if (body.empty() || body.front() == '#')
            continue;
        const auto where = " (line " + std::to_string(line_no) + ")";
        const auto fields = split(body, ',');
        if (fields.size() < 2 || fields[0].empty() || fields[1].empty())
            throw Error(ErrorCode::AnnotationParse, "annotation record needs tile_id and polygon_id" + where);
        const std::size_t coords = fields.size() - 2;
        if (coords % 2 != 0)
            throw Error(ErrorCode::AnnotationParse, "odd coordinate count" + where);
        if (coords < 6)
            throw Error(ErrorCode::AnnotationParse, "polygon needs at least 3 vertices" + where);

        PolygonAnnotation a{std::string(fields[0]), std::string(fields[1]), {}};
        a.vertices.reserve(coords / 2);
        for (std::size_t k = 2; k < fields.size(); k += 2) {
            double xy[2];
            for (int c = 0; c < 2; ++c) {
                const auto f = fields[k + static_cast<std::size_t>(c)];
                const auto res = std::from_chars(f.data(), f.data() + f.size(), xy[c], std::chars_format::fixed);
                if (f.empty() || res.ec != std::errc{} || res.ptr != f.data() + f.size() || !std::isfinite(xy[c]))
                    throw Error(ErrorCode::AnnotationParse, "unparsable number '" + std::string(f) + "'" + where);
            }
            a.vertices.push_back({xy[0], xy[1]});
        }
        if (!is_simple_polygon(a.vertices))
            throw Error(ErrorCode::InvalidPolygon, "polygon " + a.polygon_id + " is not simple" + where);
        out.push_back(std::move(a));
    }
    return out;
}

std::vector<PolygonAnnotation> load_annotations(const std::filesystem::path& path)
{
    return parse_annotations(read_text(path));
}

std::string format_annotations(std::span<const PolygonAnnotation> annotations)
{
    std::string out;
    for (const auto& a : annotations) {
        out += a.tile_id + "," + a.polygon_id;
        for (const auto& p : a.vertices)
            out += "," + format_exact(p.x) + "," + format_exact(p.y);
        out += "\n";
    }
    return out;
}

void save_annotations(std::span<const PolygonAnnotation> annotations, const std::filesystem::path& path)
{
    write_atomic(path, format_annotations(annotations));
}

// ---------------------------------------------------------------------------
// Manifest

DatasetManifest load_manifest(const std::filesystem::path& path)
{
    const auto text = read_text(path);
    const auto base = path.parent_path();
    DatasetManifest manifest;
    std::set<std::string> ids;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = trim(line);
        if (body.empty() || body.front() == '#')
            continue;
        const auto where = " (line " + std::to_string(line_no) + ")";
        const auto fields = split(body, ',');
        if (fields.size() != 3 || fields[1].empty() || fields[2].empty())
            throw Error(ErrorCode::ManifestParse, "manifest entry must be role,image,annotations" + where);
        ManifestEntry e;
        if (fields[0] == "train")
            e.role = Role::Train;
        else if (fields[0] == "test")
            e.role = Role::Test;
        else
            throw Error(ErrorCode::ManifestParse, "role must be train or test" + where);
        e.image = std::filesystem::path(std::string(fields[1]));
        e.annotations = std::filesystem::path(std::string(fields[2]));
        if (e.image.is_relative())
            e.image = base / e.image;
        if (e.annotations.is_relative())
            e.annotations = base / e.annotations;
        e.tile_id = e.image.stem().string();
        if (!ids.insert(e.tile_id).second)
            throw Error(ErrorCode::ManifestContract, "duplicate tile_id " + e.tile_id + where);
        manifest.entries.push_back(std::move(e));
    }
    return manifest;
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path)
{
    const auto base = path.parent_path();
    auto rel = [&](const std::filesystem::path& p) {
        auto r = p.lexically_relative(base.empty() ? std::filesystem::path(".") : base);
        return (r.empty() ? p : r).generic_string();
    };
    std::string out;
    for (const auto& e : manifest.entries)
        out += std::string(e.role == Role::Train ? "train" : "test") + "," + rel(e.image) + "," + rel(e.annotations) + "\n";
    write_atomic(path, out);
}

std::vector<PolygonAnnotation> load_entry_annotations(const DatasetManifest& manifest, const ManifestEntry& entry)
{
    auto all = load_annotations(entry.annotations);
    std::set<std::string> ids;
    for (const auto& e : manifest.entries)
        ids.insert(e.tile_id);
    std::vector<PolygonAnnotation> mine;
    for (auto& a : all) {
        if (!ids.count(a.tile_id))
            throw Error(ErrorCode::ManifestContract, "annotation " + a.polygon_id + " references unknown tile " + a.tile_id);
        if (a.tile_id == entry.tile_id)
            mine.push_back(std::move(a));
    }
    return mine;
}

} // namespace pv
