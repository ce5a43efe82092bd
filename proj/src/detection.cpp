#include "pv/detection.hpp"

#include "pv/error.hpp"
#include "pv/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace pv {

void PPParams::validate() const
{
    if (nms_side < 3 || nms_side % 2 == 0)
        throw Error(ErrorCode::InvalidParams, "nms_side (L_s) must be odd and >= 3");
    if (otsu_side < 3 || otsu_side % 2 == 0)
        throw Error(ErrorCode::InvalidParams, "otsu_side (L_g) must be odd and >= 3");
    if (!(c0 > 0.0 && c0 < 1.0))
        throw Error(ErrorCode::InvalidParams, "c0 must lie in (0,1)");
    if (close_radius < 0 || dilate_radius < 0)
        throw Error(ErrorCode::InvalidParams, "morphology radii must be >= 0");
}

std::vector<Maximum> nonmax_suppress(const ConfidenceMap& map, int side)
{
    const int w = map.width(), h = map.height(), half = side / 2;
    // Separable clamped max filter.
    std::vector<float> rowmax(map.size()), boxmax(map.size());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            float m = map.at(x, y);
            for (int i = std::max(0, x - half); i <= std::min(w - 1, x + half); ++i)
                m = std::max(m, map.at(i, y));
            rowmax[static_cast<std::size_t>(y) * w + x] = m;
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            float m = rowmax[static_cast<std::size_t>(y) * w + x];
            for (int j = std::max(0, y - half); j <= std::min(h - 1, y + half); ++j)
                m = std::max(m, rowmax[static_cast<std::size_t>(j) * w + x]);
            boxmax[static_cast<std::size_t>(y) * w + x] = m;
        }

    std::vector<Maximum> out;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const float v = map.at(x, y);
            if (v != boxmax[static_cast<std::size_t>(y) * w + x])
                continue;
            // Plateau tie-break: an equal value earlier in raster order wins.
            const int x0 = std::max(0, x - half), x1 = std::min(w - 1, x + half);
            bool first = true;
            for (int j = std::max(0, y - half); j <= y && first; ++j) {
                const int end = (j == y) ? x - 1 : x1;
                for (int i = x0; i <= end; ++i)
                    if (map.at(i, j) == v) {
                        first = false;
                        break;
                    }
            }
            if (first)
                out.push_back({x, y, v});
        }
    return out;
}

std::vector<Maximum> filter_maxima(std::span<const Maximum> maxima, double c0)
{
    std::vector<Maximum> out;
    for (const auto& m : maxima)
        if (m.value >= c0)
            out.push_back(m);
    return out;
}

int otsu_bin(double v) noexcept
{
    if (!(v > 0.0))
        return 0;
    return std::min(kOtsuBins - 1, static_cast<int>(v * kOtsuBins));
}

OtsuThreshold otsu_threshold(std::span<const float> values)
{
    std::array<std::uint64_t, kOtsuBins> hist{};
    for (float v : values)
        ++hist[static_cast<std::size_t>(otsu_bin(v))];
    std::uint64_t n = 0, s = 0;
    int lowest = kOtsuBins, highest = -1;
    for (int b = 0; b < kOtsuBins; ++b) {
        n += hist[b];
        s += hist[b] * static_cast<std::uint64_t>(b);
        if (hist[b]) {
            lowest = std::min(lowest, b);
            highest = b;
        }
    }
    if (highest < 0 || lowest == highest) {
        const int bin = highest < 0 ? kOtsuBins : highest + 1;
        return {bin, static_cast<double>(bin) / kOtsuBins};
    }

    // Between-class variance is proportional to (S0*n1 - S1*n0)^2 / (n0*n1).
    using i128 = __int128;
    const bool exact = n <= (1u << 18);
    std::uint64_t n0 = 0, s0 = 0;
    int best = -1;
    i128 best_d2 = 0, best_den = 1;
    long double best_ld = -1;
    for (int k = 1; k < kOtsuBins; ++k) {
        n0 += hist[k - 1];
        s0 += hist[k - 1] * static_cast<std::uint64_t>(k - 1);
        const std::uint64_t n1 = n - n0, s1 = s - s0;
        if (n0 == 0 || n1 == 0)
            continue;
        if (exact) {
            const i128 d = static_cast<i128>(s0) * n1 - static_cast<i128>(s1) * n0;
            const i128 d2 = d * d, den = static_cast<i128>(n0) * n1;
            if (best < 0 || d2 * best_den > best_d2 * den) {
                best = k;
                best_d2 = d2;
                best_den = den;
            }
        } else {
            const long double d = static_cast<long double>(s0) * n1 - static_cast<long double>(s1) * n0;
            const long double v = d * d / (static_cast<long double>(n0) * n1);
            if (best < 0 || v > best_ld) {
                best = k;
                best_ld = v;
            }
        }
    }
    return {best, static_cast<double>(best) / kOtsuBins};
}

std::vector<Offset> disk_element(int radius)
{
    std::vector<Offset> out;
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx)
            if (dx * dx + dy * dy <= radius * radius)
                out.push_back({dx, dy});
    return out;
}

std::vector<std::size_t> grow_region(const ConfidenceMap& map, const Maximum& seed, int otsu_side)
{
    const int w = map.width(), h = map.height(), half = otsu_side / 2;
    const int x0 = std::max(0, seed.x - half), x1 = std::min(w - 1, seed.x + half);
    const int y0 = std::max(0, seed.y - half), y1 = std::min(h - 1, seed.y + half);
    const int cw = x1 - x0 + 1, ch = y1 - y0 + 1;

    std::vector<float> crop;
    crop.reserve(static_cast<std::size_t>(cw) * ch);
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x)
            crop.push_back(map.at(x, y));
    const auto t = otsu_threshold(crop);

    auto fg = [&](int cx, int cy) { return otsu_bin(crop[static_cast<std::size_t>(cy) * cw + cx]) >= t.bin; };
    const int sx = seed.x - x0, sy = seed.y - y0;
    std::vector<std::size_t> out;
    if (!fg(sx, sy)) {
        out.push_back(static_cast<std::size_t>(seed.y) * w + seed.x);
        return out;
    }
    std::vector<std::uint8_t> seen(crop.size(), 0);
    std::vector<std::pair<int, int>> stack{{sx, sy}};
    seen[static_cast<std::size_t>(sy) * cw + sx] = 1;
    while (!stack.empty()) {
        const auto [cx, cy] = stack.back();
        stack.pop_back();
        out.push_back(static_cast<std::size_t>(cy + y0) * w + (cx + x0));
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                const int nx = cx + dx, ny = cy + dy;
                if (nx < 0 || ny < 0 || nx >= cw || ny >= ch)
                    continue;
                auto& s = seen[static_cast<std::size_t>(ny) * cw + nx];
                if (!s && fg(nx, ny)) {
                    s = 1;
                    stack.push_back({nx, ny});
                }
            }
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

// Gather form: out(p) = max value over support pixels in p + disk.
ConfidenceMap dilate_values(const ConfidenceMap& in, const std::vector<Offset>& disk, bool parallel)
{
    const int w = in.width(), h = in.height();
    ConfidenceMap out(w, h);
#pragma omp parallel for schedule(static) if (parallel)
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            float m = 0;
            for (const auto& d : disk) {
                const int nx = x + d.x, ny = y + d.y;
                if (nx >= 0 && ny >= 0 && nx < w && ny < h)
                    m = std::max(m, in.at(nx, ny));
            }
            out.at(x, y) = m;
        }
    return out;
}

ConfidenceMap close_impl(const ConfidenceMap& map, int radius, bool parallel)
{
    if (radius == 0)
        return map;
    const auto disk = disk_element(radius);
    const auto dilated = dilate_values(map, disk, parallel);
    const int w = map.width(), h = map.height();
    ConfidenceMap out = map;
#pragma omp parallel for schedule(static) if (parallel)
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (map.at(x, y) > 0 || dilated.at(x, y) <= 0)
                continue;
            // Erosion of the dilated support; out-of-image neighbours are ignored.
            bool keep = true;
            for (const auto& d : disk) {
                const int nx = x + d.x, ny = y + d.y;
                if (nx >= 0 && ny >= 0 && nx < w && ny < h && dilated.at(nx, ny) <= 0) {
                    keep = false;
                    break;
                }
            }
            if (keep)
                out.at(x, y) = dilated.at(x, y);
        }
    return out;
}

ConfidenceMap dilate_impl(const ConfidenceMap& map, int radius, bool parallel)
{
    if (radius == 0)
        return map;
    auto out = dilate_values(map, disk_element(radius), parallel);
    // Existing support keeps its own value.
    for (std::size_t i = 0; i < map.size(); ++i)
        if (map[i] > 0)
            out[i] = map[i];
    return out;
}

EnhancedMap postprocess_impl(const ConfidenceMap& map, const PPParams& params, bool parallel)
{
    params.validate();
    const auto seeds = filter_maxima(nonmax_suppress(map, params.nms_side), params.c0);

    std::vector<std::vector<std::size_t>> regions(seeds.size());
    const auto n = static_cast<std::int64_t>(seeds.size());
#pragma omp parallel for schedule(dynamic, 8) if (parallel)
    for (std::int64_t i = 0; i < n; ++i)
        regions[static_cast<std::size_t>(i)] = grow_region(map, seeds[static_cast<std::size_t>(i)], params.otsu_side);

    ConfidenceMap grown(map.width(), map.height());
    for (std::size_t i = 0; i < seeds.size(); ++i)
        for (auto p : regions[i])
            grown[p] = std::max(grown[p], seeds[i].value);

    auto closed = close_impl(grown, params.close_radius, parallel);
    return EnhancedMap(dilate_impl(closed, params.dilate_radius, parallel));
}

} // namespace

ConfidenceMap close_support(const ConfidenceMap& map, int radius) { return close_impl(map, radius, true); }
ConfidenceMap dilate_support(const ConfidenceMap& map, int radius) { return dilate_impl(map, radius, true); }

EnhancedMap postprocess(const ConfidenceMap& map, const PPParams& params) { return postprocess_impl(map, params, true); }

namespace serial {
EnhancedMap postprocess(const ConfidenceMap& map, const PPParams& params) { return postprocess_impl(map, params, false); }
} // namespace serial

// ---------------------------------------------------------------------------

int DetectionObject::min_x() const
{
    int m = pixels.front().x;
    for (const auto& p : pixels)
        m = std::min(m, p.x);
    return m;
}

int DetectionObject::max_x() const
{
    int m = pixels.front().x;
    for (const auto& p : pixels)
        m = std::max(m, p.x);
    return m;
}

std::pair<double, double> DetectionObject::centroid() const
{
    double sx = 0, sy = 0;
    for (const auto& p : pixels) {
        sx += p.x;
        sy += p.y;
    }
    const auto n = static_cast<double>(pixels.size());
    return {sx / n, sy / n};
}

std::vector<DetectionObject> extract_objects(const ConfidenceMap& map, const std::string& tile_id)
{
    const int w = map.width(), h = map.height();
    std::vector<std::uint8_t> seen(map.size(), 0);
    std::vector<DetectionObject> out;
    std::vector<std::size_t> stack;
    for (std::size_t start = 0; start < map.size(); ++start) {
        if (seen[start] || !(map[start] > 0))
            continue;
        DetectionObject obj;
        obj.tile_id = tile_id;
        seen[start] = 1;
        stack.assign(1, start);
        while (!stack.empty()) {
            const auto p = stack.back();
            stack.pop_back();
            const int x = static_cast<int>(p % static_cast<std::size_t>(w)), y = static_cast<int>(p / static_cast<std::size_t>(w));
            obj.pixels.push_back({y, x});
            obj.confidence = std::max(obj.confidence, static_cast<double>(map[p]));
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const int nx = x + dx, ny = y + dy;
                    if (nx < 0 || ny < 0 || nx >= w || ny >= h)
                        continue;
                    const auto q = static_cast<std::size_t>(ny) * w + nx;
                    if (!seen[q] && map[q] > 0) {
                        seen[q] = 1;
                        stack.push_back(q);
                    }
                }
        }
        std::sort(obj.pixels.begin(), obj.pixels.end());
        out.push_back(std::move(obj));
    }
    return out;
}

// ---------------------------------------------------------------------------

std::string encode_rle(const PixelSet& pixels)
{
    std::string out;
    for (std::size_t i = 0; i < pixels.size();) {
        std::size_t j = i + 1;
        while (j < pixels.size() && pixels[j].y == pixels[i].y && pixels[j].x == pixels[j - 1].x + 1)
            ++j;
        if (!out.empty())
            out += ' ';
        out += std::to_string(pixels[i].y) + ":" + std::to_string(pixels[i].x) + ":" + std::to_string(j - i);
        i = j;
    }
    return out;
}

namespace {

int parse_int(std::string_view s, const char* what)
{
    int v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || r.ec != std::errc{} || r.ptr != s.data() + s.size())
        throw Error(ErrorCode::InvalidMap, std::string("detections: bad ") + what + " '" + std::string(s) + "'");
    return v;
}

} // namespace

PixelSet decode_rle(std::string_view rle)
{
    PixelSet out;
    std::size_t i = 0;
    while (i < rle.size()) {
        while (i < rle.size() && rle[i] == ' ')
            ++i;
        if (i >= rle.size())
            break;
        auto end = rle.find(' ', i);
        if (end == std::string_view::npos)
            end = rle.size();
        const auto run = rle.substr(i, end - i);
        const auto c1 = run.find(':');
        const auto c2 = run.find(':', c1 == std::string_view::npos ? c1 : c1 + 1);
        if (c1 == std::string_view::npos || c2 == std::string_view::npos)
            throw Error(ErrorCode::InvalidMap, "detections: malformed run '" + std::string(run) + "'");
        const int y = parse_int(run.substr(0, c1), "row");
        const int x = parse_int(run.substr(c1 + 1, c2 - c1 - 1), "column");
        const int len = parse_int(run.substr(c2 + 1), "run length");
        if (len < 1 || x < 0 || y < 0)
            throw Error(ErrorCode::InvalidMap, "detections: invalid run '" + std::string(run) + "'");
        for (int k = 0; k < len; ++k)
            out.push_back({y, x + k});
        i = end;
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::string format_detections(std::span<const DetectionObject> objects)
{
    std::string out = "tile_id,object_id,confidence,area,min_x,min_y,max_x,max_y,rle_pixels\n";
    std::size_t id = 0;
    std::string last_tile;
    for (const auto& o : objects) {
        if (o.tile_id != last_tile) {
            id = 0;
            last_tile = o.tile_id;
        }
        out += o.tile_id + "," + std::to_string(id++) + "," + format_exact(o.confidence) + "," + std::to_string(o.area()) + "," +
               std::to_string(o.min_x()) + "," + std::to_string(o.min_y()) + "," + std::to_string(o.max_x()) + "," +
               std::to_string(o.max_y()) + "," + encode_rle(o.pixels) + "\n";
    }
    return out;
}

std::vector<DetectionObject> parse_detections(const std::string& text)
{
    std::vector<DetectionObject> out;
    std::istringstream in(text);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (header) {
            if (line.rfind("tile_id,", 0) != 0)
                throw Error(ErrorCode::InvalidMap, "detections file lacks header");
            header = false;
            continue;
        }
        if (line.empty())
            continue;
        std::vector<std::string_view> f;
        std::string_view rest(line);
        for (int k = 0; k < 8; ++k) {
            const auto c = rest.find(',');
            if (c == std::string_view::npos)
                throw Error(ErrorCode::InvalidMap, "detections: too few fields");
            f.push_back(rest.substr(0, c));
            rest.remove_prefix(c + 1);
        }
        DetectionObject o;
        o.tile_id = std::string(f[0]);
        const auto r = std::from_chars(f[2].data(), f[2].data() + f[2].size(), o.confidence);
        if (r.ec != std::errc{} || !(o.confidence > 0.0 && o.confidence <= 1.0))
            throw Error(ErrorCode::InvalidMap, "detections: bad confidence");
        o.pixels = decode_rle(rest);
        if (o.pixels.empty() || static_cast<std::size_t>(parse_int(f[3], "area")) != o.pixels.size())
            throw Error(ErrorCode::InvalidMap, "detections: area does not match pixels");
        out.push_back(std::move(o));
    }
    return out;
}

} // namespace pv
