#include "pv/features.hpp"

#include "pv/error.hpp"

#include <algorithm>

namespace pv {

IntegralImage::IntegralImage(const ImageTile& tile) : width_(tile.width()), height_(tile.height())
{
    const std::size_t stride = static_cast<std::size_t>(width_) + 1;
    for (int c = 0; c < 3; ++c) {
        auto& s = sum_[c];
        auto& q = sq_[c];
        s.assign(stride * (height_ + 1), 0);
        q.assign(stride * (height_ + 1), 0);
        for (int y = 0; y < height_; ++y) {
            std::uint64_t row_s = 0, row_q = 0;
            for (int x = 0; x < width_; ++x) {
                const std::uint64_t v = tile.at(x, y, c);
                row_s += v;
                row_q += v * v;
                s[(y + 1) * stride + x + 1] = s[y * stride + x + 1] + row_s;
                q[(y + 1) * stride + x + 1] = q[y * stride + x + 1] + row_q;
            }
        }
    }
}

IntegralImage build_integral(const ImageTile& tile) { return IntegralImage(tile); }

void FeatureSpec::validate() const
{
    if (window_side < 3 || window_side % 2 == 0)
        throw Error(ErrorCode::InvalidSpec, "window_side must be odd and >= 3");
    if (ring_radii.empty())
        throw Error(ErrorCode::InvalidSpec, "at least one ring radius is required");
    for (std::size_t i = 0; i < ring_radii.size(); ++i) {
        if (ring_radii[i] < 1)
            throw Error(ErrorCode::InvalidSpec, "ring radii must be >= 1");
        if (i > 0 && ring_radii[i] <= ring_radii[i - 1])
            throw Error(ErrorCode::InvalidSpec, "ring radii must be strictly increasing");
    }
}

std::size_t FeatureSpec::feature_count() const noexcept
{
    const std::size_t rings = ring_radii.size();
    return rings == 0 ? 0 : 9 * 6 * rings - 6 * (rings - 1);
}

std::string FeatureSpec::fingerprint() const
{
    std::string out = "w" + std::to_string(window_side) + ";r";
    for (std::size_t i = 0; i < ring_radii.size(); ++i)
        out += (i ? "," : "") + std::to_string(ring_radii[i]);
    return out;
}

std::array<Offset, 9> ring_offsets(int r)
{
    const int seq[3] = {0, -r, r};
    std::array<Offset, 9> out;
    std::size_t k = 0;
    for (int x : seq)
        for (int y : seq)
            out[k++] = {x, y};
    return out;
}

std::vector<Offset> window_offsets(const FeatureSpec& spec)
{
    std::vector<Offset> out;
    for (std::size_t i = 0; i < spec.ring_radii.size(); ++i)
        for (const auto& o : ring_offsets(spec.ring_radii[i]))
            if (i == 0 || o.x != 0 || o.y != 0)
                out.push_back(o);
    return out;
}

namespace {

// A clamped 1-D window [lo,hi] decomposes into up to three weighted spans:
// the in-range run, plus replicated copies of the first and last sample.
struct Span1 {
    int begin, end; // half-open, in tile coordinates
    std::uint64_t weight;
};

int clamp_spans(int lo, int hi, int size, Span1 (&out)[3])
{
    int n = 0;
    const int in_lo = std::max(lo, 0);
    const int in_hi = std::min(hi, size - 1);
    if (in_lo <= in_hi)
        out[n++] = {in_lo, in_hi + 1, 1};
    const int below = std::max(0, std::min(hi, -1) - lo + 1);
    if (below > 0)
        out[n++] = {0, 1, static_cast<std::uint64_t>(below)};
    const int above = std::max(0, hi - std::max(lo, size) + 1);
    if (above > 0)
        out[n++] = {size - 1, size, static_cast<std::uint64_t>(above)};
    return n;
}

} // namespace

std::array<ChannelStats, 3> window_stats(const IntegralImage& ii, int cx, int cy, int side)
{
    const int half = side / 2;
    const std::uint64_t n = static_cast<std::uint64_t>(side) * side;
    std::array<std::uint64_t, 3> s{}, q{};

    const int x0 = cx - half, x1 = cx + half, y0 = cy - half, y1 = cy + half;
    if (x0 >= 0 && y0 >= 0 && x1 < ii.width() && y1 < ii.height()) {
        for (int c = 0; c < 3; ++c) {
            s[c] = ii.rect_sum(c, x0, y0, x1 + 1, y1 + 1);
            q[c] = ii.rect_sq(c, x0, y0, x1 + 1, y1 + 1);
        }
    } else {
        Span1 xs[3], ys[3];
        const int nx = clamp_spans(x0, x1, ii.width(), xs);
        const int ny = clamp_spans(y0, y1, ii.height(), ys);
        for (int i = 0; i < nx; ++i)
            for (int j = 0; j < ny; ++j) {
                const std::uint64_t w = xs[i].weight * ys[j].weight;
                for (int c = 0; c < 3; ++c) {
                    s[c] += w * ii.rect_sum(c, xs[i].begin, ys[j].begin, xs[i].end, ys[j].end);
                    q[c] += w * ii.rect_sq(c, xs[i].begin, ys[j].begin, xs[i].end, ys[j].end);
                }
            }
    }

    std::array<ChannelStats, 3> out;
    const double nd = static_cast<double>(n);
    for (int c = 0; c < 3; ++c) {
        // n*sumsq - sum^2 is exact and never negative.
        const auto num = static_cast<unsigned __int128>(n) * q[c] - static_cast<unsigned __int128>(s[c]) * s[c];
        out[c].mean = static_cast<double>(s[c]) / nd;
        out[c].variance = static_cast<double>(num) / (nd * nd);
    }
    return out;
}

void extract_pixel_features(const IntegralImage& ii, const FeatureSpec& spec, std::span<const Offset> offsets, int x, int y,
                            std::span<double> out)
{
    std::size_t k = 0;
    for (const auto& o : offsets) {
        const auto st = window_stats(ii, x + o.x, y + o.y, spec.window_side);
        for (int c = 0; c < 3; ++c)
            out[k + c] = st[c].mean;
        for (int c = 0; c < 3; ++c)
            out[k + 3 + c] = st[c].variance;
        k += 6;
    }
}

std::vector<double> extract_pixel_features(const IntegralImage& ii, const FeatureSpec& spec, int x, int y)
{
    spec.validate();
    const auto offsets = window_offsets(spec);
    std::vector<double> out(offsets.size() * 6);
    extract_pixel_features(ii, spec, offsets, x, y, out);
    return out;
}

FeatureImage extract_feature_image(const ImageTile& tile, const FeatureSpec& spec)
{
    spec.validate();
    const auto ii = build_integral(tile);
    const auto offsets = window_offsets(spec);
    FeatureImage img(tile.width(), tile.height(), offsets.size() * 6);
    const int h = tile.height(), w = tile.width();
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            extract_pixel_features(ii, spec, offsets, x, y, img.at(x, y));
    return img;
}

namespace serial {

FeatureImage extract_feature_image(const ImageTile& tile, const FeatureSpec& spec)
{
    spec.validate();
    const auto ii = build_integral(tile);
    const auto offsets = window_offsets(spec);
    FeatureImage img(tile.width(), tile.height(), offsets.size() * 6);
    for (int y = 0; y < tile.height(); ++y)
        for (int x = 0; x < tile.width(); ++x)
            extract_pixel_features(ii, spec, offsets, x, y, img.at(x, y));
    return img;
}

} // namespace serial

} // namespace pv
