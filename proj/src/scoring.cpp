#include "pv/scoring.hpp"

#include "pv/error.hpp"
#include "pv/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <map>
#include <sstream>

namespace pv {

std::size_t intersection_size(const PixelSet& a, const PixelSet& b)
{
    std::size_t n = 0;
    auto i = a.begin(), j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (*i < *j)
            ++i;
        else if (*j < *i)
            ++j;
        else {
            ++n;
            ++i;
            ++j;
        }
    }
    return n;
}

PixelSet set_union(const PixelSet& a, const PixelSet& b)
{
    PixelSet out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

double jaccard(const PixelSet& a, const PixelSet& b)
{
    if (a.empty() && b.empty())
        throw Error(ErrorCode::EmptySets, "jaccard of two empty sets");
    const auto inter = intersection_size(a, b);
    return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

double PRCurve::max_recall() const noexcept
{
    double r = 0;
    for (const auto& p : points)
        r = std::max(r, p.recall);
    return r;
}

double PRCurve::precision_at_recall(double r) const noexcept
{
    double best = 0;
    for (const auto& p : points)
        if (p.recall >= r)
            best = std::max(best, p.precision);
    return best;
}

PRCurve pixel_pr(std::span<const ConfidenceMap> maps, std::span<const LabelMask> masks, SweepMode mode)
{
    if (maps.size() != masks.size())
        throw Error(ErrorCode::DimensionMismatch, "pixel_pr needs one mask per map");
    std::size_t total = 0;
    for (std::size_t i = 0; i < maps.size(); ++i) {
        if (maps[i].width() != masks[i].width() || maps[i].height() != masks[i].height())
            throw Error(ErrorCode::DimensionMismatch, "confidence map and label mask differ in size");
        total += maps[i].size();
    }

    // (confidence, label) pooled and sorted by descending confidence.
    std::vector<std::pair<float, std::uint8_t>> scored;
    scored.reserve(total);
    std::size_t positives = 0;
    for (std::size_t i = 0; i < maps.size(); ++i) {
        const auto bits = masks[i].bits();
        for (std::size_t p = 0; p < maps[i].size(); ++p) {
            scored.emplace_back(maps[i][p], bits[p]);
            positives += bits[p];
        }
    }
    if (positives == 0)
        throw Error(ErrorCode::NoPositives, "ground truth contains no positive pixels");
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

    PRCurve curve;
    curve.prevalence = static_cast<double>(positives) / static_cast<double>(total);
    curve.quantized = mode == SweepMode::Quantized;
    const auto P = static_cast<double>(positives);
    std::size_t tp = 0, kept = 0, k = 0;
    auto emit = [&](double t) {
        if (kept == 0)
            return;
        curve.points.push_back({t, static_cast<double>(tp) / static_cast<double>(kept), static_cast<double>(tp) / P});
    };

    if (mode == SweepMode::Exact) {
        while (k < scored.size()) {
            const float t = scored[k].first;
            while (k < scored.size() && scored[k].first == t) {
                tp += scored[k].second;
                ++kept;
                ++k;
            }
            emit(t);
        }
    } else {
        for (int q = 1000; q >= 0; --q) {
            const double t = q / 1000.0;
            const std::size_t before = kept;
            while (k < scored.size() && static_cast<double>(scored[k].first) >= t) {
                tp += scored[k].second;
                ++kept;
                ++k;
            }
            if (kept != before || (curve.points.empty() && kept > 0))
                emit(t);
        }
    }
    return curve;
}

std::vector<TruthObject> truth_objects(std::span<const PolygonAnnotation> annotations, int width, int height)
{
    std::vector<TruthObject> out;
    for (const auto& a : annotations) {
        TruthObject t{a.tile_id, a.polygon_id, {}};
        for (auto idx : rasterize_pixels(a, width, height))
            t.pixels.push_back({static_cast<int>(idx / static_cast<std::uint32_t>(width)), static_cast<int>(idx % static_cast<std::uint32_t>(width))});
        out.push_back(std::move(t));
    }
    return out;
}

std::size_t MatchResult::true_detections() const noexcept
{
    return static_cast<std::size_t>(std::count(accepted.begin(), accepted.end(), true));
}

std::size_t MatchResult::detected_annotations() const noexcept
{
    std::size_t n = 0;
    for (const auto& d : detected_by)
        n += d.empty() ? 0 : 1;
    return n;
}

namespace {

struct Box {
    int x0, y0, x1, y1;
    bool overlaps(const Box& o) const noexcept { return x0 <= o.x1 && o.x0 <= x1 && y0 <= o.y1 && o.y0 <= y1; }
};

Box box_of(const PixelSet& s)
{
    Box b{s.front().x, s.front().y, s.front().x, s.back().y};
    for (const auto& p : s) {
        b.x0 = std::min(b.x0, p.x);
        b.x1 = std::max(b.x1, p.x);
    }
    return b;
}

} // namespace

MatchResult match_objects(std::span<const DetectionObject> detections, std::span<const TruthObject> annotations, double j_star)
{
    MatchResult r;
    r.accepted.assign(detections.size(), false);
    r.jaccard.assign(detections.size(), 0.0);
    r.overlapped.resize(detections.size());
    r.detected_by.resize(annotations.size());

    std::vector<Box> truth_boxes;
    truth_boxes.reserve(annotations.size());
    for (const auto& a : annotations)
        truth_boxes.push_back(a.pixels.empty() ? Box{1, 1, 0, 0} : box_of(a.pixels));

    for (std::size_t d = 0; d < detections.size(); ++d) {
        const auto& det = detections[d];
        if (det.pixels.empty())
            continue;
        const Box db = box_of(det.pixels);
        PixelSet u;
        for (std::size_t a = 0; a < annotations.size(); ++a) {
            const auto& ann = annotations[a];
            if (ann.tile_id != det.tile_id || ann.pixels.empty() || !db.overlaps(truth_boxes[a]))
                continue;
            if (intersection_size(det.pixels, ann.pixels) == 0)
                continue;
            r.overlapped[d].push_back(a);
            u = set_union(u, ann.pixels);
        }
        if (u.empty())
            continue;
        r.jaccard[d] = jaccard(det.pixels, u);
        if (r.jaccard[d] >= j_star) {
            r.accepted[d] = true;
            for (auto a : r.overlapped[d])
                r.detected_by[a].push_back(d);
        }
    }
    return r;
}

PRCurve object_pr(std::span<const DetectionObject> detections, std::span<const TruthObject> annotations, double j_star)
{
    if (annotations.empty())
        throw Error(ErrorCode::NoAnnotations, "object scoring needs at least one annotation");
    PRCurve curve;
    if (detections.empty())
        return curve;

    // Acceptance of a detection does not depend on which other detections are
    // kept, so one match pass serves the whole sweep.
    const auto match = match_objects(detections, annotations, j_star);
    std::vector<std::size_t> order(detections.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return detections[a].confidence > detections[b].confidence; });

    std::vector<bool> detected(annotations.size(), false);
    std::size_t n_detected = 0, tp = 0, kept = 0, k = 0;
    const auto total = static_cast<double>(annotations.size());
    while (k < order.size()) {
        const double t = detections[order[k]].confidence;
        while (k < order.size() && detections[order[k]].confidence == t) {
            const auto d = order[k];
            ++kept;
            if (match.accepted[d]) {
                ++tp;
                for (auto a : match.overlapped[d])
                    if (!detected[a]) {
                        detected[a] = true;
                        ++n_detected;
                    }
            }
            ++k;
        }
        curve.points.push_back({t, static_cast<double>(tp) / static_cast<double>(kept), static_cast<double>(n_detected) / total});
    }
    curve.prevalence = static_cast<double>(tp) / static_cast<double>(kept);
    return curve;
}

std::string format_pr_csv(const PRCurve& curve)
{
    std::string out = "threshold,precision,recall\n";
    for (const auto& p : curve.points)
        out += format_exact(p.threshold) + "," + format_exact(p.precision) + "," + format_exact(p.recall) + "\n";
    return out;
}

PRCurve parse_pr_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "threshold,precision,recall")
        throw Error(ErrorCode::InvalidMap, "PR CSV lacks header");
    PRCurve curve;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        PRPoint p;
        double* dst[3] = {&p.threshold, &p.precision, &p.recall};
        std::string_view rest(line);
        for (int i = 0; i < 3; ++i) {
            const auto c = rest.find(',');
            const auto f = rest.substr(0, c);
            const auto r = std::from_chars(f.data(), f.data() + f.size(), *dst[i]);
            if (r.ec != std::errc{} || r.ptr != f.data() + f.size())
                throw Error(ErrorCode::InvalidMap, "PR CSV: bad number '" + std::string(f) + "'");
            if ((c == std::string_view::npos) != (i == 2))
                throw Error(ErrorCode::InvalidMap, "PR CSV: expected three fields");
            if (c != std::string_view::npos)
                rest.remove_prefix(c + 1);
        }
        curve.points.push_back(p);
    }
    return curve;
}

std::string format_pr_svg(std::span<const PRCurve> curves, std::span<const std::string> labels, const std::string& title)
{
    constexpr double W = 480, H = 400, L = 60, T = 40, S = 300;
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};
    char buf[256];
    std::string svg;
    std::snprintf(buf, sizeof buf, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\">\n", W, H);
    svg += buf;
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"24\" font-size=\"14\" font-family=\"sans-serif\">", L);
    svg += buf + title + "</text>\n";
    std::snprintf(buf, sizeof buf, "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" stroke=\"black\"/>\n", L, T, S, S);
    svg += buf;
    for (int i = 0; i <= 10; i += 2) {
        const double v = i / 10.0;
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%g\" y=\"%g\" font-size=\"10\" text-anchor=\"middle\">%.1f</text>\n"
                      "<text x=\"%g\" y=\"%g\" font-size=\"10\" text-anchor=\"end\">%.1f</text>\n",
                      L + v * S, T + S + 14, v, L - 4, T + S - v * S + 3, v);
        svg += buf;
    }
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%g\" y=\"%g\" font-size=\"12\" text-anchor=\"middle\">Recall</text>\n"
                  "<text x=\"14\" y=\"%g\" font-size=\"12\" transform=\"rotate(-90 14 %g)\" text-anchor=\"middle\">Precision</text>\n",
                  L + S / 2, T + S + 32, T + S / 2, T + S / 2);
    svg += buf;
    for (std::size_t c = 0; c < curves.size(); ++c) {
        const char* color = colors[c % 6];
        std::string pts;
        for (const auto& p : curves[c].points) {
            std::snprintf(buf, sizeof buf, "%.2f,%.2f ", L + p.recall * S, T + S - p.precision * S);
            pts += buf;
        }
        svg += std::string("<polyline fill=\"none\" stroke=\"") + color + "\" points=\"" + pts + "\"/>\n";
        const double base = T + S - curves[c].prevalence * S;
        std::snprintf(buf, sizeof buf, "<line x1=\"%g\" y1=\"%.2f\" x2=\"%g\" y2=\"%.2f\" stroke=\"%s\" stroke-dasharray=\"4 3\"/>\n", L, base,
                      L + S, base, color);
        svg += buf;
        std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" font-size=\"11\" fill=\"%s\">", L + S + 8, T + 14 + 16.0 * c, color);
        svg += buf + (c < labels.size() ? labels[c] : std::string()) + "</text>\n";
    }
    return svg + "</svg>\n";
}

} // namespace pv
