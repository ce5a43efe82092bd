#include "pv/synth.hpp"

#include "pv/error.hpp"
#include "pv/rng.hpp"

#include <algorithm>
#include <cmath>

namespace pv {

std::vector<Texture> SceneParams::default_palette()
{
    return {
        {{118, 116, 112}, 12}, // asphalt / gray roof
        {{72, 108, 58}, 16},   // vegetation
        {{182, 168, 150}, 10}, // light roof
        {{140, 96, 74}, 12},   // tile roof
        {{62, 72, 106}, 28},   // panel-coloured but coarse (water, shade)
    };
}

void SceneParams::validate() const
{
    if (width < 1 || height < 1)
        throw Error(ErrorCode::InvalidParams, "scene dimensions must be positive");
    if (panel_min_side < 3 || panel_max_side < panel_min_side)
        throw Error(ErrorCode::InvalidParams, "panel sides must satisfy 3 <= min <= max");
    if (n_panels < 0 || target_prevalence < 0 || target_prevalence >= 1)
        throw Error(ErrorCode::InvalidParams, "panel count / prevalence out of range");
    if (palette.size() < 3)
        throw Error(ErrorCode::InvalidParams, "background palette needs at least 3 textures");
    if (block_min_side < 1 || block_max_side < block_min_side)
        throw Error(ErrorCode::InvalidParams, "block sides must satisfy 1 <= min <= max");
    if (gap < 0 || placement_attempts < 1)
        throw Error(ErrorCode::InvalidParams, "gap and placement budget must be non-negative");
}

double Scene::prevalence() const noexcept
{
    std::size_t area = 0;
    for (const auto& r : panels)
        area += static_cast<std::size_t>(r.w) * r.h;
    return static_cast<double>(area) / (static_cast<double>(tile.width()) * tile.height());
}

namespace {

std::uint8_t to_byte(double v)
{
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

bool separated(const Rect& a, const Rect& b, int gap)
{
    return a.x + a.w + gap <= b.x || b.x + b.w + gap <= a.x || a.y + a.h + gap <= b.y || b.y + b.h + gap <= a.y;
}

} // namespace

Scene generate_scene(const SceneParams& p, const std::string& tile_id)
{
    p.validate();
    Rng layout(derive_seed(p.seed, 1));
    Rng pixels(derive_seed(p.seed, 2));

    // Background: rows of random height split into blocks of random width.
    std::vector<int> texture_of(static_cast<std::size_t>(p.width) * p.height);
    std::vector<std::array<double, 3>> block_mean;
    std::vector<double> block_sigma;
    for (int y0 = 0; y0 < p.height;) {
        const int bh = static_cast<int>(layout.between(p.block_min_side, p.block_max_side));
        const int y1 = std::min(p.height, y0 + bh);
        for (int x0 = 0; x0 < p.width;) {
            const int bw = static_cast<int>(layout.between(p.block_min_side, p.block_max_side));
            const int x1 = std::min(p.width, x0 + bw);
            const auto& tex = p.palette[static_cast<std::size_t>(layout.below(p.palette.size()))];
            std::array<double, 3> m = tex.mean;
            const double shift = 8.0 * layout.normal();
            for (auto& c : m)
                c += shift;
            const int id = static_cast<int>(block_mean.size());
            block_mean.push_back(m);
            block_sigma.push_back(tex.sigma);
            for (int y = y0; y < y1; ++y)
                for (int x = x0; x < x1; ++x)
                    texture_of[static_cast<std::size_t>(y) * p.width + x] = id;
            x0 = x1;
        }
        y0 = y1;
    }

    // Panels.
    Scene scene;
    const double target_area = p.target_prevalence * p.width * p.height;
    const bool by_prevalence = p.target_prevalence > 0;
    double area = 0;
    for (int k = 0; by_prevalence ? area < target_area : k < p.n_panels; ++k) {
        bool placed = false;
        for (int attempt = 0; attempt < p.placement_attempts && !placed; ++attempt) {
            Rect r;
            r.w = static_cast<int>(layout.between(p.panel_min_side, p.panel_max_side));
            r.h = static_cast<int>(layout.between(p.panel_min_side, p.panel_max_side));
            const int max_x = p.width - p.gap - r.w, max_y = p.height - p.gap - r.h;
            if (max_x < p.gap || max_y < p.gap)
                continue;
            r.x = static_cast<int>(layout.between(p.gap, max_x));
            r.y = static_cast<int>(layout.between(p.gap, max_y));
            if (std::all_of(scene.panels.begin(), scene.panels.end(), [&](const Rect& o) { return separated(r, o, p.gap); })) {
                scene.panels.push_back(r);
                area += static_cast<double>(r.w) * r.h;
                placed = true;
            }
        }
        if (!placed)
            throw Error(ErrorCode::PlacementFailed, "could not place panel " + std::to_string(k) + " within the retry budget");
    }

    std::vector<int> panel_of(texture_of.size(), -1);
    std::vector<std::array<double, 3>> panel_mean;
    for (std::size_t i = 0; i < scene.panels.size(); ++i) {
        const auto& r = scene.panels[i];
        std::array<double, 3> m = p.panel_mean;
        const double shift = 5.0 * layout.normal();
        for (auto& c : m)
            c += shift;
        panel_mean.push_back(m);
        for (int y = r.y; y < r.y + r.h; ++y)
            for (int x = r.x; x < r.x + r.w; ++x)
                panel_of[static_cast<std::size_t>(y) * p.width + x] = static_cast<int>(i);

        PolygonAnnotation a;
        a.tile_id = tile_id;
        a.polygon_id = "p" + std::to_string(i);
        a.vertices = {{double(r.x), double(r.y)}, {double(r.x + r.w), double(r.y)}, {double(r.x + r.w), double(r.y + r.h)}, {double(r.x), double(r.y + r.h)}};
        scene.annotations.push_back(std::move(a));
    }

    ImageTile tile(p.width, p.height, tile_id);
    for (int y = 0; y < p.height; ++y)
        for (int x = 0; x < p.width; ++x) {
            const auto idx = static_cast<std::size_t>(y) * p.width + x;
            const bool is_panel = panel_of[idx] >= 0;
            const auto& m = is_panel ? panel_mean[static_cast<std::size_t>(panel_of[idx])] : block_mean[static_cast<std::size_t>(texture_of[idx])];
            const double sigma = is_panel ? p.panel_sigma : block_sigma[static_cast<std::size_t>(texture_of[idx])];
            for (int c = 0; c < 3; ++c)
                tile.at(x, y, c) = to_byte(m[c] + sigma * pixels.normal() + p.noise_sigma * pixels.normal());
        }
    scene.tile = std::move(tile);
    return scene;
}

} // namespace pv
