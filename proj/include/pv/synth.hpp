#pragma once

#include "pv/imagery.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace pv {

struct Texture {
    std::array<double, 3> mean{};
    double sigma = 0;
};

struct Rect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;
    friend bool operator==(const Rect&, const Rect&) = default;
};

struct SceneParams {
    int width = 512;
    int height = 512;
    int n_panels = 4;
    /// When > 0, panels are added until they cover this fraction of the tile
    /// and n_panels is ignored.
    double target_prevalence = 0;
    int panel_min_side = 12;
    int panel_max_side = 24;
    std::array<double, 3> panel_mean{60, 70, 110};
    double panel_sigma = 10;
    std::vector<Texture> palette = default_palette();
    int block_min_side = 40;
    int block_max_side = 128;
    double noise_sigma = 15;
    /// Minimum free pixels between two panels and between a panel and the border.
    int gap = 8;
    int placement_attempts = 2000;
    std::uint64_t seed = 1;

    static std::vector<Texture> default_palette();
    void validate() const;
};

struct Scene {
    ImageTile tile;
    std::vector<PolygonAnnotation> annotations;
    std::vector<Rect> panels;

    double prevalence() const noexcept;
};

/// Deterministic per seed. Throws PlacementFailed when the retry budget runs out.
Scene generate_scene(const SceneParams& params, const std::string& tile_id = "scene");

} // namespace pv
