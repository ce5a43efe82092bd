#pragma once

#include "pv/confidence_map.hpp"
#include "pv/error.hpp"
#include "pv/imagery.hpp"
#include "pv/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <string>

namespace testutil {

inline pv::ImageTile random_tile(pv::Rng& rng, int w, int h, int max_value = 255)
{
    pv::ImageTile t(w, h, "rand");
    for (auto& b : t.data())
        b = static_cast<std::uint8_t>(rng.below(static_cast<std::uint64_t>(max_value) + 1));
    return t;
}

/// Smooth blobs quantised to a few levels so plateaus and ties are common.
inline pv::ConfidenceMap blob_map(pv::Rng& rng, int w, int h, int blobs, int levels = 8)
{
    std::vector<std::array<double, 4>> b;
    for (int i = 0; i < blobs; ++i)
        b.push_back({rng.uniform() * w, rng.uniform() * h, 1.5 + rng.uniform() * 4, 0.3 + rng.uniform() * 0.7});
    pv::ConfidenceMap m(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double v = 0;
            for (const auto& [cx, cy, s, a] : b)
                v = std::max(v, a * std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (2 * s * s)));
            if (rng.uniform() < 0.05)
                v = std::max(v, rng.uniform() * 0.5);
            m.at(x, y) = static_cast<float>(std::floor(v * levels) / levels);
        }
    return m;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name)
{
    auto p = std::filesystem::temp_directory_path() / ("pvtest_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

template <class F>
pv::ErrorCode error_of(F&& f)
{
    try {
        f();
    } catch (const pv::Error& e) {
        return e.code();
    }
    throw std::runtime_error("expected pv::Error");
}

} // namespace testutil
