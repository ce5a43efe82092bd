#include "oracles/oracles.hpp"
#include "util.hpp"

#include "pv/synth.hpp"

#include <doctest.h>

#include <cmath>

namespace {

pv::LabelMask painted(const pv::Scene& s)
{
    pv::LabelMask m(s.tile.width(), s.tile.height());
    for (const auto& r : s.panels)
        for (int y = r.y; y < r.y + r.h; ++y)
            for (int x = r.x; x < r.x + r.w; ++x)
                m.set(x, y);
    return m;
}

} // namespace

TEST_SUITE("synth")
{
    TEST_CASE("same seed gives the same scene")
    {
        pv::SceneParams p;
        p.width = p.height = 128;
        p.seed = 5;
        const auto a = pv::generate_scene(p, "a"), b = pv::generate_scene(p, "a");
        CHECK(a.tile == b.tile);
        CHECK(a.annotations == b.annotations);
        CHECK(a.panels == b.panels);
        p.seed = 6;
        CHECK_FALSE(pv::generate_scene(p, "a").tile == a.tile);
    }

    TEST_CASE("no panels gives an empty scene")
    {
        pv::SceneParams p;
        p.width = p.height = 64;
        p.n_panels = 0;
        const auto s = pv::generate_scene(p);
        CHECK(s.annotations.empty());
        CHECK(s.panels.empty());
        CHECK(s.prevalence() == 0);
        CHECK(s.tile.width() == 64);
    }

    TEST_CASE("annotations rasterize to exactly the painted panels")
    {
        pv::SceneParams p;
        p.n_panels = 20;
        p.seed = 11;
        const auto s = pv::generate_scene(p, "t");
        REQUIRE(s.panels.size() == 20);
        REQUIRE(s.annotations.size() == 20);
        const auto mask = pv::rasterize(s.annotations, 512, 512);
        CHECK(mask == painted(s));
        for (std::size_t i = 0; i < s.panels.size(); ++i)
            CHECK(pv::rasterize_pixels(s.annotations[i], 512, 512).size() ==
                  static_cast<std::size_t>(s.panels[i].w) * s.panels[i].h);
        for (const auto& a : s.annotations) {
            CHECK(a.tile_id == "t");
            CHECK(pv::is_simple_polygon(a.vertices));
        }
    }

    TEST_CASE("panels keep the gap from each other and from the border")
    {
        pv::SceneParams p;
        p.n_panels = 30;
        p.seed = 3;
        const auto s = pv::generate_scene(p);
        for (std::size_t i = 0; i < s.panels.size(); ++i) {
            const auto& a = s.panels[i];
            CHECK(a.x >= p.gap);
            CHECK(a.y >= p.gap);
            CHECK(a.x + a.w + p.gap <= p.width);
            CHECK(a.y + a.h + p.gap <= p.height);
            CHECK((a.w >= p.panel_min_side && a.w <= p.panel_max_side));
            for (std::size_t j = i + 1; j < s.panels.size(); ++j) {
                const auto& b = s.panels[j];
                const bool apart = a.x + a.w + p.gap <= b.x || b.x + b.w + p.gap <= a.x || a.y + a.h + p.gap <= b.y ||
                                   b.y + b.h + p.gap <= a.y;
                CHECK(apart);
            }
        }
    }

    TEST_CASE("prevalence target is reached")
    {
        for (double target : {0.002, 0.005, 0.02}) {
            pv::SceneParams p;
            p.target_prevalence = target;
            p.seed = 9;
            const auto s = pv::generate_scene(p);
            const double got = static_cast<double>(pv::rasterize(s.annotations, 512, 512).count()) / (512.0 * 512.0);
            CHECK(got == doctest::Approx(s.prevalence()).epsilon(1e-12));
            CHECK(got >= target);
            CHECK(got < target + 24.0 * 24.0 / (512.0 * 512.0));
        }
    }

    TEST_CASE("placement failure and invalid parameters")
    {
        pv::SceneParams p;
        p.width = p.height = 40;
        p.n_panels = 10;
        p.placement_attempts = 50;
        CHECK(testutil::error_of([&] { pv::generate_scene(p); }) == pv::ErrorCode::PlacementFailed);

        pv::SceneParams small_palette;
        small_palette.palette.resize(2);
        CHECK(testutil::error_of([&] { pv::generate_scene(small_palette); }) == pv::ErrorCode::InvalidParams);
        pv::SceneParams sides;
        sides.panel_min_side = 2;
        CHECK(testutil::error_of([&] { pv::generate_scene(sides); }) == pv::ErrorCode::InvalidParams);
    }

    TEST_CASE("background palette has a panel-coloured decoy")
    {
        const auto pal = pv::SceneParams::default_palette();
        REQUIRE(pal.size() >= 3);
        const pv::SceneParams p;
        double best = 1e9;
        for (const auto& t : pal) {
            double d = 0;
            for (int c = 0; c < 3; ++c)
                d += std::pow(t.mean[c] - p.panel_mean[c], 2);
            best = std::min(best, std::sqrt(d));
        }
        CHECK(best < 15);
    }

    TEST_CASE("panel pixels follow the panel colour")
    {
        pv::SceneParams p;
        p.n_panels = 10;
        p.seed = 21;
        const auto s = pv::generate_scene(p);
        double sum[3]{};
        std::size_t n = 0;
        for (const auto& r : s.panels)
            for (int y = r.y; y < r.y + r.h; ++y)
                for (int x = r.x; x < r.x + r.w; ++x, ++n)
                    for (int c = 0; c < 3; ++c)
                        sum[c] += s.tile.at(x, y, c);
        for (int c = 0; c < 3; ++c)
            CHECK(std::abs(sum[c] / static_cast<double>(n) - p.panel_mean[c]) < 10);
    }
}
