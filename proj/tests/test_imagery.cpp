#include "oracles/oracles.hpp"
#include "util.hpp"

#include "pv/imagery.hpp"
#include "pv/io.hpp"

#include <doctest.h>

#include <algorithm>
#include <fstream>

using pv::ErrorCode;
using testutil::error_of;

namespace {

std::vector<std::uint8_t> bytes(const std::string& header, std::initializer_list<int> raster)
{
    std::vector<std::uint8_t> b(header.begin(), header.end());
    for (int v : raster)
        b.push_back(static_cast<std::uint8_t>(v));
    return b;
}

pv::PolygonAnnotation poly(std::string id, std::vector<pv::Point> v)
{
    return {"t1", std::move(id), std::move(v)};
}

pv::PolygonAnnotation random_polygon(pv::Rng& rng, int w, int h)
{
    // Star-shaped around a center with sorted angles: always simple.
    const double cx = rng.uniform() * w, cy = rng.uniform() * h;
    const int n = static_cast<int>(rng.between(3, 8));
    std::vector<double> ang;
    for (int i = 0; i < n; ++i)
        ang.push_back(rng.uniform() * 6.283185307179586);
    std::sort(ang.begin(), ang.end());
    ang.erase(std::unique(ang.begin(), ang.end()), ang.end());
    std::vector<pv::Point> v;
    for (double a : ang) {
        const double r = 1 + rng.uniform() * 8;
        // Quarter-pixel grid so centers land on edges now and then.
        v.push_back({std::round((cx + r * std::cos(a)) * 4) / 4, std::round((cy + r * std::sin(a)) * 4) / 4});
    }
    return poly("r", v);
}

} // namespace

TEST_SUITE("imagery")
{
    TEST_CASE("hand-written 2x2 P6 decodes row-major")
    {
        const auto t = pv::decode_ppm(bytes("P6\n2 2\n255\n", {255, 0, 0, 0, 255, 0, 0, 0, 255, 0, 0, 0}));
        REQUIRE(t.width() == 2);
        REQUIRE(t.height() == 2);
        CHECK(t.at(0, 0, 0) == 255);
        CHECK(t.at(1, 0, 1) == 255);
        CHECK(t.at(0, 1, 2) == 255);
        CHECK(t.at(1, 1, 0) == 0);
        CHECK(t.at(1, 1, 1) == 0);
        CHECK(t.at(1, 1, 2) == 0);
    }

    TEST_CASE("PPM header comments and whitespace")
    {
        const auto t = pv::decode_ppm(bytes("P6 # comment\n1\t1 # another\n255\n", {1, 2, 3}));
        CHECK(t.at(0, 0, 2) == 3);
    }

    TEST_CASE("PPM errors are distinct")
    {
        CHECK(error_of([] { pv::decode_ppm(bytes("P6\n2 2\n255\n", {1, 2, 3, 4, 5, 6, 7, 8, 9})); }) == ErrorCode::TruncatedData);
        CHECK(error_of([] { pv::decode_ppm(bytes("P5\n2 2\n255\n", {1, 2, 3, 4})); }) == ErrorCode::ChannelCount);
        CHECK(error_of([] { pv::decode_ppm(bytes("P2\n1 1\n255\n7\n", {})); }) == ErrorCode::ChannelCount);
        CHECK(error_of([] { pv::decode_ppm(bytes("P6\n2 x\n255\n", {})); }) == ErrorCode::MalformedHeader);
        CHECK(error_of([] { pv::decode_ppm(bytes("P6\n1 1\n65535\n", {0, 0, 0, 0, 0, 0})); }) == ErrorCode::MalformedHeader);
        CHECK(error_of([] { pv::decode_ppm(bytes("GIF89a", {})); }) == ErrorCode::MalformedHeader);
        CHECK(error_of([] { pv::decode_ppm(bytes("P6\n0 3\n255\n", {})); }) == ErrorCode::MalformedHeader);
    }

    TEST_CASE("P6 round trip through disk")
    {
        pv::Rng rng(3);
        auto t = testutil::random_tile(rng, 17, 5);
        const auto dir = testutil::scratch_dir("ppm");
        pv::save_tile(t, dir / "a.ppm");
        const auto u = pv::load_tile(dir / "a.ppm");
        CHECK(std::ranges::equal(t.data(), u.data()));
        CHECK(u.tile_id() == "a");
        CHECK(pv::encode_ppm(u) == pv::read_bytes(dir / "a.ppm"));
        CHECK(error_of([&] { pv::load_tile(dir / "missing.ppm"); }) == ErrorCode::Io);
    }

    TEST_CASE("annotation parsing")
    {
        const auto a = pv::parse_annotations("t1,p1,0,0,4,0,4,4,0,4\n");
        REQUIRE(a.size() == 1);
        CHECK(a[0].tile_id == "t1");
        CHECK(a[0].polygon_id == "p1");
        REQUIRE(a[0].vertices.size() == 4);
        CHECK(a[0].vertices[2] == pv::Point{4, 4});

        CHECK(pv::parse_annotations("").empty());
        CHECK(pv::parse_annotations("# only a comment\n\n").empty());
        CHECK(pv::parse_annotations("t,p,0.5,0.25,3.75,0,2,2.5\n")[0].vertices[0] == pv::Point{0.5, 0.25});

        CHECK(error_of([] { pv::parse_annotations("t1,p1,0,0,4,0,4"); }) == ErrorCode::AnnotationParse);
        CHECK(error_of([] { pv::parse_annotations("t1,p1,0,0,4,0"); }) == ErrorCode::AnnotationParse);
        CHECK(error_of([] { pv::parse_annotations("t1,p1,0,0,4,zero,4,4"); }) == ErrorCode::AnnotationParse);
        CHECK(error_of([] { pv::parse_annotations("t1,p1,0,0,4,4,4,0,0,4"); }) == ErrorCode::InvalidPolygon);
    }

    TEST_CASE("annotation format round trip")
    {
        std::vector<pv::PolygonAnnotation> a{poly("p1", {{0, 0}, {4.5, 0}, {4, 4.125}}), poly("p2", {{10, 10}, {12, 10}, {12, 13}, {10, 13}})};
        CHECK(pv::parse_annotations(pv::format_annotations(a)) == a);
    }

    TEST_CASE("simple polygon checks")
    {
        const std::vector<pv::Point> square{{0, 0}, {4, 0}, {4, 4}, {0, 4}};
        const std::vector<pv::Point> bowtie{{0, 0}, {4, 4}, {4, 0}, {0, 4}};
        const std::vector<pv::Point> spike{{0, 0}, {4, 0}, {2, 0}, {2, 3}};
        const std::vector<pv::Point> touching{{0, 0}, {4, 0}, {2, 2}, {4, 4}, {0, 4}, {2, 2}};
        CHECK(pv::is_simple_polygon(square));
        CHECK_FALSE(pv::is_simple_polygon(bowtie));
        CHECK_FALSE(pv::is_simple_polygon(spike));
        CHECK_FALSE(pv::is_simple_polygon(touching));
    }

    TEST_CASE("square on a 6x6 grid covers exactly 16 pixels")
    {
        const std::vector<pv::PolygonAnnotation> a{poly("p1", {{0, 0}, {4, 0}, {4, 4}, {0, 4}})};
        const auto m = pv::rasterize(a, 6, 6);
        CHECK(m.count() == 16);
        for (int y = 0; y < 6; ++y)
            for (int x = 0; x < 6; ++x)
                CHECK(m.at(x, y) == (x < 4 && y < 4));
        CHECK(m == oracle::rasterize(a, 6, 6));
    }

    TEST_CASE("empty and duplicated annotation sets")
    {
        CHECK(pv::rasterize({}, 5, 5).count() == 0);
        const auto sq = poly("p1", {{1, 1}, {3, 1}, {3, 3}, {1, 3}});
        const std::vector<pv::PolygonAnnotation> one{sq}, two{sq, sq};
        CHECK(pv::rasterize(one, 5, 5) == pv::rasterize(two, 5, 5));
    }

    TEST_CASE("on-edge pixel centers count as inside")
    {
        // Triangle whose hypotenuse passes through pixel centers (0.5,0.5), (1.5,1.5), ...
        const std::vector<pv::PolygonAnnotation> a{poly("p", {{0, 0}, {4, 4}, {4, 0}})};
        const auto m = pv::rasterize(a, 4, 4);
        for (int i = 0; i < 4; ++i)
            CHECK(m.at(i, i));
        CHECK(m == oracle::rasterize(a, 4, 4));
        // Horizontal edge through centers: y = 1.5 bottom edge.
        const std::vector<pv::PolygonAnnotation> b{poly("q", {{0.5, 0.5}, {2.5, 0.5}, {2.5, 1.5}, {0.5, 1.5}})};
        CHECK(pv::rasterize(b, 4, 4) == oracle::rasterize(b, 4, 4));
        CHECK(pv::rasterize(b, 4, 4).count() == 6);
    }

    TEST_CASE("out-of-tile parts are clipped")
    {
        const std::vector<pv::PolygonAnnotation> a{poly("p", {{-3, -3}, {2, -3}, {2, 2}, {-3, 2}})};
        const auto m = pv::rasterize(a, 4, 4);
        CHECK(m.count() == 4);
        CHECK(pv::rasterize_pixels(a[0], 4, 4) == std::vector<std::uint32_t>{0, 1, 4, 5});
    }

    TEST_CASE("rasterize matches brute force on random polygons")
    {
        pv::Rng rng(11);
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<pv::PolygonAnnotation> anns;
            const int n = static_cast<int>(rng.between(1, 3));
            for (int i = 0; i < n; ++i) {
                auto p = random_polygon(rng, 20, 16);
                if (pv::is_simple_polygon(p.vertices))
                    anns.push_back(p);
            }
            const auto got = pv::rasterize(anns, 20, 16);
            REQUIRE(got == oracle::rasterize(anns, 20, 16));
            for (std::size_t i = 0; i < anns.size(); ++i)
                for (int y = 0; y < 16; ++y)
                    for (int x = 0; x < 20; ++x)
                        REQUIRE(pv::point_in_polygon(anns[i].vertices, {x + 0.5, y + 0.5}) == oracle::inside(anns[i].vertices, x + 0.5, y + 0.5));
        }
    }

    TEST_CASE("rasterization is order independent and distributes over union")
    {
        pv::Rng rng(5);
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<pv::PolygonAnnotation> a, b;
            for (int i = 0; i < 3; ++i) {
                auto p = random_polygon(rng, 24, 24);
                if (pv::is_simple_polygon(p.vertices))
                    (i % 2 ? b : a).push_back(p);
            }
            auto ab = a;
            ab.insert(ab.end(), b.begin(), b.end());
            auto ba = ab;
            std::reverse(ba.begin(), ba.end());
            const auto m = pv::rasterize(ab, 24, 24);
            CHECK(m == pv::rasterize(ba, 24, 24));
            const auto ma = pv::rasterize(a, 24, 24), mb = pv::rasterize(b, 24, 24);
            for (int y = 0; y < 24; ++y)
                for (int x = 0; x < 24; ++x)
                    REQUIRE(m.at(x, y) == (ma.at(x, y) || mb.at(x, y)));
        }
    }

    TEST_CASE("manifest loading and contracts")
    {
        const auto dir = testutil::scratch_dir("manifest");
        std::filesystem::create_directories(dir / "img");
        pv::save_tile(pv::ImageTile(4, 4), dir / "img" / "a.ppm");
        pv::save_tile(pv::ImageTile(4, 4), dir / "img" / "b.ppm");
        pv::write_atomic(dir / "a.csv", std::string("a,p1,0,0,2,0,2,2\n"));
        pv::write_atomic(dir / "b.csv", std::string("# none\n"));
        pv::write_atomic(dir / "m.txt", std::string("# dataset\ntrain,img/a.ppm,a.csv\ntest,img/b.ppm,b.csv\n"));

        const auto m = pv::load_manifest(dir / "m.txt");
        REQUIRE(m.entries.size() == 2);
        CHECK(m.entries[0].tile_id == "a");
        CHECK(m.entries[0].role == pv::Role::Train);
        CHECK(m.entries[1].role == pv::Role::Test);
        CHECK(std::filesystem::equivalent(m.entries[0].image, dir / "img" / "a.ppm"));
        CHECK(m.with_role(pv::Role::Test).size() == 1);
        CHECK(pv::load_entry_annotations(m, m.entries[0]).size() == 1);
        CHECK(pv::load_entry_annotations(m, m.entries[1]).empty());

        pv::save_manifest(m, dir / "m2.txt");
        const auto m2 = pv::load_manifest(dir / "m2.txt");
        CHECK(m2.entries[1].tile_id == "b");

        pv::write_atomic(dir / "dup.txt", std::string("train,img/a.ppm,a.csv\ntest,img/a.ppm,b.csv\n"));
        CHECK(error_of([&] { pv::load_manifest(dir / "dup.txt"); }) == ErrorCode::ManifestContract);
        pv::write_atomic(dir / "bad.txt", std::string("validate,img/a.ppm,a.csv\n"));
        CHECK(error_of([&] { pv::load_manifest(dir / "bad.txt"); }) == ErrorCode::ManifestParse);

        pv::write_atomic(dir / "c.csv", std::string("zzz,p1,0,0,2,0,2,2\n"));
        pv::write_atomic(dir / "orphan.txt", std::string("train,img/a.ppm,c.csv\n"));
        const auto mo = pv::load_manifest(dir / "orphan.txt");
        CHECK(error_of([&] { pv::load_entry_annotations(mo, mo.entries[0]); }) == ErrorCode::ManifestContract);
    }
}
