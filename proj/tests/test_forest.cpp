#include "golden_data.hpp"
#include "oracles/oracles.hpp"
#include "util.hpp"

#include "pv/forest.hpp"
#include "pv/io.hpp"

#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#ifndef PV_TEST_DATA
#define PV_TEST_DATA "tests/data"
#endif

using pv::ErrorCode;
using testutil::error_of;

namespace {

pv::TrainingSet ten_sample_set()
{
    std::vector<double> x{0, 0, 0, 0, 0, 1, 1, 1, 1, 1};
    std::vector<std::uint8_t> y{0, 0, 0, 0, 0, 1, 1, 1, 1, 1};
    return pv::TrainingSet::from_rows(x, y, 1);
}

std::vector<pv::WeightedSample> all_rows(const pv::TrainingSet& d)
{
    std::vector<pv::WeightedSample> s;
    for (std::uint32_t i = 0; i < d.size(); ++i)
        s.push_back({i, 1});
    return s;
}

std::vector<std::uint32_t> identity(std::size_t n)
{
    std::vector<std::uint32_t> r(n);
    std::iota(r.begin(), r.end(), 0u);
    return r;
}

pv::TrainingSet random_set(pv::Rng& rng, std::size_t n, std::size_t m, int levels)
{
    std::vector<double> rows;
    std::vector<std::uint8_t> labels;
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0;
        for (std::size_t f = 0; f < m; ++f) {
            const double v = static_cast<double>(rng.below(static_cast<std::uint64_t>(levels)));
            rows.push_back(v);
            s += v * static_cast<double>(f + 1);
        }
        labels.push_back(rng.uniform() < (s > static_cast<double>(m * levels) / 2 ? 0.8 : 0.2) ? 1 : 0);
    }
    return pv::TrainingSet::from_rows(rows, labels, m);
}

pv::RandomForest stump_forest(std::vector<double> leaf_values)
{
    std::vector<pv::DecisionTree> trees;
    for (double p : leaf_values) {
        pv::TreeNode leaf;
        leaf.probability = p;
        leaf.count = 5;
        trees.emplace_back(std::vector<pv::TreeNode>{leaf});
    }
    return pv::RandomForest(std::move(trees), 2, "t");
}

} // namespace

TEST_SUITE("forest")
{
    TEST_CASE("gini")
    {
        CHECK(pv::gini(10, 0) == 0);
        CHECK(pv::gini(5, 5) == 0.5);
        CHECK(pv::gini(3, 1) == doctest::Approx(0.375).epsilon(1e-15));
        CHECK(error_of([] { pv::gini(0, 0); }) == ErrorCode::EmptyNode);
    }

    TEST_CASE("params validation")
    {
        pv::RFParams p;
        CHECK(p.resolved_features_per_node(102) == 10);
        p.trees = 0;
        CHECK(error_of([&] { p.validate(102); }) == ErrorCode::InvalidParams);
        p = {};
        p.features_per_node = 103;
        CHECK(error_of([&] { p.validate(102); }) == ErrorCode::InvalidParams);
        p = {};
        p.min_leaf = 0;
        CHECK(error_of([&] { p.validate(102); }) == ErrorCode::InvalidParams);
    }

    TEST_CASE("best split on the 10-sample set")
    {
        const auto d = ten_sample_set();
        const std::vector<int> f{0};
        const auto s = pv::best_split(all_rows(d), f, d, 5);
        REQUIRE(s);
        CHECK(s->feature == 0);
        CHECK(s->threshold == 0.5);
        CHECK(s->decrease == doctest::Approx(0.5));
    }

    TEST_CASE("no split for a pure node or when children would be too small")
    {
        std::vector<double> x{0, 1, 2, 3};
        std::vector<std::uint8_t> y{1, 1, 1, 1};
        const auto pure = pv::TrainingSet::from_rows(x, y, 1);
        const std::vector<int> f{0};
        CHECK_FALSE(pv::best_split(all_rows(pure), f, pure, 1));

        std::vector<double> x6{0, 1, 2, 3, 4, 5};
        std::vector<std::uint8_t> y6{0, 0, 0, 0, 0, 1};
        const auto six = pv::TrainingSet::from_rows(x6, y6, 1);
        CHECK_FALSE(pv::best_split(all_rows(six), f, six, 5));
        CHECK(pv::best_split(all_rows(six), f, six, 1));
    }

    TEST_CASE("split ties go to the lowest feature then the lowest threshold")
    {
        // Features 1 and 2 both separate the classes perfectly.
        std::vector<double> rows{0, 0, 0, 0, 0, 0, 1, 1, 5, 1, 1, 9};
        std::vector<std::uint8_t> y{0, 0, 1, 1};
        const auto d = pv::TrainingSet::from_rows(rows, y, 3);
        const std::vector<int> f12{2, 1};
        auto s = pv::best_split(all_rows(d), f12, d, 1);
        REQUIRE(s);
        CHECK(s->feature == 1);

        // Thresholds 0.5 and 2.5 score equally here.
        std::vector<double> x{0, 1, 2, 3};
        std::vector<std::uint8_t> y2{0, 1, 1, 0};
        const auto e = pv::TrainingSet::from_rows(x, y2, 1);
        const std::vector<int> f0{0};
        s = pv::best_split(all_rows(e), f0, e, 1);
        REQUIRE(s);
        CHECK(s->threshold == 0.5);
    }

    TEST_CASE("midpoint of adjacent doubles falls back to the lower value")
    {
        const double lo = 1.0, hi = std::nextafter(1.0, 2.0);
        std::vector<double> x{lo, hi};
        std::vector<std::uint8_t> y{0, 1};
        const auto d = pv::TrainingSet::from_rows(x, y, 1);
        const std::vector<int> f{0};
        const auto s = pv::best_split(all_rows(d), f, d, 1);
        REQUIRE(s);
        CHECK(s->threshold == lo);
    }

    TEST_CASE("weighted samples count their multiplicity")
    {
        const auto d = ten_sample_set();
        // Rows 0 and 5 only, each five times: children of exactly 5 pass min_leaf=5.
        const std::vector<pv::WeightedSample> w{{0, 5}, {5, 5}};
        const std::vector<int> f{0};
        CHECK(pv::best_split(w, f, d, 5));
        const std::vector<pv::WeightedSample> w4{{0, 4}, {5, 5}};
        CHECK_FALSE(pv::best_split(w4, f, d, 5));
    }

    TEST_CASE("grow_tree examples")
    {
        const auto d = ten_sample_set();
        pv::RFParams p;
        p.min_leaf = 5;
        const pv::NodeFeatureSampler all(1, 1, 1);
        const auto t = pv::grow_tree(identity(10), d, p, all);
        CHECK(t.nodes().size() == 3);
        CHECK(t.depth() == 1);
        CHECK(t.predict(std::vector<double>{0}) == 0);
        CHECK(t.predict(std::vector<double>{1}) == 1);

        const std::vector<std::uint32_t> negatives{0, 1, 2, 3, 4, 0};
        const auto single = pv::grow_tree(negatives, d, p, all);
        CHECK(single.nodes().size() == 1);
        CHECK(single.nodes()[0].probability == 0);
        CHECK(single.nodes()[0].count == 6);
    }

    TEST_CASE("grow_tree equals exhaustive CART with m = M")
    {
        pv::Rng rng(31);
        for (int trial = 0; trial < 40; ++trial) {
            const std::size_t n = rng.between(2, 50), m = rng.between(1, 4);
            const auto d = random_set(rng, n, m, static_cast<int>(rng.between(2, 6)));
            const int min_leaf = static_cast<int>(rng.between(1, 3));
            pv::RFParams p;
            p.min_leaf = min_leaf;
            const auto rows = trial % 2 ? pv::bootstrap_rows(n, rng.next()) : identity(n);
            const auto tree = pv::grow_tree(rows, d, p, pv::NodeFeatureSampler(rng.next(), m, static_cast<int>(m)));
            const auto ref = oracle::cart(d, rows, min_leaf);
            for (std::size_t r = 0; r < n; ++r) {
                const auto x = d.row(r);
                REQUIRE(tree.predict(x) == ref->predict(x));
            }
            for (const auto& node : tree.nodes())
                if (node.is_leaf())
                    REQUIRE(node.count >= static_cast<std::uint32_t>(min_leaf));
        }
    }

    TEST_CASE("node feature sampler")
    {
        const pv::NodeFeatureSampler s(42, 102, 10);
        const auto a = s(7);
        CHECK(a.size() == 10);
        CHECK(std::is_sorted(a.begin(), a.end()));
        CHECK(std::adjacent_find(a.begin(), a.end()) == a.end());
        CHECK(a == s(7));
        CHECK(a != s(8));
        CHECK(pv::NodeFeatureSampler(1, 5, 5)(3) == std::vector<int>{0, 1, 2, 3, 4});
    }

    TEST_CASE("bootstrap is deterministic and in range")
    {
        const auto a = pv::bootstrap_rows(100, 9), b = pv::bootstrap_rows(100, 9);
        CHECK(a == b);
        CHECK(a.size() == 100);
        CHECK(*std::max_element(a.begin(), a.end()) < 100);
        CHECK(a != pv::bootstrap_rows(100, 10));
    }

    TEST_CASE("single tree on the 10-sample set")
    {
        pv::RFParams p;
        p.trees = 1;
        p.features_per_node = 1;
        p.min_leaf = 1;
        // Any bootstrap holding both values separates them; find a seed whose does.
        for (std::uint64_t seed = 0;; ++seed) {
            const auto rows = pv::bootstrap_rows(10, pv::tree_seed(seed, 0));
            const bool mixed = std::any_of(rows.begin(), rows.end(), [](auto r) { return r < 5; }) &&
                               std::any_of(rows.begin(), rows.end(), [](auto r) { return r >= 5; });
            if (!mixed)
                continue;
            p.seed = seed;
            break;
        }
        const auto f = pv::train(ten_sample_set(), p);
        CHECK(f.predict(std::vector<double>{0}) == 0);
        CHECK(f.predict(std::vector<double>{1}) == 1);
    }

    TEST_CASE("degenerate training sets are rejected")
    {
        std::vector<double> x{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
        std::vector<std::uint8_t> y(10, 1);
        CHECK(error_of([&] { pv::train(pv::TrainingSet::from_rows(x, y, 1), {}); }) == ErrorCode::DegenerateTrainingSet);
        std::vector<std::uint8_t> y2{0, 1, 0, 1, 0, 1, 0, 1, 0};
        std::vector<double> x2(9, 0.0);
        CHECK(error_of([&] { pv::train(pv::TrainingSet::from_rows(x2, y2, 1), {}); }) == ErrorCode::DegenerateTrainingSet);
    }

    TEST_CASE("forest prediction is the mean of tree outputs")
    {
        CHECK(stump_forest({0.3}).predict(std::vector<double>{0, 0}) == doctest::Approx(0.3));
        CHECK(stump_forest({0, 1}).predict(std::vector<double>{0, 0}) == 0.5);
        CHECK(stump_forest({0.1, 0.7, 0.4}).predict(std::vector<double>{0, 0}) == stump_forest({0.4, 0.1, 0.7}).predict(std::vector<double>{0, 0}));
        CHECK(error_of([] { stump_forest({0.5}).predict(std::vector<double>{0, 0, 0}); }) == ErrorCode::DimensionMismatch);
    }

    TEST_CASE("forest prediction equals a route-and-read walk of every tree")
    {
        const auto d = golden::dataset();
        auto p = golden::params();
        p.trees = 7;
        const auto f = pv::train(d, p);
        pv::Rng rng(5);
        for (int k = 0; k < 200; ++k) {
            const std::vector<double> x{rng.uniform(), rng.uniform(), std::floor(rng.uniform() * 4)};
            double s = 0;
            for (const auto& t : f.trees()) {
                std::size_t i = 0;
                const auto nodes = t.nodes();
                while (nodes[i].feature >= 0)
                    i = static_cast<std::size_t>(x[static_cast<std::size_t>(nodes[i].feature)] <= nodes[i].threshold ? nodes[i].left : nodes[i].right);
                s += nodes[i].probability;
            }
            const double got = f.predict(x);
            REQUIRE(got == doctest::Approx(s / 7).epsilon(1e-15));
            REQUIRE(got >= 0);
            REQUIRE(got <= 1);
        }
    }

    TEST_CASE("monotone rescaling leaves routes unchanged")
    {
        const auto d = golden::dataset();
        std::vector<double> rows;
        std::vector<std::uint8_t> labels;
        for (std::size_t r = 0; r < d.size(); ++r) {
            for (std::size_t f = 0; f < 3; ++f)
                rows.push_back(std::exp(2 * d.value(r, f)) + 3);
            labels.push_back(d.label(r));
        }
        const auto e = pv::TrainingSet::from_rows(rows, labels, 3);
        auto p = golden::params();
        p.trees = 4;
        const auto a = pv::train(d, p), b = pv::train(e, p);
        for (std::size_t t = 0; t < 4; ++t) {
            const auto na = a.trees()[t].nodes(), nb = b.trees()[t].nodes();
            REQUIRE(na.size() == nb.size());
            for (std::size_t i = 0; i < na.size(); ++i) {
                CHECK(na[i].feature == nb[i].feature);
                CHECK(na[i].left == nb[i].left);
                CHECK(na[i].probability == nb[i].probability);
            }
            for (std::size_t r = 0; r < d.size(); ++r)
                REQUIRE(a.trees()[t].leaf_index(d.row(r)) == b.trees()[t].leaf_index(e.row(r)));
        }
    }

    TEST_CASE("training is deterministic and thread independent")
    {
        const auto d = golden::dataset();
        auto p = golden::params();
        p.trees = 12;
        const auto a = pv::format_model(pv::train(d, p));
        CHECK(a == pv::format_model(pv::train(d, p)));
        p.seed += 1;
        CHECK(a != pv::format_model(pv::train(d, p)));
    }

    TEST_CASE("training pixel sampling")
    {
        pv::LabelMask m(50, 40);
        for (int i = 0; i < 100; ++i)
            m.set(i % 50, i / 50 * 7);
        const std::vector<pv::LabelMask> masks{m};
        const auto s = pv::sample_training_pixels(masks, 1000, 3);
        REQUIRE(s.size() == 1000);
        CHECK(std::count_if(s.begin(), s.end(), [](const auto& p) { return p.positive; }) == 100);
        std::set<std::pair<int, int>> seen;
        for (const auto& p : s) {
            CHECK(p.positive == m.at(p.x, p.y));
            seen.insert({p.x, p.y});
        }
        CHECK(seen.size() == 1000);
        CHECK(s == pv::sample_training_pixels(masks, 1000, 3));
        CHECK(s != pv::sample_training_pixels(masks, 1000, 4));
        CHECK(error_of([&] { pv::sample_training_pixels(masks, 100, 3); }) == ErrorCode::DegenerateTrainingSet);
        CHECK(error_of([&] { pv::sample_training_pixels(masks, 99, 3); }) == ErrorCode::InvalidParams);
    }

    TEST_CASE("negatives are spread over every tile")
    {
        std::vector<pv::LabelMask> masks(4, pv::LabelMask(32, 32));
        masks[0].set(1, 1);
        const auto s = pv::sample_training_pixels(masks, 400, 11);
        std::array<int, 4> per{};
        for (const auto& p : s)
            ++per[p.tile];
        for (int c : per)
            CHECK(c > 50);
    }

    TEST_CASE("model round trip")
    {
        const auto f = pv::train(golden::dataset(), golden::params(), "w3;r2,4");
        const auto text = pv::format_model(f);
        const auto g = pv::parse_model(text, 5);
        CHECK(g == f);
        CHECK(pv::format_model(g) == text);
        const auto dir = testutil::scratch_dir("model");
        pv::save_model(f, dir / "a.pvf");
        pv::save_model(pv::load_model(dir / "a.pvf"), dir / "b.pvf");
        CHECK(pv::read_text(dir / "a.pvf") == pv::read_text(dir / "b.pvf"));
    }

    TEST_CASE("model file errors")
    {
        const auto text = pv::format_model(pv::train(golden::dataset(), golden::params()));
        auto replace = [&](const std::string& from, const std::string& to) {
            auto t = text;
            t.replace(t.find(from), from.size(), to);
            return t;
        };
        CHECK(error_of([&] { pv::parse_model(replace("PVFOREST v1", "PVFOREST v2")); }) == ErrorCode::ModelVersion);
        CHECK(error_of([&] { pv::parse_model(replace("M 3", "M 4")); }) == ErrorCode::ModelChecksum);
        CHECK(error_of([&] { pv::parse_model(text.substr(0, text.find("CHECKSUM"))); }) == ErrorCode::ModelMalformed);
        CHECK(error_of([&] { pv::parse_model(""); }) == ErrorCode::ModelMalformed);
        CHECK(error_of([&] { pv::parse_model(text, 6); }) == ErrorCode::ModelMalformed);

        // Re-checksummed but structurally broken bodies.
        auto resign = [](std::string body) {
            return body + "CHECKSUM " + pv::hex64(pv::fnv1a64(body)) + "\n";
        };
        CHECK(error_of([&] { pv::parse_model(resign("PVFOREST v1\nM 2\nT 1\nSPEC -\nTREE 0 3\nI 0 0.5 1 1\nL 0 1\nL 1 1\n")); }) ==
              ErrorCode::ModelMalformed);
        CHECK(error_of([&] { pv::parse_model(resign("PVFOREST v1\nM 2\nT 1\nSPEC -\nTREE 0 3\nI 5 0.5 1 2\nL 0 1\nL 1 1\n")); }) ==
              ErrorCode::ModelMalformed);
        CHECK(error_of([&] { pv::parse_model(resign("PVFOREST v1\nM 2\nT 1\nSPEC -\nTREE 0 2\nI 0 0.5 1 2\nL 0 1\n")); }) ==
              ErrorCode::ModelMalformed);
        CHECK(error_of([&] { pv::parse_model(resign("PVFOREST v1\nM 2\nT 1\nSPEC -\nTREE 0 1\nL 1.5 1\n")); }) == ErrorCode::ModelMalformed);
        CHECK(error_of([&] { pv::parse_model(resign("PVFOREST v1\nM 2\nT 1\nSPEC -\nTREE 0 1\nX 1 1\n")); }) == ErrorCode::ModelMalformed);
        const auto ok = pv::parse_model(resign("PVFOREST v1\nM 2\nT 1\nSPEC -\nTREE 0 3\nI 1 0.5 1 2\nL 0.25 4\nL 1 6\n"));
        CHECK(ok.predict(std::vector<double>{9, 0}) == 0.25);
        CHECK(ok.predict(std::vector<double>{9, 1}) == 1);
    }

    TEST_CASE("golden one-tree model")
    {
        const std::filesystem::path data = PV_TEST_DATA;
        const auto model = pv::load_model(data / "golden_1tree.pvf", 5);
        REQUIRE(model.trees().size() == 1);
        std::istringstream in(pv::read_text(data / "golden_1tree_predictions.txt"));
        std::string line;
        int checked = 0;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#')
                continue;
            std::istringstream ls(line);
            double a, b, c, want;
            ls >> a >> b >> c >> want;
            REQUIRE(model.predict(std::vector<double>{a, b, c}) == want);
            ++checked;
        }
        CHECK(checked == 100);
        // Retraining reproduces the file byte for byte.
        CHECK(pv::format_model(pv::train(golden::dataset(), golden::params(), "golden")) == pv::read_text(data / "golden_1tree.pvf"));
    }

    TEST_CASE("prediction kernels agree")
    {
        pv::Rng rng(2);
        const auto tile = testutil::random_tile(rng, 23, 19);
        const pv::FeatureSpec spec;
        std::vector<double> rows;
        std::vector<std::uint8_t> labels;
        for (int i = 0; i < 300; ++i) {
            for (std::size_t f = 0; f < 102; ++f)
                rows.push_back(rng.uniform() * 255);
            labels.push_back(rows[rows.size() - 102] > 128 ? 1 : 0);
        }
        pv::RFParams p;
        p.trees = 5;
        const auto forest = pv::train(pv::TrainingSet::from_rows(rows, labels, 102), p, spec.fingerprint());
        const auto img = pv::extract_feature_image(tile, spec);
        const auto a = pv::predict_map(forest, img);
        CHECK(a == pv::serial::predict_map(forest, img));
        CHECK(a == pv::predict_tile(forest, tile, spec));
        for (int y = 0; y < 19; ++y)
            for (int x = 0; x < 23; ++x)
                REQUIRE(a.at(x, y) == static_cast<float>(forest.predict(img.at(x, y))));
        pv::FeatureSpec other;
        other.ring_radii = {2};
        CHECK(error_of([&] { pv::predict_tile(forest, tile, other); }) == ErrorCode::DimensionMismatch);
    }

    TEST_CASE("training set assembly matches per-pixel features")
    {
        pv::Rng rng(6);
        const std::vector<pv::ImageTile> tiles{testutil::random_tile(rng, 12, 9), testutil::random_tile(rng, 7, 15)};
        const std::vector<pv::PixelSample> samples{{0, 3, 4, true}, {1, 6, 14, false}, {0, 0, 0, false}};
        const pv::FeatureSpec spec;
        const auto ts = pv::build_training_set(tiles, samples, spec);
        REQUIRE(ts.size() == 3);
        CHECK(ts.label(0));
        CHECK_FALSE(ts.label(1));
        for (std::size_t i = 0; i < samples.size(); ++i)
            CHECK(ts.row(i) == pv::extract_pixel_features(pv::build_integral(tiles[samples[i].tile]), spec, samples[i].x, samples[i].y));
    }
}
