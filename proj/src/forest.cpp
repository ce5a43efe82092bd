#include "pv/forest.hpp"

#include "pv/error.hpp"
#include "pv/io.hpp"
#include "pv/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

namespace pv {

using u128 = unsigned __int128;

int RFParams::resolved_features_per_node(std::size_t feature_count) const
{
    if (features_per_node > 0)
        return features_per_node;
    auto m = static_cast<int>(std::floor(std::sqrt(static_cast<double>(feature_count))));
    while (static_cast<std::size_t>((m + 1) * (m + 1)) <= feature_count)
        ++m;
    while (m > 1 && static_cast<std::size_t>(m * m) > feature_count)
        --m;
    return std::max(m, 1);
}

void RFParams::validate(std::size_t feature_count) const
{
    if (trees < 1)
        throw Error(ErrorCode::InvalidParams, "tree count must be >= 1");
    if (min_leaf < 1)
        throw Error(ErrorCode::InvalidParams, "min_leaf must be >= 1");
    const int m = resolved_features_per_node(feature_count);
    if (m < 1 || static_cast<std::size_t>(m) > feature_count)
        throw Error(ErrorCode::InvalidParams, "features per node must lie in [1, M]");
}

TrainingSet TrainingSet::from_rows(std::span<const double> row_major, std::span<const std::uint8_t> labels, std::size_t features)
{
    if (features == 0 || row_major.size() != labels.size() * features)
        throw Error(ErrorCode::DimensionMismatch, "training matrix shape does not match labels");
    TrainingSet ts(labels.size(), features);
    for (std::size_t r = 0; r < labels.size(); ++r) {
        for (std::size_t f = 0; f < features; ++f)
            ts.set_value(r, f, row_major[r * features + f]);
        ts.set_label(r, labels[r] != 0);
    }
    return ts;
}

std::size_t TrainingSet::positives() const noexcept
{
    return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), std::uint8_t{1}));
}

std::vector<double> TrainingSet::row(std::size_t r) const
{
    std::vector<double> out(features_);
    for (std::size_t f = 0; f < features_; ++f)
        out[f] = value(r, f);
    return out;
}

void TrainingSet::validate(int min_leaf) const
{
    if (rows_ < 2 * static_cast<std::size_t>(std::max(min_leaf, 1)))
        throw Error(ErrorCode::DegenerateTrainingSet, "training set smaller than 2*min_leaf");
    const auto pos = positives();
    if (pos == 0 || pos == rows_)
        throw Error(ErrorCode::DegenerateTrainingSet, "training set must contain both classes");
    if (rows_ > 0xffffffffULL)
        throw Error(ErrorCode::DegenerateTrainingSet, "training set too large");
}

std::size_t DecisionTree::depth() const
{
    if (nodes_.empty())
        return 0;
    std::vector<std::size_t> d(nodes_.size(), 0);
    std::size_t best = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        best = std::max(best, d[i]);
        if (!nodes_[i].is_leaf()) {
            d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
            d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
        }
    }
    return best;
}

RandomForest::RandomForest(std::vector<DecisionTree> trees, std::size_t feature_count, std::string spec_fingerprint)
    : trees_(std::move(trees)), feature_count_(feature_count), fingerprint_(std::move(spec_fingerprint))
{
    for (const auto& t : trees_)
        for (const auto& n : t.nodes())
            if (!n.is_leaf() && static_cast<std::size_t>(n.feature) >= feature_count_)
                throw Error(ErrorCode::ModelMalformed, "tree references feature index >= M");
}

double RandomForest::predict(std::span<const double> x) const
{
    if (x.size() != feature_count_)
        throw Error(ErrorCode::DimensionMismatch,
                    "feature vector has " + std::to_string(x.size()) + " entries, forest expects " + std::to_string(feature_count_));
    if (trees_.empty())
        throw Error(ErrorCode::ModelMalformed, "forest has no trees");
    return predict_unchecked(x);
}

double gini(std::uint64_t n_pos, std::uint64_t n_neg)
{
    const std::uint64_t n = n_pos + n_neg;
    if (n == 0)
        throw Error(ErrorCode::EmptyNode, "gini of an empty node");
    const double p = static_cast<double>(n_pos) / static_cast<double>(n);
    const double q = static_cast<double>(n_neg) / static_cast<double>(n);
    return 1.0 - p * p - q * q;
}

namespace {

struct Keyed {
    double value;
    std::uint32_t weight;
    std::uint32_t pos; // weight when positive, else 0
};

// Threshold halfway between two distinct sorted values; falls back to the
// lower value when they are adjacent doubles, so lo <= t < hi always holds.
double midpoint(double lo, double hi) noexcept
{
    const double m = lo + (hi - lo) * 0.5;
    return (m >= lo && m < hi) ? m : lo;
}

} // namespace

std::optional<Split> best_split(std::span<const WeightedSample> samples, std::span<const int> features, const TrainingSet& data,
                                int min_leaf)
{
    std::uint64_t total = 0, total_pos = 0;
    for (const auto& s : samples) {
        total += s.weight;
        if (data.label(s.row))
            total_pos += s.weight;
    }
    if (total == 0 || total_pos == 0 || total_pos == total)
        return std::nullopt;
    const auto leaf = static_cast<std::uint64_t>(std::max(min_leaf, 1));
    if (total < 2 * leaf)
        return std::nullopt;

    std::vector<int> order(features.begin(), features.end());
    std::sort(order.begin(), order.end());
    order.erase(std::unique(order.begin(), order.end()), order.end());

    // Split score (maximised): sum over children of (pos^2 + neg^2) / n, kept
    // as the exact fraction num/den.
    bool found = false;
    u128 best_num = 0, best_den = 1;
    Split best;
    std::vector<Keyed> buf(samples.size());

    for (int f : order) {
        const auto col = data.column(static_cast<std::size_t>(f));
        for (std::size_t i = 0; i < samples.size(); ++i)
            buf[i] = {col[samples[i].row], samples[i].weight, data.label(samples[i].row) ? samples[i].weight : 0u};
        std::sort(buf.begin(), buf.end(), [](const Keyed& a, const Keyed& b) { return a.value < b.value; });

        std::uint64_t ln = 0, lp = 0;
        for (std::size_t k = 0; k + 1 < buf.size(); ++k) {
            ln += buf[k].weight;
            lp += buf[k].pos;
            if (buf[k].value == buf[k + 1].value || ln < leaf)
                continue;
            const std::uint64_t rn = total - ln;
            if (rn < leaf)
                break;
            const std::uint64_t rp = total_pos - lp;
            const u128 a = u128(lp) * lp + u128(ln - lp) * (ln - lp);
            const u128 b = u128(rp) * rp + u128(rn - rp) * (rn - rp);
            const u128 num = a * rn + b * ln;
            const u128 den = u128(ln) * rn;
            if (!found || num * best_den > best_num * den) {
                found = true;
                best_num = num;
                best_den = den;
                best.feature = f;
                best.threshold = midpoint(buf[k].value, buf[k + 1].value);
                const double nl = static_cast<double>(ln), nr = static_cast<double>(rn), nt = static_cast<double>(total);
                best.decrease = gini(total_pos, total - total_pos) - (nl / nt) * gini(lp, ln - lp) - (nr / nt) * gini(rp, rn - rp);
            }
        }
    }
    if (!found)
        return std::nullopt;
    // Strict improvement over the parent: score > (P^2 + Q^2) / N.
    const u128 parent = u128(total_pos) * total_pos + u128(total - total_pos) * (total - total_pos);
    if (!(best_num * total > parent * best_den))
        return std::nullopt;
    return best;
}

std::vector<int> NodeFeatureSampler::operator()(std::uint32_t node_index) const
{
    std::vector<int> all(feature_count_);
    std::iota(all.begin(), all.end(), 0);
    const auto m = static_cast<std::size_t>(std::clamp<std::int64_t>(per_node_, 1, static_cast<std::int64_t>(feature_count_)));
    if (m < feature_count_) {
        Rng rng(derive_seed(seed_, node_index));
        for (std::size_t i = 0; i < m; ++i) {
            const auto j = i + static_cast<std::size_t>(rng.below(feature_count_ - i));
            std::swap(all[i], all[j]);
        }
        all.resize(m);
    }
    std::sort(all.begin(), all.end());
    return all;
}

DecisionTree grow_tree(std::span<const std::uint32_t> bootstrap, const TrainingSet& data, const RFParams& params,
                       const NodeFeatureSampler& sampler)
{
    std::vector<std::uint32_t> rows(bootstrap.begin(), bootstrap.end());
    std::sort(rows.begin(), rows.end());
    std::vector<WeightedSample> samples;
    for (std::size_t i = 0; i < rows.size();) {
        std::size_t j = i;
        while (j < rows.size() && rows[j] == rows[i])
            ++j;
        samples.push_back({rows[i], static_cast<std::uint32_t>(j - i)});
        i = j;
    }

    const auto leaf = static_cast<std::uint64_t>(std::max(params.min_leaf, 1));
    std::vector<TreeNode> nodes(1);
    struct Work {
        std::uint32_t node;
        std::size_t begin, end;
    };
    std::vector<Work> stack{{0, 0, samples.size()}};

    while (!stack.empty()) {
        const Work w = stack.back();
        stack.pop_back();
        const std::span<WeightedSample> range(samples.data() + w.begin, w.end - w.begin);

        std::uint64_t total = 0, pos = 0;
        for (const auto& s : range) {
            total += s.weight;
            if (data.label(s.row))
                pos += s.weight;
        }
        auto make_leaf = [&] {
            TreeNode& n = nodes[w.node];
            n.feature = TreeNode::kLeaf;
            n.probability = total ? static_cast<double>(pos) / static_cast<double>(total) : 0.0;
            n.count = static_cast<std::uint32_t>(total);
        };

        if (pos == 0 || pos == total || total < 2 * leaf) {
            make_leaf();
            continue;
        }
        const auto feats = sampler(w.node);
        const auto split = best_split(range, feats, data, params.min_leaf);
        if (!split) {
            make_leaf();
            continue;
        }
        const auto col = data.column(static_cast<std::size_t>(split->feature));
        const auto mid = std::partition(range.begin(), range.end(), [&](const WeightedSample& s) { return col[s.row] <= split->threshold; });
        const std::size_t cut = w.begin + static_cast<std::size_t>(mid - range.begin());

        const auto left = static_cast<std::int32_t>(nodes.size());
        nodes.resize(nodes.size() + 2);
        TreeNode& n = nodes[w.node];
        n.feature = split->feature;
        n.threshold = split->threshold;
        n.left = left;
        n.right = left + 1;
        stack.push_back({static_cast<std::uint32_t>(left + 1), cut, w.end});
        stack.push_back({static_cast<std::uint32_t>(left), w.begin, cut});
    }
    return DecisionTree(std::move(nodes));
}

std::uint64_t tree_seed(std::uint64_t master, std::size_t tree_index) noexcept { return derive_seed(master, tree_index); }

std::vector<std::uint32_t> bootstrap_rows(std::size_t n, std::uint64_t seed)
{
    Rng rng(derive_seed(seed, 0));
    std::vector<std::uint32_t> rows(n);
    for (auto& r : rows)
        r = static_cast<std::uint32_t>(rng.below(n));
    return rows;
}

RandomForest train(const TrainingSet& data, const RFParams& params, std::string spec_fingerprint)
{
    params.validate(data.feature_count());
    data.validate(params.min_leaf);
    const int m = params.resolved_features_per_node(data.feature_count());

    std::vector<DecisionTree> trees(static_cast<std::size_t>(params.trees));
    const int count = params.trees;
#pragma omp parallel for schedule(dynamic, 1)
    for (int t = 0; t < count; ++t) {
        const auto seed = tree_seed(params.seed, static_cast<std::size_t>(t));
        const auto rows = bootstrap_rows(data.size(), seed);
        const NodeFeatureSampler sampler(derive_seed(seed, 1), data.feature_count(), m);
        trees[static_cast<std::size_t>(t)] = grow_tree(rows, data, params, sampler);
    }
    return RandomForest(std::move(trees), data.feature_count(), std::move(spec_fingerprint));
}

// ---------------------------------------------------------------------------

std::vector<PixelSample> sample_training_pixels(std::span<const LabelMask> masks, std::size_t n_total, std::uint64_t seed)
{
    std::vector<PixelSample> out;
    std::size_t pixels = 0;
    for (std::uint32_t t = 0; t < masks.size(); ++t) {
        const auto& m = masks[t];
        pixels += static_cast<std::size_t>(m.width()) * m.height();
        for (int y = 0; y < m.height(); ++y)
            for (int x = 0; x < m.width(); ++x)
                if (m.at(x, y))
                    out.push_back({t, x, y, true});
    }
    const std::size_t positives = out.size();
    if (n_total < positives)
        throw Error(ErrorCode::InvalidParams, "n_total (" + std::to_string(n_total) + ") is smaller than the positive pixel count (" +
                                                  std::to_string(positives) + ")");
    if (positives == 0 || n_total == positives)
        throw Error(ErrorCode::DegenerateTrainingSet, "training sample must contain both classes");
    std::size_t remaining = pixels - positives;
    std::size_t needed = n_total - positives;
    if (needed > remaining)
        throw Error(ErrorCode::InvalidParams, "n_total exceeds the number of available pixels");

    Rng rng(derive_seed(seed, 0x5a3b1e));
    for (std::uint32_t t = 0; t < masks.size() && needed > 0; ++t) {
        const auto& m = masks[t];
        for (int y = 0; y < m.height() && needed > 0; ++y)
            for (int x = 0; x < m.width() && needed > 0; ++x) {
                if (m.at(x, y))
                    continue;
                if (rng.below(remaining) < needed) {
                    out.push_back({t, x, y, false});
                    --needed;
                }
                --remaining;
            }
    }
    return out;
}

TrainingSet build_training_set(std::span<const ImageTile> tiles, std::span<const PixelSample> samples, const FeatureSpec& spec)
{
    spec.validate();
    const auto offsets = window_offsets(spec);
    const std::size_t M = offsets.size() * 6;
    TrainingSet ts(samples.size(), M);

    std::vector<std::vector<std::size_t>> by_tile(tiles.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].tile >= tiles.size())
            throw Error(ErrorCode::DimensionMismatch, "pixel sample references unknown tile");
        by_tile[samples[i].tile].push_back(i);
    }
    for (std::size_t t = 0; t < tiles.size(); ++t) {
        if (by_tile[t].empty())
            continue;
        const IntegralImage ii(tiles[t]);
        const auto& idx = by_tile[t];
        const auto n = static_cast<std::int64_t>(idx.size());
#pragma omp parallel
        {
            std::vector<double> fv(M);
#pragma omp for schedule(static)
            for (std::int64_t k = 0; k < n; ++k) {
                const auto& s = samples[idx[static_cast<std::size_t>(k)]];
                extract_pixel_features(ii, spec, offsets, s.x, s.y, fv);
                for (std::size_t f = 0; f < M; ++f)
                    ts.set_value(idx[static_cast<std::size_t>(k)], f, fv[f]);
                ts.set_label(idx[static_cast<std::size_t>(k)], s.positive);
            }
        }
    }
    return ts;
}

// ---------------------------------------------------------------------------

namespace {

void check_dims(const RandomForest& forest, std::size_t count)
{
    if (count != forest.feature_count())
        throw Error(ErrorCode::DimensionMismatch, "feature image has " + std::to_string(count) + " channels, forest expects " +
                                                      std::to_string(forest.feature_count()));
    if (forest.trees().empty())
        throw Error(ErrorCode::ModelMalformed, "forest has no trees");
}

} // namespace

ConfidenceMap predict_map(const RandomForest& forest, const FeatureImage& features)
{
    check_dims(forest, features.count());
    ConfidenceMap out(features.width(), features.height());
    const int h = features.height(), w = features.width();
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            out.at(x, y) = static_cast<float>(forest.predict_unchecked(features.at(x, y)));
    return out;
}

ConfidenceMap predict_tile(const RandomForest& forest, const ImageTile& tile, const FeatureSpec& spec)
{
    spec.validate();
    check_dims(forest, spec.feature_count());
    const IntegralImage ii(tile);
    const auto offsets = window_offsets(spec);
    const std::size_t M = offsets.size() * 6;
    ConfidenceMap out(tile.width(), tile.height());
    const int h = tile.height(), w = tile.width();
#pragma omp parallel
    {
        std::vector<double> row(static_cast<std::size_t>(w) * M);
#pragma omp for schedule(dynamic, 4)
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x)
                extract_pixel_features(ii, spec, offsets, x, y, std::span(row.data() + static_cast<std::size_t>(x) * M, M));
            for (int x = 0; x < w; ++x)
                out.at(x, y) = static_cast<float>(forest.predict_unchecked(std::span(row.data() + static_cast<std::size_t>(x) * M, M)));
        }
    }
    return out;
}

namespace serial {

ConfidenceMap predict_map(const RandomForest& forest, const FeatureImage& features)
{
    check_dims(forest, features.count());
    ConfidenceMap out(features.width(), features.height());
    for (int y = 0; y < features.height(); ++y)
        for (int x = 0; x < features.width(); ++x)
            out.at(x, y) = static_cast<float>(forest.predict_unchecked(features.at(x, y)));
    return out;
}

} // namespace serial

// ---------------------------------------------------------------------------
// Model file

std::string format_model(const RandomForest& forest)
{
    std::string body = "PVFOREST v1\n";
    body += "M " + std::to_string(forest.feature_count()) + "\n";
    body += "T " + std::to_string(forest.trees().size()) + "\n";
    body += "SPEC " + (forest.spec_fingerprint().empty() ? std::string("-") : forest.spec_fingerprint()) + "\n";
    for (std::size_t t = 0; t < forest.trees().size(); ++t) {
        const auto nodes = forest.trees()[t].nodes();
        body += "TREE " + std::to_string(t) + " " + std::to_string(nodes.size()) + "\n";
        for (const auto& n : nodes) {
            if (n.is_leaf())
                body += "L " + format_exact(n.probability) + " " + std::to_string(n.count) + "\n";
            else
                body += "I " + std::to_string(n.feature) + " " + format_exact(n.threshold) + " " + std::to_string(n.left) + " " +
                        std::to_string(n.right) + "\n";
        }
    }
    return body + "CHECKSUM " + hex64(fnv1a64(body)) + "\n";
}

namespace {

class LineCursor {
public:
    explicit LineCursor(const std::string& text) : text_(text) {}

    bool next(std::string_view& line)
    {
        if (pos_ >= text_.size())
            return false;
        const auto nl = text_.find('\n', pos_);
        const auto end = nl == std::string::npos ? text_.size() : nl;
        line = std::string_view(text_).substr(pos_, end - pos_);
        line_start_ = pos_;
        pos_ = nl == std::string::npos ? text_.size() : nl + 1;
        ++line_no_;
        return true;
    }
    std::size_t line_start() const noexcept { return line_start_; }
    int line_no() const noexcept { return line_no_; }

private:
    const std::string& text_;
    std::size_t pos_ = 0;
    std::size_t line_start_ = 0;
    int line_no_ = 0;
};

std::vector<std::string_view> tokens(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && line[i] == ' ')
            ++i;
        const auto start = i;
        while (i < line.size() && line[i] != ' ')
            ++i;
        if (i > start)
            out.push_back(line.substr(start, i - start));
    }
    return out;
}

template <typename T>
T parse_num(std::string_view s, int line_no)
{
    T v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw Error(ErrorCode::ModelMalformed, "model line " + std::to_string(line_no) + ": bad number '" + std::string(s) + "'");
    return v;
}

} // namespace

RandomForest parse_model(const std::string& text, int min_leaf)
{
    LineCursor cur(text);
    std::string_view line;
    auto expect = [&](std::string_view key, std::size_t ntok) {
        if (!cur.next(line))
            throw Error(ErrorCode::ModelMalformed, "model truncated before " + std::string(key));
        auto t = tokens(line);
        if (t.size() != ntok || t[0] != key)
            throw Error(ErrorCode::ModelMalformed, "model line " + std::to_string(cur.line_no()) + ": expected " + std::string(key));
        return t;
    };

    if (!cur.next(line))
        throw Error(ErrorCode::ModelMalformed, "empty model file");
    {
        const auto t = tokens(line);
        if (t.empty() || t[0] != "PVFOREST")
            throw Error(ErrorCode::ModelMalformed, "missing PVFOREST header");
        if (t.size() != 2 || t[1] != "v1")
            throw Error(ErrorCode::ModelVersion, "unsupported model version '" + (t.size() > 1 ? std::string(t[1]) : std::string()) + "'");
    }
    const auto M = parse_num<std::size_t>(expect("M", 2)[1], cur.line_no());
    const auto T = parse_num<std::size_t>(expect("T", 2)[1], cur.line_no());
    std::string spec(expect("SPEC", 2)[1]);
    if (spec == "-")
        spec.clear();

    std::vector<DecisionTree> trees;
    trees.reserve(T);
    for (std::size_t t = 0; t < T; ++t) {
        const auto head = expect("TREE", 3);
        if (parse_num<std::size_t>(head[1], cur.line_no()) != t)
            throw Error(ErrorCode::ModelMalformed, "tree index out of sequence");
        const auto count = parse_num<std::size_t>(head[2], cur.line_no());
        if (count == 0)
            throw Error(ErrorCode::ModelMalformed, "tree with no nodes");
        std::vector<TreeNode> nodes(count);
        for (std::size_t i = 0; i < count; ++i) {
            if (!cur.next(line))
                throw Error(ErrorCode::ModelMalformed, "model truncated inside tree " + std::to_string(t));
            const auto tk = tokens(line);
            const int ln = cur.line_no();
            TreeNode& n = nodes[i];
            if (tk.size() == 5 && tk[0] == "I") {
                n.feature = parse_num<std::int32_t>(tk[1], ln);
                n.threshold = parse_num<double>(tk[2], ln);
                n.left = parse_num<std::int32_t>(tk[3], ln);
                n.right = parse_num<std::int32_t>(tk[4], ln);
                if (n.feature < 0 || static_cast<std::size_t>(n.feature) >= M || !std::isfinite(n.threshold))
                    throw Error(ErrorCode::ModelMalformed, "model line " + std::to_string(ln) + ": bad decision node");
                // Children strictly after their parent rules out cycles.
                if (n.left <= static_cast<std::int32_t>(i) || n.right <= static_cast<std::int32_t>(i) ||
                    static_cast<std::size_t>(n.left) >= count || static_cast<std::size_t>(n.right) >= count || n.left == n.right)
                    throw Error(ErrorCode::ModelMalformed, "model line " + std::to_string(ln) + ": bad child index");
            } else if (tk.size() == 3 && tk[0] == "L") {
                n.probability = parse_num<double>(tk[1], ln);
                n.count = parse_num<std::uint32_t>(tk[2], ln);
                if (!(n.probability >= 0.0 && n.probability <= 1.0))
                    throw Error(ErrorCode::ModelMalformed, "model line " + std::to_string(ln) + ": leaf probability outside [0,1]");
                if (n.count < static_cast<std::uint32_t>(std::max(min_leaf, 1)))
                    throw Error(ErrorCode::ModelMalformed, "model line " + std::to_string(ln) + ": leaf count below min_leaf");
            } else {
                throw Error(ErrorCode::ModelMalformed, "model line " + std::to_string(ln) + ": malformed node record");
            }
        }
        trees.emplace_back(std::move(nodes));
    }

    if (!cur.next(line))
        throw Error(ErrorCode::ModelMalformed, "missing CHECKSUM line");
    const auto body_end = cur.line_start();
    const auto tk = tokens(line);
    if (tk.size() != 2 || tk[0] != "CHECKSUM")
        throw Error(ErrorCode::ModelMalformed, "expected CHECKSUM line");
    if (tk[1] != hex64(fnv1a64(std::string_view(text).substr(0, body_end))))
        throw Error(ErrorCode::ModelChecksum, "model checksum mismatch");
    while (cur.next(line))
        if (!line.empty())
            throw Error(ErrorCode::ModelMalformed, "trailing content after CHECKSUM");
    return RandomForest(std::move(trees), M, std::move(spec));
}

void save_model(const RandomForest& forest, const std::filesystem::path& path) { write_atomic(path, format_model(forest)); }

RandomForest load_model(const std::filesystem::path& path, int min_leaf) { return parse_model(read_text(path), min_leaf); }

} // namespace pv
