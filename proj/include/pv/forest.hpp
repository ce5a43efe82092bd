#pragma once

#include "pv/confidence_map.hpp"
#include "pv/features.hpp"
#include "pv/imagery.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pv {

struct RFParams {
    int trees = 30;
    /// Features sampled per node; 0 selects floor(sqrt(M)).
    int features_per_node = 0;
    int min_leaf = 5;
    std::uint64_t seed = 0x5eed;

    int resolved_features_per_node(std::size_t feature_count) const;
    void validate(std::size_t feature_count) const;

    friend bool operator==(const RFParams&, const RFParams&) = default;
};

/// N x M matrix stored feature-major (column of feature f is contiguous).
class TrainingSet {
public:
    TrainingSet() = default;
    TrainingSet(std::size_t rows, std::size_t features) : rows_(rows), features_(features), cols_(rows * features), labels_(rows) {}

    /// Builds from row-major values.
    static TrainingSet from_rows(std::span<const double> row_major, std::span<const std::uint8_t> labels, std::size_t features);

    std::size_t size() const noexcept { return rows_; }
    std::size_t feature_count() const noexcept { return features_; }

    double value(std::size_t row, std::size_t feature) const noexcept { return cols_[feature * rows_ + row]; }
    void set_value(std::size_t row, std::size_t feature, double v) noexcept { cols_[feature * rows_ + row] = v; }
    std::span<const double> column(std::size_t feature) const noexcept { return {cols_.data() + feature * rows_, rows_}; }

    bool label(std::size_t row) const noexcept { return labels_[row] != 0; }
    void set_label(std::size_t row, bool v) noexcept { labels_[row] = v ? 1 : 0; }
    std::size_t positives() const noexcept;

    std::vector<double> row(std::size_t r) const;

    /// Throws DegenerateTrainingSet unless N >= 2*min_leaf and both classes occur.
    void validate(int min_leaf) const;

private:
    std::size_t rows_ = 0;
    std::size_t features_ = 0;
    std::vector<double> cols_;
    std::vector<std::uint8_t> labels_;
};

struct TreeNode {
    static constexpr std::int32_t kLeaf = -1;

    std::int32_t feature = kLeaf;
    double threshold = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double probability = 0; // leaves only
    std::uint32_t count = 0; // training samples reaching the leaf (bootstrap multiplicity)

    bool is_leaf() const noexcept { return feature == kLeaf; }
    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// Node 0 is the root; values <= threshold route left.
class DecisionTree {
public:
    DecisionTree() = default;
    explicit DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

    std::span<const TreeNode> nodes() const noexcept { return nodes_; }
    std::size_t leaf_index(std::span<const double> x) const noexcept
    {
        std::size_t i = 0;
        while (!nodes_[i].is_leaf())
            i = static_cast<std::size_t>(x[static_cast<std::size_t>(nodes_[i].feature)] <= nodes_[i].threshold ? nodes_[i].left
                                                                                                              : nodes_[i].right);
        return i;
    }
    double predict(std::span<const double> x) const noexcept { return nodes_[leaf_index(x)].probability; }
    std::size_t depth() const;

    friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

private:
    std::vector<TreeNode> nodes_;
};

class RandomForest {
public:
    RandomForest() = default;
    RandomForest(std::vector<DecisionTree> trees, std::size_t feature_count, std::string spec_fingerprint);

    std::span<const DecisionTree> trees() const noexcept { return trees_; }
    std::size_t feature_count() const noexcept { return feature_count_; }
    const std::string& spec_fingerprint() const noexcept { return fingerprint_; }

    /// Mean of the per-tree leaf probabilities. Throws DimensionMismatch.
    double predict(std::span<const double> x) const;
    double predict_unchecked(std::span<const double> x) const noexcept
    {
        double s = 0;
        for (const auto& t : trees_)
            s += t.predict(x);
        return s / static_cast<double>(trees_.size());
    }

    friend bool operator==(const RandomForest&, const RandomForest&) = default;

private:
    std::vector<DecisionTree> trees_;
    std::size_t feature_count_ = 0;
    std::string fingerprint_;
};

double gini(std::uint64_t n_pos, std::uint64_t n_neg);

/// One distinct training row with its bootstrap multiplicity.
struct WeightedSample {
    std::uint32_t row = 0;
    std::uint32_t weight = 1;
};

struct Split {
    int feature = -1;
    double threshold = 0;
    double decrease = 0; // weighted Gini decrease, informational
};

/// Best Gini split over `features` (midpoint candidates, both children
/// >= min_leaf, strictly positive decrease). Ties: lowest feature, then
/// lowest threshold. Split choice is made with exact integer arithmetic.
std::optional<Split> best_split(std::span<const WeightedSample> samples, std::span<const int> features, const TrainingSet& data,
                                int min_leaf);

/// Deterministic per-node feature subsets: m of M without replacement,
/// returned ascending, drawn from a stream keyed on (seed, node index).
class NodeFeatureSampler {
public:
    NodeFeatureSampler(std::uint64_t seed, std::size_t feature_count, int per_node)
        : seed_(seed), feature_count_(feature_count), per_node_(per_node)
    {
    }
    std::vector<int> operator()(std::uint32_t node_index) const;

private:
    std::uint64_t seed_;
    std::size_t feature_count_;
    int per_node_;
};

DecisionTree grow_tree(std::span<const std::uint32_t> bootstrap_rows, const TrainingSet& data, const RFParams& params,
                       const NodeFeatureSampler& sampler);

/// Seed of tree t: derive_seed(master, t). Bootstrap stream: derive_seed(tree, 0);
/// node sampler root: derive_seed(tree, 1).
std::uint64_t tree_seed(std::uint64_t master, std::size_t tree_index) noexcept;
std::vector<std::uint32_t> bootstrap_rows(std::size_t n, std::uint64_t tree_seed);

/// Trees are grown in parallel; the result does not depend on thread count.
RandomForest train(const TrainingSet& data, const RFParams& params, std::string spec_fingerprint = {});

// ---------------------------------------------------------------------------
// Training-pixel sampling

struct PixelSample {
    std::uint32_t tile = 0;
    std::int32_t x = 0;
    std::int32_t y = 0;
    bool positive = false;
    friend bool operator==(const PixelSample&, const PixelSample&) = default;
};

/// Every positive pixel once, then uniform-without-replacement negatives
/// (selection sampling in tile/raster order) up to n_total.
std::vector<PixelSample> sample_training_pixels(std::span<const LabelMask> masks, std::size_t n_total, std::uint64_t seed);

TrainingSet build_training_set(std::span<const ImageTile> tiles, std::span<const PixelSample> samples, const FeatureSpec& spec);

// ---------------------------------------------------------------------------
// Prediction kernels

ConfidenceMap predict_map(const RandomForest& forest, const FeatureImage& features);

/// Streams features row by row; never materialises the whole FeatureImage.
ConfidenceMap predict_tile(const RandomForest& forest, const ImageTile& tile, const FeatureSpec& spec);

namespace serial {
ConfidenceMap predict_map(const RandomForest& forest, const FeatureImage& features);
}

// ---------------------------------------------------------------------------
// Model file

std::string format_model(const RandomForest& forest);
/// `min_leaf` is the smallest leaf count accepted (leaf counts are validated against it).
RandomForest parse_model(const std::string& text, int min_leaf = 1);
void save_model(const RandomForest& forest, const std::filesystem::path& path);
RandomForest load_model(const std::filesystem::path& path, int min_leaf = 1);

} // namespace pv
