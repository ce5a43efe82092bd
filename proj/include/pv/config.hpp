#pragma once

#include "pv/detection.hpp"
#include "pv/features.hpp"
#include "pv/forest.hpp"
#include "pv/scoring.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace pv {

/// Every pipeline setting. Defaults are the detector's reference parameter
/// values plus desk-scale dataset settings.
struct RunConfig {
    RFParams forest;
    PPParams post;
    FeatureSpec features;

    std::filesystem::path manifest; // empty: cmd_eval synthesises a dataset
    std::filesystem::path out = "run";
    std::uint64_t seed = 20160101;
    SweepMode sweep = SweepMode::Exact;
    std::vector<double> jaccard{0.1, 0.3, 0.5, 0.7};
    std::size_t train_pixels = 200000;

    // synthetic dataset
    int scenes = 10;
    int scene_width = 512;
    int scene_height = 512;
    double prevalence = 0.005;
    int panel_min_side = 12;
    int panel_max_side = 24;
    double train_fraction = 2.0 / 3.0;

    void validate() const;
    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// `key = value` lines, '#' comments. Unknown keys are errors.
RunConfig parse_config(const std::string& text, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path);
/// Canonical text; parse_config(format_config(c)) == c.
std::string format_config(const RunConfig& config);
std::uint64_t config_hash(const RunConfig& config);

} // namespace pv
