#pragma once

#include "pv/config.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace pv {

/// Caps OpenMP workers; 0 leaves the runtime default. Output never depends on it.
void set_threads(int threads);

struct SynthOutput {
    std::filesystem::path manifest;
    std::vector<std::filesystem::path> tiles;
};

struct PredictOutput {
    std::vector<std::filesystem::path> maps;
};

struct DetectOutput {
    std::vector<std::filesystem::path> enhanced;
    std::filesystem::path detections;
};

struct ScoreSummary {
    double pixel_prevalence = 0;
    double pixel_best_precision_at_r80 = 0;   // max P with R >= 0.8, raw confidence maps
    double pixel_pp_best_precision_at_r80 = 0; // same, post-processed maps
    std::vector<double> jaccard;
    std::vector<double> object_max_recall;
    std::vector<double> object_best_recall_at_p70; // max R with P >= 0.7
    std::size_t detections = 0;
    std::size_t annotations = 0;
};

struct ScoreOutput {
    std::filesystem::path pixel_csv;
    std::filesystem::path pixel_pp_csv;
    std::vector<std::filesystem::path> object_csvs;
    ScoreSummary summary;
};

struct EvalOutput {
    std::filesystem::path manifest;
    std::filesystem::path model;
    PredictOutput predict;
    DetectOutput detect;
    ScoreOutput score;
    std::filesystem::path report;
};

// Stage layout under config.out:
//   scenes/          synthetic tiles, annotation CSVs, manifest.txt
//   model.pvf        forest
//   maps/<id>.cmap   raw confidence maps
//   enhanced/<id>.cmap, detections.csv
//   pr/pixel_pr.csv, pr/pixel_pr_pp.csv, pr/object_pr_J<j>.csv (+ .svg)
//   <stage>.run.json run manifests, report.json
SynthOutput cmd_synth(const RunConfig& config);
std::filesystem::path cmd_train(const RunConfig& config);
/// Without explicit tiles, predicts every test entry of config.manifest.
PredictOutput cmd_predict(const RunConfig& config, const std::filesystem::path& model, std::vector<std::filesystem::path> tiles = {});
DetectOutput cmd_detect(const RunConfig& config, const std::vector<std::filesystem::path>& maps);
/// maps/enhanced are matched to manifest test entries by file stem (tile_id).
ScoreOutput cmd_score(const RunConfig& config, const std::filesystem::path& detections, const std::vector<std::filesystem::path>& maps,
                      const std::vector<std::filesystem::path>& enhanced = {});
EvalOutput cmd_eval(const RunConfig& config);

} // namespace pv
