#include "pv/pipeline.hpp"

#include "pv/error.hpp"
#include "pv/io.hpp"
#include "pv/rng.hpp"
#include "pv/synth.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pv {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

void set_threads(int threads)
{
#ifdef _OPENMP
    if (threads > 0)
        omp_set_num_threads(threads);
#else
    (void)threads;
#endif
}

namespace {

// Stream keys for seeds derived from the run seed.
constexpr std::uint64_t kSceneStream = 1000;
constexpr std::uint64_t kSampleStream = 1;
constexpr std::uint64_t kForestStream = 2;

void require_file(const fs::path& p)
{
    if (!fs::is_regular_file(p))
        throw Error(ErrorCode::Io, "missing input: " + p.string());
}

std::string digest(const fs::path& p) { return hex64(fnv1a64(read_bytes(p))); }

void write_run_manifest(const RunConfig& config, const std::string& stage, const std::vector<fs::path>& inputs,
                        const std::vector<fs::path>& outputs)
{
    json j;
    j["stage"] = stage;
    j["config_hash"] = hex64(config_hash(config));
    j["seed"] = config.seed;
    j["config"] = format_config(config);
    json in = json::object();
    for (const auto& p : inputs)
        in[p.generic_string()] = digest(p);
    j["inputs"] = in;
    json out = json::object();
    for (const auto& p : outputs)
        out[p.generic_string()] = digest(p);
    j["outputs"] = out;
    write_atomic(config.out / (stage + ".run.json"), j.dump(2) + "\n");
}

std::string jaccard_tag(double j)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", j);
    return buf;
}

DatasetManifest require_manifest(const RunConfig& config)
{
    if (config.manifest.empty())
        throw Error(ErrorCode::Config, "no manifest given (set manifest = ... or --manifest)");
    require_file(config.manifest);
    return load_manifest(config.manifest);
}

} // namespace

SynthOutput cmd_synth(const RunConfig& config)
{
    config.validate();
    const fs::path dir = config.out / "scenes";
    SynthOutput result;
    DatasetManifest manifest;
    const int n_train = std::clamp(static_cast<int>(std::lround(config.scenes * config.train_fraction)), 1, config.scenes - 1);
    std::vector<fs::path> outputs;
    for (int i = 0; i < config.scenes; ++i) {
        char id[32];
        std::snprintf(id, sizeof id, "scene_%03d", i);
        SceneParams p;
        p.width = config.scene_width;
        p.height = config.scene_height;
        p.target_prevalence = config.prevalence;
        p.panel_min_side = config.panel_min_side;
        p.panel_max_side = config.panel_max_side;
        p.seed = derive_seed(config.seed, kSceneStream + static_cast<std::uint64_t>(i));
        const auto scene = generate_scene(p, id);

        const auto image = dir / (std::string(id) + ".ppm");
        const auto ann = dir / (std::string(id) + ".csv");
        save_tile(scene.tile, image);
        save_annotations(scene.annotations, ann);
        manifest.entries.push_back({i < n_train ? Role::Train : Role::Test, image, ann, id});
        result.tiles.push_back(image);
        outputs.push_back(image);
        outputs.push_back(ann);
    }
    result.manifest = dir / "manifest.txt";
    save_manifest(manifest, result.manifest);
    outputs.push_back(result.manifest);
    write_run_manifest(config, "synth", {}, outputs);
    return result;
}

fs::path cmd_train(const RunConfig& config)
{
    config.validate();
    const auto manifest = require_manifest(config);
    const auto train_entries = manifest.with_role(Role::Train);
    if (train_entries.empty())
        throw Error(ErrorCode::ManifestContract, "manifest has no train entries");

    std::vector<ImageTile> tiles;
    std::vector<LabelMask> masks;
    std::vector<fs::path> inputs{config.manifest};
    std::size_t pixels = 0;
    for (const auto* e : train_entries) {
        require_file(e->image);
        require_file(e->annotations);
        tiles.push_back(load_tile(e->image));
        const auto ann = load_entry_annotations(manifest, *e);
        masks.push_back(rasterize(ann, tiles.back().width(), tiles.back().height()));
        pixels += static_cast<std::size_t>(tiles.back().width()) * tiles.back().height();
        inputs.push_back(e->image);
        inputs.push_back(e->annotations);
    }
    const auto samples = sample_training_pixels(masks, std::min(config.train_pixels, pixels), derive_seed(config.seed, kSampleStream));
    const auto data = build_training_set(tiles, samples, config.features);

    RFParams params = config.forest;
    params.seed = derive_seed(config.seed, kForestStream);
    const auto forest = pv::train(data, params, config.features.fingerprint());

    const auto model = config.out / "model.pvf";
    save_model(forest, model);
    write_run_manifest(config, "train", inputs, {model});
    return model;
}

PredictOutput cmd_predict(const RunConfig& config, const fs::path& model, std::vector<fs::path> tiles)
{
    config.validate();
    require_file(model);
    const auto forest = load_model(model, config.forest.min_leaf);
    if (!forest.spec_fingerprint().empty() && forest.spec_fingerprint() != config.features.fingerprint())
        throw Error(ErrorCode::DimensionMismatch,
                    "model was trained with features " + forest.spec_fingerprint() + ", config uses " + config.features.fingerprint());
    if (tiles.empty()) {
        const auto manifest = require_manifest(config);
        for (const auto* e : manifest.with_role(Role::Test))
            tiles.push_back(e->image);
        if (tiles.empty())
            throw Error(ErrorCode::ManifestContract, "manifest has no test entries");
    }

    PredictOutput out;
    std::vector<fs::path> inputs{model};
    for (const auto& path : tiles) {
        require_file(path);
        const auto tile = load_tile(path);
        const auto map = predict_tile(forest, tile, config.features);
        const auto dst = config.out / "maps" / (tile.tile_id() + ".cmap");
        save_cmap(map, dst);
        out.maps.push_back(dst);
        inputs.push_back(path);
    }
    write_run_manifest(config, "predict", inputs, out.maps);
    return out;
}

DetectOutput cmd_detect(const RunConfig& config, const std::vector<fs::path>& maps)
{
    config.validate();
    if (maps.empty())
        throw Error(ErrorCode::Config, "detect needs at least one confidence map");
    DetectOutput out;
    std::vector<DetectionObject> objects;
    for (const auto& path : maps) {
        require_file(path);
        const auto map = load_cmap(path);
        const auto enhanced = postprocess(map, config.post);
        const auto id = path.stem().string();
        const auto dst = config.out / "enhanced" / (id + ".cmap");
        save_cmap(enhanced, dst);
        out.enhanced.push_back(dst);
        for (auto& o : extract_objects(enhanced, id))
            objects.push_back(std::move(o));
    }
    out.detections = config.out / "detections.csv";
    write_atomic(out.detections, format_detections(objects));
    auto outputs = out.enhanced;
    outputs.push_back(out.detections);
    write_run_manifest(config, "detect", maps, outputs);
    return out;
}

ScoreOutput cmd_score(const RunConfig& config, const fs::path& detections_path, const std::vector<fs::path>& maps,
                      const std::vector<fs::path>& enhanced)
{
    config.validate();
    const auto manifest = require_manifest(config);
    require_file(detections_path);
    std::map<std::string, const ManifestEntry*> by_id;
    for (const auto& e : manifest.entries)
        by_id[e.tile_id] = &e;

    std::vector<ConfidenceMap> conf, pp;
    std::vector<LabelMask> masks;
    std::vector<TruthObject> truth;
    std::vector<std::string> ids;
    std::vector<fs::path> inputs{config.manifest, detections_path};
    for (std::size_t i = 0; i < maps.size(); ++i) {
        require_file(maps[i]);
        const auto id = maps[i].stem().string();
        const auto it = by_id.find(id);
        if (it == by_id.end())
            throw Error(ErrorCode::ManifestContract, "map " + maps[i].string() + " matches no manifest tile");
        conf.push_back(load_cmap(maps[i]));
        const auto tile = load_tile(it->second->image);
        if (tile.width() != conf.back().width() || tile.height() != conf.back().height())
            throw Error(ErrorCode::DimensionMismatch, "map " + id + " does not match its tile's dimensions");
        const auto ann = load_entry_annotations(manifest, *it->second);
        masks.push_back(rasterize(ann, tile.width(), tile.height()));
        for (auto& t : truth_objects(ann, tile.width(), tile.height()))
            truth.push_back(std::move(t));
        ids.push_back(id);
        inputs.push_back(maps[i]);
        inputs.push_back(it->second->annotations);
    }
    for (const auto& path : enhanced) {
        require_file(path);
        pp.push_back(load_cmap(path));
        inputs.push_back(path);
    }
    if (!pp.empty() && pp.size() != conf.size())
        throw Error(ErrorCode::DimensionMismatch, "need one enhanced map per confidence map");

    std::vector<DetectionObject> detections;
    for (auto& d : parse_detections(read_text(detections_path)))
        if (std::find(ids.begin(), ids.end(), d.tile_id) != ids.end())
            detections.push_back(std::move(d));

    ScoreOutput out;
    std::vector<fs::path> outputs;
    const fs::path dir = config.out / "pr";
    const auto pixel = pixel_pr(conf, masks, config.sweep);
    out.pixel_csv = dir / "pixel_pr.csv";
    write_atomic(out.pixel_csv, format_pr_csv(pixel));
    outputs.push_back(out.pixel_csv);
    out.summary.pixel_prevalence = pixel.prevalence;
    out.summary.pixel_best_precision_at_r80 = pixel.precision_at_recall(0.8);

    std::vector<PRCurve> pixel_curves{pixel};
    std::vector<std::string> pixel_labels{"RF"};
    if (!pp.empty()) {
        const auto pixel_pp = pixel_pr(pp, masks, config.sweep);
        out.pixel_pp_csv = dir / "pixel_pr_pp.csv";
        write_atomic(out.pixel_pp_csv, format_pr_csv(pixel_pp));
        outputs.push_back(out.pixel_pp_csv);
        out.summary.pixel_pp_best_precision_at_r80 = pixel_pp.precision_at_recall(0.8);
        pixel_curves.push_back(pixel_pp);
        pixel_labels.push_back("RF+PP");
    }
    write_atomic(dir / "pixel_pr.svg", format_pr_svg(pixel_curves, pixel_labels, "Pixel-wise PR"));

    std::vector<PRCurve> object_curves;
    std::vector<std::string> object_labels;
    out.summary.detections = detections.size();
    out.summary.annotations = truth.size();
    for (double j : config.jaccard) {
        const auto curve = object_pr(detections, truth, j);
        const auto path = dir / ("object_pr_J" + jaccard_tag(j) + ".csv");
        write_atomic(path, format_pr_csv(curve));
        out.object_csvs.push_back(path);
        outputs.push_back(path);
        out.summary.jaccard.push_back(j);
        out.summary.object_max_recall.push_back(curve.max_recall());
        double best = 0;
        for (const auto& p : curve.points)
            if (p.precision >= 0.7)
                best = std::max(best, p.recall);
        out.summary.object_best_recall_at_p70.push_back(best);
        object_curves.push_back(curve);
        object_labels.push_back("J = " + jaccard_tag(j));
    }
    write_atomic(dir / "object_pr.svg", format_pr_svg(object_curves, object_labels, "Object-wise PR"));
    write_run_manifest(config, "score", inputs, outputs);
    return out;
}

EvalOutput cmd_eval(const RunConfig& input)
{
    input.validate();
    RunConfig config = input;
    EvalOutput out;
    if (config.manifest.empty())
        config.manifest = cmd_synth(config).manifest;
    out.manifest = config.manifest;
    out.model = cmd_train(config);
    out.predict = cmd_predict(config, out.model);
    out.detect = cmd_detect(config, out.predict.maps);
    out.score = cmd_score(config, out.detect.detections, out.predict.maps, out.detect.enhanced);

    const auto& s = out.score.summary;
    json report;
    report["config_hash"] = hex64(config_hash(config));
    report["seed"] = config.seed;
    report["model_digest"] = digest(out.model);
    report["annotations"] = s.annotations;
    report["detections"] = s.detections;
    report["pixel"] = {{"prevalence", s.pixel_prevalence},
                       {"best_precision_at_recall_0.8", s.pixel_best_precision_at_r80},
                       {"pp_best_precision_at_recall_0.8", s.pixel_pp_best_precision_at_r80}};
    json objects = json::array();
    for (std::size_t i = 0; i < s.jaccard.size(); ++i)
        objects.push_back({{"jaccard", s.jaccard[i]},
                           {"max_recall", s.object_max_recall[i]},
                           {"best_recall_at_precision_0.7", s.object_best_recall_at_p70[i]}});
    report["objects"] = objects;
    out.report = config.out / "report.json";
    write_atomic(out.report, report.dump(2) + "\n");
    return out;
}

} // namespace pv
