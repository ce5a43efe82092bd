// pvdetect: command-line surface of the PV detection pipeline.
//
//   pvdetect synth   --config c.cfg --out dir
//   pvdetect train   --config c.cfg --manifest m.txt --out dir
//   pvdetect predict --config c.cfg --model dir/model.pvf [--manifest m.txt | tiles...]
//   pvdetect detect  --config c.cfg --out dir maps...
//   pvdetect score   --config c.cfg --manifest m.txt --detections d.csv --maps ... [--enhanced ...]
//   pvdetect eval    --config c.cfg --out dir
//
// Exit codes: 0 success, 2 config error, 3 I/O error, 4 data-contract violation.

#include "pv/error.hpp"
#include "pv/pipeline.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <iostream>

namespace {

enum Exit { kOk = 0, kConfig = 2, kIo = 3, kData = 4 };

int exit_code(const pv::Error& e)
{
    switch (pv::category(e.code())) {
    case pv::ErrorCategory::Config: return kConfig;
    case pv::ErrorCategory::Io: return kIo;
    default: return kData;
    }
}

struct Common {
    std::string config;
    std::string out;
    std::string manifest;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
};

void add_common(CLI::App* cmd, Common& c, bool manifest)
{
    cmd->add_option("--config", c.config, "key = value configuration file");
    cmd->add_option("--out", c.out, "output directory (overrides config)");
    cmd->add_option("--seed", c.seed, "master seed (overrides config)")->each([&c](const std::string&) { c.seed_set = true; });
    cmd->add_option("--threads", c.threads, "cap on worker threads")->check(CLI::NonNegativeNumber);
    if (manifest)
        cmd->add_option("--manifest", c.manifest, "dataset manifest (overrides config)");
}

pv::RunConfig resolve(const Common& c)
{
    pv::RunConfig cfg = c.config.empty() ? pv::RunConfig{} : pv::load_config(c.config);
    if (!c.out.empty())
        cfg.out = c.out;
    if (!c.manifest.empty())
        cfg.manifest = c.manifest;
    if (c.seed_set)
        cfg.seed = c.seed;
    cfg.validate();
    pv::set_threads(c.threads);
    return cfg;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Rooftop PV array detection pipeline"};
    app.require_subcommand(1);

    Common synth_c, train_c, predict_c, detect_c, score_c, eval_c;
    std::string model;
    std::vector<std::string> tiles, maps, enhanced;
    std::string detections;

    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    add_common(synth, synth_c, false);

    auto* train = app.add_subcommand("train", "train the forest on manifest train entries");
    add_common(train, train_c, true);

    auto* predict = app.add_subcommand("predict", "write confidence maps");
    add_common(predict, predict_c, true);
    predict->add_option("--model", model, "model file")->required();
    predict->add_option("tiles", tiles, "P6 tiles (default: manifest test entries)");

    auto* detect = app.add_subcommand("detect", "post-process maps and extract objects");
    add_common(detect, detect_c, false);
    detect->add_option("maps", maps, "CMAP confidence maps")->required();

    auto* score = app.add_subcommand("score", "pixel and object PR curves");
    add_common(score, score_c, true);
    score->add_option("--detections", detections, "detections CSV")->required();
    score->add_option("--maps", maps, "raw CMAP confidence maps")->required();
    score->add_option("--enhanced", enhanced, "post-processed CMAP maps");

    auto* eval = app.add_subcommand("eval", "synthesise/ingest, train, predict, detect and score");
    add_common(eval, eval_c, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    const auto t0 = std::chrono::steady_clock::now();
    try {
        auto paths = [](const std::vector<std::string>& xs) { return std::vector<std::filesystem::path>(xs.begin(), xs.end()); };
        if (*synth) {
            const auto out = pv::cmd_synth(resolve(synth_c));
            std::cout << out.manifest.string() << "\n";
        } else if (*train) {
            std::cout << pv::cmd_train(resolve(train_c)).string() << "\n";
        } else if (*predict) {
            for (const auto& p : pv::cmd_predict(resolve(predict_c), model, paths(tiles)).maps)
                std::cout << p.string() << "\n";
        } else if (*detect) {
            std::cout << pv::cmd_detect(resolve(detect_c), paths(maps)).detections.string() << "\n";
        } else if (*score) {
            const auto out = pv::cmd_score(resolve(score_c), detections, paths(maps), paths(enhanced));
            std::cout << out.pixel_csv.string() << "\n";
            for (const auto& p : out.object_csvs)
                std::cout << p.string() << "\n";
        } else if (*eval) {
            const auto out = pv::cmd_eval(resolve(eval_c));
            std::cout << out.report.string() << "\n";
        }
    } catch (const pv::Error& e) {
        std::cerr << "pvdetect: " << e.what() << "\n";
        return exit_code(e);
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "pvdetect: " << e.what() << "\n";
        return kIo;
    }
    const auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cerr << "pvdetect: done in " << secs << " s\n";
    return kOk;
}
