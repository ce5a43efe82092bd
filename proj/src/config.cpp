#include "pv/config.hpp"

#include "pv/error.hpp"
#include "pv/io.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

namespace pv {

void RunConfig::validate() const
{
    features.validate();
    forest.validate(features.feature_count());
    post.validate();
    if (jaccard.empty())
        throw Error(ErrorCode::Config, "jaccard list must not be empty");
    for (double j : jaccard)
        if (!(j > 0.0 && j <= 1.0))
            throw Error(ErrorCode::Config, "jaccard thresholds must lie in (0,1]");
    if (train_pixels < 2)
        throw Error(ErrorCode::Config, "train_pixels must be >= 2");
    if (scenes < 2 || scene_width < 16 || scene_height < 16)
        throw Error(ErrorCode::Config, "need >= 2 scenes of at least 16x16 pixels");
    if (!(prevalence > 0.0 && prevalence < 0.5))
        throw Error(ErrorCode::Config, "prevalence must lie in (0, 0.5)");
    if (panel_min_side < 3 || panel_max_side < panel_min_side)
        throw Error(ErrorCode::Config, "panel sides must satisfy 3 <= min <= max");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw Error(ErrorCode::Config, "train_fraction must lie in (0,1)");
}

namespace {

std::string trim(std::string s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
T number(const std::string& key, const std::string& v)
{
    T out{};
    const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || r.ec != std::errc{} || r.ptr != v.data() + v.size())
        throw Error(ErrorCode::Config, "config: bad value for " + key + ": '" + v + "'");
    if constexpr (std::is_floating_point_v<T>)
        if (!std::isfinite(out))
            throw Error(ErrorCode::Config, "config: non-finite value for " + key);
    return out;
}

template <typename T>
std::vector<T> list(const std::string& key, const std::string& v)
{
    std::vector<T> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(number<T>(key, trim(item)));
    if (out.empty())
        throw Error(ErrorCode::Config, "config: empty list for " + key);
    return out;
}

template <typename T>
std::string join(const std::vector<T>& xs)
{
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i)
            out += ",";
        if constexpr (std::is_floating_point_v<T>)
            out += format_exact(xs[i]);
        else
            out += std::to_string(xs[i]);
    }
    return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters()
{
    static const std::map<std::string, Setter> table = {
        {"trees", [](RunConfig& c, auto& k, auto& v) { c.forest.trees = number<int>(k, v); }},
        {"features_per_node", [](RunConfig& c, auto& k, auto& v) { c.forest.features_per_node = v == "auto" ? 0 : number<int>(k, v); }},
        {"min_leaf", [](RunConfig& c, auto& k, auto& v) { c.forest.min_leaf = number<int>(k, v); }},
        {"nms_side", [](RunConfig& c, auto& k, auto& v) { c.post.nms_side = number<int>(k, v); }},
        {"c0", [](RunConfig& c, auto& k, auto& v) { c.post.c0 = number<double>(k, v); }},
        {"otsu_side", [](RunConfig& c, auto& k, auto& v) { c.post.otsu_side = number<int>(k, v); }},
        {"close_radius", [](RunConfig& c, auto& k, auto& v) { c.post.close_radius = number<int>(k, v); }},
        {"dilate_radius", [](RunConfig& c, auto& k, auto& v) { c.post.dilate_radius = number<int>(k, v); }},
        {"window_side", [](RunConfig& c, auto& k, auto& v) { c.features.window_side = number<int>(k, v); }},
        {"ring_radii", [](RunConfig& c, auto& k, auto& v) { c.features.ring_radii = list<int>(k, v); }},
        {"manifest", [](RunConfig& c, auto&, auto& v) { c.manifest = v; }},
        {"out", [](RunConfig& c, auto&, auto& v) { c.out = v; }},
        {"seed", [](RunConfig& c, auto& k, auto& v) { c.seed = number<std::uint64_t>(k, v); }},
        {"sweep",
         [](RunConfig& c, auto& k, auto& v) {
             if (v == "exact")
                 c.sweep = SweepMode::Exact;
             else if (v == "quantized")
                 c.sweep = SweepMode::Quantized;
             else
                 throw Error(ErrorCode::Config, "config: " + k + " must be exact or quantized");
         }},
        {"jaccard", [](RunConfig& c, auto& k, auto& v) { c.jaccard = list<double>(k, v); }},
        {"train_pixels", [](RunConfig& c, auto& k, auto& v) { c.train_pixels = number<std::size_t>(k, v); }},
        {"scenes", [](RunConfig& c, auto& k, auto& v) { c.scenes = number<int>(k, v); }},
        {"scene_width", [](RunConfig& c, auto& k, auto& v) { c.scene_width = number<int>(k, v); }},
        {"scene_height", [](RunConfig& c, auto& k, auto& v) { c.scene_height = number<int>(k, v); }},
        {"prevalence", [](RunConfig& c, auto& k, auto& v) { c.prevalence = number<double>(k, v); }},
        {"panel_min_side", [](RunConfig& c, auto& k, auto& v) { c.panel_min_side = number<int>(k, v); }},
        {"panel_max_side", [](RunConfig& c, auto& k, auto& v) { c.panel_max_side = number<int>(k, v); }},
        {"train_fraction", [](RunConfig& c, auto& k, auto& v) { c.train_fraction = number<double>(k, v); }},
    };
    return table;
}

} // namespace

RunConfig parse_config(const std::string& text, RunConfig config)
{
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorCode::Config, "config line " + std::to_string(line_no) + ": expected key = value");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        const auto it = setters().find(key);
        if (it == setters().end())
            throw Error(ErrorCode::Config, "config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        it->second(config, key, value);
    }
    config.validate();
    return config;
}

RunConfig load_config(const std::filesystem::path& path)
{
    return parse_config(read_text(path));
}

std::string format_config(const RunConfig& c)
{
    std::string out;
    auto kv = [&](const char* k, const std::string& v) { out += std::string(k) + " = " + v + "\n"; };
    kv("trees", std::to_string(c.forest.trees));
    kv("features_per_node", c.forest.features_per_node == 0 ? "auto" : std::to_string(c.forest.features_per_node));
    kv("min_leaf", std::to_string(c.forest.min_leaf));
    kv("nms_side", std::to_string(c.post.nms_side));
    kv("c0", format_exact(c.post.c0));
    kv("otsu_side", std::to_string(c.post.otsu_side));
    kv("close_radius", std::to_string(c.post.close_radius));
    kv("dilate_radius", std::to_string(c.post.dilate_radius));
    kv("window_side", std::to_string(c.features.window_side));
    kv("ring_radii", join(c.features.ring_radii));
    if (!c.manifest.empty())
        kv("manifest", c.manifest.generic_string());
    kv("out", c.out.generic_string());
    kv("seed", std::to_string(c.seed));
    kv("sweep", c.sweep == SweepMode::Exact ? "exact" : "quantized");
    kv("jaccard", join(c.jaccard));
    kv("train_pixels", std::to_string(c.train_pixels));
    kv("scenes", std::to_string(c.scenes));
    kv("scene_width", std::to_string(c.scene_width));
    kv("scene_height", std::to_string(c.scene_height));
    kv("prevalence", format_exact(c.prevalence));
    kv("panel_min_side", std::to_string(c.panel_min_side));
    kv("panel_max_side", std::to_string(c.panel_max_side));
    kv("train_fraction", format_exact(c.train_fraction));
    return out;
}

std::uint64_t config_hash(const RunConfig& config) { return fnv1a64(format_config(config)); }

} // namespace pv
