#include "fgradar/run_config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "fgradar/errors.hpp"

namespace fgradar {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) throw ConfigError("config: " + key + " expects a number, got '" + v + "'");
    return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size())
        throw ConfigError("config: " + key + " expects a non-negative integer, got '" + v + "'");
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "no") return false;
    throw ConfigError("config: " + key + " expects true/false, got '" + v + "'");
}

}  // namespace

std::vector<Vec3> RunConfig::channel_offsets() const {
    const double spacing = channel_spacing > 0.0 ? channel_spacing : 0.5 * radar.wavelength();
    return linear_channel_offsets(n_channels, spacing);
}

GridSpec RunConfig::grid_spec() const { return {aperture, channel_offsets(), radar}; }

void RunConfig::validate() const {
    radar.validate();
    if (aperture.n_x == 0 || aperture.n_y == 0) throw ConfigError("config: aperture must have n_x, n_y >= 1");
    if (!(aperture.pitch_x > 0.0 && aperture.pitch_y > 0.0)) throw ConfigError("config: aperture pitch must be positive");
    if (!(aperture.frame_period > 0.0)) throw ConfigError("config: frame_period must be positive");
    if (n_channels == 0) throw ConfigError("config: n_channels must be >= 1");
    if (!(z0 > 0.0)) throw ConfigError("config: z0 must be positive");
    if (!(noise_sigma >= 0.0)) throw ConfigError("config: noise_sigma must be >= 0");
    if (zero_pad == 0) throw ConfigError("config: zero_pad must be >= 1");
    if (threads == 0) throw ConfigError("config: threads must be >= 1");
}

RunConfig RunConfig::parse(const std::string& text, const std::string& origin) {
    RunConfig cfg;
    bool duration_set = false;
    using Setter = std::function<void(const std::string&, const std::string&)>;
    const std::map<std::string, Setter> setters = {
        {"f0", [&](auto& k, auto& v) { cfg.radar.f0 = to_double(k, v); }},
        {"bandwidth", [&](auto& k, auto& v) { cfg.radar.bandwidth = to_double(k, v); }},
        {"chirp_duration", [&](auto& k, auto& v) { cfg.radar.duration = to_double(k, v); duration_set = true; }},
        {"fs", [&](auto& k, auto& v) { cfg.radar.fs = to_double(k, v); }},
        {"n_samples", [&](auto& k, auto& v) { cfg.radar.n_samples = to_uint(k, v); }},
        {"c", [&](auto& k, auto& v) { cfg.radar.c = to_double(k, v); }},
        {"n_x", [&](auto& k, auto& v) { cfg.aperture.n_x = to_uint(k, v); }},
        {"n_y", [&](auto& k, auto& v) { cfg.aperture.n_y = to_uint(k, v); }},
        {"pitch_x", [&](auto& k, auto& v) { cfg.aperture.pitch_x = to_double(k, v); }},
        {"pitch_y", [&](auto& k, auto& v) { cfg.aperture.pitch_y = to_double(k, v); }},
        {"start_x", [&](auto& k, auto& v) { cfg.aperture.start.x = to_double(k, v); }},
        {"start_y", [&](auto& k, auto& v) { cfg.aperture.start.y = to_double(k, v); }},
        {"start_z", [&](auto& k, auto& v) { cfg.aperture.start.z = to_double(k, v); }},
        {"frame_period", [&](auto& k, auto& v) { cfg.aperture.frame_period = to_double(k, v); }},
        {"t_start", [&](auto& k, auto& v) { cfg.aperture.t_start = to_double(k, v); }},
        {"n_channels", [&](auto& k, auto& v) { cfg.n_channels = to_uint(k, v); }},
        {"channel_spacing", [&](auto& k, auto& v) { cfg.channel_spacing = to_double(k, v); }},
        {"z0", [&](auto& k, auto& v) { cfg.z0 = to_double(k, v); }},
        {"scene", [&](auto&, auto& v) { cfg.scene = v; }},
        {"noise_sigma", [&](auto& k, auto& v) { cfg.noise_sigma = to_double(k, v); }},
        {"seed", [&](auto& k, auto& v) { cfg.seed = to_uint(k, v); }},
        {"zero_pad", [&](auto& k, auto& v) { cfg.zero_pad = to_uint(k, v); }},
        {"sg_short", [&](auto& k, auto& v) { cfg.sg.short_window = to_uint(k, v); }},
        {"sg_long", [&](auto& k, auto& v) { cfg.sg.long_window = to_uint(k, v); }},
        {"sg_order", [&](auto& k, auto& v) { cfg.sg.order = to_uint(k, v); }},
        {"threads", [&](auto& k, auto& v) { cfg.threads = static_cast<unsigned>(to_uint(k, v)); }},
        {"pad_x", [&](auto& k, auto& v) { cfg.pad_x = to_uint(k, v); }},
        {"pad_y", [&](auto& k, auto& v) { cfg.pad_y = to_uint(k, v); }},
        {"hann", [&](auto& k, auto& v) { cfg.hann = to_bool(k, v); }},
    };

    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = setters.find(key);
        if (it == setters.end()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        it->second(key, value);
    }
    if (!duration_set) cfg.radar.duration = static_cast<double>(cfg.radar.n_samples) / cfg.radar.fs;
    return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingInputError("cannot open config file: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    RunConfig cfg = parse(ss.str(), path.string());
    // Relative scene paths resolve against the config file's directory.
    if (!cfg.scene.empty() && cfg.scene.is_relative()) cfg.scene = path.parent_path() / cfg.scene;
    return cfg;
}

}  // namespace fgradar
