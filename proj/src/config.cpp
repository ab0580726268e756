#include "qclust/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "qclust/errors.hpp"
#include "qclust/text.hpp"

namespace qclust::harness {

namespace {

std::size_t to_size(const std::string& key, const std::string& value) {
    const auto v = text::parse_int(value);
    if (!v || *v < 0) throw ConfigError(key + ": expected a non-negative integer, got '" + value + "'");
    return static_cast<std::size_t>(*v);
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
    const auto t = text::trim(value);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
        throw ConfigError(key + ": expected an unsigned integer, got '" + value + "'");
    }
    return v;
}

double to_double(const std::string& key, const std::string& value) {
    const auto v = text::parse_double(value);
    if (!v || !std::isfinite(*v)) throw ConfigError(key + ": expected a number, got '" + value + "'");
    return *v;
}

std::string join_range(const std::vector<std::size_t>& r) {
    std::string out;
    for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + std::to_string(r[i]);
    return out;
}

}  // namespace

std::string to_string(Approach a) {
    switch (a) {
        case Approach::Classical: return "classical";
        case Approach::Hybrid: return "hybrid";
        case Approach::Qnn: return "qnn";
    }
    return "?";
}

std::vector<Approach> parse_approaches(const std::string& spec) {
    std::vector<Approach> out;
    auto add = [&](Approach a) {
        if (std::find(out.begin(), out.end(), a) == out.end()) out.push_back(a);
    };
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const std::string name(text::trim(item));
        if (name == "all") {
            add(Approach::Classical);
            add(Approach::Hybrid);
            add(Approach::Qnn);
        } else if (name == "classical") {
            add(Approach::Classical);
        } else if (name == "hybrid") {
            add(Approach::Hybrid);
        } else if (name == "qnn") {
            add(Approach::Qnn);
        } else {
            throw ConfigError("unknown approach '" + name + "' (classical|hybrid|qnn|all)");
        }
    }
    if (out.empty()) throw ConfigError("no approach selected");
    std::sort(out.begin(), out.end());
    return out;
}

bool ExperimentConfig::has(Approach a) const {
    return std::find(approaches.begin(), approaches.end(), a) != approaches.end();
}

void ExperimentConfig::validate() const {
    if (k_range.empty() || depth_range.empty() || prototype_range.empty()) {
        throw ConfigError("k_range, depth_range and prototype_range must be non-empty");
    }
    if (seeds < 1) throw ConfigError("seeds must be >= 1");
    if (*std::min_element(k_range.begin(), k_range.end()) < 2) throw ConfigError("every K must be >= 2");
    if (*std::min_element(prototype_range.begin(), prototype_range.end()) < 1) {
        throw ConfigError("prototype counts must be >= 1");
    }
    if (approaches.empty()) throw ConfigError("no approach selected");
    if (synth.kind != "blobs" && synth.kind != "rings") throw ConfigError("synth_kind must be blobs or rings");
    if (synth.clusters < 1) throw ConfigError("synth_clusters must be >= 1");
    if (!(temperature > 0.0)) throw ConfigError("temperature must be positive");
    if (!(smoothing >= 0.0 && smoothing < 1.0)) throw ConfigError("smoothing must lie in [0, 1)");
    qfm::MapperConfig probe = mapper;
    probe.d_in = std::max<std::size_t>(probe.d_in, 1);
    probe.validate();
    train.validate();
}

std::vector<std::size_t> parse_range(const std::string& spec) {
    const std::string s(text::trim(spec));
    std::vector<std::size_t> out;
    if (const auto dots = s.find(".."); dots != std::string::npos) {
        const std::size_t lo = to_size("range", s.substr(0, dots));
        const std::size_t hi = to_size("range", s.substr(dots + 2));
        if (hi < lo) throw ConfigError("range '" + s + "' is empty");
        for (std::size_t v = lo; v <= hi; ++v) out.push_back(v);
        return out;
    }
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_size("range", item));
    if (out.empty()) throw ConfigError("empty range");
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& value) {
    if (key == "input") c.input = value;
    else if (key == "synth_kind") c.synth.kind = value;
    else if (key == "synth_samples") c.synth.samples = to_size(key, value);
    else if (key == "synth_clusters") c.synth.clusters = to_size(key, value);
    else if (key == "synth_spread") c.synth.spread = to_double(key, value);
    else if (key == "synth_seed") c.synth.seed = to_u64(key, value);
    else if (key == "k_range") c.k_range = parse_range(value);
    else if (key == "depth_range") c.depth_range = parse_range(value);
    else if (key == "prototype_range") c.prototype_range = parse_range(value);
    else if (key == "seeds") c.seeds = to_size(key, value);
    else if (key == "seed") c.master_seed = to_u64(key, value);
    else if (key == "approaches") c.approaches = parse_approaches(value);
    else if (key == "out") c.output_dir = value;
    else if (key == "workers") c.workers = to_size(key, value);
    else if (key == "d_out") c.mapper.d_out = to_size(key, value);
    else if (key == "weight_scale") c.mapper.scale = to_double(key, value);
    else if (key == "epochs") c.train.epochs = to_size(key, value);
    else if (key == "batch_size") c.train.batch_size = to_size(key, value);
    else if (key == "learning_rate") c.train.learning_rate = to_double(key, value);
    else if (key == "clip_norm") c.train.clip_norm = to_double(key, value);
    else if (key == "augment_sigma") c.train.augment_sigma = to_double(key, value);
    else if (key == "kl_direction") c.train.kl_direction = swav::parse_kl_direction(value);
    else if (key == "adam_beta1") c.train.beta1 = to_double(key, value);
    else if (key == "adam_beta2") c.train.beta2 = to_double(key, value);
    else if (key == "adam_eps") c.train.adam_eps = to_double(key, value);
    else if (key == "temperature") c.temperature = to_double(key, value);
    else if (key == "smoothing") c.smoothing = to_double(key, value);
    else if (key == "kmeans_restarts") c.kmeans.restarts = to_size(key, value);
    else if (key == "kmeans_max_iters") c.kmeans.max_iters = to_size(key, value);
    else if (key == "kmeans_tol") c.kmeans.tol = to_double(key, value);
    else throw ConfigError("unknown config key '" + key + "'");
}

ExperimentConfig parse_config(std::istream& in, ExperimentConfig base) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto body = text::trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key(text::trim(body.substr(0, eq)));
        const std::string value(text::trim(body.substr(eq + 1)));
        try {
            apply_setting(base, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    base.validate();
    return base;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path.string());
    return parse_config(in, std::move(base));
}

void write_config(std::ostream& out, const ExperimentConfig& c) {
    std::string approaches;
    for (auto a : c.approaches) approaches += (approaches.empty() ? "" : ",") + to_string(a);
    out << "input = " << c.input << '\n'
        << "synth_kind = " << c.synth.kind << '\n'
        << "synth_samples = " << c.synth.samples << '\n'
        << "synth_clusters = " << c.synth.clusters << '\n'
        << "synth_spread = " << text::format_double(c.synth.spread) << '\n'
        << "synth_seed = " << c.synth.seed << '\n'
        << "k_range = " << join_range(c.k_range) << '\n'
        << "depth_range = " << join_range(c.depth_range) << '\n'
        << "prototype_range = " << join_range(c.prototype_range) << '\n'
        << "seeds = " << c.seeds << '\n'
        << "seed = " << c.master_seed << '\n'
        << "approaches = " << approaches << '\n'
        << "out = " << c.output_dir.string() << '\n'
        << "workers = " << c.workers << '\n'
        << "d_out = " << c.mapper.d_out << '\n'
        << "weight_scale = " << text::format_double(c.mapper.scale) << '\n'
        << "epochs = " << c.train.epochs << '\n'
        << "batch_size = " << c.train.batch_size << '\n'
        << "learning_rate = " << text::format_double(c.train.learning_rate) << '\n'
        << "clip_norm = " << text::format_double(c.train.clip_norm) << '\n'
        << "augment_sigma = " << text::format_double(c.train.augment_sigma) << '\n'
        << "kl_direction = " << swav::to_string(c.train.kl_direction) << '\n'
        << "adam_beta1 = " << text::format_double(c.train.beta1) << '\n'
        << "adam_beta2 = " << text::format_double(c.train.beta2) << '\n'
        << "adam_eps = " << text::format_double(c.train.adam_eps) << '\n'
        << "temperature = " << text::format_double(c.temperature) << '\n'
        << "smoothing = " << text::format_double(c.smoothing) << '\n'
        << "kmeans_restarts = " << c.kmeans.restarts << '\n'
        << "kmeans_max_iters = " << c.kmeans.max_iters << '\n'
        << "kmeans_tol = " << text::format_double(c.kmeans.tol) << '\n';
}

}  // namespace qclust::harness
