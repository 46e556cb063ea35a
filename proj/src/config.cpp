#include "fter/config.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace fter {

namespace {

using nlohmann::json;

void only_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, value] : j.items())
        if (!allowed.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

template <typename T>
void read(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("bad value for '") + key + "'");
    }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path = p;
    return path.is_absolute() || base.empty() ? path : base / path;
}

SyntheticSpec read_synthetic(const json& j) {
    if (!j.is_object()) throw ConfigError("'synthetic' must be an object");
    only_keys(j, {"records", "entities", "zipf", "exponent", "max_entity_size", "seed"}, "synthetic");
    SyntheticSpec s;
    read(j, "records", s.num_records);
    read(j, "entities", s.num_entities);
    read(j, "zipf", s.zipf);
    read(j, "exponent", s.exponent);
    read(j, "max_entity_size", s.max_entity_size);
    read(j, "seed", s.seed);
    return s;
}

}  // namespace

Execution parse_execution(std::string_view name) {
    if (name == "serial") return Execution::serial;
    if (name == "parallel") return Execution::parallel;
    throw ConfigError("unknown execution '" + std::string(name) + "' (serial|parallel)");
}

RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    only_keys(j,
              {"dataset", "crowd", "noise", "strategy", "discipline", "mode", "execution", "quorum", "edge_budget",
               "cer_votes", "connectivity", "max_batch", "seed", "repetitions", "max_cost", "prefilter", "trace",
               "clustering"},
              "config");

    RunConfig c;
    auto& x = c.experiment;
    auto& e = x.engine;

    if (!j.contains("dataset")) throw ConfigError("config needs a 'dataset'");
    const auto& d = j["dataset"];
    if (d.is_string()) {
        c.manifest = resolve(base_dir, d.get<std::string>());
    } else if (d.is_object() && d.contains("synthetic")) {
        only_keys(d, {"synthetic"}, "dataset");
        c.synthetic = read_synthetic(d["synthetic"]);
    } else {
        throw ConfigError("'dataset' must be a manifest path or {\"synthetic\": {...}}");
    }

    std::string crowd = c.synthetic ? "synthetic" : "replay";
    read(j, "crowd", crowd);
    if (crowd == "synthetic") x.crowd = CrowdKind::synthetic;
    else if (crowd == "replay") x.crowd = CrowdKind::replay;
    else if (crowd == "live") c.live = true;
    else throw ConfigError("unknown crowd '" + crowd + "' (synthetic|replay|live)");

    if (j.contains("noise")) {
        const auto& n = j["noise"];
        if (!n.is_object()) throw ConfigError("'noise' must be an object");
        only_keys(n, {"fp", "fn", "seed"}, "noise");
        read(n, "fp", x.noise.false_positive);
        read(n, "fn", x.noise.false_negative);
        read(n, "seed", x.noise.seed);
    }

    std::string text;
    if (j.contains("strategy")) {
        read(j, "strategy", text);
        e.strategy = parse_strategy(text);
    }
    if (j.contains("discipline")) {
        read(j, "discipline", text);
        e.discipline.mode = parse_discipline(text);
    }
    if (j.contains("mode")) {
        read(j, "mode", text);
        if (text == "seq") e.batched = false;
        else if (text == "par") e.batched = true;
        else throw ConfigError("unknown mode '" + text + "' (seq|par)");
    }
    if (j.contains("execution")) {
        read(j, "execution", text);
        e.execution = parse_execution(text);
    }
    read(j, "quorum", e.discipline.quorum);
    read(j, "edge_budget", e.discipline.edge_budget);
    read(j, "cer_votes", e.discipline.cer_votes);
    read(j, "connectivity", e.discipline.connectivity);
    read(j, "max_batch", e.max_batch);
    read(j, "seed", e.seed);
    read(j, "repetitions", x.repetitions);
    read(j, "max_cost", x.max_cost);

    if (j.contains("prefilter")) {
        const auto& p = j["prefilter"];
        if (!p.is_object()) throw ConfigError("'prefilter' must be an object");
        only_keys(p, {"lower", "upper"}, "prefilter");
        PrefilterBounds b;
        read(p, "lower", b.lower);
        read(p, "upper", b.upper);
        if (!(0.0 <= b.lower && b.lower <= b.upper && b.upper <= 1.0))
            throw ConfigError("prefilter thresholds must satisfy 0 <= lower <= upper <= 1");
        x.prefilter = b;
    }
    if (j.contains("trace")) {
        read(j, "trace", text);
        c.trace_out = resolve(base_dir, text);
    }
    if (j.contains("clustering")) {
        read(j, "clustering", text);
        c.clustering_out = resolve(base_dir, text);
    }

    if (!c.live) x.validate();
    else e.validate();
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return parse_run_config(buf.str(), path.parent_path());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

Dataset load_dataset(const RunConfig& config) {
    if (config.synthetic) return make_synthetic_dataset(*config.synthetic);
    return load_manifest(*config.manifest);
}

}  // namespace fter
