#include <fstream>
#include <set>
#include <sstream>

#include "stab/bench.hpp"
#include "stab/errors.hpp"
#include <json.hpp>

namespace stab {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [k, _] : obj.items())
        if (!allowed.count(k)) throw ConfigError("unknown key '" + where + k + "'");
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("bad value for '" + where + key + "'");
    }
}

std::vector<double> read_reals(const json& obj, const char* key, std::vector<double> fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_array()) throw ConfigError("'" + std::string(key) + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number()) throw ConfigError("'" + std::string(key) + "' must be an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

}  // namespace

ExperimentSpec parse_experiment_spec(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text, nullptr, true, true);
    } catch (const json::parse_error& ex) {
        throw ConfigError(std::string("config is not valid JSON: ") + ex.what());
    }
    reject_unknown(doc,
                   {"system", "clf", "methods", "deltas", "e_bars", "q_bars", "n_runs", "S", "s", "seed", "t_end",
                    "substeps", "noise_mode", "disturbance_per_substep", "metric", "tail_fraction", "dia", "infc",
                    "grid", "input_bound", "bounds", "estimation", "output_dir", "threads", "serial_timing",
                    "write_trajectories", "shared_initial"},
                   "");
    ExperimentSpec spec;
    read(doc, "system", spec.system, "");
    read(doc, "clf", spec.clf, "");
    if (doc.contains("methods")) {
        const auto& m = doc.at("methods");
        if (!m.is_array()) throw ConfigError("'methods' must be an array of strings");
        spec.methods.clear();
        for (const auto& e : m) {
            if (!e.is_string()) throw ConfigError("'methods' must be an array of strings");
            spec.methods.push_back(parse_method(e.get<std::string>()));
        }
    }
    spec.deltas = read_reals(doc, "deltas", spec.deltas);
    spec.e_bars = read_reals(doc, "e_bars", spec.e_bars);
    spec.q_bars = read_reals(doc, "q_bars", spec.q_bars);
    read(doc, "n_runs", spec.n_runs, "");
    read(doc, "S", spec.S, "");
    read(doc, "s", spec.s, "");
    read(doc, "seed", spec.seed, "");
    read(doc, "t_end", spec.t_end, "");
    read(doc, "substeps", spec.substeps, "");
    if (doc.contains("noise_mode")) {
        std::string mode;
        read(doc, "noise_mode", mode, "");
        spec.noise_mode = parse_noise_mode(mode);
    }
    read(doc, "disturbance_per_substep", spec.disturbance_per_substep, "");
    if (doc.contains("metric")) {
        std::string metric;
        read(doc, "metric", metric, "");
        spec.metric = parse_metric(metric);
    }
    read(doc, "tail_fraction", spec.tail_fraction, "");
    read(doc, "input_bound", spec.input_bound, "");
    read(doc, "output_dir", spec.output_dir, "");
    read(doc, "threads", spec.threads, "");
    read(doc, "serial_timing", spec.serial_timing, "");
    read(doc, "write_trajectories", spec.write_trajectories, "");
    read(doc, "shared_initial", spec.shared_initial, "");

    if (doc.contains("dia")) {
        const auto& d = doc.at("dia");
        reject_unknown(d, {"r", "n_dirs", "n_random", "refine_rounds"}, "dia.");
        read(d, "r", spec.dia.r, "dia.");
        read(d, "n_dirs", spec.dia.n_dirs, "dia.");
        read(d, "n_random", spec.dia.n_random, "dia.");
        read(d, "refine_rounds", spec.dia.refine_rounds, "dia.");
    }
    if (doc.contains("infc")) {
        const auto& d = doc.at("infc");
        reject_unknown(d, {"alpha", "prox_max_iters", "prox_tol", "multistart"}, "infc.");
        read(d, "alpha", spec.infc.alpha, "infc.");
        read(d, "prox_max_iters", spec.infc.prox_max_iters, "infc.");
        read(d, "prox_tol", spec.infc.prox_tol, "infc.");
        read(d, "multistart", spec.infc.multistart, "infc.");
    }
    if (doc.contains("grid")) {
        const auto& d = doc.at("grid");
        reject_unknown(d, {"points_per_axis"}, "grid.");
        read(d, "points_per_axis", spec.points_per_axis, "grid.");
    }
    if (doc.contains("bounds")) {
        const auto& d = doc.at("bounds");
        reject_unknown(d, {"c1", "c2", "lipschitz_pairs", "decay_states", "dynamics_states", "seed", "region_radius"}, "bounds.");
        read(d, "c1", spec.c1, "bounds.");
        read(d, "c2", spec.c2, "bounds.");
        read(d, "lipschitz_pairs", spec.regularity.lipschitz_pairs, "bounds.");
        read(d, "decay_states", spec.regularity.decay_states, "bounds.");
        read(d, "dynamics_states", spec.regularity.dynamics_states, "bounds.");
        read(d, "seed", spec.regularity.seed, "bounds.");
        read(d, "region_radius", spec.bounds_radius, "bounds.");
    }
    if (doc.contains("estimation")) {
        const auto& d = doc.at("estimation");
        reject_unknown(d, {"apriori_fraction", "envelope_shells", "samples_per_shell", "sup_samples", "seed"},
                       "estimation.");
        read(d, "apriori_fraction", spec.estimation.apriori_fraction, "estimation.");
        read(d, "envelope_shells", spec.estimation.envelope_shells, "estimation.");
        read(d, "samples_per_shell", spec.estimation.samples_per_shell, "estimation.");
        read(d, "sup_samples", spec.estimation.sup_samples, "estimation.");
        read(d, "seed", spec.estimation.seed, "estimation.");
    }
    if (spec.bounds_radius < 0.0) throw ConfigError("bounds.region_radius must be non-negative");
    if (!(spec.c1 > 0.0 && spec.c2 > 0.0)) throw ConfigError("bounds.c1 and bounds.c2 must be positive");
    spec.validate();
    return spec;
}

ExperimentSpec load_experiment_spec(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read config '" + path.string() + "'");
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_experiment_spec(ss.str());
}

}  // namespace stab
