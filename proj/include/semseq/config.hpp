#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "semseq/core.hpp"

namespace semseq {

/// Every tunable of the pipeline. Defaults are the standard sequence-matching
/// settings (64x32 frames, P=4, +/-10 px offset, 15-frame sequences,
/// velocities 0.8..1.2).
struct PipelineConfig {
    int S_x = 64;
    int S_y = 32;
    int P = 4;
    int O = 10;
    int d_s = 15;
    int R = 20;
    std::vector<double> velocity_set{0.8, 0.9, 1.0, 1.1, 1.2};
    double mu = 0.0;
    int N = 3;
    int exclusion_window = 15;
    int min_segment_len = 1;
    std::uint64_t seed = 0;
    int restarts = 10;
    int max_iters = 100;
    double tol_loglik = 1e-4;
    int gt_tolerance = 5;

    bool operator==(const PipelineConfig&) const = default;
};

inline void validate(const PipelineConfig& c) {
    auto fail = [](const std::string& m) { throw Error(ErrorKind::config, m); };
    if (c.S_x < 1 || c.S_y < 1) fail("S_x and S_y must be positive");
    if (c.P < 1) fail("P must be positive");
    if (c.S_x % c.P != 0 || c.S_y % c.P != 0) fail("S_x and S_y must be multiples of P");
    if (c.d_s < 1) fail("d_s must be >= 1");
    if (c.R < 1) fail("R must be >= 1");
    if (c.O < 0) fail("O must be >= 0");
    if (c.N < 1) fail("N must be >= 1");
    if (c.velocity_set.empty()) fail("velocity_set must be nonempty");
    for (double v : c.velocity_set) {
        if (!(v > 0.0) || !std::isfinite(v)) fail("velocities must be positive and finite");
    }
    if (c.exclusion_window < 0) fail("exclusion_window must be >= 0");
    if (c.min_segment_len < 0) fail("min_segment_len must be >= 0");
    if (c.restarts < 1) fail("restarts must be >= 1");
    if (c.max_iters < 0) fail("max_iters must be >= 0");
    if (!(c.tol_loglik >= 0.0)) fail("tol_loglik must be >= 0");
    if (c.gt_tolerance < 0) fail("gt_tolerance must be >= 0");
}

inline void to_json(nlohmann::json& j, const PipelineConfig& c) {
    j = nlohmann::json{
        {"S_x", c.S_x},
        {"S_y", c.S_y},
        {"P", c.P},
        {"O", c.O},
        {"d_s", c.d_s},
        {"R", c.R},
        {"velocity_set", c.velocity_set},
        {"mu", c.mu},
        {"N", c.N},
        {"exclusion_window", c.exclusion_window},
        {"min_segment_len", c.min_segment_len},
        {"seed", c.seed},
        {"restarts", c.restarts},
        {"max_iters", c.max_iters},
        {"tol_loglik", c.tol_loglik},
        {"gt_tolerance", c.gt_tolerance},
    };
}

/// Missing keys keep their current value, so a partial file overrides defaults.
inline void from_json(const nlohmann::json& j, PipelineConfig& c) {
    if (!j.is_object()) throw Error(ErrorKind::config, "config must be a JSON object");
    static const char* known[] = {"S_x", "S_y", "P", "O", "d_s", "R", "velocity_set", "mu", "N",
                                  "exclusion_window", "min_segment_len", "seed", "restarts",
                                  "max_iters", "tol_loglik", "gt_tolerance"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known) ok = ok || it.key() == k;
        if (!ok) throw Error(ErrorKind::config, "unknown config key: " + it.key());
    }
    try {
        auto get = [&](const char* key, auto& field) {
            if (j.contains(key)) j.at(key).get_to(field);
        };
        get("S_x", c.S_x);
        get("S_y", c.S_y);
        get("P", c.P);
        get("O", c.O);
        get("d_s", c.d_s);
        get("R", c.R);
        get("velocity_set", c.velocity_set);
        get("mu", c.mu);
        get("N", c.N);
        get("exclusion_window", c.exclusion_window);
        get("min_segment_len", c.min_segment_len);
        get("seed", c.seed);
        get("restarts", c.restarts);
        get("max_iters", c.max_iters);
        get("tol_loglik", c.tol_loglik);
        get("gt_tolerance", c.gt_tolerance);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::config, std::string("bad config value: ") + e.what());
    }
}

inline PipelineConfig load_config(const std::string& path, PipelineConfig base = {}) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot open config: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::format, "config is not valid JSON: " + std::string(e.what()));
    }
    from_json(j, base);
    validate(base);
    return base;
}

}  // namespace semseq
