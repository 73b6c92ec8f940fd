#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "semseq/core.hpp"
#include "semseq/types.hpp"

namespace semseq {

/// A run of frames sharing one appearance condition and one attribute profile.
struct SynthZone {
    std::size_t start = 0;
    std::size_t end = 0;
    double brightness_offset = 0.0;
    double contrast_gain = 1.0;
    std::vector<double> attribute_profile;
};

struct SynthSpec {
    std::size_t n_frames = 0;
    std::size_t width = 64;
    std::size_t height = 32;
    std::vector<SynthZone> zones;
    std::uint64_t pattern_seed = 0;
    double noise_sigma = 0.0;        // per-pixel Gaussian noise, grey levels
    std::size_t lateral_offset = 0;  // largest horizontal query shift, pixels
    double texture_amplitude = 12.0;  // grey levels per unit of texture
    double texture_clamp = 2.5;       // texture is clamped to +/- this many units
    double temporal_correlation = 0.8;  // AR(1) coefficient between consecutive frames
    double attribute_noise = 0.05;
};

/// Per-zone appearance of the query traversal. Zone boundaries must repeat the
/// reference zones.
struct QueryZoneTransform {
    std::size_t start = 0;
    std::size_t end = 0;
    double brightness_offset = 0.0;
    double contrast_gain = 1.0;
    long lateral_shift = 0;  // |shift| <= lateral_offset
};

struct SynthTraversal {
    std::vector<GrayFrame> frames;
    FeatureMatrix attributes;
    LabelSeq zone_labels;
};

struct SynthQuery {
    std::vector<GrayFrame> frames;
    GroundTruth ground_truth;
};

inline void validate(const SynthSpec& s) {
    auto fail = [](const std::string& m) { throw Error(ErrorKind::config, "invalid synth spec: " + m); };
    if (s.n_frames < 1) fail("n_frames must be >= 1");
    if (s.width < 1 || s.height < 1) fail("frame size must be positive");
    if (s.zones.empty()) fail("at least one zone required");
    std::size_t cursor = 0;
    const std::size_t K = s.zones.front().attribute_profile.size();
    for (const auto& z : s.zones) {
        if (z.start != cursor || z.end <= z.start) fail("zones must tile [0, n_frames)");
        if (!(z.contrast_gain > 0.0)) fail("contrast_gain must be > 0");
        if (z.attribute_profile.size() != K || K == 0) fail("attribute profiles must share a nonzero length");
        for (double v : z.attribute_profile) {
            if (!(v >= 0.0 && v <= 1.0)) fail("attribute profile values must lie in [0,1]");
        }
        cursor = z.end;
    }
    if (cursor != s.n_frames) fail("zones must tile [0, n_frames)");
    if (!(s.noise_sigma >= 0.0) || !(s.attribute_noise >= 0.0)) fail("noise must be >= 0");
    if (!(s.temporal_correlation >= 0.0 && s.temporal_correlation < 1.0)) fail("temporal_correlation must be in [0,1)");
    if (!(s.texture_clamp > 0.0)) fail("texture_clamp must be > 0");
}

namespace detail {

enum class SynthStream : std::uint32_t { texture = 1, ref_noise = 2, attributes = 3, query_noise = 4 };

inline std::mt19937_64 frame_rng(std::uint64_t seed, std::size_t index, SynthStream stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(stream)};
    return std::mt19937_64(seq);
}

// Unit-variance Gaussian field smoothed by a 3x3 box filter on a torus
// (rescaled by 3 to keep unit variance).
inline std::vector<double> smooth_noise(std::size_t w, std::size_t h, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> raw(w * h);
    for (auto& v : raw) v = g(rng);
    std::vector<double> out(w * h);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            double s = 0.0;
            for (std::size_t dy = 0; dy < 3; ++dy) {
                for (std::size_t dx = 0; dx < 3; ++dx) {
                    s += raw[((y + h + dy - 1) % h) * w + (x + w + dx - 1) % w];
                }
            }
            out[y * w + x] = s / 3.0;
        }
    }
    return out;
}

// Underlying texture of every place, width + 2*lateral_offset wide. Frame t is
// an AR(1) blend of frame t-1 and fresh noise seeded by (seed, t), so nearby
// places look alike and distant ones do not.
inline std::vector<std::vector<double>> textures(const SynthSpec& s) {
    const std::size_t w = s.width + 2 * s.lateral_offset;
    const double rho = s.temporal_correlation;
    const double fresh_w = std::sqrt(1.0 - rho * rho);
    std::vector<std::vector<double>> out;
    out.reserve(s.n_frames);
    std::vector<double> state;
    for (std::size_t t = 0; t < s.n_frames; ++t) {
        auto rng = frame_rng(s.pattern_seed, t, SynthStream::texture);
        auto fresh = smooth_noise(w, s.height, rng);
        if (t == 0) {
            state = std::move(fresh);
        } else {
            for (std::size_t k = 0; k < state.size(); ++k) state[k] = rho * state[k] + fresh_w * fresh[k];
        }
        std::vector<double> clamped(state.size());
        for (std::size_t k = 0; k < state.size(); ++k) {
            clamped[k] = std::clamp(state[k], -s.texture_clamp, s.texture_clamp);
        }
        out.push_back(std::move(clamped));
    }
    return out;
}

inline GrayFrame render(const SynthSpec& s, const std::vector<double>& tex, long crop_x, double gain, double offset,
                        double noise_sigma, std::mt19937_64& rng) {
    const std::size_t w = s.width + 2 * s.lateral_offset;
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<std::uint8_t> px(s.width * s.height);
    for (std::size_t y = 0; y < s.height; ++y) {
        for (std::size_t x = 0; x < s.width; ++x) {
            const double base = s.texture_amplitude * tex[y * w + static_cast<std::size_t>(crop_x + static_cast<long>(x))];
            double v = 128.0 + gain * base + offset;
            if (noise_sigma > 0.0) v += noise_sigma * g(rng);
            px[y * s.width + x] = static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
        }
    }
    return GrayFrame(s.width, s.height, std::move(px));
}

}  // namespace detail

/// Reference traversal: textured frames under each zone's gain/offset, noisy
/// attribute vectors around each zone's profile, and the zone index per frame.
inline SynthTraversal generate_traversal(const SynthSpec& spec) {
    validate(spec);
    const auto tex = detail::textures(spec);
    const std::size_t K = spec.zones.front().attribute_profile.size();
    SynthTraversal out;
    out.attributes = FeatureMatrix(spec.n_frames, K);
    out.zone_labels.resize(spec.n_frames);
    for (std::size_t zi = 0; zi < spec.zones.size(); ++zi) {
        const auto& z = spec.zones[zi];
        for (std::size_t t = z.start; t < z.end; ++t) {
            auto rng = detail::frame_rng(spec.pattern_seed, t, detail::SynthStream::ref_noise);
            out.frames.push_back(detail::render(spec, tex[t], static_cast<long>(spec.lateral_offset), z.contrast_gain,
                                                z.brightness_offset, spec.noise_sigma, rng));
            auto arng = detail::frame_rng(spec.pattern_seed, t, detail::SynthStream::attributes);
            std::normal_distribution<double> g(0.0, 1.0);
            for (std::size_t k = 0; k < K; ++k) {
                const double n = std::clamp(g(arng), -3.0, 3.0) * spec.attribute_noise;
                out.attributes(t, k) = std::clamp(z.attribute_profile[k] + n, 0.0, 1.0);
            }
            out.zone_labels[t] = static_cast<int>(zi);
        }
    }
    return out;
}

/// Query traversal over the same places under different per-zone appearance.
/// Ground truth pairs every query frame with the same reference index.
inline SynthQuery generate_query(const SynthSpec& spec, const std::vector<QueryZoneTransform>& transforms) {
    validate(spec);
    if (transforms.size() != spec.zones.size()) {
        throw Error(ErrorKind::config, "query transforms must match the reference zones");
    }
    for (std::size_t i = 0; i < transforms.size(); ++i) {
        const auto& q = transforms[i];
        if (q.start != spec.zones[i].start || q.end != spec.zones[i].end) {
            throw Error(ErrorKind::config, "query transform boundaries differ from the reference zones");
        }
        if (!(q.contrast_gain > 0.0)) throw Error(ErrorKind::config, "query contrast_gain must be > 0");
        if (static_cast<std::size_t>(q.lateral_shift < 0 ? -q.lateral_shift : q.lateral_shift) > spec.lateral_offset) {
            throw Error(ErrorKind::config, "query lateral shift exceeds lateral_offset");
        }
    }
    const auto tex = detail::textures(spec);
    SynthQuery out;
    for (const auto& q : transforms) {
        for (std::size_t t = q.start; t < q.end; ++t) {
            auto rng = detail::frame_rng(spec.pattern_seed, t, detail::SynthStream::query_noise);
            const long crop = static_cast<long>(spec.lateral_offset) - q.lateral_shift;
            out.frames.push_back(
                detail::render(spec, tex[t], crop, q.contrast_gain, q.brightness_offset, spec.noise_sigma, rng));
            out.ground_truth.pairs.emplace(t, t);
        }
    }
    return out;
}

/// Query transforms that reproduce the reference appearance exactly.
inline std::vector<QueryZoneTransform> identity_transforms(const SynthSpec& spec) {
    std::vector<QueryZoneTransform> out;
    for (const auto& z : spec.zones) out.push_back({z.start, z.end, z.brightness_offset, z.contrast_gain, 0});
    return out;
}

/// K-dim attribute profile that is `hi` on dims [first, first+count) and `lo` elsewhere.
inline std::vector<double> block_profile(std::size_t K, std::size_t first, std::size_t count, double hi, double lo) {
    std::vector<double> p(K, lo);
    for (std::size_t k = first; k < std::min(K, first + count); ++k) p[k] = hi;
    return p;
}

/// Three zones of roughly equal length over n_frames, 102 attributes, each
/// zone with its own block of 10 active attributes (0.7 active vs 0.2 idle).
inline SynthSpec three_zone_spec(std::size_t n_frames = 200, std::uint64_t seed = 0) {
    SynthSpec s;
    s.n_frames = n_frames;
    s.pattern_seed = seed;
    const std::size_t K = 102;
    const std::size_t a = n_frames / 3;
    const std::size_t b = 2 * n_frames / 3;
    s.zones = {
        {0, a, 0.0, 1.0, block_profile(K, 0, 10, 0.7, 0.2)},
        {a, b, 0.0, 1.0, block_profile(K, 10, 10, 0.7, 0.2)},
        {b, n_frames, 0.0, 1.0, block_profile(K, 20, 10, 0.7, 0.2)},
    };
    return s;
}

/// Reference goes bright -> dark; the query traversal is the reverse, with
/// heavy sensor noise. The dark zone is offset far enough below black that
/// only the brightest texture survives clipping, so dark frames look alike and
/// a global comparison pairs dark with dark. Strong temporal correlation makes
/// neighbouring places nearly indistinguishable under noise.
inline SynthSpec inversion_spec(std::size_t n_frames = 200, std::uint64_t seed = 0) {
    SynthSpec s;
    s.n_frames = n_frames;
    s.pattern_seed = seed;
    s.texture_amplitude = 30.0;
    s.texture_clamp = 3.0;
    s.noise_sigma = 20.0;
    s.temporal_correlation = 0.96;
    const std::size_t K = 102;
    const std::size_t half = n_frames / 2;
    s.zones = {
        {0, half, 40.0, 1.0, block_profile(K, 0, 10, 0.8, 0.1)},
        {half, n_frames, -170.0, 1.0, block_profile(K, 10, 10, 0.8, 0.1)},
    };
    return s;
}

inline std::vector<QueryZoneTransform> inversion_query(const SynthSpec& s) {
    return {
        {s.zones[0].start, s.zones[0].end, s.zones[1].brightness_offset, 1.0, 0},
        {s.zones[1].start, s.zones[1].end, s.zones[0].brightness_offset, 1.0, 0},
    };
}

}  // namespace semseq
