#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "semseq/core.hpp"

namespace semseq {

/// Raw 8-bit grayscale image, row-major.
struct GrayFrame {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> intensities;

    GrayFrame() = default;
    GrayFrame(std::size_t w, std::size_t h, std::vector<std::uint8_t> px)
        : width(w), height(h), intensities(std::move(px)) {
        if (w < 1 || h < 1) throw Error(ErrorKind::dimension, "frame must be at least 1x1");
        if (intensities.size() != w * h) {
            throw Error(ErrorKind::dimension, "frame pixel count does not match width*height");
        }
    }

    std::uint8_t at(std::size_t x, std::size_t y) const { return intensities[y * width + x]; }

    bool operator==(const GrayFrame&) const = default;
};

/// T frames by K attribute probabilities.
using FeatureMatrix = RealMatrix;

/// Per-frame hidden-state labels, values in [0, N).
using LabelSeq = std::vector<int>;

/// Query index -> reference index, both 0-based. Ordered so iteration is
/// deterministic.
struct GroundTruth {
    std::map<std::size_t, std::size_t> pairs;

    const std::size_t* find(std::size_t query) const {
        auto it = pairs.find(query);
        return it == pairs.end() ? nullptr : &it->second;
    }
    std::size_t size() const noexcept { return pairs.size(); }
};

}  // namespace semseq
