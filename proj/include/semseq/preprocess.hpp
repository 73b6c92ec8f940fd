#pragma once

#include <span>
#include <vector>

#include "semseq/config.hpp"
#include "semseq/core.hpp"
#include "semseq/types.hpp"

namespace semseq {

/// Downsampled, patch-normalized frame. rows() == S_y, cols() == S_x.
using PreprocessedFrame = RealMatrix;

/// Area-average downsampling. Output cell (x, y) is the mean of source columns
/// [floor(x*W/S_x), floor((x+1)*W/S_x)) and rows [floor(y*H/S_y), floor((y+1)*H/S_y)).
inline RealMatrix downsample(const GrayFrame& frame, std::size_t S_x, std::size_t S_y) {
    if (S_x < 1 || S_y < 1) throw Error(ErrorKind::config, "target size must be positive");
    if (frame.width < S_x || frame.height < S_y) {
        throw Error(ErrorKind::dimension, "downsample target larger than frame (upsampling not supported)");
    }
    const std::size_t W = frame.width;
    const std::size_t H = frame.height;
    RealMatrix out(S_y, S_x);
    for (std::size_t y = 0; y < S_y; ++y) {
        const std::size_t y0 = y * H / S_y;
        const std::size_t y1 = (y + 1) * H / S_y;
        for (std::size_t x = 0; x < S_x; ++x) {
            const std::size_t x0 = x * W / S_x;
            const std::size_t x1 = (x + 1) * W / S_x;
            double sum = 0.0;
            for (std::size_t yy = y0; yy < y1; ++yy) {
                for (std::size_t xx = x0; xx < x1; ++xx) sum += frame.at(xx, yy);
            }
            out(y, x) = sum / static_cast<double>((y1 - y0) * (x1 - x0));
        }
    }
    return out;
}

/// Z-scores each non-overlapping P x P tile independently (population std).
/// Tiles whose std is below kDegenerateStd become all zeros.
inline PreprocessedFrame patch_normalize(const RealMatrix& m, std::size_t P) {
    if (P < 1) throw Error(ErrorKind::config, "patch size must be positive");
    if (m.rows() % P != 0 || m.cols() % P != 0) {
        throw Error(ErrorKind::dimension, "matrix dimensions must be multiples of the patch size");
    }
    PreprocessedFrame out(m.rows(), m.cols());
    std::vector<double> tile(P * P);
    for (std::size_t ty = 0; ty < m.rows(); ty += P) {
        for (std::size_t tx = 0; tx < m.cols(); tx += P) {
            for (std::size_t dy = 0; dy < P; ++dy) {
                for (std::size_t dx = 0; dx < P; ++dx) tile[dy * P + dx] = m(ty + dy, tx + dx);
            }
            const MeanStd st = mean_popstd(tile);
            const bool flat = st.stddev < kDegenerateStd;
            for (std::size_t dy = 0; dy < P; ++dy) {
                for (std::size_t dx = 0; dx < P; ++dx) {
                    out(ty + dy, tx + dx) = flat ? 0.0 : (tile[dy * P + dx] - st.mean) / st.stddev;
                }
            }
        }
    }
    return out;
}

inline std::vector<PreprocessedFrame> preprocess_sequence(std::span<const GrayFrame> frames,
                                                          const PipelineConfig& cfg) {
    validate(cfg);
    if (frames.empty()) throw Error(ErrorKind::degenerate, "no frames to preprocess");
    std::vector<PreprocessedFrame> out;
    out.reserve(frames.size());
    for (const auto& f : frames) {
        if (f.width != frames.front().width || f.height != frames.front().height) {
            throw Error(ErrorKind::dimension, "frames in a sequence must share dimensions");
        }
        out.push_back(patch_normalize(downsample(f, cfg.S_x, cfg.S_y), cfg.P));
    }
    return out;
}

}  // namespace semseq
