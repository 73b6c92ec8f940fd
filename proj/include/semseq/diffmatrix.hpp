#pragma once

#include <cstdlib>
#include <span>

#include "semseq/config.hpp"
#include "semseq/preprocess.hpp"

namespace semseq {

/// n_ref x n_query SAD scores; D(i, j) compares reference i with query j.
using DiffMatrix = RealMatrix;

namespace detail {

inline void require_same_shape(const PreprocessedFrame& a, const PreprocessedFrame& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw Error(ErrorKind::dimension, "frames being compared differ in size");
    }
    if (a.empty()) throw Error(ErrorKind::dimension, "cannot compare empty frames");
}

// Mean |a(y,x) - b(y,x+shift)| over the columns where both exist.
inline double overlap_mad(const PreprocessedFrame& a, const PreprocessedFrame& b, long shift) {
    const long cols = static_cast<long>(a.cols());
    const long x0 = shift < 0 ? -shift : 0;
    const long x1 = shift > 0 ? cols - shift : cols;
    double sum = 0.0;
    for (std::size_t y = 0; y < a.rows(); ++y) {
        const auto ra = a.row(y);
        const auto rb = b.row(y);
        for (long x = x0; x < x1; ++x) sum += std::abs(ra[x] - rb[x + shift]);
    }
    return sum / static_cast<double>(a.rows() * static_cast<std::size_t>(x1 - x0));
}

}  // namespace detail

/// Mean absolute difference between two preprocessed frames.
inline double sad(const PreprocessedFrame& a, const PreprocessedFrame& b) {
    detail::require_same_shape(a, b);
    return detail::overlap_mad(a, b, 0);
}

/// Best SAD over horizontal shifts of the query in [-O, +O]. Each shift is
/// scored on the overlapping columns only and divided by the overlap area.
/// Shifts are tried as 0, -1, +1, -2, +2, ... and only a strictly smaller
/// score replaces the incumbent.
inline double sad_with_offset(const PreprocessedFrame& a, const PreprocessedFrame& b, int O) {
    detail::require_same_shape(a, b);
    if (O < 0) throw Error(ErrorKind::config, "offset range must be >= 0");
    if (static_cast<std::size_t>(O) >= a.cols()) {
        throw Error(ErrorKind::config, "offset range leaves no overlapping columns");
    }
    double best = detail::overlap_mad(a, b, 0);
    for (long o = 1; o <= O; ++o) {
        for (long s : {-o, o}) {
            const double v = detail::overlap_mad(a, b, s);
            if (v < best) best = v;
        }
    }
    return best;
}

inline DiffMatrix build_difference_matrix(std::span<const PreprocessedFrame> refs,
                                          std::span<const PreprocessedFrame> queries,
                                          const PipelineConfig& cfg) {
    if (refs.empty() || queries.empty()) {
        throw Error(ErrorKind::degenerate, "reference and query sequences must be nonempty");
    }
    DiffMatrix D(refs.size(), queries.size());
    for (std::size_t i = 0; i < refs.size(); ++i) {
        for (std::size_t j = 0; j < queries.size(); ++j) {
            D(i, j) = sad_with_offset(refs[i], queries[j], cfg.O);
        }
    }
    return D;
}

}  // namespace semseq
