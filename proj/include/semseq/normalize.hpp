#pragma once

#include <vector>

#include "semseq/core.hpp"
#include "semseq/diffmatrix.hpp"
#include "semseq/segmentation.hpp"

namespace semseq {

/// Difference matrix z-scored along the reference axis.
using NormDiffMatrix = RealMatrix;

namespace detail {

// Row window [lo, hi) for reference row i under a centered window of width R.
inline Segment sliding_window(std::size_t i, std::size_t n, std::size_t R) {
    const std::size_t half_lo = R / 2;
    const std::size_t half_hi = R - half_lo;
    return {i >= half_lo ? i - half_lo : 0, std::min(n, i + half_hi)};
}

inline double zscore(double v, const MeanStd& st) {
    return st.stddev < kDegenerateStd ? 0.0 : (v - st.mean) / st.stddev;
}

}  // namespace detail

/// Each cell is z-scored against the centered window of R reference rows in
/// its query column, truncated at the matrix edges.
inline NormDiffMatrix sliding_window_normalize(const DiffMatrix& D, std::size_t R) {
    if (R < 2) throw Error(ErrorKind::config, "normalization window must be >= 2");
    const std::size_t n = D.rows();
    NormDiffMatrix out(D.rows(), D.cols());
    std::vector<double> col(n);
    for (std::size_t j = 0; j < D.cols(); ++j) {
        for (std::size_t i = 0; i < n; ++i) col[i] = D(i, j);
        for (std::size_t i = 0; i < n; ++i) {
            const Segment w = detail::sliding_window(i, n, R);
            const MeanStd st = mean_popstd(std::span<const double>(col).subspan(w.start, w.length()));
            out(i, j) = detail::zscore(col[i], st);
        }
    }
    return out;
}

/// Each cell is z-scored against the reference segment containing its row.
inline NormDiffMatrix segment_normalize(const DiffMatrix& D, const SegmentSet& segments) {
    if (!tiles(segments, D.rows())) {
        throw Error(ErrorKind::dimension, "segments do not tile the reference range");
    }
    const std::size_t n = D.rows();
    NormDiffMatrix out(D.rows(), D.cols());
    std::vector<double> col(n);
    for (std::size_t j = 0; j < D.cols(); ++j) {
        for (std::size_t i = 0; i < n; ++i) col[i] = D(i, j);
        for (const auto& seg : segments.intervals) {
            const MeanStd st = mean_popstd(std::span<const double>(col).subspan(seg.start, seg.length()));
            for (std::size_t i = seg.start; i < seg.end; ++i) out(i, j) = detail::zscore(col[i], st);
        }
    }
    return out;
}

}  // namespace semseq
