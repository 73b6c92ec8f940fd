#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "semseq/config.hpp"
#include "semseq/normalize.hpp"

namespace semseq {

struct TrajectoryMatch {
    std::size_t query_index = 0;
    std::size_t ref_index = 0;
    double score = 0.0;
    /// Second-best score outside the exclusion window minus the best score;
    /// +inf when no such competitor exists.
    double margin = std::numeric_limits<double>::infinity();
    bool accepted = false;

    bool operator==(const TrajectoryMatch&) const = default;
};

/// Mean of Dn over the straight constant-velocity path ending at
/// (r_end, q_end) and spanning d_s query columns. Row at step k (from the
/// path start) is round(r_start + v*k), with r_start = r_end - round(v*(d_s-1)).
/// Returns nullopt if any row leaves the matrix.
inline std::optional<double> trajectory_score(const NormDiffMatrix& Dn, std::size_t q_end, std::size_t r_end,
                                              double v, std::size_t d_s) {
    if (d_s < 1) throw Error(ErrorKind::config, "sequence length must be >= 1");
    if (q_end + 1 < d_s || q_end >= Dn.cols()) {
        throw Error(ErrorKind::range, "query index too small for the sequence length");
    }
    const double r_start = static_cast<double>(r_end) - std::round(v * static_cast<double>(d_s - 1));
    const std::size_t q_start = q_end + 1 - d_s;
    const double n_ref = static_cast<double>(Dn.rows());
    double sum = 0.0;
    for (std::size_t k = 0; k < d_s; ++k) {
        const double r = std::round(r_start + v * static_cast<double>(k));
        if (r < 0.0 || r >= n_ref) return std::nullopt;
        sum += Dn(static_cast<std::size_t>(r), q_start + k);
    }
    return sum / static_cast<double>(d_s);
}

/// Best trajectory endpoint for one query column, plus its uniqueness margin
/// against the best endpoint further than exclusion_window rows away.
inline TrajectoryMatch match_query(const NormDiffMatrix& Dn, std::size_t q_end, const PipelineConfig& cfg) {
    const auto d_s = static_cast<std::size_t>(cfg.d_s);
    if (q_end + 1 < d_s || q_end >= Dn.cols()) {
        throw Error(ErrorKind::range, "query index too small for the sequence length");
    }
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> row_score(Dn.rows(), inf);
    std::vector<bool> valid(Dn.rows(), false);
    for (std::size_t r = 0; r < Dn.rows(); ++r) {
        for (double v : cfg.velocity_set) {
            const auto s = trajectory_score(Dn, q_end, r, v, d_s);
            if (s && (!valid[r] || *s < row_score[r])) {
                row_score[r] = *s;
                valid[r] = true;
            }
        }
    }
    std::optional<std::size_t> best;
    for (std::size_t r = 0; r < Dn.rows(); ++r) {
        if (valid[r] && (!best || row_score[r] < row_score[*best])) best = r;
    }
    if (!best) {
        throw Error(ErrorKind::no_match, "no valid trajectory for query " + std::to_string(q_end));
    }
    const auto excl = static_cast<std::size_t>(cfg.exclusion_window);
    double second = inf;
    bool have_second = false;
    for (std::size_t r = 0; r < Dn.rows(); ++r) {
        const std::size_t dist = r > *best ? r - *best : *best - r;
        if (valid[r] && dist > excl && row_score[r] < second) {
            second = row_score[r];
            have_second = true;
        }
    }
    TrajectoryMatch m;
    m.query_index = q_end;
    m.ref_index = *best;
    m.score = row_score[*best];
    m.margin = have_second ? second - m.score : inf;
    m.accepted = m.margin >= cfg.mu;
    return m;
}

/// One match per query index in [d_s - 1, n_query).
inline std::vector<TrajectoryMatch> match_sequence(const NormDiffMatrix& Dn, const PipelineConfig& cfg) {
    validate(cfg);
    if (Dn.cols() < static_cast<std::size_t>(cfg.d_s)) {
        throw Error(ErrorKind::degenerate, "query sequence shorter than the sequence length d_s");
    }
    std::vector<TrajectoryMatch> out;
    out.reserve(Dn.cols() - cfg.d_s + 1);
    for (std::size_t q = static_cast<std::size_t>(cfg.d_s) - 1; q < Dn.cols(); ++q) {
        out.push_back(match_query(Dn, q, cfg));
    }
    return out;
}

}  // namespace semseq
