#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "semseq/config.hpp"
#include "semseq/search.hpp"
#include "semseq/types.hpp"

namespace semseq {

enum class MatchOutcome { true_positive, false_positive, rejected };

struct PRPoint {
    double mu = 0.0;
    std::size_t true_positives = 0;
    std::size_t false_positives = 0;
    std::size_t accepted_count = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;

    bool operator==(const PRPoint&) const = default;
};

struct EvaluationReport {
    std::vector<PRPoint> curve;  // ascending mu
    double max_f1 = 0.0;
    double argmax_mu = 0.0;
    PipelineConfig config_echo;

    bool operator==(const EvaluationReport&) const = default;
};

/// An accepted match is a true positive when the query has ground truth and
/// the matched reference lies within tol frames of it. Accepted matches for
/// queries without ground truth are false positives.
inline MatchOutcome classify_match(const TrajectoryMatch& m, const GroundTruth& gt, std::size_t tol) {
    if (!m.accepted) return MatchOutcome::rejected;
    const std::size_t* ref = gt.find(m.query_index);
    if (!ref) return MatchOutcome::false_positive;
    const std::size_t dist = m.ref_index > *ref ? m.ref_index - *ref : *ref - m.ref_index;
    return dist <= tol ? MatchOutcome::true_positive : MatchOutcome::false_positive;
}

/// Fills precision, recall and f1 from the counts. `positives` is the recall
/// denominator: emitted queries that have ground truth.
inline void finish_point(PRPoint& p, std::size_t positives) {
    p.accepted_count = p.true_positives + p.false_positives;
    p.precision = p.accepted_count ? static_cast<double>(p.true_positives) / static_cast<double>(p.accepted_count) : 0.0;
    p.recall = positives ? static_cast<double>(p.true_positives) / static_cast<double>(positives) : 0.0;
    p.f1 = p.precision + p.recall > 0.0 ? 2.0 * p.precision * p.recall / (p.precision + p.recall) : 0.0;
}

/// 101 evenly spaced thresholds from 0 to the largest finite margin.
inline std::vector<double> default_mu_grid(std::span<const TrajectoryMatch> matches) {
    double hi = 0.0;
    for (const auto& m : matches) {
        if (std::isfinite(m.margin)) hi = std::max(hi, m.margin);
    }
    std::vector<double> grid(101);
    for (std::size_t k = 0; k < grid.size(); ++k) grid[k] = hi * static_cast<double>(k) / 100.0;
    return grid;
}

/// Re-thresholds every match at each mu (accepted = margin >= mu) and scores it.
inline std::vector<PRPoint> pr_curve(std::span<const TrajectoryMatch> matches, const GroundTruth& gt,
                                     std::size_t tol, std::span<const double> mu_grid) {
    if (matches.empty()) throw Error(ErrorKind::degenerate, "no matches to evaluate");
    if (!std::is_sorted(mu_grid.begin(), mu_grid.end())) {
        throw Error(ErrorKind::config, "mu grid must be sorted ascending");
    }
    std::size_t positives = 0;
    for (const auto& m : matches) positives += gt.find(m.query_index) ? 1 : 0;

    std::vector<PRPoint> curve;
    curve.reserve(mu_grid.size());
    for (double mu : mu_grid) {
        PRPoint p;
        p.mu = mu;
        for (TrajectoryMatch m : matches) {
            m.accepted = m.margin >= mu;
            switch (classify_match(m, gt, tol)) {
                case MatchOutcome::true_positive: ++p.true_positives; break;
                case MatchOutcome::false_positive: ++p.false_positives; break;
                case MatchOutcome::rejected: break;
            }
        }
        finish_point(p, positives);
        curve.push_back(p);
    }
    return curve;
}

/// Largest f1 on the curve and the smallest mu that reaches it.
inline std::pair<double, double> max_f1(std::span<const PRPoint> curve) {
    if (curve.empty()) throw Error(ErrorKind::degenerate, "empty PR curve");
    const PRPoint* best = &curve.front();
    for (const auto& p : curve) {
        if (p.f1 > best->f1 || (p.f1 == best->f1 && p.mu < best->mu)) best = &p;
    }
    return {best->f1, best->mu};
}

inline EvaluationReport evaluate(std::span<const TrajectoryMatch> matches, const GroundTruth& gt,
                                 const PipelineConfig& cfg, std::span<const double> mu_grid = {}) {
    EvaluationReport rep;
    const auto grid = mu_grid.empty() ? default_mu_grid(matches) : std::vector<double>(mu_grid.begin(), mu_grid.end());
    rep.curve = pr_curve(matches, gt, static_cast<std::size_t>(cfg.gt_tolerance), grid);
    std::tie(rep.max_f1, rep.argmax_mu) = max_f1(rep.curve);
    rep.config_echo = cfg;
    return rep;
}

}  // namespace semseq
