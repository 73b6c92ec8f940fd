#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include <json.hpp>

#include "semseq/config.hpp"
#include "semseq/core.hpp"
#include "semseq/types.hpp"

namespace semseq {

/// Lower bound applied to every emission variance.
inline constexpr double kVarianceFloor = 1e-6;

/// HMM with diagonal-Gaussian emissions.
struct HmmParams {
    std::size_t N = 0;
    std::size_t K = 0;
    std::vector<double> pi;  // N
    RealMatrix A;            // N x N, row i = p(next | current i)
    RealMatrix means;        // N x K
    RealMatrix vars;         // N x K

    bool operator==(const HmmParams&) const = default;
};

/// Throws unless pi and A rows are distributions and vars respect the floor.
inline void validate(const HmmParams& p) {
    auto fail = [](const std::string& m) { throw Error(ErrorKind::config, "invalid HMM: " + m); };
    if (p.N < 1 || p.K < 1) fail("N and K must be >= 1");
    if (p.pi.size() != p.N) fail("pi has wrong length");
    if (p.A.rows() != p.N || p.A.cols() != p.N) fail("A has wrong shape");
    if (p.means.rows() != p.N || p.means.cols() != p.K) fail("means has wrong shape");
    if (p.vars.rows() != p.N || p.vars.cols() != p.K) fail("vars has wrong shape");
    auto check_dist = [&](std::span<const double> d, const char* what) {
        double s = 0.0;
        for (double v : d) {
            if (!(v >= 0.0) || !std::isfinite(v)) fail(std::string(what) + " has a negative or non-finite entry");
            s += v;
        }
        if (std::abs(s - 1.0) > 1e-9) fail(std::string(what) + " does not sum to 1");
    };
    check_dist(p.pi, "pi");
    for (std::size_t i = 0; i < p.N; ++i) check_dist(p.A.row(i), "row of A");
    for (double m : p.means.data()) {
        if (!std::isfinite(m)) fail("non-finite mean");
    }
    for (double v : p.vars.data()) {
        if (!(v >= kVarianceFloor) || !std::isfinite(v)) fail("variance below floor");
    }
}

/// Per-dimension min-max scaling over the sequence. Constant dimensions map to 0.
inline FeatureMatrix normalize_features(const FeatureMatrix& f) {
    if (f.rows() < 2) throw Error(ErrorKind::degenerate, "feature normalization needs at least 2 frames");
    FeatureMatrix out(f.rows(), f.cols());
    for (std::size_t k = 0; k < f.cols(); ++k) {
        double lo = f(0, k), hi = f(0, k);
        for (std::size_t t = 1; t < f.rows(); ++t) {
            lo = std::min(lo, f(t, k));
            hi = std::max(hi, f(t, k));
        }
        const double range = hi - lo;
        for (std::size_t t = 0; t < f.rows(); ++t) {
            out(t, k) = range > 0.0 ? (f(t, k) - lo) / range : 0.0;
        }
    }
    return out;
}

/// log b_i(x_t) for every (t, i): T x N.
inline RealMatrix log_emissions(const HmmParams& p, const FeatureMatrix& X) {
    if (X.cols() != p.K) throw Error(ErrorKind::dimension, "feature dimension does not match model");
    constexpr double log2pi = 1.8378770664093454835606594728112;  // log(2*pi)
    std::vector<double> norm(p.N, 0.0);
    for (std::size_t i = 0; i < p.N; ++i) {
        for (std::size_t k = 0; k < p.K; ++k) norm[i] += log2pi + std::log(p.vars(i, k));
    }
    RealMatrix out(X.rows(), p.N);
    for (std::size_t t = 0; t < X.rows(); ++t) {
        for (std::size_t i = 0; i < p.N; ++i) {
            double q = 0.0;
            for (std::size_t k = 0; k < p.K; ++k) {
                const double d = X(t, k) - p.means(i, k);
                q += d * d / p.vars(i, k);
            }
            const double lb = -0.5 * (norm[i] + q);
            if (!std::isfinite(lb)) throw Error(ErrorKind::degenerate, "emission density is not finite");
            out(t, i) = lb;
        }
    }
    return out;
}

struct ForwardBackwardResult {
    double log_likelihood = 0.0;
    RealMatrix gamma;     // T x N posteriors
    RealMatrix xi_sums;   // N x N expected transition counts
};

/// Scaled forward-backward. Each forward step is normalized, and the
/// normalizer is accumulated in log space together with the per-step
/// emission shift, so long sequences and peaked 100-dim densities do not
/// underflow.
inline ForwardBackwardResult forward_backward(const HmmParams& params, const FeatureMatrix& X) {
    const std::size_t T = X.rows();
    const std::size_t N = params.N;
    if (T < 1) throw Error(ErrorKind::degenerate, "empty observation sequence");
    const RealMatrix logb = log_emissions(params, X);

    ForwardBackwardResult res;
    RealMatrix alpha(T, N);
    std::vector<double> pred(N), lt(N);
    double loglik = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
        if (t == 0) {
            for (std::size_t i = 0; i < N; ++i) pred[i] = params.pi[i];
        } else {
            std::fill(pred.begin(), pred.end(), 0.0);
            for (std::size_t j = 0; j < N; ++j) {
                const double a = alpha(t - 1, j);
                if (a == 0.0) continue;
                for (std::size_t i = 0; i < N; ++i) pred[i] += a * params.A(j, i);
            }
        }
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < N; ++i) {
            lt[i] = pred[i] > 0.0 ? std::log(pred[i]) + logb(t, i) : -std::numeric_limits<double>::infinity();
            m = std::max(m, lt[i]);
        }
        if (!std::isfinite(m)) throw Error(ErrorKind::degenerate, "observation sequence has zero probability");
        double c = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            alpha(t, i) = std::exp(lt[i] - m);
            c += alpha(t, i);
        }
        for (std::size_t i = 0; i < N; ++i) alpha(t, i) /= c;
        loglik += m + std::log(c);
    }
    res.log_likelihood = loglik;

    // Backward pass, renormalized every step; only ratios within a step matter.
    RealMatrix beta(T, N);
    for (std::size_t i = 0; i < N; ++i) beta(T - 1, i) = 1.0 / static_cast<double>(N);
    res.xi_sums = RealMatrix(N, N, 0.0);
    std::vector<double> v(N);
    RealMatrix xi(N, N);
    for (std::size_t t = T - 1; t-- > 0;) {
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < N; ++j) {
            lt[j] = beta(t + 1, j) > 0.0 ? logb(t + 1, j) + std::log(beta(t + 1, j))
                                         : -std::numeric_limits<double>::infinity();
            m = std::max(m, lt[j]);
        }
        for (std::size_t j = 0; j < N; ++j) v[j] = std::exp(lt[j] - m);
        double bs = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < N; ++j) s += params.A(i, j) * v[j];
            beta(t, i) = s;
            bs += s;
        }
        for (std::size_t i = 0; i < N; ++i) beta(t, i) /= bs;

        double xs = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            for (std::size_t j = 0; j < N; ++j) {
                xi(i, j) = alpha(t, i) * params.A(i, j) * v[j];
                xs += xi(i, j);
            }
        }
        if (xs > 0.0) {
            for (std::size_t i = 0; i < N; ++i) {
                for (std::size_t j = 0; j < N; ++j) res.xi_sums(i, j) += xi(i, j) / xs;
            }
        }
    }

    res.gamma = RealMatrix(T, N);
    for (std::size_t t = 0; t < T; ++t) {
        double s = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            res.gamma(t, i) = alpha(t, i) * beta(t, i);
            s += res.gamma(t, i);
        }
        for (std::size_t i = 0; i < N; ++i) res.gamma(t, i) /= s;
    }
    return res;
}

/// Exact log P(X) by summing over all N^T state paths. Test oracle only.
inline double brute_force_likelihood(const HmmParams& params, const FeatureMatrix& X) {
    const std::size_t T = X.rows();
    const std::size_t N = params.N;
    double paths = 1.0;
    for (std::size_t t = 0; t < T; ++t) paths *= static_cast<double>(N);
    if (paths > 1e6) throw Error(ErrorKind::range, "instance too large for exhaustive enumeration");
    const RealMatrix logb = log_emissions(params, X);

    std::vector<double> terms;
    std::vector<std::size_t> z(T, 0);
    const auto total = static_cast<std::size_t>(paths);
    for (std::size_t path = 0; path < total; ++path) {
        std::size_t code = path;
        for (std::size_t t = 0; t < T; ++t) {
            z[t] = code % N;
            code /= N;
        }
        double lp = std::log(params.pi[z[0]]) + logb(0, z[0]);
        for (std::size_t t = 1; t < T; ++t) lp += std::log(params.A(z[t - 1], z[t])) + logb(t, z[t]);
        terms.push_back(lp);
    }
    const double m = *std::max_element(terms.begin(), terms.end());
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double lp : terms) s += std::exp(lp - m);
    return m + std::log(s);
}

/// L_t = argmax_i gamma(t, i), lowest index on ties.
inline LabelSeq labels_from_posteriors(const RealMatrix& gamma) {
    LabelSeq out(gamma.rows());
    for (std::size_t t = 0; t < gamma.rows(); ++t) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < gamma.cols(); ++i) {
            if (gamma(t, i) > gamma(t, best)) best = i;
        }
        out[t] = static_cast<int>(best);
    }
    return out;
}

inline LabelSeq posterior_decode(const HmmParams& params, const FeatureMatrix& X) {
    return labels_from_posteriors(forward_backward(params, X).gamma);
}

struct BaumWelchResult {
    HmmParams params;
    std::vector<double> history;  // log-likelihood of every evaluated iterate
    std::size_t restart = 0;      // index of the winning restart
};

namespace detail {

inline std::vector<double> dirichlet_ones(std::size_t n, std::mt19937_64& rng) {
    std::exponential_distribution<double> expo(1.0);
    std::vector<double> out(n);
    double s = 0.0;
    for (auto& v : out) {
        v = expo(rng);
        s += v;
    }
    for (auto& v : out) v /= s;
    return out;
}

inline HmmParams random_init(const FeatureMatrix& X, std::size_t N, std::mt19937_64& rng) {
    const std::size_t T = X.rows();
    const std::size_t K = X.cols();
    HmmParams p;
    p.N = N;
    p.K = K;
    p.pi = dirichlet_ones(N, rng);
    p.A = RealMatrix(N, N);
    for (std::size_t i = 0; i < N; ++i) {
        const auto row = dirichlet_ones(N, rng);
        std::copy(row.begin(), row.end(), p.A.row(i).begin());
    }
    // N distinct data rows become the initial means (partial Fisher-Yates).
    std::vector<std::size_t> idx(T);
    for (std::size_t t = 0; t < T; ++t) idx[t] = t;
    for (std::size_t i = 0; i < N; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, T - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    p.means = RealMatrix(N, K);
    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t k = 0; k < K; ++k) p.means(i, k) = X(idx[i], k);
    }
    p.vars = RealMatrix(N, K);
    std::vector<double> col(T);
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t t = 0; t < T; ++t) col[t] = X(t, k);
        const MeanStd st = mean_popstd(col);
        const double var = std::max(st.stddev * st.stddev, kVarianceFloor);
        for (std::size_t i = 0; i < N; ++i) p.vars(i, k) = var;
    }
    return p;
}

inline HmmParams m_step(const HmmParams& prev, const FeatureMatrix& X, const ForwardBackwardResult& fb) {
    const std::size_t T = X.rows();
    const std::size_t N = prev.N;
    const std::size_t K = prev.K;
    HmmParams p = prev;
    for (std::size_t i = 0; i < N; ++i) p.pi[i] = fb.gamma(0, i);
    for (std::size_t i = 0; i < N; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < N; ++j) s += fb.xi_sums(i, j);
        // A state never occupied before the last frame keeps its old row.
        if (s > 0.0) {
            for (std::size_t j = 0; j < N; ++j) p.A(i, j) = fb.xi_sums(i, j) / s;
        }
    }
    for (std::size_t i = 0; i < N; ++i) {
        double w = 0.0;
        for (std::size_t t = 0; t < T; ++t) w += fb.gamma(t, i);
        if (!(w > 0.0)) continue;
        for (std::size_t k = 0; k < K; ++k) {
            double s = 0.0;
            for (std::size_t t = 0; t < T; ++t) s += fb.gamma(t, i) * X(t, k);
            p.means(i, k) = s / w;
        }
        for (std::size_t k = 0; k < K; ++k) {
            double s = 0.0;
            for (std::size_t t = 0; t < T; ++t) {
                const double d = X(t, k) - p.means(i, k);
                s += fb.gamma(t, i) * d * d;
            }
            p.vars(i, k) = std::max(s / w, kVarianceFloor);
        }
    }
    return p;
}

}  // namespace detail

/// EM from a fixed starting point. Stops when the log-likelihood gain drops
/// below tol or after max_iters re-estimations; the returned parameters are
/// the ones whose likelihood is last in the history.
inline BaumWelchResult baum_welch_from(HmmParams init, const FeatureMatrix& X, int max_iters, double tol) {
    BaumWelchResult res;
    res.params = std::move(init);
    ForwardBackwardResult fb = forward_backward(res.params, X);
    res.history.push_back(fb.log_likelihood);
    for (int it = 0; it < max_iters; ++it) {
        HmmParams next = detail::m_step(res.params, X, fb);
        ForwardBackwardResult nfb = forward_backward(next, X);
        const double gain = nfb.log_likelihood - res.history.back();
        res.params = std::move(next);
        fb = std::move(nfb);
        res.history.push_back(fb.log_likelihood);
        if (gain < tol) break;
    }
    return res;
}

/// Baum-Welch with cfg.restarts seeded random initializations; keeps the run
/// with the highest final log-likelihood (earliest restart on ties).
inline BaumWelchResult baum_welch(const FeatureMatrix& X, std::size_t N, const PipelineConfig& cfg) {
    if (N < 1) throw Error(ErrorKind::config, "state count must be >= 1");
    if (X.rows() < N) throw Error(ErrorKind::degenerate, "fewer frames than hidden states");
    if (X.cols() < 1) throw Error(ErrorKind::dimension, "features must have at least one dimension");
    BaumWelchResult best;
    bool have = false;
    for (int r = 0; r < std::max(cfg.restarts, 1); ++r) {
        std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                          static_cast<std::uint32_t>(r)};
        std::mt19937_64 rng(seq);
        BaumWelchResult run = baum_welch_from(detail::random_init(X, N, rng), X, cfg.max_iters, cfg.tol_loglik);
        run.restart = static_cast<std::size_t>(r);
        const double ll = run.history.back();
        if (!std::isfinite(ll)) continue;
        if (!have || ll > best.history.back()) {
            best = std::move(run);
            have = true;
        }
    }
    if (!have) throw Error(ErrorKind::degenerate, "every Baum-Welch restart diverged");
    return best;
}

inline nlohmann::json hmm_to_json(const HmmParams& p) {
    auto rows = [](const RealMatrix& m) {
        nlohmann::json a = nlohmann::json::array();
        for (std::size_t r = 0; r < m.rows(); ++r) {
            a.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
        }
        return a;
    };
    return nlohmann::json{{"N", p.N}, {"K", p.K}, {"pi", p.pi}, {"A", rows(p.A)},
                          {"means", rows(p.means)}, {"vars", rows(p.vars)}};
}

inline HmmParams hmm_from_json(const nlohmann::json& j) {
    try {
        HmmParams p;
        p.N = j.at("N").get<std::size_t>();
        p.K = j.at("K").get<std::size_t>();
        p.pi = j.at("pi").get<std::vector<double>>();
        auto mat = [](const nlohmann::json& a, std::size_t r, std::size_t c) {
            RealMatrix m(r, c);
            if (a.size() != r) throw Error(ErrorKind::format, "model matrix has wrong row count");
            for (std::size_t i = 0; i < r; ++i) {
                const auto row = a[i].get<std::vector<double>>();
                if (row.size() != c) throw Error(ErrorKind::format, "model matrix has wrong column count");
                std::copy(row.begin(), row.end(), m.row(i).begin());
            }
            return m;
        };
        p.A = mat(j.at("A"), p.N, p.N);
        p.means = mat(j.at("means"), p.N, p.K);
        p.vars = mat(j.at("vars"), p.N, p.K);
        validate(p);
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::format, std::string("bad model JSON: ") + e.what());
    }
}

}  // namespace semseq
