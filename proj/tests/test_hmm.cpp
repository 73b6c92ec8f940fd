#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "semseq/hmm.hpp"

using namespace semseq;

namespace {

HmmParams two_state_1d() {
    HmmParams p;
    p.N = 2;
    p.K = 1;
    p.pi = {0.6, 0.4};
    p.A = RealMatrix(2, 2, std::vector<double>{0.7, 0.3, 0.2, 0.8});
    p.means = RealMatrix(2, 1, std::vector<double>{0.1, 0.8});
    p.vars = RealMatrix(2, 1, std::vector<double>{0.04, 0.09});
    return p;
}

double log_normal(double x, double m, double v) { return -0.5 * (std::log(2 * M_PI * v) + (x - m) * (x - m) / v); }

FeatureMatrix column(std::vector<double> v) {
    const std::size_t n = v.size();
    return FeatureMatrix(n, 1, std::move(v));
}

// Two well-separated Gaussian blocks in K dims.
FeatureMatrix blocks(std::mt19937_64& rng, std::size_t K, const std::vector<std::pair<std::size_t, double>>& spans,
                     LabelSeq& truth) {
    std::normal_distribution<double> g(0.0, 0.05);
    std::size_t T = 0;
    for (auto [len, _] : spans) T += len;
    FeatureMatrix X(T, K);
    truth.clear();
    std::size_t t = 0;
    int label = 0;
    for (auto [len, level] : spans) {
        for (std::size_t i = 0; i < len; ++i, ++t) {
            for (std::size_t k = 0; k < K; ++k) X(t, k) = level + g(rng);
            truth.push_back(label);
        }
        ++label;
    }
    return X;
}

}  // namespace

TEST(NormalizeFeatures, MinMaxPerDimension) {
    const FeatureMatrix f(3, 2, std::vector<double>{0.2, 0.5, 0.6, 0.5, 1.0, 0.5});
    const FeatureMatrix n = normalize_features(f);
    EXPECT_DOUBLE_EQ(n(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(n(1, 0), 0.5);
    EXPECT_DOUBLE_EQ(n(2, 0), 1.0);
    for (std::size_t t = 0; t < 3; ++t) EXPECT_EQ(n(t, 1), 0.0);
}

TEST(NormalizeFeatures, IdempotentAndNeedsTwoFrames) {
    std::mt19937_64 rng(1);
    const FeatureMatrix f = oracle::random_matrix(20, 5, rng);
    const FeatureMatrix once = normalize_features(f);
    EXPECT_EQ(normalize_features(once), once);
    EXPECT_THROW(normalize_features(FeatureMatrix(1, 3)), Error);
}

TEST(ForwardBackward, SingleState) {
    HmmParams p;
    p.N = 1;
    p.K = 2;
    p.pi = {1.0};
    p.A = RealMatrix(1, 1, 1.0);
    p.means = RealMatrix(1, 2, std::vector<double>{0.3, 0.6});
    p.vars = RealMatrix(1, 2, std::vector<double>{0.1, 0.2});
    const FeatureMatrix X(3, 2, std::vector<double>{0.1, 0.2, 0.5, 0.5, 0.9, 0.1});
    const auto fb = forward_backward(p, X);
    double expect = 0.0;
    for (std::size_t t = 0; t < 3; ++t) expect += log_normal(X(t, 0), 0.3, 0.1) + log_normal(X(t, 1), 0.6, 0.2);
    EXPECT_NEAR(fb.log_likelihood, expect, 1e-12 * std::abs(expect));
    for (double g : fb.gamma.data()) EXPECT_DOUBLE_EQ(g, 1.0);
    EXPECT_DOUBLE_EQ(fb.xi_sums(0, 0), 2.0);
}

TEST(ForwardBackward, HandSetInstanceMatchesPathEnumeration) {
    const HmmParams p = two_state_1d();
    const FeatureMatrix X = column({0.05, 0.2, 0.9, 0.7});
    // Explicit sum over all 16 paths of pi * prod(a) * prod(b).
    double total = 0.0;
    for (int code = 0; code < 16; ++code) {
        int z[4];
        for (int t = 0; t < 4; ++t) z[t] = (code >> t) & 1;
        double pr = p.pi[z[0]] * std::exp(log_normal(X(0, 0), p.means(z[0], 0), p.vars(z[0], 0)));
        for (int t = 1; t < 4; ++t) {
            pr *= p.A(z[t - 1], z[t]) * std::exp(log_normal(X(t, 0), p.means(z[t], 0), p.vars(z[t], 0)));
        }
        total += pr;
    }
    const double expect = std::log(total);
    const auto fb = forward_backward(p, X);
    EXPECT_NEAR(fb.log_likelihood, expect, 1e-9 * std::abs(expect));
    EXPECT_NEAR(brute_force_likelihood(p, X), expect, 1e-9 * std::abs(expect));
}

TEST(ForwardBackward, XiMarginalizesToGamma) {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t N = 1 + trial % 4;
        const HmmParams p = oracle::random_hmm(N, 3, rng);
        const FeatureMatrix X = oracle::random_matrix(2 + trial % 9, 3, rng);
        const auto fb = forward_backward(p, X);
        for (std::size_t i = 0; i < N; ++i) {
            double xs = 0.0, gs = 0.0;
            for (std::size_t j = 0; j < N; ++j) xs += fb.xi_sums(i, j);
            for (std::size_t t = 0; t + 1 < X.rows(); ++t) gs += fb.gamma(t, i);
            EXPECT_NEAR(xs, gs, 1e-9);
        }
    }
}

TEST(ForwardBackward, PosteriorsMatchPathEnumeration) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t N = 1 + trial % 3;
        const HmmParams p = oracle::random_hmm(N, 2, rng);
        const FeatureMatrix X = oracle::random_matrix(1 + trial % 6, 2, rng);
        const auto fb = forward_backward(p, X);
        const RealMatrix exact = oracle::path_posteriors(p, X);
        for (std::size_t k = 0; k < exact.size(); ++k) EXPECT_NEAR(fb.gamma.data()[k], exact.data()[k], 1e-10);
    }
}

TEST(ForwardBackward, LongSequenceDoesNotUnderflow) {
    std::mt19937_64 rng(4);
    HmmParams p = oracle::random_hmm(3, 102, rng);
    for (double& v : p.vars.data()) v = 1e-3;  // peaked densities, far-off observations
    const FeatureMatrix X = oracle::random_matrix(100000, 102, rng);
    const auto fb = forward_backward(p, X);
    EXPECT_TRUE(std::isfinite(fb.log_likelihood));
    for (std::size_t t = 0; t < X.rows(); t += 997) {
        double s = 0.0;
        for (std::size_t i = 0; i < 3; ++i) s += fb.gamma(t, i);
        EXPECT_NEAR(s, 1.0, 1e-10);
    }
}

TEST(BruteForceLikelihood, BaseCasesAndLimits) {
    const HmmParams p = two_state_1d();
    const FeatureMatrix x1 = column({0.4});
    const double expect = std::log(0.6 * std::exp(log_normal(0.4, 0.1, 0.04)) + 0.4 * std::exp(log_normal(0.4, 0.8, 0.09)));
    EXPECT_NEAR(brute_force_likelihood(p, x1), expect, 1e-12);

    HmmParams big = p;
    EXPECT_THROW(brute_force_likelihood(big, FeatureMatrix(21, 1, 0.5)), Error);  // 2^21 > 1e6
    EXPECT_NO_THROW(brute_force_likelihood(big, FeatureMatrix(19, 1, 0.5)));
}

TEST(BruteForceLikelihood, AgreesWithForwardOnRandomInstances) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t N = 1 + trial % 3;
        const HmmParams p = oracle::random_hmm(N, 1 + trial % 2, rng);
        const FeatureMatrix X = oracle::random_matrix(1 + trial % 6, p.K, rng);
        const double a = forward_backward(p, X).log_likelihood;
        const double b = brute_force_likelihood(p, X);
        EXPECT_NEAR(a, b, 1e-9 * std::max(1.0, std::abs(b)));
    }
}

TEST(PosteriorDecode, SingleStateAllZero) {
    HmmParams p;
    p.N = 1;
    p.K = 1;
    p.pi = {1.0};
    p.A = RealMatrix(1, 1, 1.0);
    p.means = RealMatrix(1, 1, 0.5);
    p.vars = RealMatrix(1, 1, 0.1);
    EXPECT_EQ(posterior_decode(p, column({0.1, 0.9, 0.4})), (LabelSeq{0, 0, 0}));
}

TEST(PosteriorDecode, HandSetT3MatchesEnumeratedArgmax) {
    const HmmParams p = two_state_1d();
    const FeatureMatrix X = column({0.1, 0.5, 0.85});
    const RealMatrix exact = oracle::path_posteriors(p, X);
    const LabelSeq got = posterior_decode(p, X);
    for (std::size_t t = 0; t < 3; ++t) EXPECT_EQ(got[t], exact(t, 0) >= exact(t, 1) ? 0 : 1);
    EXPECT_EQ(got, posterior_decode(p, X));
}

TEST(PosteriorDecode, TiesGoToLowestState) {
    const RealMatrix g(2, 3, std::vector<double>{0.4, 0.4, 0.2, 0.2, 0.4, 0.4});
    EXPECT_EQ(labels_from_posteriors(g), (LabelSeq{0, 1}));
}

TEST(PosteriorDecode, PermutingStatesPermutesLabels) {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t N = 3;
        const HmmParams p = oracle::random_hmm(N, 2, rng);
        const FeatureMatrix X = oracle::random_matrix(25, 2, rng);
        std::vector<std::size_t> perm{2, 0, 1};  // new state perm[i] = old state i
        HmmParams q = p;
        for (std::size_t i = 0; i < N; ++i) {
            q.pi[perm[i]] = p.pi[i];
            for (std::size_t k = 0; k < 2; ++k) {
                q.means(perm[i], k) = p.means(i, k);
                q.vars(perm[i], k) = p.vars(i, k);
            }
            for (std::size_t j = 0; j < N; ++j) q.A(perm[i], perm[j]) = p.A(i, j);
        }
        const LabelSeq a = posterior_decode(p, X);
        const LabelSeq b = posterior_decode(q, X);
        for (std::size_t t = 0; t < a.size(); ++t) EXPECT_EQ(static_cast<std::size_t>(b[t]), perm[a[t]]);
    }
}

TEST(BaumWelch, SingleStateIsClosedFormMle) {
    std::mt19937_64 rng(7);
    FeatureMatrix X = oracle::random_matrix(50, 4, rng);
    for (std::size_t t = 0; t < 50; ++t) X(t, 3) = 0.25;  // zero variance -> floored
    PipelineConfig cfg;
    cfg.restarts = 2;
    const auto res = baum_welch(X, 1, cfg);
    for (std::size_t k = 0; k < 4; ++k) {
        double m = 0.0;
        for (std::size_t t = 0; t < 50; ++t) m += X(t, k);
        m /= 50.0;
        double v = 0.0;
        for (std::size_t t = 0; t < 50; ++t) v += (X(t, k) - m) * (X(t, k) - m);
        v = std::max(v / 50.0, kVarianceFloor);
        EXPECT_NEAR(res.params.means(0, k), m, 1e-12);
        EXPECT_NEAR(res.params.vars(0, k), v, 1e-12);
    }
    EXPECT_EQ(res.params.vars(0, 3), kVarianceFloor);
    EXPECT_NO_THROW(validate(res.params));
    // One re-estimation reaches the optimum; the next shows no gain.
    EXPECT_LE(res.history.size(), 3u);
}

TEST(BaumWelch, HistoryNeverDecreases) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 10; ++trial) {
        const FeatureMatrix X = oracle::random_matrix(60, 3, rng);
        PipelineConfig cfg;
        cfg.seed = trial;
        cfg.restarts = 3;
        cfg.tol_loglik = 0.0;
        cfg.max_iters = 40;
        for (int r = 0; r < 3; ++r) {
            std::mt19937_64 init_rng(r + 100 * trial);
            const auto run = baum_welch_from(detail::random_init(X, 3, init_rng), X, 40, 0.0);
            for (std::size_t i = 1; i < run.history.size(); ++i) EXPECT_GE(run.history[i], run.history[i - 1] - 1e-8);
        }
        const auto best = baum_welch(X, 3, cfg);
        EXPECT_NO_THROW(validate(best.params));
    }
}

TEST(BaumWelch, RecoversTwoBlocks) {
    std::mt19937_64 rng(9);
    LabelSeq truth;
    const FeatureMatrix X = blocks(rng, 6, {{40, 0.2}, {60, 0.8}}, truth);
    PipelineConfig cfg;
    const auto res = baum_welch(X, 2, cfg);
    const LabelSeq got = posterior_decode(res.params, X);
    EXPECT_GE(oracle::permutation_agreement(got, truth, 2), 0.95);
}

TEST(BaumWelch, ReproducibleForFixedSeed) {
    std::mt19937_64 rng(10);
    const FeatureMatrix X = oracle::random_matrix(80, 5, rng);
    PipelineConfig cfg;
    cfg.seed = 1234;
    cfg.restarts = 4;
    const auto a = baum_welch(X, 3, cfg);
    const auto b = baum_welch(X, 3, cfg);
    EXPECT_EQ(a.params, b.params);
    EXPECT_EQ(a.history, b.history);
    EXPECT_EQ(a.restart, b.restart);
}

TEST(BaumWelch, SelectsBestRestart) {
    std::mt19937_64 rng(11);
    const FeatureMatrix X = oracle::random_matrix(60, 3, rng);
    PipelineConfig cfg;
    cfg.seed = 5;
    cfg.restarts = 5;
    const auto best = baum_welch(X, 3, cfg);
    PipelineConfig single = cfg;
    for (int r = 0; r < 5; ++r) {
        // Each restart alone; the selected run must be at least as good.
        std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), 0u, static_cast<std::uint32_t>(r)};
        std::mt19937_64 init_rng(seq);
        const auto run = baum_welch_from(detail::random_init(X, 3, init_rng), X, cfg.max_iters, cfg.tol_loglik);
        EXPECT_GE(best.history.back(), run.history.back());
    }
}

TEST(BaumWelch, Errors) {
    PipelineConfig cfg;
    EXPECT_THROW(baum_welch(FeatureMatrix(2, 3, 0.5), 3, cfg), Error);
    EXPECT_THROW(baum_welch(FeatureMatrix(5, 3, 0.5), 0, cfg), Error);
}

TEST(HmmJson, RoundTrip) {
    std::mt19937_64 rng(12);
    const HmmParams p = oracle::random_hmm(3, 4, rng);
    EXPECT_EQ(hmm_from_json(nlohmann::json::parse(hmm_to_json(p).dump())), p);
}

TEST(HmmParams, ValidateRejectsBadDistributions) {
    HmmParams p = two_state_1d();
    EXPECT_NO_THROW(validate(p));
    p.pi = {0.5, 0.6};
    EXPECT_THROW(validate(p), Error);
    p = two_state_1d();
    p.vars(0, 0) = 1e-9;
    EXPECT_THROW(validate(p), Error);
}
