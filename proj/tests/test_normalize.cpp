#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "semseq/normalize.hpp"

using namespace semseq;

namespace {

void expect_near_all(const RealMatrix& a, const RealMatrix& b, double tol) {
    ASSERT_EQ(a.rows(), b.rows());
    ASSERT_EQ(a.cols(), b.cols());
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a.data()[k], b.data()[k], tol) << "at " << k;
}

}  // namespace

TEST(SlidingWindowNormalize, ConstantColumnIsZero) {
    DiffMatrix D(10, 2, 3.5);
    const NormDiffMatrix out = sliding_window_normalize(D, 4);
    for (double v : out.data()) EXPECT_EQ(v, 0.0);
}

TEST(SlidingWindowNormalize, SaturatedWindowIsColumnZScore) {
    std::mt19937_64 rng(1);
    const DiffMatrix D = oracle::random_matrix(12, 3, rng);
    const NormDiffMatrix out = sliding_window_normalize(D, 24);
    for (std::size_t j = 0; j < 3; ++j) {
        std::vector<double> col;
        for (std::size_t i = 0; i < 12; ++i) col.push_back(D(i, j));
        for (std::size_t i = 0; i < 12; ++i) EXPECT_NEAR(out(i, j), oracle::zscore_among(D(i, j), col), 1e-12);
    }
}

TEST(SlidingWindowNormalize, SixByOneAgainstWindowOracle) {
    const DiffMatrix D(6, 1, std::vector<double>{1.0, 4.0, 2.0, 8.0, 5.0, 7.0});
    const NormDiffMatrix out = sliding_window_normalize(D, 4);
    expect_near_all(out, oracle::sliding_normalize(D, 4), 1e-12);
    // Row 0 window is rows [0,2): {1,4}, so row 0 sits one std below the mean.
    EXPECT_NEAR(out(0, 0), -1.0, 1e-12);
}

TEST(SlidingWindowNormalize, RandomAgainstOracle) {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 3 + trial * 2;
        const DiffMatrix D = oracle::random_matrix(n, 4, rng);
        for (int R : {2, 3, 5, 8, 17}) expect_near_all(sliding_window_normalize(D, R), oracle::sliding_normalize(D, R), 1e-10);
    }
}

TEST(SlidingWindowNormalize, RejectsTinyWindow) { EXPECT_THROW(sliding_window_normalize(DiffMatrix(4, 4), 1), Error); }

TEST(SlidingWindowNormalize, GlobalAffineInvariance) {
    std::mt19937_64 rng(3);
    const DiffMatrix D = oracle::random_matrix(40, 10, rng);
    DiffMatrix E = D;
    for (double& v : E.data()) v = 3.7 * v + 11.0;
    expect_near_all(sliding_window_normalize(D, 9), sliding_window_normalize(E, 9), 1e-9);
}

TEST(SegmentNormalize, SingleSegmentEqualsSaturatedSlidingBitwise) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 5 + trial * 7;
        const DiffMatrix D = oracle::random_matrix(n, 6, rng);
        const SegmentSet whole{{{0, n}}};
        EXPECT_EQ(segment_normalize(D, whole), sliding_window_normalize(D, 2 * n));
    }
}

TEST(SegmentNormalize, TwoHalvesAgainstOracle) {
    const DiffMatrix D(6, 1, std::vector<double>{1.0, 4.0, 2.0, 8.0, 5.0, 7.0});
    const SegmentSet halves{{{0, 3}, {3, 6}}};
    const NormDiffMatrix out = segment_normalize(D, halves);
    expect_near_all(out, oracle::segment_normalize(D, {{0, 3}, {3, 6}}), 1e-12);
    // Second half {8,5,7}: mean 20/3.
    const double sd = std::sqrt(((8 - 20.0 / 3) * (8 - 20.0 / 3) + (5 - 20.0 / 3) * (5 - 20.0 / 3) +
                                 (7 - 20.0 / 3) * (7 - 20.0 / 3)) / 3.0);
    EXPECT_NEAR(out(4, 0), (5 - 20.0 / 3) / sd, 1e-12);
}

TEST(SegmentNormalize, UnitSegmentIsZero) {
    std::mt19937_64 rng(5);
    const DiffMatrix D = oracle::random_matrix(5, 3, rng);
    const NormDiffMatrix out = segment_normalize(D, SegmentSet{{{0, 2}, {2, 3}, {3, 5}}});
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(out(2, j), 0.0);
}

TEST(SegmentNormalize, RejectsNonTiling) {
    EXPECT_THROW(segment_normalize(DiffMatrix(5, 2), SegmentSet{{{0, 4}}}), Error);
    EXPECT_THROW(segment_normalize(DiffMatrix(5, 2), SegmentSet{{{0, 2}, {3, 5}}}), Error);
}

TEST(SegmentNormalize, RegionsAreStandardized) {
    std::mt19937_64 rng(6);
    const DiffMatrix D = oracle::random_matrix(50, 8, rng);
    const SegmentSet s{{{0, 7}, {7, 20}, {20, 21}, {21, 50}}};
    const NormDiffMatrix out = segment_normalize(D, s);
    for (std::size_t j = 0; j < 8; ++j) {
        for (const auto& seg : s.intervals) {
            std::vector<double> v;
            for (std::size_t i = seg.start; i < seg.end; ++i) v.push_back(out(i, j));
            const MeanStd st = mean_popstd(v);
            EXPECT_NEAR(st.mean, 0.0, 1e-9);
            if (seg.length() > 1) {
                EXPECT_NEAR(st.stddev, 1.0, 1e-9);
            }
        }
    }
}

TEST(SegmentNormalize, PerSegmentAffineInvariance) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> sc(0.1, 10.0), sh(-50.0, 50.0);
    for (int trial = 0; trial < 20; ++trial) {
        const DiffMatrix D = oracle::random_matrix(60, 12, rng);
        const SegmentSet s{{{0, 15}, {15, 40}, {40, 60}}};
        // Transform only the middle segment's rows.
        DiffMatrix E = D;
        const double a = sc(rng), b = sh(rng);
        for (std::size_t i = 15; i < 40; ++i) {
            for (std::size_t j = 0; j < 12; ++j) E(i, j) = a * D(i, j) + b;
        }
        expect_near_all(segment_normalize(D, s), segment_normalize(E, s), 1e-9);
        // Sliding windows straddling the boundary do see the change.
        const NormDiffMatrix x = sliding_window_normalize(D, 10);
        const NormDiffMatrix y = sliding_window_normalize(E, 10);
        double diff = 0.0;
        for (std::size_t j = 0; j < 12; ++j) diff = std::max(diff, std::abs(x(14, j) - y(14, j)));
        EXPECT_GT(diff, 1e-6);
    }
}
