#include <gtest/gtest.h>

#include <random>

#include "semseq/segmentation.hpp"

using namespace semseq;

TEST(LabelsToSegments, RecurringLabelSplits) {
    const SegmentSet s = labels_to_segments({0, 0, 1, 1, 0});
    EXPECT_EQ(s.intervals, (std::vector<Segment>{{0, 2}, {2, 4}, {4, 5}}));
}

TEST(LabelsToSegments, ConstantAndAlternating) {
    EXPECT_EQ(labels_to_segments(LabelSeq(9, 2)).intervals, (std::vector<Segment>{{0, 9}}));
    const SegmentSet alt = labels_to_segments({0, 1, 0, 1, 0, 1});
    ASSERT_EQ(alt.intervals.size(), 6u);
    for (std::size_t k = 0; k < 6; ++k) EXPECT_EQ(alt.intervals[k], (Segment{k, k + 1}));
}

TEST(LabelsToSegments, EmptyIsAnError) { EXPECT_THROW(labels_to_segments({}), Error); }

TEST(LabelsToSegments, TilesAndIsLabelConstant) {
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> lab(0, 3), len(1, 200), flip(0, 9);
    for (int trial = 0; trial < 200; ++trial) {
        LabelSeq l(len(rng));
        l[0] = lab(rng);
        for (std::size_t t = 1; t < l.size(); ++t) l[t] = flip(rng) == 0 ? lab(rng) : l[t - 1];
        const SegmentSet s = labels_to_segments(l);
        EXPECT_TRUE(tiles(s, l.size()));
        std::size_t total = 0;
        for (std::size_t k = 0; k < s.intervals.size(); ++k) {
            const auto& seg = s.intervals[k];
            total += seg.length();
            for (std::size_t t = seg.start; t < seg.end; ++t) EXPECT_EQ(l[t], l[seg.start]);
            if (k > 0) {
                EXPECT_NE(l[seg.start], l[seg.start - 1]);  // maximal runs
            }
        }
        EXPECT_EQ(total, l.size());
    }
}

TEST(MergeShortSegments, IdentityForMinLenOne) {
    const SegmentSet s{{{0, 1}, {1, 2}, {2, 7}}};
    EXPECT_EQ(merge_short_segments(s, 1), s);
    EXPECT_EQ(merge_short_segments(s, 0), s);
}

TEST(MergeShortSegments, AbsorbIntoLeft) {
    const SegmentSet s{{{0, 2}, {2, 3}, {3, 10}}};
    EXPECT_EQ(merge_short_segments(s, 2).intervals, (std::vector<Segment>{{0, 3}, {3, 10}}));
}

TEST(MergeShortSegments, ShortFirstGoesRight) {
    const SegmentSet s{{{0, 1}, {1, 6}, {6, 10}}};
    EXPECT_EQ(merge_short_segments(s, 3).intervals, (std::vector<Segment>{{0, 6}, {6, 10}}));
}

TEST(MergeShortSegments, SingleIntervalUnchanged) {
    const SegmentSet s{{{0, 4}}};
    EXPECT_EQ(merge_short_segments(s, 100), s);
}

TEST(MergeShortSegments, PropertyNoShortIntervalsRemain) {
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> lab(0, 2), len(1, 120), flip(0, 3), ml(1, 8);
    for (int trial = 0; trial < 300; ++trial) {
        LabelSeq l(len(rng));
        l[0] = lab(rng);
        for (std::size_t t = 1; t < l.size(); ++t) l[t] = flip(rng) == 0 ? lab(rng) : l[t - 1];
        const std::size_t min_len = ml(rng);
        const SegmentSet m = merge_short_segments(labels_to_segments(l), min_len);
        EXPECT_TRUE(tiles(m, l.size()));
        if (l.size() >= min_len) {
            for (const auto& seg : m.intervals) EXPECT_GE(seg.length(), min_len);
        } else {
            EXPECT_EQ(m.intervals.size(), 1u);
        }
    }
}

TEST(SegmentOf, HalfOpenLookup) {
    const SegmentSet s{{{0, 2}, {2, 5}}};
    EXPECT_EQ(segment_of(s, 1), (Segment{0, 2}));
    EXPECT_EQ(segment_of(s, 2), (Segment{2, 5}));
    EXPECT_EQ(segment_of(s, 4), (Segment{2, 5}));
    EXPECT_THROW(segment_of(s, 5), Error);
}

TEST(Tiles, DetectsGapsAndOverlaps) {
    EXPECT_TRUE(tiles(SegmentSet{{{0, 3}, {3, 4}}}, 4));
    EXPECT_FALSE(tiles(SegmentSet{{{0, 3}, {4, 5}}}, 5));
    EXPECT_FALSE(tiles(SegmentSet{{{0, 3}, {2, 5}}}, 5));
    EXPECT_FALSE(tiles(SegmentSet{{{0, 3}}}, 4));
    EXPECT_FALSE(tiles(SegmentSet{{{1, 3}}}, 3));
}
