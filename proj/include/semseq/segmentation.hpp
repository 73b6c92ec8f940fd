#pragma once

#include <algorithm>
#include <vector>

#include "semseq/core.hpp"
#include "semseq/types.hpp"

namespace semseq {

/// Half-open frame interval [start, end).
struct Segment {
    std::size_t start = 0;
    std::size_t end = 0;

    std::size_t length() const noexcept { return end - start; }
    bool operator==(const Segment&) const = default;
};

/// Ordered intervals exactly tiling [0, T).
struct SegmentSet {
    std::vector<Segment> intervals;

    std::size_t total() const noexcept { return intervals.empty() ? 0 : intervals.back().end; }
    bool operator==(const SegmentSet&) const = default;
};

/// True when the intervals are nonempty, contiguous, start at 0 and end at T.
inline bool tiles(const SegmentSet& s, std::size_t T) {
    if (s.intervals.empty()) return T == 0;
    std::size_t cursor = 0;
    for (const auto& seg : s.intervals) {
        if (seg.start != cursor || seg.end <= seg.start) return false;
        cursor = seg.end;
    }
    return cursor == T;
}

/// Maximal runs of equal consecutive labels. A label value that recurs later
/// starts a new interval.
inline SegmentSet labels_to_segments(const LabelSeq& labels) {
    if (labels.empty()) throw Error(ErrorKind::degenerate, "empty label sequence");
    SegmentSet out;
    std::size_t start = 0;
    for (std::size_t t = 1; t <= labels.size(); ++t) {
        if (t == labels.size() || labels[t] != labels[t - 1]) {
            out.intervals.push_back({start, t});
            start = t;
        }
    }
    return out;
}

/// Left-to-right: an interval shorter than min_len is absorbed into its left
/// neighbour, or into the right one when it is first.
inline SegmentSet merge_short_segments(const SegmentSet& s, std::size_t min_len) {
    if (min_len <= 1 || s.intervals.size() <= 1) return s;
    SegmentSet out;
    bool pending_first = false;  // first interval was short and waits to be absorbed rightwards
    for (const auto& seg : s.intervals) {
        if (out.intervals.empty()) {
            out.intervals.push_back(seg);
            pending_first = seg.length() < min_len;
            continue;
        }
        if (pending_first) {
            out.intervals.back().end = seg.end;
            pending_first = out.intervals.back().length() < min_len;
            continue;
        }
        if (seg.length() < min_len) {
            out.intervals.back().end = seg.end;
        } else {
            out.intervals.push_back(seg);
        }
    }
    return out;
}

inline Segment segment_of(const SegmentSet& s, std::size_t t) {
    if (s.intervals.empty() || t >= s.intervals.back().end) {
        throw Error(ErrorKind::range, "frame index " + std::to_string(t) + " outside the segmented range");
    }
    auto it = std::upper_bound(s.intervals.begin(), s.intervals.end(), t,
                               [](std::size_t v, const Segment& seg) { return v < seg.end; });
    return *it;
}

/// Label of each interval (taken from its first frame), for CSV dumps.
inline std::vector<int> segment_labels(const SegmentSet& s, const LabelSeq& labels) {
    std::vector<int> out;
    out.reserve(s.intervals.size());
    for (const auto& seg : s.intervals) out.push_back(labels.at(seg.start));
    return out;
}

}  // namespace semseq
