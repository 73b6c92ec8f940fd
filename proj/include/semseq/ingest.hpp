#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "semseq/config.hpp"
#include "semseq/core.hpp"
#include "semseq/evaluate.hpp"
#include "semseq/search.hpp"
#include "semseq/segmentation.hpp"
#include "semseq/types.hpp"

namespace semseq {

namespace fs = std::filesystem;

namespace detail {

inline std::ifstream open_in(const fs::path& p, bool binary = false) {
    std::ifstream in(p, binary ? std::ios::binary : std::ios::in);
    if (!in) throw Error(ErrorKind::io, "cannot open for reading: " + p.string());
    return in;
}

inline std::ofstream open_out(const fs::path& p, bool binary = false) {
    std::ofstream out(p, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot open for writing: " + p.string());
    return out;
}

inline void finish_write(std::ofstream& out, const fs::path& p) {
    out.flush();
    if (!out) throw Error(ErrorKind::io, "write failed: " + p.string());
}

// Reads the next whitespace-delimited PGM header token, skipping # comments.
inline std::string pgm_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {}
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) return tok;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    return tok;
}

// Nonblank lines of a text file, with their 1-based line numbers.
inline std::vector<std::pair<std::size_t, std::string>> read_lines(const fs::path& p) {
    auto in = open_in(p);
    std::vector<std::pair<std::size_t, std::string>> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        out.emplace_back(n, line);
    }
    return out;
}

inline std::string where(const fs::path& p, std::size_t line) {
    return p.string() + ":" + std::to_string(line) + ": ";
}

}  // namespace detail

// ---------------------------------------------------------------- frames

/// Binary PGM (P5) with maxval 255.
inline GrayFrame read_pgm(const fs::path& path) {
    auto in = detail::open_in(path, true);
    if (detail::pgm_token(in) != "P5") throw Error(ErrorKind::format, path.string() + ": not a binary PGM (P5)");
    long long w = 0, h = 0, maxval = 0;
    try {
        w = parse_integer(detail::pgm_token(in));
        h = parse_integer(detail::pgm_token(in));
        maxval = parse_integer(detail::pgm_token(in));
    } catch (const Error&) {
        throw Error(ErrorKind::format, path.string() + ": malformed PGM header");
    }
    if (maxval != 255) throw Error(ErrorKind::format, path.string() + ": PGM maxval must be 255");
    if (w < 1 || h < 1) throw Error(ErrorKind::format, path.string() + ": PGM has zero size");
    std::vector<std::uint8_t> px(static_cast<std::size_t>(w * h));
    in.read(reinterpret_cast<char*>(px.data()), static_cast<std::streamsize>(px.size()));
    if (in.gcount() != static_cast<std::streamsize>(px.size())) {
        throw Error(ErrorKind::format, path.string() + ": truncated PGM pixel data");
    }
    return GrayFrame(static_cast<std::size_t>(w), static_cast<std::size_t>(h), std::move(px));
}

inline void write_pgm(const GrayFrame& f, const fs::path& path) {
    auto out = detail::open_out(path, true);
    out << "P5\n" << f.width << ' ' << f.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(f.intensities.data()), static_cast<std::streamsize>(f.intensities.size()));
    detail::finish_write(out, path);
}

/// Zero-padded name of frame `index`, e.g. 000042.pgm.
inline std::string frame_filename(std::size_t index) {
    std::string s = std::to_string(index);
    if (s.size() < 6) s.insert(0, 6 - s.size(), '0');
    return s + ".pgm";
}

/// Loads every `<digits>.pgm` in `dir`, ordered by numeric name. Other files
/// are ignored.
inline std::vector<GrayFrame> load_frame_dir(const fs::path& dir) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw Error(ErrorKind::io, "frame directory not found: " + dir.string());
    std::vector<std::pair<unsigned long long, fs::path>> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".pgm") continue;
        const std::string stem = entry.path().stem().string();
        if (stem.empty() || !std::all_of(stem.begin(), stem.end(), [](unsigned char c) { return std::isdigit(c); })) {
            throw Error(ErrorKind::format, "frame file name is not numeric: " + entry.path().string());
        }
        files.emplace_back(std::stoull(stem), entry.path());
    }
    if (files.empty()) throw Error(ErrorKind::degenerate, "no frames in " + dir.string());
    std::sort(files.begin(), files.end());
    for (std::size_t i = 1; i < files.size(); ++i) {
        if (files[i].first == files[i - 1].first) {
            throw Error(ErrorKind::format, "duplicate frame number: " + files[i].second.string());
        }
    }
    std::vector<GrayFrame> frames;
    frames.reserve(files.size());
    for (const auto& [num, path] : files) {
        frames.push_back(read_pgm(path));
        if (frames.back().width != frames.front().width || frames.back().height != frames.front().height) {
            throw Error(ErrorKind::dimension, "frame dimensions differ: " + path.string());
        }
    }
    return frames;
}

inline void write_frame_dir(std::span<const GrayFrame> frames, const fs::path& dir) {
    fs::create_directories(dir);
    for (std::size_t i = 0; i < frames.size(); ++i) write_pgm(frames[i], dir / frame_filename(i));
}

// ---------------------------------------------------------------- numeric CSV

/// Headerless numeric CSV into a matrix. Rows must have equal width.
inline RealMatrix read_numeric_csv(const fs::path& path) {
    const auto lines = detail::read_lines(path);
    if (lines.empty()) throw Error(ErrorKind::degenerate, path.string() + ": no rows");
    std::vector<double> data;
    std::size_t cols = 0;
    for (const auto& [n, line] : lines) {
        const auto cells = split_csv_line(line);
        if (cols == 0) cols = cells.size();
        if (cells.size() != cols) {
            throw Error(ErrorKind::format, detail::where(path, n) + "ragged row: expected " + std::to_string(cols) +
                                               " columns, found " + std::to_string(cells.size()));
        }
        for (auto c : cells) {
            try {
                data.push_back(parse_real(c));
            } catch (const Error& e) {
                throw Error(ErrorKind::format, detail::where(path, n) + e.what());
            }
        }
    }
    return RealMatrix(lines.size(), cols, std::move(data));
}

inline void write_numeric_csv(const RealMatrix& m, const fs::path& path) {
    auto out = detail::open_out(path);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (c) out << ',';
            out << format_real(m(r, c));
        }
        out << '\n';
    }
    detail::finish_write(out, path);
}

/// Per-frame attribute probabilities; every value must be finite and in [0, 1].
inline FeatureMatrix load_attributes(const fs::path& path) {
    FeatureMatrix f = read_numeric_csv(path);
    for (std::size_t t = 0; t < f.rows(); ++t) {
        for (std::size_t k = 0; k < f.cols(); ++k) {
            const double v = f(t, k);
            if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
                throw Error(ErrorKind::range, path.string() + ": attribute value out of [0,1] at row " +
                                                  std::to_string(t) + ", column " + std::to_string(k));
            }
        }
    }
    return f;
}

inline void write_attributes(const FeatureMatrix& f, const fs::path& path) { write_numeric_csv(f, path); }

// ---------------------------------------------------------------- ground truth

/// `query_index,reference_index` rows. Bounds are checked when given (0 = unchecked).
inline GroundTruth load_ground_truth(const fs::path& path, std::size_t n_query = 0, std::size_t n_ref = 0) {
    GroundTruth gt;
    for (const auto& [n, line] : detail::read_lines(path)) {
        const auto cells = split_csv_line(line);
        if (cells.size() != 2) throw Error(ErrorKind::format, detail::where(path, n) + "expected 2 columns");
        long long q = 0, r = 0;
        try {
            q = parse_integer(cells[0]);
            r = parse_integer(cells[1]);
        } catch (const Error& e) {
            throw Error(ErrorKind::format, detail::where(path, n) + e.what());
        }
        if (q < 0 || r < 0 || (n_query && q >= static_cast<long long>(n_query)) ||
            (n_ref && r >= static_cast<long long>(n_ref))) {
            throw Error(ErrorKind::range, detail::where(path, n) + "index out of range");
        }
        if (!gt.pairs.emplace(static_cast<std::size_t>(q), static_cast<std::size_t>(r)).second) {
            throw Error(ErrorKind::format, detail::where(path, n) + "duplicate query index " + std::to_string(q));
        }
    }
    return gt;
}

inline void write_ground_truth(const GroundTruth& gt, const fs::path& path) {
    auto out = detail::open_out(path);
    for (const auto& [q, r] : gt.pairs) out << q << ',' << r << '\n';
    detail::finish_write(out, path);
}

// ---------------------------------------------------------------- segments

/// `start,end,label` with a header row.
inline void write_segments(const SegmentSet& s, const std::vector<int>& labels, const fs::path& path) {
    auto out = detail::open_out(path);
    out << "start,end,label\n";
    for (std::size_t k = 0; k < s.intervals.size(); ++k) {
        out << s.intervals[k].start << ',' << s.intervals[k].end << ',' << (k < labels.size() ? labels[k] : 0) << '\n';
    }
    detail::finish_write(out, path);
}

inline SegmentSet load_segments(const fs::path& path) {
    SegmentSet s;
    for (const auto& [n, line] : detail::read_lines(path)) {
        if (line.starts_with("start")) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() < 2) throw Error(ErrorKind::format, detail::where(path, n) + "expected start,end[,label]");
        try {
            const long long a = parse_integer(cells[0]);
            const long long b = parse_integer(cells[1]);
            if (a < 0 || b < 0) throw Error(ErrorKind::range, "negative segment bound");
            s.intervals.push_back({static_cast<std::size_t>(a), static_cast<std::size_t>(b)});
        } catch (const Error& e) {
            throw Error(e.kind(), detail::where(path, n) + e.what());
        }
    }
    if (!tiles(s, s.total())) throw Error(ErrorKind::format, path.string() + ": segments are not contiguous from 0");
    return s;
}

// ---------------------------------------------------------------- matches

/// `query_index,ref_index,score,margin,accepted` with a header row.
inline void write_matches(std::span<const TrajectoryMatch> ms, const fs::path& path) {
    auto out = detail::open_out(path);
    out << "query_index,ref_index,score,margin,accepted\n";
    for (const auto& m : ms) {
        out << m.query_index << ',' << m.ref_index << ',' << format_real(m.score) << ',' << format_real(m.margin)
            << ',' << (m.accepted ? 1 : 0) << '\n';
    }
    detail::finish_write(out, path);
}

inline std::vector<TrajectoryMatch> load_matches(const fs::path& path) {
    std::vector<TrajectoryMatch> ms;
    for (const auto& [n, line] : detail::read_lines(path)) {
        if (line.starts_with("query_index")) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != 5) throw Error(ErrorKind::format, detail::where(path, n) + "expected 5 columns");
        try {
            TrajectoryMatch m;
            const long long q = parse_integer(cells[0]);
            const long long r = parse_integer(cells[1]);
            if (q < 0 || r < 0) throw Error(ErrorKind::range, "negative index");
            m.query_index = static_cast<std::size_t>(q);
            m.ref_index = static_cast<std::size_t>(r);
            m.score = parse_real(cells[2]);
            m.margin = parse_real(cells[3]);
            m.accepted = parse_integer(cells[4]) != 0;
            ms.push_back(m);
        } catch (const Error& e) {
            throw Error(e.kind(), detail::where(path, n) + e.what());
        }
    }
    return ms;
}

// ---------------------------------------------------------------- reports

enum class ReportFormat { csv, json };

inline nlohmann::json report_to_json(const EvaluationReport& r) {
    nlohmann::json curve = nlohmann::json::array();
    for (const auto& p : r.curve) {
        curve.push_back({{"mu", p.mu},
                         {"true_positives", p.true_positives},
                         {"false_positives", p.false_positives},
                         {"accepted_count", p.accepted_count},
                         {"precision", p.precision},
                         {"recall", p.recall},
                         {"f1", p.f1}});
    }
    return {{"curve", curve}, {"max_f1", r.max_f1}, {"argmax_mu", r.argmax_mu}, {"config", r.config_echo}};
}

inline EvaluationReport report_from_json(const nlohmann::json& j) {
    try {
        EvaluationReport r;
        for (const auto& p : j.at("curve")) {
            PRPoint pt;
            pt.mu = p.at("mu").get<double>();
            pt.true_positives = p.at("true_positives").get<std::size_t>();
            pt.false_positives = p.at("false_positives").get<std::size_t>();
            pt.accepted_count = p.at("accepted_count").get<std::size_t>();
            pt.precision = p.at("precision").get<double>();
            pt.recall = p.at("recall").get<double>();
            pt.f1 = p.at("f1").get<double>();
            r.curve.push_back(pt);
        }
        r.max_f1 = j.at("max_f1").get<double>();
        r.argmax_mu = j.at("argmax_mu").get<double>();
        from_json(j.at("config"), r.config_echo);
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::format, std::string("bad report JSON: ") + e.what());
    }
}

/// CSV: header `mu,precision,recall,f1`, one row per curve point, then a
/// summary row `max_f1,<argmax_mu>,<max_f1>` (omitted for an empty curve).
inline void write_report(const EvaluationReport& r, const fs::path& path, ReportFormat format) {
    auto out = detail::open_out(path);
    if (format == ReportFormat::json) {
        out << report_to_json(r).dump(2) << '\n';
    } else {
        out << "mu,precision,recall,f1\n";
        for (const auto& p : r.curve) {
            out << format_real(p.mu) << ',' << format_real(p.precision) << ',' << format_real(p.recall) << ','
                << format_real(p.f1) << '\n';
        }
        if (!r.curve.empty()) out << "max_f1," << format_real(r.argmax_mu) << ',' << format_real(r.max_f1) << '\n';
    }
    detail::finish_write(out, path);
}

inline EvaluationReport read_report_json(const fs::path& path) {
    auto in = detail::open_in(path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::format, path.string() + ": " + e.what());
    }
    return report_from_json(j);
}

/// Reads the CSV form back. Only mu/precision/recall/f1 and the summary are
/// present; counts stay zero.
inline EvaluationReport read_report_csv(const fs::path& path) {
    EvaluationReport r;
    for (const auto& [n, line] : detail::read_lines(path)) {
        const auto cells = split_csv_line(line);
        if (cells.empty() || cells[0] == "mu") continue;
        if (cells[0] == "max_f1") {
            if (cells.size() != 3) throw Error(ErrorKind::format, detail::where(path, n) + "bad summary row");
            r.argmax_mu = parse_real(cells[1]);
            r.max_f1 = parse_real(cells[2]);
            continue;
        }
        if (cells.size() != 4) throw Error(ErrorKind::format, detail::where(path, n) + "expected 4 columns");
        PRPoint p;
        p.mu = parse_real(cells[0]);
        p.precision = parse_real(cells[1]);
        p.recall = parse_real(cells[2]);
        p.f1 = parse_real(cells[3]);
        r.curve.push_back(p);
    }
    return r;
}

}  // namespace semseq
