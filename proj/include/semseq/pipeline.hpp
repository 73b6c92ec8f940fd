#pragma once

#include <chrono>
#include <ctime>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "semseq/config.hpp"
#include "semseq/diffmatrix.hpp"
#include "semseq/evaluate.hpp"
#include "semseq/hmm.hpp"
#include "semseq/ingest.hpp"
#include "semseq/normalize.hpp"
#include "semseq/preprocess.hpp"
#include "semseq/search.hpp"
#include "semseq/segmentation.hpp"
#include "semseq/synth.hpp"

namespace semseq {

inline constexpr const char* kToolVersion = "0.1.0";

enum class Method { vanilla, semantic };

inline const char* to_string(Method m) { return m == Method::vanilla ? "vanilla" : "semantic"; }

inline Method parse_method(const std::string& s) {
    if (s == "vanilla") return Method::vanilla;
    if (s == "semantic") return Method::semantic;
    throw Error(ErrorKind::config, "unknown method '" + s + "' (expected vanilla or semantic)");
}

// ---------------------------------------------------------------- in-memory stages

struct Segmentation {
    BaumWelchResult model;
    LabelSeq labels;
    SegmentSet segments;
};

/// normalize_features -> baum_welch -> posterior_decode -> labels_to_segments
/// (-> merge_short_segments when cfg.min_segment_len > 1).
inline Segmentation segment_reference(const FeatureMatrix& attributes, const PipelineConfig& cfg) {
    validate(cfg);
    const FeatureMatrix X = normalize_features(attributes);
    Segmentation out;
    out.model = baum_welch(X, static_cast<std::size_t>(cfg.N), cfg);
    out.labels = posterior_decode(out.model.params, X);
    out.segments = merge_short_segments(labels_to_segments(out.labels), static_cast<std::size_t>(cfg.min_segment_len));
    return out;
}

inline NormDiffMatrix normalize_for(Method method, const DiffMatrix& D, const PipelineConfig& cfg,
                                    const SegmentSet* segments) {
    if (method == Method::semantic) {
        if (!segments) throw Error(ErrorKind::config, "semantic method requires reference segments");
        return segment_normalize(D, *segments);
    }
    return sliding_window_normalize(D, static_cast<std::size_t>(cfg.R));
}

inline std::vector<TrajectoryMatch> match_frames(std::span<const GrayFrame> refs, std::span<const GrayFrame> queries,
                                                 const PipelineConfig& cfg, Method method,
                                                 const SegmentSet* segments) {
    const auto r = preprocess_sequence(refs, cfg);
    const auto q = preprocess_sequence(queries, cfg);
    const DiffMatrix D = build_difference_matrix(r, q, cfg);
    return match_sequence(normalize_for(method, D, cfg, segments), cfg);
}

// ---------------------------------------------------------------- run manifest

struct RunManifest {
    std::string command;
    std::string config_path;
    std::map<std::string, std::string> inputs;
    std::string output_dir;
    std::string method;
    PipelineConfig config;
    std::string started_at;
    std::string finished_at;
};

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// manifest.json carries the timestamps; config.json is the deterministic
/// echo of the effective configuration.
inline void write_run_files(const RunManifest& m) {
    const fs::path dir(m.output_dir);
    nlohmann::json j{{"command", m.command},         {"config_path", m.config_path}, {"inputs", m.inputs},
                     {"output_dir", m.output_dir},   {"method", m.method},           {"config", m.config},
                     {"started_at", m.started_at},   {"finished_at", m.finished_at}, {"tool_version", kToolVersion}};
    auto out = detail::open_out(dir / "manifest.json");
    out << j.dump(2) << '\n';
    detail::finish_write(out, dir / "manifest.json");
    auto cfg_out = detail::open_out(dir / "config.json");
    cfg_out << nlohmann::json(m.config).dump(2) << '\n';
    detail::finish_write(cfg_out, dir / "config.json");
}

// ---------------------------------------------------------------- subcommands

struct SegmentOptions {
    std::string attributes_path;
    std::string output_dir;
    std::string config_path;
};

/// Writes segments.csv (start,end,label), labels.csv and model.json.
inline Segmentation cmd_segment(const SegmentOptions& opt, const PipelineConfig& cfg) {
    RunManifest man{"segment", opt.config_path, {{"attributes", opt.attributes_path}}, opt.output_dir, "", cfg,
                    utc_timestamp(), ""};
    const FeatureMatrix attrs = load_attributes(opt.attributes_path);
    Segmentation seg = segment_reference(attrs, cfg);
    const fs::path dir(opt.output_dir);
    fs::create_directories(dir);
    write_segments(seg.segments, segment_labels(seg.segments, seg.labels), dir / "segments.csv");
    {
        auto out = detail::open_out(dir / "labels.csv");
        for (int l : seg.labels) out << l << '\n';
        detail::finish_write(out, dir / "labels.csv");
    }
    {
        nlohmann::json model = hmm_to_json(seg.model.params);
        model["log_likelihood_history"] = seg.model.history;
        model["restart"] = seg.model.restart;
        auto out = detail::open_out(dir / "model.json");
        out << model.dump(2) << '\n';
        detail::finish_write(out, dir / "model.json");
    }
    man.finished_at = utc_timestamp();
    write_run_files(man);
    return seg;
}

struct MatchOptions {
    std::string ref_dir;
    std::string query_dir;
    std::string output_dir;
    std::string config_path;
    Method method = Method::vanilla;
    std::string segments_path;  // required for semantic
    bool dump_diff = false;     // writes D.csv
    bool dump_norm = false;     // writes Dn.csv
};

inline std::vector<TrajectoryMatch> cmd_match(const MatchOptions& opt, const PipelineConfig& cfg) {
    validate(cfg);
    std::optional<SegmentSet> segments;
    if (opt.method == Method::semantic) {
        if (opt.segments_path.empty()) throw Error(ErrorKind::config, "method semantic requires --segments");
        segments = load_segments(opt.segments_path);
    } else if (cfg.R < 2) {
        throw Error(ErrorKind::config, "method vanilla requires R >= 2");
    }
    RunManifest man{"match", opt.config_path, {{"ref", opt.ref_dir}, {"query", opt.query_dir}}, opt.output_dir,
                    to_string(opt.method), cfg, utc_timestamp(), ""};
    if (segments) man.inputs["segments"] = opt.segments_path;

    const auto refs = load_frame_dir(opt.ref_dir);
    const auto queries = load_frame_dir(opt.query_dir);
    if (segments && segments->total() != refs.size()) {
        throw Error(ErrorKind::dimension, "segments cover " + std::to_string(segments->total()) +
                                              " frames but the reference has " + std::to_string(refs.size()));
    }
    const DiffMatrix D = build_difference_matrix(preprocess_sequence(refs, cfg), preprocess_sequence(queries, cfg), cfg);
    const NormDiffMatrix Dn = normalize_for(opt.method, D, cfg, segments ? &*segments : nullptr);
    auto matches = match_sequence(Dn, cfg);

    const fs::path dir(opt.output_dir);
    fs::create_directories(dir);
    write_matches(matches, dir / "matches.csv");
    if (opt.dump_diff) write_numeric_csv(D, dir / "D.csv");
    if (opt.dump_norm) write_numeric_csv(Dn, dir / "Dn.csv");
    man.finished_at = utc_timestamp();
    write_run_files(man);
    return matches;
}

struct EvalOptions {
    std::string matches_path;
    std::string ground_truth_path;
    std::string output_dir;
    std::string config_path;
    std::vector<double> mu_grid;  // empty = 101 points over the observed margins
};

/// Writes report.csv and report.json. Tolerance comes from cfg.gt_tolerance.
inline EvaluationReport cmd_eval(const EvalOptions& opt, const PipelineConfig& cfg) {
    validate(cfg);
    RunManifest man{"eval", opt.config_path, {{"matches", opt.matches_path}, {"ground_truth", opt.ground_truth_path}},
                    opt.output_dir, "", cfg, utc_timestamp(), ""};
    const auto matches = load_matches(opt.matches_path);
    const GroundTruth gt = load_ground_truth(opt.ground_truth_path);
    const EvaluationReport rep = evaluate(matches, gt, cfg, opt.mu_grid);
    const fs::path dir(opt.output_dir);
    fs::create_directories(dir);
    write_report(rep, dir / "report.csv", ReportFormat::csv);
    write_report(rep, dir / "report.json", ReportFormat::json);
    man.finished_at = utc_timestamp();
    write_run_files(man);
    return rep;
}

// ---------------------------------------------------------------- corpus layout

/// Directory layout shared by `synth` output and `sweep` input:
///   ref/NNNNNN.pgm, query/NNNNNN.pgm, ref_attributes.csv, ground_truth.csv,
///   zones.csv (start,end,label of the generating zones).
struct Corpus {
    std::vector<GrayFrame> refs;
    std::vector<GrayFrame> queries;
    FeatureMatrix ref_attributes;
    GroundTruth ground_truth;
};

inline void write_corpus(const Corpus& c, const SynthTraversal& ref, const fs::path& dir) {
    fs::create_directories(dir);
    write_frame_dir(c.refs, dir / "ref");
    write_frame_dir(c.queries, dir / "query");
    write_attributes(c.ref_attributes, dir / "ref_attributes.csv");
    write_ground_truth(c.ground_truth, dir / "ground_truth.csv");
    const SegmentSet zones = labels_to_segments(ref.zone_labels);
    write_segments(zones, segment_labels(zones, ref.zone_labels), dir / "zones.csv");
}

inline Corpus load_corpus(const fs::path& dir) {
    Corpus c;
    c.refs = load_frame_dir(dir / "ref");
    c.queries = load_frame_dir(dir / "query");
    c.ref_attributes = load_attributes(dir / "ref_attributes.csv");
    if (c.ref_attributes.rows() != c.refs.size()) {
        throw Error(ErrorKind::dimension, "attribute rows do not match the reference frame count");
    }
    c.ground_truth = load_ground_truth(dir / "ground_truth.csv", c.queries.size(), c.refs.size());
    return c;
}

struct SynthOptions {
    std::string preset = "three-zone";  // three-zone | inversion
    std::string output_dir;
    std::size_t n_frames = 200;
    std::uint64_t seed = 0;
};

inline std::pair<SynthSpec, std::vector<QueryZoneTransform>> synth_preset(const SynthOptions& opt) {
    if (opt.preset == "three-zone") {
        SynthSpec s = three_zone_spec(opt.n_frames, opt.seed);
        return {s, identity_transforms(s)};
    }
    if (opt.preset == "inversion") {
        SynthSpec s = inversion_spec(opt.n_frames, opt.seed);
        return {s, inversion_query(s)};
    }
    throw Error(ErrorKind::config, "unknown synth preset '" + opt.preset + "' (expected three-zone or inversion)");
}

inline Corpus make_corpus(const SynthSpec& spec, const std::vector<QueryZoneTransform>& query,
                          SynthTraversal* traversal_out = nullptr) {
    SynthTraversal ref = generate_traversal(spec);
    SynthQuery q = generate_query(spec, query);
    Corpus c{ref.frames, std::move(q.frames), ref.attributes, std::move(q.ground_truth)};
    if (traversal_out) *traversal_out = std::move(ref);
    return c;
}

inline Corpus cmd_synth(const SynthOptions& opt) {
    const auto [spec, query] = synth_preset(opt);
    SynthTraversal ref;
    Corpus c = make_corpus(spec, query, &ref);
    write_corpus(c, ref, opt.output_dir);
    return c;
}

// ---------------------------------------------------------------- sweep

struct SweepRow {
    int R = 0;
    int P = 0;
    double max_f1 = 0.0;
    Method method = Method::vanilla;

    bool operator==(const SweepRow&) const = default;
};

/// Cross product of methods x P x R on an in-memory corpus. The difference
/// matrix is built once per P and the segmentation once per corpus; semantic
/// runs do not depend on R, so each (semantic, P) is evaluated once and
/// repeated across the R list.
inline std::vector<SweepRow> run_sweep(const Corpus& corpus, const std::vector<int>& R_list, const std::vector<int>& P_list,
                                       const std::vector<Method>& methods, const PipelineConfig& base) {
    validate(base);
    std::optional<Segmentation> seg;
    for (Method m : methods) {
        if (m == Method::semantic && !seg) seg = segment_reference(corpus.ref_attributes, base);
    }
    std::vector<SweepRow> rows;
    for (int P : P_list) {
        PipelineConfig cfg = base;
        cfg.P = P;
        validate(cfg);
        const DiffMatrix D =
            build_difference_matrix(preprocess_sequence(corpus.refs, cfg), preprocess_sequence(corpus.queries, cfg), cfg);
        for (Method m : methods) {
            std::optional<double> semantic_f1;
            for (int R : R_list) {
                cfg.R = R;
                double f1 = 0.0;
                if (m == Method::semantic && semantic_f1) {
                    f1 = *semantic_f1;
                } else {
                    const auto matches =
                        match_sequence(normalize_for(m, D, cfg, seg ? &seg->segments : nullptr), cfg);
                    f1 = evaluate(matches, corpus.ground_truth, cfg).max_f1;
                    if (m == Method::semantic) semantic_f1 = f1;
                }
                rows.push_back({R, P, f1, m});
            }
        }
    }
    return rows;
}

inline void write_sweep(const std::vector<SweepRow>& rows, const fs::path& path) {
    auto out = detail::open_out(path);
    out << "R,P,max_f1,method\n";
    for (const auto& r : rows) out << r.R << ',' << r.P << ',' << format_real(r.max_f1) << ',' << to_string(r.method) << '\n';
    detail::finish_write(out, path);
}

inline std::vector<SweepRow> load_sweep(const fs::path& path) {
    std::vector<SweepRow> rows;
    for (const auto& [n, line] : detail::read_lines(path)) {
        if (line.starts_with("R,")) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != 4) throw Error(ErrorKind::format, detail::where(path, n) + "expected 4 columns");
        rows.push_back({static_cast<int>(parse_integer(cells[0])), static_cast<int>(parse_integer(cells[1])),
                        parse_real(cells[2]), parse_method(std::string(cells[3]))});
    }
    return rows;
}

struct SweepOptions {
    std::string corpus_dir;
    std::string output_dir;
    std::string config_path;
    std::vector<int> R_list{5, 10, 20, 40, 80, 160, 320, 640};
    std::vector<int> P_list{2, 4, 8, 16};
    std::vector<Method> methods{Method::vanilla, Method::semantic};
};

inline std::vector<SweepRow> cmd_sweep(const SweepOptions& opt, const PipelineConfig& cfg) {
    RunManifest man{"sweep", opt.config_path, {{"corpus", opt.corpus_dir}}, opt.output_dir, "", cfg, utc_timestamp(), ""};
    const Corpus corpus = load_corpus(opt.corpus_dir);
    const auto rows = run_sweep(corpus, opt.R_list, opt.P_list, opt.methods, cfg);
    const fs::path dir(opt.output_dir);
    fs::create_directories(dir);
    write_sweep(rows, dir / "sweep.csv");
    man.finished_at = utc_timestamp();
    write_run_files(man);
    return rows;
}

}  // namespace semseq
