// Batch driver for the semantic sequence-matching pipeline.
//
//   semseq synth   --out DIR [--preset three-zone|inversion] [--frames N] [--seed S]
//   semseq segment --attributes FILE --out DIR [config flags]
//   semseq match   --ref DIR --query DIR --out DIR --method vanilla|semantic [--segments FILE]
//   semseq eval    --matches FILE --ground-truth FILE --out DIR [--mu-grid a,b,...]
//   semseq sweep   --corpus DIR --out DIR [--R 5,10,...] [--P 2,4,...] [--methods vanilla,semantic]
//
// Failures print one line `{"error":"<kind>","message":"..."}` to stderr and
// exit with status 1 (2 for usage errors).

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "semseq/pipeline.hpp"

namespace {

struct ConfigFlags {
    std::string path;
    std::optional<int> S_x, S_y, P, O, d_s, R, N, exclusion_window, min_segment_len, restarts, max_iters, gt_tolerance;
    std::optional<double> mu, tol_loglik;
    std::optional<std::uint64_t> seed;
    std::vector<double> velocities;

    void attach(CLI::App* app) {
        app->add_option("--config", path, "flat JSON configuration file");
        app->add_option("--sx", S_x, "downsampled width");
        app->add_option("--sy", S_y, "downsampled height");
        app->add_option("--P", P, "patch normalization window");
        app->add_option("--O", O, "horizontal offset range in pixels");
        app->add_option("--ds", d_s, "sequence length");
        app->add_option("--R", R, "sliding normalization window (vanilla)");
        app->add_option("--N", N, "hidden state count");
        app->add_option("--exclusion-window", exclusion_window, "rows excluded around the best match");
        app->add_option("--min-segment-len", min_segment_len, "merge segments shorter than this");
        app->add_option("--restarts", restarts, "Baum-Welch random restarts");
        app->add_option("--max-iters", max_iters, "Baum-Welch iteration cap");
        app->add_option("--tol", tol_loglik, "Baum-Welch log-likelihood tolerance");
        app->add_option("--tolerance", gt_tolerance, "ground-truth tolerance in frames");
        app->add_option("--mu", mu, "uniqueness threshold");
        app->add_option("--seed", seed, "random seed");
        app->add_option("--velocities", velocities, "trajectory velocities")->delimiter(',');
    }

    semseq::PipelineConfig resolve() const {
        semseq::PipelineConfig c = path.empty() ? semseq::PipelineConfig{} : semseq::load_config(path);
        auto set = [](auto& field, const auto& opt) {
            if (opt) field = *opt;
        };
        set(c.S_x, S_x);
        set(c.S_y, S_y);
        set(c.P, P);
        set(c.O, O);
        set(c.d_s, d_s);
        set(c.R, R);
        set(c.N, N);
        set(c.exclusion_window, exclusion_window);
        set(c.min_segment_len, min_segment_len);
        set(c.restarts, restarts);
        set(c.max_iters, max_iters);
        set(c.gt_tolerance, gt_tolerance);
        set(c.mu, mu);
        set(c.tol_loglik, tol_loglik);
        set(c.seed, seed);
        if (!velocities.empty()) c.velocity_set = velocities;
        semseq::validate(c);
        return c;
    }
};

int report_error(const std::string& kind, const std::string& message) {
    std::cerr << nlohmann::json{{"error", kind}, {"message", message}}.dump() << std::endl;
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semantic segment-based sequence place recognition"};
    app.require_subcommand(1);

    semseq::SynthOptions synth_opt;
    auto* synth = app.add_subcommand("synth", "generate a synthetic reference/query corpus");
    synth->add_option("--out", synth_opt.output_dir, "output corpus directory")->required();
    synth->add_option("--preset", synth_opt.preset, "three-zone or inversion");
    synth->add_option("--frames", synth_opt.n_frames, "frames per traversal");
    synth->add_option("--seed", synth_opt.seed, "pattern seed");

    semseq::SegmentOptions seg_opt;
    ConfigFlags seg_cfg;
    auto* segment = app.add_subcommand("segment", "HMM-segment a reference attribute stream");
    segment->add_option("--attributes", seg_opt.attributes_path, "attribute CSV")->required();
    segment->add_option("--out", seg_opt.output_dir, "output directory")->required();
    seg_cfg.attach(segment);

    semseq::MatchOptions match_opt;
    ConfigFlags match_cfg;
    std::string method_name = "vanilla";
    auto* match = app.add_subcommand("match", "match a query traversal against a reference");
    match->add_option("--ref", match_opt.ref_dir, "reference frame directory")->required();
    match->add_option("--query", match_opt.query_dir, "query frame directory")->required();
    match->add_option("--out", match_opt.output_dir, "output directory")->required();
    match->add_option("--method", method_name, "vanilla or semantic");
    match->add_option("--segments", match_opt.segments_path, "segments CSV (semantic)");
    match->add_flag("--dump-diff", match_opt.dump_diff, "write the difference matrix D.csv");
    match->add_flag("--dump-norm", match_opt.dump_norm, "write the normalized matrix Dn.csv");
    match_cfg.attach(match);

    semseq::EvalOptions eval_opt;
    ConfigFlags eval_cfg;
    auto* eval = app.add_subcommand("eval", "precision/recall sweep over the uniqueness threshold");
    eval->add_option("--matches", eval_opt.matches_path, "matches CSV")->required();
    eval->add_option("--ground-truth", eval_opt.ground_truth_path, "ground truth CSV")->required();
    eval->add_option("--out", eval_opt.output_dir, "output directory")->required();
    eval->add_option("--mu-grid", eval_opt.mu_grid, "explicit thresholds, ascending")->delimiter(',');
    eval_cfg.attach(eval);

    semseq::SweepOptions sweep_opt;
    ConfigFlags sweep_cfg;
    std::vector<std::string> sweep_methods;
    auto* sweep = app.add_subcommand("sweep", "max-F1 over R x P for each method");
    sweep->add_option("--corpus", sweep_opt.corpus_dir, "corpus directory (synth layout)")->required();
    sweep->add_option("--out", sweep_opt.output_dir, "output directory")->required();
    sweep->add_option("--R-list", sweep_opt.R_list, "normalization widths")->delimiter(',');
    sweep->add_option("--P-list", sweep_opt.P_list, "patch sizes")->delimiter(',');
    sweep->add_option("--methods", sweep_methods, "vanilla,semantic")->delimiter(',');
    sweep_cfg.attach(sweep);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*synth) {
            const auto c = semseq::cmd_synth(synth_opt);
            std::cout << "wrote " << c.refs.size() << " reference and " << c.queries.size() << " query frames to "
                      << synth_opt.output_dir << '\n';
        } else if (*segment) {
            seg_opt.config_path = seg_cfg.path;
            const auto s = semseq::cmd_segment(seg_opt, seg_cfg.resolve());
            std::cout << s.segments.intervals.size() << " segments, log-likelihood "
                      << semseq::format_real(s.model.history.back()) << '\n';
        } else if (*match) {
            match_opt.config_path = match_cfg.path;
            match_opt.method = semseq::parse_method(method_name);
            const auto ms = semseq::cmd_match(match_opt, match_cfg.resolve());
            std::cout << ms.size() << " matches written\n";
        } else if (*eval) {
            eval_opt.config_path = eval_cfg.path;
            const auto rep = semseq::cmd_eval(eval_opt, eval_cfg.resolve());
            std::cout << "max_f1 " << semseq::format_real(rep.max_f1) << " at mu " << semseq::format_real(rep.argmax_mu)
                      << '\n';
        } else if (*sweep) {
            sweep_opt.config_path = sweep_cfg.path;
            if (!sweep_methods.empty()) {
                sweep_opt.methods.clear();
                for (const auto& m : sweep_methods) sweep_opt.methods.push_back(semseq::parse_method(m));
            }
            const auto rows = semseq::cmd_sweep(sweep_opt, sweep_cfg.resolve());
            std::cout << rows.size() << " sweep rows written\n";
        }
    } catch (const semseq::Error& e) {
        return report_error(semseq::to_string(e.kind()), e.what());
    } catch (const std::filesystem::filesystem_error& e) {
        return report_error("io", e.what());
    } catch (const std::exception& e) {
        return report_error("internal", e.what());
    }
    return 0;
}
