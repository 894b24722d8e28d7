#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "anchor/baseline.hpp"
#include "anchor/harness.hpp"

namespace fs = std::filesystem;
using namespace anchor;

namespace {

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
    os << content;
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

int emit_report(const ExperimentReport& report, const std::string& out_dir,
                double wall_s) {
    fs::create_directories(out_dir);
    write_text(fs::path(out_dir) / "results.csv", report.results_csv);
    write_text(fs::path(out_dir) / "aggregates.csv", report.aggregate_csv);
    if (!report.extras_csv.empty()) {
        write_text(fs::path(out_dir) / "transition_errors.csv", report.extras_csv);
    }
    std::cerr << "cells: " << report.total_cells
              << "  failed: " << report.failed_cells
              << "  monotonicity violations: " << report.monotonicity_violations
              << "  wall: " << wall_s << "s\n";
    if (report.failed_cells * 10 > report.total_cells) {
        std::cerr << "error: more than 10% of trials failed\n";
        return 1;
    }
    return 0;
}

struct DenoiseConfig {
    std::string y2_file;
    std::string y1_file, l1_file, s1_file;
    long long rank = 0, sparsity = 0;
    TransferConfig cfg;
};

DenoiseConfig parse_denoise_config(const std::string& path) {
    DenoiseConfig dc;
    const auto kv = parse_config_file(path);
    for (const auto& [key, v] : kv) {
        if (key == "y2_file") dc.y2_file = v;
        else if (key == "y1_file") dc.y1_file = v;
        else if (key == "l1_file") dc.l1_file = v;
        else if (key == "s1_file") dc.s1_file = v;
        else if (key == "rank") dc.rank = std::stoll(v);
        else if (key == "sparsity") dc.sparsity = std::stoll(v);
        else if (key == "delta_r") dc.cfg.rank_increment = std::stoll(v);
        else if (key == "delta_s") dc.cfg.edit_budget = std::stoll(v);
        else if (key == "tolerance") dc.cfg.tolerance = std::stod(v);
        else if (key == "max_iterations") dc.cfg.max_iterations = std::stoi(v);
        else if (key == "mu") dc.cfg.incoherence_mu = std::stod(v);
        else throw std::runtime_error("unknown config key: " + key);
    }
    if (dc.y2_file.empty()) throw std::runtime_error("denoise: y2_file required");
    const bool have_factors = !dc.l1_file.empty() && !dc.s1_file.empty();
    const bool have_y1 = !dc.y1_file.empty() && dc.rank > 0;
    if (have_factors == have_y1) {
        throw std::runtime_error(
            "denoise: give either l1_file+s1_file or y1_file+rank");
    }
    return dc;
}

int run_denoise(const std::string& config_path, const std::string& out_dir) {
    const DenoiseConfig dc = parse_denoise_config(config_path);
    const Matrix y2 = read_matrix_file(dc.y2_file);

    SourceEstimate src;
    if (!dc.l1_file.empty()) {
        src.l_hat = read_matrix_file(dc.l1_file);
        src.s_hat = read_matrix_file(dc.s1_file);
        const SvdTriple full = full_svd(src.l_hat);
        Index r = 0;
        const double smax = full.s.size() > 0 ? full.s(0) : 0.0;
        for (Index i = 0; i < full.s.size(); ++i)
            if (smax > 0.0 && full.s(i) >= kRankTol * smax) ++r;
        src.rank = std::max<Index>(r, 1);
        src.svd = truncated_svd(src.l_hat, src.rank);
        src.sparsity = nnz(src.s_hat, 0.0);
    } else {
        src = estimate_source(read_matrix_file(dc.y1_file), dc.rank, dc.sparsity,
                              dc.cfg.tolerance, dc.cfg.max_iterations);
    }

    const auto [basis, s0] =
        make_anchors(src, y2.rows(), y2.cols(), dc.cfg.rank_increment);
    const TransferResult res = transfer_altproj(y2, basis, s0, dc.cfg);

    fs::create_directories(out_dir);
    write_matrix_file((fs::path(out_dir) / "L_hat.txt").string(), res.l_hat.value);
    write_matrix_file((fs::path(out_dir) / "S_hat.txt").string(), res.s_hat);

    std::ostringstream report;
    report << "iterations " << res.iterations << "\n"
           << "converged " << (res.converged ? 1 : 0) << "\n";
    const double mu_bound = dc.cfg.incoherence_mu.value_or(
        std::numeric_limits<double>::infinity());
    const IncoherenceReport inc = incoherence_check(res.l_hat, mu_bound);
    report << "incoherence_measured " << inc.measured << "\n";
    if (dc.cfg.incoherence_mu) {
        report << "incoherence_within_mu " << (inc.within_bound ? 1 : 0) << "\n";
    }
    report << "objective_trace";
    for (double v : res.objective_trace) report << ' ' << v;
    report << "\n";
    write_text(fs::path(out_dir) / "report.txt", report.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Anchored transfer estimation for structured matrices"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out";
    std::optional<long long> seed_override;
    std::optional<int> trials_override;
    int jobs = 1;
    for (auto* sub : {app.add_subcommand("cov", "Covariance transfer experiment"),
                      app.add_subcommand("markov", "Markov transfer experiment"),
                      app.add_subcommand("denoise", "Denoise a matrix file")}) {
        sub->add_option("--config", config_path, "Flat key=value config file");
        sub->add_option("--seed", seed_override, "Master seed override");
        sub->add_option("--trials", trials_override, "Trial count override");
        sub->add_option("--out", out_dir, "Output directory");
        sub->add_option("--jobs", jobs, "Parallel trial cells")
            ->check(CLI::PositiveNumber);
    }

    CLI11_PARSE(app, argc, argv);

    try {
        const auto start = std::chrono::steady_clock::now();
        const auto elapsed = [&start] {
            return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                 start)
                .count();
        };
        if (app.got_subcommand("cov")) {
            CovSpec spec;
            TransferConfig cfg;
            if (!config_path.empty()) {
                apply_covariance_config(parse_config_file(config_path), spec, cfg);
            }
            if (seed_override) spec.master_seed = *seed_override;
            if (trials_override) spec.trials = *trials_override;
            const auto report = run_covariance_experiment(spec, cfg, jobs);
            return emit_report(report, out_dir, elapsed());
        }
        if (app.got_subcommand("markov")) {
            MarkovExperimentSpec spec;
            TransferConfig cfg;
            if (!config_path.empty()) {
                apply_markov_config(parse_config_file(config_path), spec, cfg);
            }
            if (seed_override) spec.pair.seed = *seed_override;
            if (trials_override) spec.trials = *trials_override;
            const auto report = run_markov_experiment(spec, cfg, jobs);
            return emit_report(report, out_dir, elapsed());
        }
        if (config_path.empty()) {
            std::cerr << "error: denoise requires --config\n";
            return 1;
        }
        return run_denoise(config_path, out_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
