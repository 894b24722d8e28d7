#ifndef ANCHOR_HARNESS_HPP
#define ANCHOR_HARNESS_HPP

#include <map>
#include <string>
#include <vector>

#include "anchor/covmodel.hpp"
#include "anchor/markov.hpp"
#include "anchor/transfer.hpp"

namespace anchor {

// One CSV row of the results file. wall_ms is emitted as 0: per-trial wall
// time would make re-runs differ byte-for-byte, and reproducible output
// wins; timings are reported on stderr instead.
struct MetricsRecord {
    std::string experiment;
    std::string method;  // transfer | nontransfer | pca
    long long n = 0;
    int trial = 0;
    double err_l_fro = 0.0;
    double err_s_fro = 0.0;
    double err_theta_fro = 0.0;
    double sin_theta = 0.0;
    int iters = 0;
    bool converged = false;
};

// Markov-only companion row: plug-in transition errors and validity flags.
struct MarkovExtraRecord {
    std::string method;
    long long n = 0;
    int trial = 0;
    double err_p_fro = 0.0;
    double err_p_maxrow_l1 = 0.0;
    double fhat_sum_dev = 0.0;  // |sum(F_hat) - 1| for the raw empirical matrix
    bool row_stochastic = false;
};

struct ExperimentReport {
    std::vector<MetricsRecord> records;     // sorted by (n, trial, method)
    std::vector<MarkovExtraRecord> extras;  // markov runs only
    int total_cells = 0;
    int failed_cells = 0;
    int monotonicity_violations = 0;  // objective-trace increases > 1e-12
    std::string results_csv;
    std::string aggregate_csv;
    std::string extras_csv;  // empty for covariance runs
};

struct MarkovExperimentSpec {
    MarkovPairSpec pair;  // pair.n2 ignored; grid below drives it
    std::vector<long long> n2_grid = {2000, 8000, 32000};
    int trials = 20;
};

// Per-cell pipeline: generate instance, sample both covariances, estimate
// the source, run transfer / non-transfer / PCA, record metrics. Cells run
// in parallel up to `jobs`; output bytes do not depend on scheduling.
ExperimentReport run_covariance_experiment(const CovSpec& spec,
                                           const TransferConfig& base_cfg,
                                           int jobs);

ExperimentReport run_markov_experiment(const MarkovExperimentSpec& spec,
                                       const TransferConfig& base_cfg, int jobs);

// Flat key=value config files; '#' starts a comment. Unknown keys are a
// hard error. Only keys present override the defaults already in the spec.
std::map<std::string, std::string> parse_config_file(const std::string& path);
void apply_covariance_config(const std::map<std::string, std::string>& kv,
                             CovSpec& spec, TransferConfig& cfg);
void apply_markov_config(const std::map<std::string, std::string>& kv,
                         MarkovExperimentSpec& spec, TransferConfig& cfg);

}  // namespace anchor

#endif
