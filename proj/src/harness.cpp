#include "anchor/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "anchor/baseline.hpp"
#include "anchor/rng.hpp"

namespace anchor {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

int trace_violations(const std::vector<double>& trace) {
    int count = 0;
    for (std::size_t i = 1; i < trace.size(); ++i) {
        if (trace[i] > trace[i - 1] + 1e-12) ++count;
    }
    return count;
}

void sort_records(std::vector<MetricsRecord>& records) {
    std::sort(records.begin(), records.end(),
              [](const MetricsRecord& a, const MetricsRecord& b) {
                  return std::tie(a.n, a.trial, a.method) <
                         std::tie(b.n, b.trial, b.method);
              });
}

std::string render_results_csv(const std::vector<MetricsRecord>& records) {
    std::ostringstream os;
    os << "experiment,method,n,trial,err_L_fro,err_S_fro,err_Theta_fro,"
          "sin_theta,iters,converged,wall_ms\n";
    for (const auto& r : records) {
        os << r.experiment << ',' << r.method << ',' << r.n << ',' << r.trial
           << ',' << fmt(r.err_l_fro) << ',' << fmt(r.err_s_fro) << ','
           << fmt(r.err_theta_fro) << ',' << fmt(r.sin_theta) << ',' << r.iters
           << ',' << (r.converged ? 1 : 0) << ",0\n";
    }
    return os.str();
}

std::string render_aggregate_csv(const std::vector<MetricsRecord>& records) {
    // Means over trials per (method, n), in sorted order.
    std::map<std::pair<std::string, long long>,
             std::pair<std::vector<double>, std::vector<double>>>
        groups;
    for (const auto& r : records) {
        auto& g = groups[{r.method, r.n}];
        g.first.push_back(r.err_l_fro);
        g.second.push_back(r.sin_theta);
    }
    const auto mean_stderr = [](const std::vector<double>& xs) {
        const double n = static_cast<double>(xs.size());
        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= n;
        double var = 0.0;
        for (double x : xs) var += (x - mean) * (x - mean);
        var = xs.size() > 1 ? var / (n - 1.0) : 0.0;
        return std::make_pair(mean, std::sqrt(var / n));
    };
    std::ostringstream os;
    os << "method,n,mean_err_L,stderr_err_L,mean_sin_theta,stderr_sin_theta,"
          "trials\n";
    for (const auto& [key, g] : groups) {
        const auto [mean_l, se_l] = mean_stderr(g.first);
        const auto [mean_st, se_st] = mean_stderr(g.second);
        os << key.first << ',' << key.second << ',' << fmt(mean_l) << ','
           << fmt(se_l) << ',' << fmt(mean_st) << ',' << fmt(se_st) << ','
           << g.first.size() << '\n';
    }
    return os.str();
}

std::string render_extras_csv(const std::vector<MarkovExtraRecord>& extras) {
    std::ostringstream os;
    os << "method,n,trial,err_P_fro,err_P_maxrow_l1,fhat_sum_dev,"
          "row_stochastic\n";
    for (const auto& e : extras) {
        os << e.method << ',' << e.n << ',' << e.trial << ',' << fmt(e.err_p_fro)
           << ',' << fmt(e.err_p_maxrow_l1) << ',' << fmt(e.fhat_sum_dev) << ','
           << (e.row_stochastic ? 1 : 0) << '\n';
    }
    return os.str();
}

struct Cell {
    long long n = 0;
    int trial = 0;
};

std::vector<Cell> make_cells(const std::vector<long long>& grid, int trials) {
    std::vector<Cell> cells;
    for (long long n : grid)
        for (int t = 0; t < trials; ++t) cells.push_back({n, t});
    return cells;
}

bool is_row_stochastic(const Matrix& p, double tol) {
    for (Index i = 0; i < p.rows(); ++i) {
        if (std::abs(p.row(i).sum() - 1.0) > tol || p.row(i).minCoeff() < 0.0) {
            return false;
        }
    }
    return true;
}

template <typename CellFn>
void run_cells(const std::vector<Cell>& cells, int jobs, CellFn&& fn) {
    const auto count = static_cast<std::ptrdiff_t>(cells.size());
#ifdef _OPENMP
    if (jobs > 1) {
#pragma omp parallel for schedule(dynamic) num_threads(jobs)
        for (std::ptrdiff_t i = 0; i < count; ++i) fn(i);
        return;
    }
#endif
    (void)jobs;
    for (std::ptrdiff_t i = 0; i < count; ++i) fn(i);
}

}  // namespace

ExperimentReport run_covariance_experiment(const CovSpec& spec,
                                           const TransferConfig& base_cfg,
                                           int jobs) {
    const Index r2 = spec.r1 + spec.delta_r;
    TransferConfig cfg = base_cfg;
    cfg.rank_increment = spec.delta_r;
    cfg.edit_budget = spec.delta_s;

    const std::vector<Cell> cells = make_cells(spec.n2_grid, spec.trials);
    struct CellOut {
        std::vector<MetricsRecord> records;
        bool failed = false;
        int violations = 0;
    };
    std::vector<CellOut> outs(cells.size());

    run_cells(cells, jobs, [&](std::ptrdiff_t i) {
        const Cell cell = cells[static_cast<std::size_t>(i)];
        CellOut& out = outs[static_cast<std::size_t>(i)];
        try {
            const std::uint64_t cell_seed = derive_seed(
                derive_seed(spec.master_seed, static_cast<std::uint64_t>(cell.n)),
                static_cast<std::uint64_t>(cell.trial));
            const CovInstance inst =
                generate_instance(spec, derive_seed(cell_seed, 0));
            const Matrix sig1_hat =
                sample_covariance(inst.sigma1, spec.n1, derive_seed(cell_seed, 1));
            const Matrix sig2_hat =
                sample_covariance(inst.sigma2, cell.n, derive_seed(cell_seed, 2));

            const SourceEstimate src = estimate_source(
                sig1_hat, spec.r1, spec.s1, cfg.tolerance, cfg.max_iterations);
            const auto [basis, s0] =
                make_anchors(src, spec.p2, spec.p2, spec.delta_r);

            const TransferResult tr = transfer_altproj(sig2_hat, basis, s0, cfg);
            out.violations += trace_violations(tr.objective_trace);

            const BaselineResult base = altproj_lowrank_sparse(
                sig2_hat, r2, spec.s1 + spec.delta_s, cfg.tolerance,
                cfg.max_iterations);
            out.violations += trace_violations(base.objective_trace);

            const Matrix pca = pca_truncate(sig2_hat, r2);
            const Matrix zero = Matrix::Zero(spec.p2, spec.p2);

            const auto record = [&](const std::string& method,
                                    const TrialErrors& errs, int iters,
                                    bool converged) {
                MetricsRecord r;
                r.experiment = "covariance";
                r.method = method;
                r.n = cell.n;
                r.trial = cell.trial;
                r.err_l_fro = errs.err_l_fro;
                r.err_s_fro = errs.err_s_fro;
                r.err_theta_fro = errs.err_theta_fro;
                r.sin_theta = errs.sin_theta;
                r.iters = iters;
                r.converged = converged;
                out.records.push_back(std::move(r));
            };
            record("transfer", evaluate_trial(inst, tr.l_hat.value, tr.s_hat),
                   tr.iterations, tr.converged);
            record("nontransfer", evaluate_trial(inst, base.l_hat, base.s_hat),
                   base.iterations, base.converged);
            record("pca", evaluate_trial(inst, pca, zero), 1, true);
        } catch (const std::exception&) {
            out.failed = true;
        }
    });

    ExperimentReport report;
    report.total_cells = static_cast<int>(cells.size());
    for (auto& out : outs) {
        if (out.failed) ++report.failed_cells;
        report.monotonicity_violations += out.violations;
        for (auto& r : out.records) report.records.push_back(std::move(r));
    }
    sort_records(report.records);
    report.results_csv = render_results_csv(report.records);
    report.aggregate_csv = render_aggregate_csv(report.records);
    return report;
}

ExperimentReport run_markov_experiment(const MarkovExperimentSpec& spec,
                                       const TransferConfig& base_cfg, int jobs) {
    TransferConfig cfg = base_cfg;
    cfg.rank_increment = spec.pair.rank_increment;
    cfg.edit_budget = spec.pair.sparse_edits;

    const StructuredMarkovPair pair = build_structured_pair(spec.pair);
    const Index p2 = spec.pair.p2;
    const Index r2 = spec.pair.rank + spec.pair.rank_increment;
    const Index s2 = nnz(pair.s2_true, 0.0);

    const std::vector<Cell> cells = make_cells(spec.n2_grid, spec.trials);
    struct CellOut {
        std::vector<MetricsRecord> records;
        std::vector<MarkovExtraRecord> extras;
        bool failed = false;
        int violations = 0;
    };
    std::vector<CellOut> outs(cells.size());

    run_cells(cells, jobs, [&](std::ptrdiff_t i) {
        const Cell cell = cells[static_cast<std::size_t>(i)];
        CellOut& out = outs[static_cast<std::size_t>(i)];
        try {
            const std::uint64_t cell_seed = derive_seed(
                derive_seed(spec.pair.seed, static_cast<std::uint64_t>(cell.n)),
                static_cast<std::uint64_t>(cell.trial));
            const auto traj1 = simulate_trajectory(pair.source, spec.pair.n1,
                                                   derive_seed(cell_seed, 1));
            const Matrix f1_hat = empirical_frequency(traj1, spec.pair.p1);
            const auto traj2 = simulate_trajectory(pair.target, cell.n,
                                                   derive_seed(cell_seed, 2));
            const Matrix f2_hat = empirical_frequency(traj2, p2);
            const double sum_dev = std::abs(f2_hat.sum() - 1.0);

            const SourceEstimate src = estimate_source(f1_hat, spec.pair.rank, 0);
            const MarkovTransferEstimate tran =
                transfer_markov_estimate(f2_hat, src, cfg);
            out.violations += trace_violations(tran.detail.objective_trace);

            const BaselineResult base = altproj_lowrank_sparse(
                f2_hat, r2, s2, cfg.tolerance, cfg.max_iterations);
            out.violations += trace_violations(base.objective_trace);
            const Matrix f_base = base.l_hat + base.s_hat;
            const Matrix p_base = plugin_transition(f_base);

            const auto record = [&](const std::string& method, const Matrix& l_hat,
                                    const Matrix& s_hat, const Matrix& f_hat,
                                    const Matrix& p_hat, int iters,
                                    bool converged) {
                MetricsRecord r;
                r.experiment = "markov";
                r.method = method;
                r.n = cell.n;
                r.trial = cell.trial;
                r.err_l_fro = (l_hat - pair.l2_true).norm();
                r.err_s_fro = (s_hat - pair.s2_true).norm();
                r.err_theta_fro = (f_hat - pair.f2).norm();
                const SvdTriple t = truncated_svd(l_hat, r2);
                r.sin_theta = sin_theta_distance(pair.u2_true, t.u);
                r.iters = iters;
                r.converged = converged;
                out.records.push_back(std::move(r));

                MarkovExtraRecord e;
                e.method = method;
                e.n = cell.n;
                e.trial = cell.trial;
                e.err_p_fro = (p_hat - pair.target.transition).norm();
                e.err_p_maxrow_l1 =
                    (p_hat - pair.target.transition).cwiseAbs().rowwise().sum().maxCoeff();
                e.fhat_sum_dev = sum_dev;
                e.row_stochastic = is_row_stochastic(p_hat, 1e-12);
                out.extras.push_back(std::move(e));
            };
            record("transfer", tran.detail.l_hat.value, tran.detail.s_hat,
                   tran.f_tran, tran.p_tran, tran.detail.iterations,
                   tran.detail.converged);
            record("nontransfer", base.l_hat, base.s_hat, f_base, p_base,
                   base.iterations, base.converged);
        } catch (const std::exception&) {
            out.failed = true;
        }
    });

    ExperimentReport report;
    report.total_cells = static_cast<int>(cells.size());
    for (auto& out : outs) {
        if (out.failed) ++report.failed_cells;
        report.monotonicity_violations += out.violations;
        for (auto& r : out.records) report.records.push_back(std::move(r));
        for (auto& e : out.extras) report.extras.push_back(std::move(e));
    }
    sort_records(report.records);
    std::sort(report.extras.begin(), report.extras.end(),
              [](const MarkovExtraRecord& a, const MarkovExtraRecord& b) {
                  return std::tie(a.n, a.trial, a.method) <
                         std::tie(b.n, b.trial, b.method);
              });
    report.results_csv = render_results_csv(report.records);
    report.aggregate_csv = render_aggregate_csv(report.records);
    report.extras_csv = render_extras_csv(report.extras);
    return report;
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    long lineno = 0;
    const auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected key=value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": empty key");
        }
        kv[key] = value;
    }
    return kv;
}

namespace {

long long parse_ll(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    const long long out = std::stoll(v, &pos);
    if (pos != v.size()) throw std::runtime_error("bad integer for " + key);
    return out;
}

double parse_double(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    const double out = std::stod(v, &pos);
    if (pos != v.size()) throw std::runtime_error("bad number for " + key);
    return out;
}

std::vector<long long> parse_grid(const std::string& key, const std::string& v) {
    std::vector<long long> grid;
    std::istringstream is(v);
    std::string tok;
    while (std::getline(is, tok, ',')) grid.push_back(parse_ll(key, tok));
    if (grid.empty()) throw std::runtime_error(key + ": empty grid");
    return grid;
}

void reject_unknown(const std::map<std::string, std::string>& kv,
                    const std::set<std::string>& allowed) {
    for (const auto& [key, value] : kv) {
        if (!allowed.count(key)) {
            throw std::runtime_error("unknown config key: " + key);
        }
    }
}

}  // namespace

void apply_covariance_config(const std::map<std::string, std::string>& kv,
                             CovSpec& spec, TransferConfig& cfg) {
    reject_unknown(kv, {"p1", "r1", "n1", "p2", "delta_r", "delta_s", "s1",
                        "n2_grid", "trials", "master_seed", "spike_scale",
                        "noise_scale", "tolerance", "max_iterations"});
    for (const auto& [key, v] : kv) {
        if (key == "p1") spec.p1 = parse_ll(key, v);
        else if (key == "r1") spec.r1 = parse_ll(key, v);
        else if (key == "n1") spec.n1 = parse_ll(key, v);
        else if (key == "p2") spec.p2 = parse_ll(key, v);
        else if (key == "delta_r") spec.delta_r = parse_ll(key, v);
        else if (key == "delta_s") spec.delta_s = parse_ll(key, v);
        else if (key == "s1") spec.s1 = parse_ll(key, v);
        else if (key == "n2_grid") spec.n2_grid = parse_grid(key, v);
        else if (key == "trials") spec.trials = static_cast<int>(parse_ll(key, v));
        else if (key == "master_seed")
            spec.master_seed = static_cast<std::uint64_t>(parse_ll(key, v));
        else if (key == "spike_scale") spec.spike_scale = parse_double(key, v);
        else if (key == "noise_scale") spec.noise_scale = parse_double(key, v);
        else if (key == "tolerance") cfg.tolerance = parse_double(key, v);
        else if (key == "max_iterations")
            cfg.max_iterations = static_cast<int>(parse_ll(key, v));
    }
}

void apply_markov_config(const std::map<std::string, std::string>& kv,
                         MarkovExperimentSpec& spec, TransferConfig& cfg) {
    reject_unknown(kv, {"p1", "p2", "rank", "delta_r", "delta_s", "n1", "n2_grid",
                        "trials", "master_seed", "tolerance", "max_iterations"});
    for (const auto& [key, v] : kv) {
        if (key == "p1") spec.pair.p1 = parse_ll(key, v);
        else if (key == "p2") spec.pair.p2 = parse_ll(key, v);
        else if (key == "rank") spec.pair.rank = parse_ll(key, v);
        else if (key == "delta_r") spec.pair.rank_increment = parse_ll(key, v);
        else if (key == "delta_s") spec.pair.sparse_edits = parse_ll(key, v);
        else if (key == "n1") spec.pair.n1 = parse_ll(key, v);
        else if (key == "n2_grid") spec.n2_grid = parse_grid(key, v);
        else if (key == "trials") spec.trials = static_cast<int>(parse_ll(key, v));
        else if (key == "master_seed")
            spec.pair.seed = static_cast<std::uint64_t>(parse_ll(key, v));
        else if (key == "tolerance") cfg.tolerance = parse_double(key, v);
        else if (key == "max_iterations")
            cfg.max_iterations = static_cast<int>(parse_ll(key, v));
    }
}

}  // namespace anchor
