#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "anchor/harness.hpp"

using namespace anchor;

namespace {

CovSpec tiny_cov_spec() {
    CovSpec spec;
    spec.p1 = 4;
    spec.r1 = 1;
    spec.n1 = 200;
    spec.p2 = 6;
    spec.delta_r = 1;
    spec.delta_s = 2;
    spec.s1 = 4;
    spec.n2_grid = {30, 60};
    spec.trials = 2;
    spec.master_seed = 5;
    return spec;
}

int count_lines(const std::string& s) {
    int n = 0;
    for (char c : s)
        if (c == '\n') ++n;
    return n;
}

}  // namespace

TEST_CASE("covariance experiment emits one row per cell and method") {
    CovSpec spec = tiny_cov_spec();
    spec.n2_grid = {30};
    spec.trials = 1;
    TransferConfig cfg;
    const ExperimentReport rep = run_covariance_experiment(spec, cfg, 1);
    CHECK(rep.records.size() == 3);
    CHECK(rep.failed_cells == 0);
    CHECK(count_lines(rep.results_csv) == 4);  // header + 3 rows
    CHECK(rep.results_csv.rfind("experiment,method,n,trial,", 0) == 0);
}

TEST_CASE("covariance experiment output is deterministic and sorted") {
    const CovSpec spec = tiny_cov_spec();
    TransferConfig cfg;
    const ExperimentReport a = run_covariance_experiment(spec, cfg, 1);
    const ExperimentReport b = run_covariance_experiment(spec, cfg, 2);
    CHECK(a.results_csv == b.results_csv);
    CHECK(a.aggregate_csv == b.aggregate_csv);

    for (size_t i = 1; i < a.records.size(); ++i) {
        const auto& prev = a.records[i - 1];
        const auto& cur = a.records[i];
        const bool ordered =
            prev.n < cur.n ||
            (prev.n == cur.n &&
             (prev.trial < cur.trial ||
              (prev.trial == cur.trial && prev.method <= cur.method)));
        CHECK(ordered);
    }
}

TEST_CASE("aggregate rows reproduce the per-trial means") {
    const CovSpec spec = tiny_cov_spec();
    TransferConfig cfg;
    const ExperimentReport rep = run_covariance_experiment(spec, cfg, 1);

    std::map<std::pair<std::string, long long>, std::pair<double, int>> sums;
    for (const auto& r : rep.records) {
        auto& cell = sums[{r.method, r.n}];
        cell.first += r.err_l_fro;
        cell.second += 1;
    }

    std::istringstream agg(rep.aggregate_csv);
    std::string line;
    std::getline(agg, line);
    CHECK(line == "method,n,mean_err_L,stderr_err_L,mean_sin_theta,stderr_sin_theta,trials");
    int rows = 0;
    while (std::getline(agg, line)) {
        std::istringstream ls(line);
        std::string method, field;
        std::getline(ls, method, ',');
        std::getline(ls, field, ',');
        const long long n = std::stoll(field);
        std::getline(ls, field, ',');
        const double mean = std::stod(field);
        const auto& cell = sums.at({method, n});
        CHECK(mean == doctest::Approx(cell.first / cell.second).epsilon(1e-8));
        ++rows;
    }
    CHECK(rows == 6);  // 2 n-levels x 3 methods
}

TEST_CASE("markov experiment row counts and stochasticity flags") {
    MarkovExperimentSpec spec;
    spec.pair.n1 = 5000;
    spec.n2_grid = {500, 1000};
    spec.trials = 2;
    TransferConfig cfg;
    const ExperimentReport rep = run_markov_experiment(spec, cfg, 1);
    CHECK(rep.records.size() == 8);  // 2 lengths x 2 methods x 2 trials
    CHECK(rep.extras.size() == 8);
    for (const auto& e : rep.extras) {
        CHECK(e.row_stochastic);
        CHECK(e.fhat_sum_dev < 1e-12);
    }
    CHECK(rep.extras_csv.rfind("method,n,trial,err_P_fro,", 0) == 0);

    const ExperimentReport again = run_markov_experiment(spec, cfg, 2);
    CHECK(rep.results_csv == again.results_csv);
    CHECK(rep.extras_csv == again.extras_csv);
}

TEST_CASE("config parsing applies overrides and rejects unknown keys") {
    const std::string path = "test_harness_config.tmp";
    {
        std::ofstream out(path);
        out << "# comment line\n";
        out << "p1 = 6\n";
        out << "trials=3\n";
        out << "spike_scale = 2.5\n";
        out << "n2_grid = 10,20,40\n";
    }
    const auto kv = parse_config_file(path);
    CovSpec spec;
    TransferConfig cfg;
    apply_covariance_config(kv, spec, cfg);
    CHECK(spec.p1 == 6);
    CHECK(spec.trials == 3);
    CHECK(spec.spike_scale == 2.5);
    CHECK(spec.n2_grid == std::vector<long long>{10, 20, 40});
    CHECK(spec.p2 == 50);  // untouched default

    {
        std::ofstream out(path);
        out << "not_a_key = 1\n";
    }
    const auto bad = parse_config_file(path);
    CovSpec spec2;
    TransferConfig cfg2;
    CHECK_THROWS_AS(apply_covariance_config(bad, spec2, cfg2), std::runtime_error);

    CHECK_THROWS_AS(parse_config_file("does_not_exist.cfg"), std::runtime_error);
    std::remove(path.c_str());
}
