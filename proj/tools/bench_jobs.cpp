// Times the covariance experiment with serial cells vs. OpenMP-parallel
// cells and checks the two emit identical bytes.
#include <chrono>
#include <iostream>
#include <thread>

#include "anchor/harness.hpp"

using namespace anchor;

namespace {

double time_run(const CovSpec& spec, const TransferConfig& cfg, int jobs,
                std::string& csv) {
    const auto start = std::chrono::steady_clock::now();
    const ExperimentReport report = run_covariance_experiment(spec, cfg, jobs);
    csv = report.results_csv;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
}

}  // namespace

int main() {
    CovSpec spec;
    spec.trials = 10;
    spec.n2_grid = {30, 100, 300};
    TransferConfig cfg;

    std::string serial_csv, parallel_csv;
    const double serial_s = time_run(spec, cfg, 1, serial_csv);
    const int hw = std::max(1u, std::thread::hardware_concurrency());
    const double parallel_s = time_run(spec, cfg, hw, parallel_csv);

    std::cout << "serial:   " << serial_s << " s\n"
              << "parallel: " << parallel_s << " s  (" << hw << " jobs)\n"
              << "speedup:  " << serial_s / parallel_s << "x\n"
              << "identical output: " << (serial_csv == parallel_csv ? "yes" : "NO")
              << "\n";
    return serial_csv == parallel_csv ? 0 : 1;
}
