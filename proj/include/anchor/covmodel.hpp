#ifndef ANCHOR_COVMODEL_HPP
#define ANCHOR_COVMODEL_HPP

#include <cstdint>
#include <vector>

#include "anchor/matcore.hpp"

namespace anchor {

// Defaults follow the paper's two-task enlarged-dimension experiment;
// spike and noise magnitudes are ours (high source SNR at n1 = 500).
struct CovSpec {
    Index p1 = 10;
    Index r1 = 3;
    long long n1 = 500;
    Index p2 = 50;
    Index delta_r = 1;
    Index delta_s = 5;   // diagonal edits among the new coordinates
    Index s1 = 0;        // source diagonal sparsity (0: pure low-rank source)
    std::vector<long long> n2_grid = {30, 50, 80, 100, 120, 150, 200, 250, 300};
    int trials = 50;
    std::uint64_t master_seed = 1;
    double spike_scale = 1.0;
    double noise_scale = 3.0;
};

struct CovInstance {
    Matrix sigma1, sigma2;  // symmetric PSD, sigma = l + s
    Matrix l1, s1;
    Matrix l2, s2;
    Matrix u2_true;  // p2 x (r1 + delta_r) target principal subspace
    double measured_mu = 0.0;
    int regenerations = 0;  // incoherence-gate retries
};

// Random spiked instance: L1 = U1 D1 U1^T, diagonal S1, target low-rank
// component B(L1) plus orthogonal innovations, diagonal edits among the
// new coordinates. Instances with measured incoherence mu > 3 are
// regenerated.
CovInstance generate_instance(const CovSpec& spec, std::uint64_t cell_seed);

// (1/n) * sum of x x^T over n zero-mean Gaussian draws with covariance
// sigma (symmetric square root via eigendecomposition). Exactly symmetric:
// only the upper triangle is accumulated and mirrored.
Matrix sample_covariance(const Matrix& sigma, long long n, std::uint64_t seed);

// Per-method errors for one trial.
struct TrialErrors {
    double err_l_fro = 0.0;
    double err_s_fro = 0.0;
    double err_theta_fro = 0.0;
    double sin_theta = 0.0;
};

TrialErrors evaluate_trial(const CovInstance& instance, const Matrix& l_hat,
                           const Matrix& s_hat);

}  // namespace anchor

#endif
