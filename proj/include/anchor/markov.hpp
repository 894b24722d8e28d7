#ifndef ANCHOR_MARKOV_HPP
#define ANCHOR_MARKOV_HPP

#include <cstdint>
#include <vector>

#include "anchor/matcore.hpp"
#include "anchor/transfer.hpp"

namespace anchor {

struct MarkovChain {
    Matrix transition;   // p x p, row-stochastic
    Vector stationary;   // length p, nonnegative, sums to 1
};

struct MarkovPairSpec {
    Index p1 = 5;
    Index p2 = 8;
    Index rank = 2;            // r1
    Index rank_increment = 1;  // delta_r
    Index sparse_edits = 2;    // delta_s
    long long n1 = 100000;
    long long n2 = 10000;
    std::uint64_t seed = 1;
};

// Ground-truth structured pair: the target frequency matrix is a scaled
// embedding of the source one plus a rank-delta innovation supported on the
// new states plus sparse edits, all symmetric so row and column marginals
// agree exactly.
struct StructuredMarkovPair {
    MarkovChain source;
    MarkovChain target;
    Matrix f1;               // p1 x p1, rank <= r1
    Matrix f2;               // p2 x p2
    Matrix l2_true;          // low-rank part of f2
    Matrix s2_true;          // sparse edits of f2
    Matrix u1_true;          // p1 x r1 left factor of f1
    Matrix u2_true;          // p2 x (r1 + delta) target principal subspace
    double structure_violation;  // ||l2 - best rank-r2 approx||_F / ||f2||_F
};

StructuredMarkovPair build_structured_pair(const MarkovPairSpec& spec);

// X_0 drawn from the stationary distribution, then inverse-CDF sampling
// over states in index order. Deterministic given the seed.
std::vector<int> simulate_trajectory(const MarkovChain& chain, long long length,
                                     std::uint64_t seed);

// F_hat[i][j] = (# consecutive pairs (i,j)) / (length - 1).
Matrix empirical_frequency(const std::vector<int>& trajectory, Index p);

// Left fixed point via power iteration from uniform, with a perturbed
// restart to flag non-ergodic inputs. Throws std::runtime_error when the
// iteration does not identify a unique stationary distribution.
Vector stationary_distribution(const Matrix& p_matrix);

// Euclidean projection onto the probability simplex (sort-and-threshold).
Vector simplex_project(const Vector& v);

// P_hat = Diag(pi_hat)^{-1} F_hat with pi_hat the row sums, each row then
// projected onto the probability simplex; zero-mass rows become uniform.
Matrix plugin_transition(const Matrix& f_hat);

struct MarkovTransferEstimate {
    Matrix f_tran;  // denoised frequency matrix L + S
    Matrix p_tran;  // row-stochastic plug-in transition estimate
    TransferResult detail;
};

// Anchors from a source estimated on F_hat1, then Transfer AltProj on
// f_hat2 and the plug-in transition estimator.
MarkovTransferEstimate transfer_markov_estimate(const Matrix& f_hat2,
                                                const SourceEstimate& src,
                                                const TransferConfig& cfg);

}  // namespace anchor

#endif
