#ifndef ANCHOR_TRANSFER_HPP
#define ANCHOR_TRANSFER_HPP

#include <optional>
#include <utility>
#include <vector>

#include "anchor/matcore.hpp"
#include "anchor/project.hpp"

namespace anchor {

// Estimated source decomposition used to build transfer anchors.
struct SourceEstimate {
    Matrix l_hat;    // p1 x q1
    Matrix s_hat;    // p1 x q1
    SvdTriple svd;   // rank-r1 factorization of l_hat
    Index rank;      // r1
    Index sparsity;  // s1
};

struct TransferConfig {
    Index rank_increment = 0;  // delta_r
    Index edit_budget = 0;     // delta_s
    double tolerance = 1e-8;
    int max_iterations = 100;
    std::optional<double> incoherence_mu;  // diagnostic only
};

struct TransferResult {
    AnchoredLowRank l_hat;
    Matrix s_hat;
    int iterations = 0;
    bool converged = false;
    // 0.5 * ||Y - L_t - S_t||_F^2 after each completed iteration.
    std::vector<double> objective_trace;
};

struct IncoherenceReport {
    bool within_bound;
    double measured;
};

// Rank-r truncated SVD when sparsity == 0, otherwise the baseline low-rank
// plus sparse alternating projection estimator, refactored to rank r.
SourceEstimate estimate_source(const Matrix& y1, Index rank, Index sparsity,
                               double tolerance = 1e-8, int max_iterations = 100);

// Embeds the source factors and sparse component into the target ambient
// space; returns the anchored basis and the sparse anchor S0.
std::pair<AnchoredBasis, Matrix> make_anchors(const SourceEstimate& src, Index p2,
                                              Index q2, Index delta_r);

// Alternating anchored projections from L_0 = 0, S_0 = s0. Stops when the
// summed relative Frobenius change of L and S (denominators floored at
// 1e-12) drops to <= cfg.tolerance, or at max_iterations (converged=false,
// not an error).
TransferResult transfer_altproj(const Matrix& y2, const AnchoredBasis& basis,
                                const Matrix& s0, const TransferConfig& cfg);

// Post-hoc diagnostic for mu-incoherence of an anchored low-rank estimate:
// max row norms of its singular factors scaled by sqrt(p/r) resp.
// sqrt(q/r), compared against mu. Never alters estimates.
IncoherenceReport incoherence_check(const AnchoredLowRank& l, double mu);

}  // namespace anchor

#endif
