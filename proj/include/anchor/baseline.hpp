#ifndef ANCHOR_BASELINE_HPP
#define ANCHOR_BASELINE_HPP

#include <vector>

#include "anchor/matcore.hpp"

namespace anchor {

struct BaselineResult {
    Matrix l_hat;
    Matrix s_hat;
    int iterations = 0;
    bool converged = false;
    std::vector<double> objective_trace;
};

// Standard low-rank plus sparse alternating projection: exactly the
// anchored algorithm run with empty anchors (rank_increment = rank) and a
// zero sparse anchor, so comparisons against the transfer estimator
// isolate the value of anchoring.
BaselineResult altproj_lowrank_sparse(const Matrix& y, Index rank, Index sparsity,
                                      double tolerance = 1e-8,
                                      int max_iterations = 100);

// Rank-r truncated SVD reconstruction (single-task PCA).
Matrix pca_truncate(const Matrix& y, Index rank);

}  // namespace anchor

#endif
