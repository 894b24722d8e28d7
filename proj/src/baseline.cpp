#include "anchor/baseline.hpp"

#include <stdexcept>

#include "anchor/transfer.hpp"

namespace anchor {

BaselineResult altproj_lowrank_sparse(const Matrix& y, Index rank, Index sparsity,
                                      double tolerance, int max_iterations) {
    if (rank < 1 || rank > std::min(y.rows(), y.cols())) {
        throw std::invalid_argument("altproj_lowrank_sparse: rank out of range");
    }
    AnchoredBasis empty{Matrix(y.rows(), 0), Matrix(y.cols(), 0), rank};
    TransferConfig cfg;
    cfg.rank_increment = rank;
    cfg.edit_budget = sparsity;
    cfg.tolerance = tolerance;
    cfg.max_iterations = max_iterations;
    TransferResult res =
        transfer_altproj(y, empty, Matrix::Zero(y.rows(), y.cols()), cfg);
    return BaselineResult{res.l_hat.value, res.s_hat, res.iterations, res.converged,
                          res.objective_trace};
}

Matrix pca_truncate(const Matrix& y, Index rank) {
    if (rank < 1 || rank > std::min(y.rows(), y.cols())) {
        throw std::invalid_argument("pca_truncate: rank out of range");
    }
    const SvdTriple t = truncated_svd(y, rank);
    return t.u * t.s.asDiagonal() * t.v.transpose();
}

}  // namespace anchor
