#ifndef ANCHOR_PROJECT_HPP
#define ANCHOR_PROJECT_HPP

#include "anchor/matcore.hpp"

namespace anchor {

// Embedded source subspaces plus the rank increment for innovations.
struct AnchoredBasis {
    Matrix u_anchor;        // p2 x r1, column-orthonormal
    Matrix v_anchor;        // q2 x r1, column-orthonormal
    Index rank_increment;   // number of innovation directions
};

// Output of the anchored low-rank projection. The first r1 columns of
// u_full/v_full are the anchors, bitwise; the trailing columns are the
// innovation directions, orthogonal to the anchors.
struct AnchoredLowRank {
    Matrix u_full;  // p2 x (r1 + delta)
    Matrix v_full;  // q2 x (r1 + delta)
    Matrix coeff;   // (r1 + delta) x (r1 + delta)
    Matrix value;   // p2 x q2, u_full * coeff * v_full^T
};

// Best-fit low-rank approximation whose row/column spaces contain the
// anchored subspaces: residual (I - P_U) m (I - P_V), leading
// rank_increment singular directions of it as innovations, coefficients in
// closed form. Innovation directions beyond the residual's numerical rank
// are deterministic orthonormal completions against the anchor.
AnchoredLowRank anchored_lowrank_proj(const Matrix& m, const AnchoredBasis& basis);

// anchor_s0 + hard_threshold_topk(m - anchor_s0, edit_budget): the closest
// matrix to m differing from the anchor in at most edit_budget entries.
Matrix sparse_edit_proj(const Matrix& m, const Matrix& anchor_s0, Index edit_budget);

}  // namespace anchor

#endif
