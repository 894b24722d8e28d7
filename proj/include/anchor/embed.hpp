#ifndef ANCHOR_EMBED_HPP
#define ANCHOR_EMBED_HPP

#include "anchor/matcore.hpp"

namespace anchor {

// Zero-padding embedding into the top-left block of the target ambient
// space. Throws std::invalid_argument on dimension overflow.
Matrix embed_matrix(const Matrix& a, Index target_rows, Index target_cols);

// Appends zero rows to a column-orthonormal factor; the Gram matrix (and
// hence orthonormality) is preserved exactly.
Matrix embed_factor(const Matrix& u, Index target_rows);

}  // namespace anchor

#endif
