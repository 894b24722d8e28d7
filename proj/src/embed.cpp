#include "anchor/embed.hpp"

#include <stdexcept>

namespace anchor {

Matrix embed_matrix(const Matrix& a, Index target_rows, Index target_cols) {
    if (a.rows() > target_rows || a.cols() > target_cols) {
        throw std::invalid_argument("embed_matrix: source exceeds target shape");
    }
    Matrix out = Matrix::Zero(target_rows, target_cols);
    out.topLeftCorner(a.rows(), a.cols()) = a;
    return out;
}

Matrix embed_factor(const Matrix& u, Index target_rows) {
    if (u.rows() > target_rows) {
        throw std::invalid_argument("embed_factor: source exceeds target rows");
    }
    Matrix out = Matrix::Zero(target_rows, u.cols());
    out.topRows(u.rows()) = u;
    return out;
}

}  // namespace anchor
