#ifndef ANCHOR_MATCORE_HPP
#define ANCHOR_MATCORE_HPP

#include <Eigen/Dense>
#include <iosfwd>
#include <string>

namespace anchor {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Singular values below kRankTol * sigma_max are treated as zero.
inline constexpr double kRankTol = 1e-12;

// Full SVD m = u * diag(s) * v^T with column-orthonormal u, v and
// non-increasing s.
struct SvdTriple {
    Matrix u;
    Vector s;
    Matrix v;
};

// Throws std::invalid_argument if m contains NaN/Inf.
void require_finite(const Matrix& m, const char* what);

double frob_norm(const Matrix& m);
double op_norm(const Matrix& m);
double max_norm(const Matrix& m);
Index nnz(const Matrix& m, double tol);

// Deterministic dense SVD. Sign convention: each left singular vector is
// scaled so its largest-magnitude entry (first on ties) is positive; the
// right vector follows.
SvdTriple full_svd(const Matrix& m);

// Top-k triple of full_svd. Directions beyond the numerical rank are
// completed deterministically (Gram-Schmidt against preceding columns,
// standard basis vectors in index order) and carry zero singular values.
SvdTriple truncated_svd(const Matrix& m, Index k);

// Keeps the k largest-magnitude entries, zeros the rest. Ties broken by
// row-major position, lower index first. Entries that are exactly zero are
// never counted toward the budget.
Matrix hard_threshold_topk(const Matrix& m, Index k);

// Frobenius norm of the vector of sines of principal angles between the
// column spaces: ||P_true - P_est||_F / sqrt(2).
double sin_theta_distance(const Matrix& u_true, const Matrix& u_est);

// Appends `extra` orthonormal columns orthogonal to the columns of `basis`
// (assumed column-orthonormal). Candidates are standard basis vectors
// scanned in index order.
Matrix orthonormal_completion(const Matrix& basis, Index extra);

// Matrix text format used repo-wide: first line "rows cols", then one line
// per row with space-separated values at 17 significant digits.
void write_matrix(std::ostream& os, const Matrix& m);
void write_matrix_file(const std::string& path, const Matrix& m);
// Parse errors throw std::runtime_error with the offending line number.
Matrix read_matrix(std::istream& is, const std::string& name);
Matrix read_matrix_file(const std::string& path);

}  // namespace anchor

#endif
