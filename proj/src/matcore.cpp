#include "anchor/matcore.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace anchor {

void require_finite(const Matrix& m, const char* what) {
    if (!m.allFinite()) {
        throw std::invalid_argument(std::string(what) + ": non-finite entries");
    }
}

double frob_norm(const Matrix& m) { return m.norm(); }

double op_norm(const Matrix& m) {
    const SvdTriple t = full_svd(m);
    return t.s.size() > 0 ? t.s(0) : 0.0;
}

double max_norm(const Matrix& m) {
    return m.size() > 0 ? m.cwiseAbs().maxCoeff() : 0.0;
}

Index nnz(const Matrix& m, double tol) {
    Index count = 0;
    for (Index j = 0; j < m.cols(); ++j)
        for (Index i = 0; i < m.rows(); ++i)
            if (std::abs(m(i, j)) > tol) ++count;
    return count;
}

namespace {

// Largest-magnitude entry positive, first index on ties.
void apply_sign_convention(Matrix& u, Matrix& v) {
    for (Index j = 0; j < u.cols(); ++j) {
        Index imax = 0;
        double best = -1.0;
        for (Index i = 0; i < u.rows(); ++i) {
            const double a = std::abs(u(i, j));
            if (a > best) {
                best = a;
                imax = i;
            }
        }
        if (u(imax, j) < 0.0) {
            u.col(j) = -u.col(j);
            if (j < v.cols()) v.col(j) = -v.col(j);
        }
    }
}

}  // namespace

SvdTriple full_svd(const Matrix& m) {
    require_finite(m, "full_svd");
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    SvdTriple t{svd.matrixU(), svd.singularValues(), svd.matrixV()};
    apply_sign_convention(t.u, t.v);
    return t;
}

SvdTriple truncated_svd(const Matrix& m, Index k) {
    if (k < 0 || k > std::min(m.rows(), m.cols())) {
        throw std::invalid_argument("truncated_svd: k out of range");
    }
    if (k == 0) {
        return SvdTriple{Matrix(m.rows(), 0), Vector(0), Matrix(m.cols(), 0)};
    }
    const SvdTriple full = full_svd(m);
    const double smax = full.s.size() > 0 ? full.s(0) : 0.0;
    Index numerical_rank = 0;
    for (Index i = 0; i < full.s.size(); ++i) {
        if (smax > 0.0 && full.s(i) >= kRankTol * smax) ++numerical_rank;
    }
    const Index keep = std::min(k, numerical_rank);

    SvdTriple t;
    t.u = Matrix(m.rows(), k);
    t.v = Matrix(m.cols(), k);
    t.s = Vector::Zero(k);
    t.u.leftCols(keep) = full.u.leftCols(keep);
    t.v.leftCols(keep) = full.v.leftCols(keep);
    t.s.head(keep) = full.s.head(keep);
    if (keep < k) {
        t.u.rightCols(k - keep) = orthonormal_completion(t.u.leftCols(keep), k - keep);
        t.v.rightCols(k - keep) = orthonormal_completion(t.v.leftCols(keep), k - keep);
    }
    return t;
}

Matrix hard_threshold_topk(const Matrix& m, Index k) {
    if (k < 0 || k > m.size()) {
        throw std::invalid_argument("hard_threshold_topk: k out of range");
    }
    // Row-major linear index so tie-breaking is by row-major position.
    std::vector<Index> idx(static_cast<std::size_t>(m.size()));
    std::iota(idx.begin(), idx.end(), Index{0});
    const auto value_at = [&m](Index lin) {
        return m(lin / m.cols(), lin % m.cols());
    };
    std::sort(idx.begin(), idx.end(), [&](Index a, Index b) {
        const double va = std::abs(value_at(a)), vb = std::abs(value_at(b));
        if (va != vb) return va > vb;
        return a < b;
    });
    Matrix out = Matrix::Zero(m.rows(), m.cols());
    for (Index t = 0; t < k; ++t) {
        const Index lin = idx[static_cast<std::size_t>(t)];
        const double v = value_at(lin);
        if (v == 0.0) break;  // zeros never count toward the budget
        out(lin / m.cols(), lin % m.cols()) = v;
    }
    return out;
}

double sin_theta_distance(const Matrix& u_true, const Matrix& u_est) {
    if (u_true.rows() != u_est.rows() || u_true.cols() != u_est.cols() ||
        u_true.cols() < 1) {
        throw std::invalid_argument("sin_theta_distance: shape mismatch");
    }
    const double r = static_cast<double>(u_true.cols());
    const double overlap = (u_true.transpose() * u_est).squaredNorm();
    return std::sqrt(std::max(0.0, r - overlap));
}

Matrix orthonormal_completion(const Matrix& basis, Index extra) {
    const Index n = basis.rows();
    if (basis.cols() + extra > n) {
        throw std::invalid_argument("orthonormal_completion: too many columns");
    }
    Matrix q(n, basis.cols() + extra);
    q.leftCols(basis.cols()) = basis;
    Index have = basis.cols();
    for (Index cand = 0; cand < n && have < basis.cols() + extra; ++cand) {
        Vector r = Vector::Unit(n, cand);
        // Two Gram-Schmidt passes for numerical stability.
        for (int pass = 0; pass < 2; ++pass) {
            r -= q.leftCols(have) * (q.leftCols(have).transpose() * r);
        }
        const double norm = r.norm();
        if (norm > 1e-3) {
            q.col(have++) = r / norm;
        }
    }
    if (have < basis.cols() + extra) {
        throw std::runtime_error("orthonormal_completion: basis not orthonormal");
    }
    return q.rightCols(extra);
}

void write_matrix(std::ostream& os, const Matrix& m) {
    os << m.rows() << ' ' << m.cols() << '\n';
    char buf[40];
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
            if (j) os << ' ';
            os << buf;
        }
        os << '\n';
    }
}

void write_matrix_file(const std::string& path, const Matrix& m) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    write_matrix(os, m);
    if (!os) throw std::runtime_error("write failed: " + path);
}

Matrix read_matrix(std::istream& is, const std::string& name) {
    const auto fail = [&name](long line, const std::string& msg) {
        std::ostringstream os;
        os << name << ":" << line << ": " << msg;
        throw std::runtime_error(os.str());
    };
    std::string line;
    long lineno = 0;
    if (!std::getline(is, line)) fail(1, "missing header line");
    ++lineno;
    Index rows = 0, cols = 0;
    {
        std::istringstream hs(line);
        if (!(hs >> rows >> cols) || rows <= 0 || cols <= 0) {
            fail(lineno, "expected header \"rows cols\" with positive counts");
        }
    }
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        if (!std::getline(is, line)) fail(lineno + 1, "unexpected end of file");
        ++lineno;
        std::istringstream rs(line);
        for (Index j = 0; j < cols; ++j) {
            if (!(rs >> m(i, j))) fail(lineno, "malformed matrix row");
        }
        double extra;
        if (rs >> extra) fail(lineno, "too many values on row");
    }
    require_finite(m, name.c_str());
    return m;
}

Matrix read_matrix_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open: " + path);
    return read_matrix(is, path);
}

}  // namespace anchor
