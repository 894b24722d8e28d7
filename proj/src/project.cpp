#include "anchor/project.hpp"

#include <stdexcept>

namespace anchor {

namespace {

// m - U(U^T m) - (m V)V^T + U(U^T m V)V^T without forming p x p projectors.
Matrix complement_residual(const Matrix& m, const Matrix& u, const Matrix& v) {
    const Matrix ut_m = u.transpose() * m;
    const Matrix m_v = m * v;
    return m - u * ut_m - m_v * v.transpose() + u * (ut_m * v) * v.transpose();
}

// Leading `delta` left singular directions of `a`, orthogonalized against the
// anchor and completed deterministically when a's numerical rank falls short.
// `scale` is the norm of the matrix being projected: directions of a block
// that is pure rounding noise relative to it would overlap the anchor
// arbitrarily and must come from the completion instead.
Matrix left_directions(const Matrix& a, const Matrix& anchor, Index delta,
                       double scale) {
    Matrix out(a.rows(), delta);
    if (delta == 0) return out;

    const SvdTriple svd = full_svd(a);
    Index keep = 0;
    for (Index i = 0; i < std::min(delta, svd.s.size()); ++i) {
        if (scale > 0.0 && svd.s(i) >= kRankTol * scale) ++keep;
    }
    out.leftCols(keep) = svd.u.leftCols(keep);
    // One re-orthogonalization pass: a lies in the anchor's complement only
    // up to rounding.
    for (Index j = 0; j < keep; ++j) {
        Vector c = out.col(j);
        c -= anchor * (anchor.transpose() * c);
        if (j > 0) c -= out.leftCols(j) * (out.leftCols(j).transpose() * c);
        out.col(j) = c / c.norm();
    }
    if (keep < delta) {
        Matrix q(a.rows(), anchor.cols() + keep);
        q << anchor, out.leftCols(keep);
        out.rightCols(delta - keep) = orthonormal_completion(q, delta - keep);
    }
    return out;
}

}  // namespace

AnchoredLowRank anchored_lowrank_proj(const Matrix& m, const AnchoredBasis& basis) {
    const Index p = m.rows(), q = m.cols();
    const Index r1 = basis.u_anchor.cols();
    const Index delta = basis.rank_increment;
    if (basis.u_anchor.rows() != p || basis.v_anchor.rows() != q ||
        basis.v_anchor.cols() != r1) {
        throw std::invalid_argument("anchored_lowrank_proj: dimension mismatch");
    }
    if (delta < 0 || r1 + delta > std::min(p, q)) {
        throw std::invalid_argument("anchored_lowrank_proj: rank budget too large");
    }

    const double scale = frob_norm(m);
    const Matrix residual = complement_residual(m, basis.u_anchor, basis.v_anchor);
    Matrix u_delta = left_directions(residual, basis.u_anchor, delta, scale);
    Matrix v_delta = left_directions(residual.transpose(), basis.v_anchor, delta, scale);

    if (delta > 0 && r1 > 0) {
        // The doubly projected residual's singular directions maximize only
        // the innovation/innovation energy; the captured energy also has
        // anchor/innovation cross terms. Refine by block alternating
        // maximization of
        //   ||U_d^T gu||^2 + ||V_d^T gv||^2 + ||U_d^T R V_d||^2,
        // which depends only on the chosen subspaces; each block update is a
        // singular value problem, so the iteration is deterministic and
        // non-decreasing.
        const Matrix mv = m * basis.v_anchor;
        const Matrix gu = mv - basis.u_anchor * (basis.u_anchor.transpose() * mv);
        const Matrix mtu = m.transpose() * basis.u_anchor;
        const Matrix gv = mtu - basis.v_anchor * (basis.v_anchor.transpose() * mtu);
        const auto energy = [&](const Matrix& ud, const Matrix& vd) {
            return (ud.transpose() * gu).squaredNorm() +
                   (vd.transpose() * gv).squaredNorm() +
                   (ud.transpose() * residual * vd).squaredNorm();
        };
        double best = energy(u_delta, v_delta);
        const double tol = 1e-13 * scale * scale;
        for (int sweep = 0; sweep < 100; ++sweep) {
            Matrix su(p, r1 + delta);
            su << gu, residual * v_delta;
            const Matrix ud = left_directions(su, basis.u_anchor, delta, scale);
            Matrix sv(q, r1 + delta);
            sv << gv, residual.transpose() * ud;
            const Matrix vd = left_directions(sv, basis.v_anchor, delta, scale);
            const double f = energy(ud, vd);
            if (!(f > best + tol)) break;
            best = f;
            u_delta = ud;
            v_delta = vd;
        }
    }

    AnchoredLowRank out;
    out.u_full = Matrix(p, r1 + delta);
    out.u_full << basis.u_anchor, u_delta;
    out.v_full = Matrix(q, r1 + delta);
    out.v_full << basis.v_anchor, v_delta;
    out.coeff = out.u_full.transpose() * m * out.v_full;
    out.value = out.u_full * out.coeff * out.v_full.transpose();
    return out;
}

Matrix sparse_edit_proj(const Matrix& m, const Matrix& anchor_s0, Index edit_budget) {
    if (m.rows() != anchor_s0.rows() || m.cols() != anchor_s0.cols()) {
        throw std::invalid_argument("sparse_edit_proj: shape mismatch");
    }
    // Selected entries copy m exactly rather than adding the kept residual
    // back, so edited positions match m bitwise.
    const Matrix kept = hard_threshold_topk(m - anchor_s0, edit_budget);
    Matrix out = anchor_s0;
    for (Index j = 0; j < m.cols(); ++j) {
        for (Index i = 0; i < m.rows(); ++i) {
            if (kept(i, j) != 0.0) out(i, j) = m(i, j);
        }
    }
    return out;
}

}  // namespace anchor
