#include "anchor/covmodel.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "anchor/embed.hpp"
#include "anchor/rng.hpp"
#include "anchor/transfer.hpp"

namespace anchor {

namespace {

// QR of a standard Gaussian matrix, columns signed so the
// largest-magnitude entry is positive.
Matrix random_orthonormal(Rng& rng, Index rows, Index cols) {
    Matrix g(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) g(i, j) = rng.normal();
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(rows, cols);
    for (Index j = 0; j < cols; ++j) {
        Index imax = 0;
        q.col(j).cwiseAbs().maxCoeff(&imax);
        if (q(imax, j) < 0.0) q.col(j) = -q.col(j);
    }
    return q;
}

// Spikes (10, 7, 4) at r1 = 3; linear descent from 10 to 4 otherwise.
Vector spike_values(Index r, double scale) {
    Vector d(r);
    for (Index k = 0; k < r; ++k) {
        const double t = r > 1 ? static_cast<double>(k) / static_cast<double>(r - 1)
                               : 0.0;
        d(k) = (10.0 - 6.0 * t) * scale;
    }
    return d;
}

double measured_incoherence(const Matrix& u, Index p) {
    const Index r = u.cols();
    if (r == 0) return 0.0;
    return u.rowwise().norm().maxCoeff() *
           std::sqrt(static_cast<double>(p) / static_cast<double>(r));
}

CovInstance build_once(const CovSpec& spec, std::uint64_t seed) {
    Rng rng(seed);
    const Index p1 = spec.p1, p2 = spec.p2, r1 = spec.r1, dr = spec.delta_r;

    CovInstance inst;
    const Matrix u1 = random_orthonormal(rng, p1, r1);
    const Vector d1 = spike_values(r1, spec.spike_scale);
    inst.l1 = u1 * d1.asDiagonal() * u1.transpose();

    inst.s1 = Matrix::Zero(p1, p1);
    for (Index i = 0; i < std::min(spec.s1, p1); ++i) {
        inst.s1(i, i) = rng.uniform(0.5, 1.5) * spec.noise_scale;
    }
    inst.sigma1 = inst.l1 + inst.s1;

    // Innovation directions orthogonal to the embedded source factor.
    const Matrix u1_embed = embed_factor(u1, p2);
    Matrix u_delta(p2, dr);
    for (Index j = 0; j < dr; ++j) {
        Vector g(p2);
        for (Index i = 0; i < p2; ++i) g(i) = rng.normal();
        for (int pass = 0; pass < 2; ++pass) {
            g -= u1_embed * (u1_embed.transpose() * g);
            g -= u_delta.leftCols(j) * (u_delta.leftCols(j).transpose() * g);
        }
        u_delta.col(j) = g / g.norm();
        Index imax = 0;
        u_delta.col(j).cwiseAbs().maxCoeff(&imax);
        if (u_delta(imax, j) < 0.0) u_delta.col(j) = -u_delta.col(j);
    }
    Matrix l2 = embed_matrix(inst.l1, p2, p2);
    for (Index j = 0; j < dr; ++j) {
        const double spike = (5.0 - 0.5 * static_cast<double>(j)) * spec.spike_scale;
        l2 += spike * (u_delta.col(j) * u_delta.col(j).transpose());
    }
    inst.l2 = l2;

    // Diagonal edits among the new coordinates, sampled without
    // replacement.
    inst.s2 = embed_matrix(inst.s1, p2, p2);
    std::vector<Index> fresh;
    for (Index i = p1; i < p2; ++i) fresh.push_back(i);
    const Index edits = std::min<Index>(spec.delta_s,
                                        static_cast<Index>(fresh.size()));
    for (Index e = 0; e < edits; ++e) {
        const std::size_t pick = rng.uniform_int(fresh.size() - e) + e;
        std::swap(fresh[static_cast<std::size_t>(e)], fresh[pick]);
        inst.s2(fresh[static_cast<std::size_t>(e)], fresh[static_cast<std::size_t>(e)]) =
            rng.uniform(0.5, 1.5) * spec.noise_scale;
    }
    inst.sigma2 = inst.l2 + inst.s2;

    inst.u2_true = Matrix(p2, r1 + dr);
    inst.u2_true.leftCols(r1) = u1_embed;
    inst.u2_true.rightCols(dr) = u_delta;
    inst.measured_mu = measured_incoherence(inst.u2_true, p2);
    return inst;
}

}  // namespace

CovInstance generate_instance(const CovSpec& spec, std::uint64_t cell_seed) {
    if (spec.p2 < spec.p1 || spec.r1 + spec.delta_r > spec.p1 || spec.r1 < 1) {
        throw std::invalid_argument("generate_instance: invalid spec dimensions");
    }
    // Incoherence design gate: regenerate highly coherent instances.
    for (int attempt = 0;; ++attempt) {
        CovInstance inst = build_once(spec, derive_seed(cell_seed, attempt));
        inst.regenerations = attempt;
        if (inst.measured_mu <= 3.0 || attempt >= 50) return inst;
    }
}

Matrix sample_covariance(const Matrix& sigma, long long n, std::uint64_t seed) {
    const Index p = sigma.rows();
    if (sigma.cols() != p || n < 1) {
        throw std::invalid_argument("sample_covariance: bad arguments");
    }
    if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
        throw std::invalid_argument("sample_covariance: sigma not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma);
    if (eig.info() != Eigen::Success) {
        throw std::runtime_error("sample_covariance: eigendecomposition failed");
    }
    const Vector lam = eig.eigenvalues().cwiseMax(0.0);
    const Matrix root =
        eig.eigenvectors() * lam.cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();

    Rng rng(seed);
    Matrix upper = Matrix::Zero(p, p);
    Vector z(p);
    for (long long k = 0; k < n; ++k) {
        for (Index i = 0; i < p; ++i) z(i) = rng.normal();
        const Vector x = root * z;
        for (Index i = 0; i < p; ++i)
            for (Index j = i; j < p; ++j) upper(i, j) += x(i) * x(j);
    }
    upper /= static_cast<double>(n);
    Matrix cov(p, p);
    for (Index i = 0; i < p; ++i)
        for (Index j = i; j < p; ++j) cov(i, j) = cov(j, i) = upper(i, j);
    return cov;
}

TrialErrors evaluate_trial(const CovInstance& instance, const Matrix& l_hat,
                           const Matrix& s_hat) {
    TrialErrors errs;
    errs.err_l_fro = (l_hat - instance.l2).norm();
    errs.err_s_fro = (s_hat - instance.s2).norm();
    errs.err_theta_fro = (l_hat + s_hat - instance.sigma2).norm();
    const Index r2 = instance.u2_true.cols();
    const SvdTriple t = truncated_svd(l_hat, r2);
    errs.sin_theta = sin_theta_distance(instance.u2_true, t.u);
    return errs;
}

}  // namespace anchor
