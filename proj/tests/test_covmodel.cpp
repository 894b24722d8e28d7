#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "anchor/covmodel.hpp"
#include "anchor/embed.hpp"
#include "anchor/matcore.hpp"
#include "anchor/rng.hpp"

using namespace anchor;

TEST_CASE("generated instances satisfy the structural invariants") {
    CovSpec spec;
    for (std::uint64_t trial = 0; trial < 5; ++trial) {
        const CovInstance inst = generate_instance(spec, derive_seed(9, trial));
        CHECK((inst.sigma1 - inst.l1 - inst.s1).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((inst.sigma2 - inst.l2 - inst.s2).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((inst.sigma2 - inst.sigma2.transpose()).cwiseAbs().maxCoeff() < 1e-12);
        Eigen::SelfAdjointEigenSolver<Matrix> eig(inst.sigma2);
        CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
        const SvdTriple t = full_svd(inst.l2);
        Index rank = 0;
        while (rank < t.s.size() && t.s(rank) > 1e-10) ++rank;
        CHECK(rank == spec.r1 + spec.delta_r);

        // Innovation factors live outside the embedded source subspace.
        const SvdTriple t1 = full_svd(inst.l1);
        const Matrix u1e = embed_factor(t1.u.leftCols(spec.r1), spec.p2);
        const Matrix resid = inst.l2 - embed_matrix(inst.l1, spec.p2, spec.p2);
        CHECK((u1e.transpose() * resid).cwiseAbs().maxCoeff() < 1e-8);

        CHECK(inst.measured_mu <= 3.0);
        CHECK(nnz(inst.s2 - embed_matrix(inst.s1, spec.p2, spec.p2), 0.0) <= spec.delta_s);
    }
}

TEST_CASE("degenerate spec reproduces the source covariance") {
    CovSpec spec;
    spec.p2 = spec.p1;
    spec.delta_r = 0;
    spec.delta_s = 0;
    const CovInstance inst = generate_instance(spec, 4);
    CHECK(inst.sigma2 == inst.sigma1);
}

TEST_CASE("sample_covariance basics") {
    CHECK(sample_covariance(Matrix::Zero(3, 3), 100, 5) == Matrix::Zero(3, 3));

    const Matrix big = sample_covariance(Matrix::Identity(2, 2), 1000000, 17);
    CHECK((big - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 0.01);

    const Matrix s = sample_covariance(Matrix::Identity(3, 3), 40, 8);
    CHECK(s == s.transpose().eval());
    CHECK(s == sample_covariance(Matrix::Identity(3, 3), 40, 8));
}

TEST_CASE("sample_covariance is unbiased in the Monte Carlo mean") {
    Matrix sigma(3, 3);
    sigma << 1.0, 0.25, 0.05, 0.25, 0.75, -0.15, 0.05, -0.15, 0.5;
    Matrix mean = Matrix::Zero(3, 3);
    for (std::uint64_t seed = 0; seed < 200; ++seed)
        mean += sample_covariance(sigma, 50, derive_seed(21, seed));
    mean /= 200.0;
    CHECK((mean - sigma).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("evaluate_trial error accounting") {
    CovSpec spec;
    const CovInstance inst = generate_instance(spec, 2);
    const TrialErrors perfect = evaluate_trial(inst, inst.l2, inst.s2);
    CHECK(perfect.err_l_fro == 0.0);
    CHECK(perfect.err_s_fro == 0.0);
    CHECK(perfect.err_theta_fro == 0.0);
    CHECK(perfect.sin_theta < 1e-7);

    const Matrix zero = Matrix::Zero(spec.p2, spec.p2);
    const TrialErrors miss = evaluate_trial(inst, zero, zero);
    CHECK(miss.err_l_fro == doctest::Approx(frob_norm(inst.l2)));
    CHECK(miss.err_theta_fro == doctest::Approx(frob_norm(inst.sigma2)));
}
