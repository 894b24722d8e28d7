#include "anchor/markov.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "anchor/embed.hpp"
#include "anchor/rng.hpp"

namespace anchor {

namespace {

struct ConstructionFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Vector positive_prob_vector(Rng& rng, Index dim) {
    Vector v(dim);
    for (Index i = 0; i < dim; ++i) v(i) = 0.2 + rng.uniform();
    return v / v.sum();
}

Vector normalized_weights(Rng& rng, Index count) {
    Vector w(count);
    for (Index i = 0; i < count; ++i) w(i) = rng.uniform(0.5, 1.5);
    return w / w.sum();
}

Index numerical_rank(const Matrix& m, double rel_tol) {
    const SvdTriple t = full_svd(m);
    if (t.s.size() == 0 || t.s(0) <= 0.0) return 0;
    Index r = 0;
    for (Index i = 0; i < t.s.size(); ++i)
        if (t.s(i) >= rel_tol * t.s(0)) ++r;
    return r;
}

MarkovChain chain_from_frequency(const Matrix& f) {
    const Index p = f.rows();
    MarkovChain chain;
    chain.stationary = f.rowwise().sum();
    chain.stationary /= chain.stationary.sum();
    chain.transition = Matrix(p, p);
    for (Index i = 0; i < p; ++i) {
        const double mass = f.row(i).sum();
        if (mass > 0.0) {
            chain.transition.row(i) = f.row(i) / mass;
        } else {
            chain.transition.row(i).setConstant(1.0 / static_cast<double>(p));
        }
    }
    return chain;
}

StructuredMarkovPair try_build(const MarkovPairSpec& spec, std::uint64_t seed) {
    Rng rng(seed);
    const Index p1 = spec.p1, p2 = spec.p2;
    const Index r1 = spec.rank, delta = spec.rank_increment;
    const Index new_states = p2 - p1;

    // Source: symmetric mixture of rank-one joint distributions, so the
    // frequency matrix is a valid joint law with matching marginals.
    Matrix f1 = Matrix::Zero(p1, p1);
    const Vector w = normalized_weights(rng, r1);
    for (Index k = 0; k < r1; ++k) {
        const Vector a = positive_prob_vector(rng, p1);
        f1 += w(k) * (a * a.transpose());
    }
    if (numerical_rank(f1, 1e-8) != r1) {
        throw ConstructionFailure("source frequency matrix rank-deficient");
    }

    // Target mass budget: scaled embedding + innovation on the new states
    // + sparse edits, all symmetric.
    const double innovation_mass = delta > 0 ? 0.2 : 0.0;
    const double edit_mass = spec.sparse_edits > 0 ? 0.15 : 0.0;
    const double old_mass = 1.0 - innovation_mass - edit_mass;

    Matrix innovation = Matrix::Zero(p2, p2);
    Matrix g_cols(p2, delta);
    if (delta > 0) {
        const Vector v = normalized_weights(rng, delta);
        for (Index j = 0; j < delta; ++j) {
            Vector g = Vector::Zero(p2);
            g.tail(new_states) = positive_prob_vector(rng, new_states);
            innovation += innovation_mass * v(j) * (g * g.transpose());
            g_cols.col(j) = g;
        }
        if (numerical_rank(innovation, 1e-8) != delta) {
            throw ConstructionFailure("innovation block rank-deficient");
        }
    }

    // Sparse edits, placed symmetrically so marginals stay consistent.
    // When new states carry innovation mass, the first two edits bridge an
    // old and a new state; otherwise the chain would split into two closed
    // classes.
    Matrix edits = Matrix::Zero(p2, p2);
    Index budget = spec.sparse_edits;
    if (budget > 0) {
        std::vector<std::pair<Index, Index>> cells;
        if (delta > 0 && new_states > 0) {
            const Index i_old = static_cast<Index>(rng.uniform_int(p1));
            const Index j_new =
                p1 + static_cast<Index>(rng.uniform_int(new_states));
            cells.emplace_back(i_old, j_new);
            cells.emplace_back(j_new, i_old);
        }
        int guard = 0;
        while (static_cast<Index>(cells.size()) + 1 < budget && p1 >= 2) {
            Index a = static_cast<Index>(rng.uniform_int(p1));
            Index b = static_cast<Index>(rng.uniform_int(p1));
            if (a == b) continue;
            if (a > b) std::swap(a, b);
            const bool used =
                std::find(cells.begin(), cells.end(), std::make_pair(a, b)) !=
                cells.end();
            if (used && ++guard < 1000) continue;
            if (used) throw ConstructionFailure("could not place distinct edits");
            cells.emplace_back(a, b);
            cells.emplace_back(b, a);
        }
        if (static_cast<Index>(cells.size()) < budget) {
            cells.emplace_back(static_cast<Index>(rng.uniform_int(p1)),
                               static_cast<Index>(rng.uniform_int(p1)));
            cells.back().second = cells.back().first;  // diagonal, one entry
        }
        Vector mags(static_cast<Index>(cells.size()));
        for (Index i = 0; i < mags.size(); ++i) mags(i) = rng.uniform(0.5, 1.5);
        // Keep symmetric pair magnitudes equal.
        for (std::size_t i = 0; i + 1 < cells.size(); ++i) {
            if (cells[i].first == cells[i + 1].second &&
                cells[i].second == cells[i + 1].first &&
                cells[i].first != cells[i].second) {
                mags(static_cast<Index>(i + 1)) = mags(static_cast<Index>(i));
            }
        }
        mags *= edit_mass / mags.sum();
        for (std::size_t i = 0; i < cells.size(); ++i) {
            edits(cells[i].first, cells[i].second) +=
                mags(static_cast<Index>(i));
        }
        if (nnz(edits, 0.0) > spec.sparse_edits) {
            throw ConstructionFailure("edit positions collided");
        }
    }

    StructuredMarkovPair pair;
    pair.f1 = f1;
    pair.l2_true = old_mass * embed_matrix(f1, p2, p2) + innovation;
    pair.s2_true = edits;
    pair.f2 = pair.l2_true + pair.s2_true;
    pair.source = chain_from_frequency(f1);
    pair.target = chain_from_frequency(pair.f2);
    pair.u1_true = truncated_svd(f1, r1).u;

    pair.u2_true = Matrix(p2, r1 + delta);
    pair.u2_true.leftCols(r1) = embed_factor(pair.u1_true, p2);
    for (Index j = 0; j < delta; ++j) {
        Vector g = g_cols.col(j);
        for (int pass = 0; pass < 2; ++pass) {
            g -= pair.u2_true.leftCols(r1 + j) *
                 (pair.u2_true.leftCols(r1 + j).transpose() * g);
        }
        const double norm = g.norm();
        if (norm < 1e-10) {
            throw ConstructionFailure("innovation directions degenerate");
        }
        pair.u2_true.col(r1 + j) = g / norm;
    }

    const SvdTriple t = truncated_svd(pair.l2_true, r1 + delta);
    pair.structure_violation =
        (pair.l2_true - t.u * t.s.asDiagonal() * t.v.transpose()).norm() /
        std::max(pair.f2.norm(), 1e-300);
    return pair;
}

}  // namespace

StructuredMarkovPair build_structured_pair(const MarkovPairSpec& spec) {
    if (spec.p1 < 1 || spec.p2 < spec.p1) {
        throw std::invalid_argument("build_structured_pair: need p2 >= p1 >= 1");
    }
    if (spec.rank < 1 || spec.rank + spec.rank_increment > spec.p1) {
        throw std::invalid_argument(
            "build_structured_pair: need 1 <= r1 and r1 + delta_r <= p1");
    }
    if (spec.rank_increment < 0 || spec.rank_increment > spec.p2 - spec.p1) {
        throw std::invalid_argument(
            "build_structured_pair: rank_increment must fit in the new states");
    }
    if (spec.rank_increment > 0 && spec.sparse_edits < 2) {
        throw std::invalid_argument(
            "build_structured_pair: sparse_edits >= 2 required to connect the "
            "new states to the old block");
    }
    std::string last_error;
    for (std::uint64_t attempt = 0; attempt < 20; ++attempt) {
        try {
            return try_build(spec, derive_seed(spec.seed, attempt));
        } catch (const ConstructionFailure& e) {
            last_error = e.what();
        }
    }
    throw std::runtime_error("build_structured_pair: failed after 20 attempts: " +
                             last_error);
}

std::vector<int> simulate_trajectory(const MarkovChain& chain, long long length,
                                     std::uint64_t seed) {
    if (length < 1) throw std::invalid_argument("simulate_trajectory: length < 1");
    const Index p = chain.transition.rows();
    Rng rng(seed);
    const auto sample_from = [&rng, p](const auto& probs) {
        const double u = rng.uniform();
        double cum = 0.0;
        for (Index i = 0; i < p; ++i) {
            cum += probs(i);
            if (u < cum) return static_cast<int>(i);
        }
        return static_cast<int>(p - 1);
    };
    std::vector<int> traj(static_cast<std::size_t>(length));
    traj[0] = sample_from(chain.stationary);
    for (long long t = 1; t < length; ++t) {
        traj[static_cast<std::size_t>(t)] =
            sample_from(chain.transition.row(traj[static_cast<std::size_t>(t - 1)]));
    }
    return traj;
}

Matrix empirical_frequency(const std::vector<int>& trajectory, Index p) {
    if (trajectory.size() < 2) {
        throw std::invalid_argument("empirical_frequency: need length >= 2");
    }
    for (int s : trajectory) {
        if (s < 0 || s >= p) {
            throw std::invalid_argument("empirical_frequency: state out of range");
        }
    }
    std::vector<long long> counts(static_cast<std::size_t>(p * p), 0);
    for (std::size_t t = 0; t + 1 < trajectory.size(); ++t) {
        ++counts[static_cast<std::size_t>(trajectory[t]) * static_cast<std::size_t>(p) +
                 static_cast<std::size_t>(trajectory[t + 1])];
    }
    const double n = static_cast<double>(trajectory.size() - 1);
    Matrix f(p, p);
    for (Index i = 0; i < p; ++i)
        for (Index j = 0; j < p; ++j)
            f(i, j) = static_cast<double>(
                          counts[static_cast<std::size_t>(i * p + j)]) / n;
    return f;
}

namespace {

Vector power_iterate(const Matrix& p_matrix, Vector x, long long max_iters) {
    for (long long it = 0; it < max_iters; ++it) {
        Vector next = p_matrix.transpose() * x;
        next /= next.sum();
        const double change = (next - x).lpNorm<1>();
        x = std::move(next);
        if (change < 1e-12) return x;
    }
    throw std::runtime_error(
        "stationary_distribution: power iteration did not converge "
        "(likely non-ergodic chain)");
}

}  // namespace

Vector stationary_distribution(const Matrix& p_matrix) {
    const Index p = p_matrix.rows();
    if (p_matrix.cols() != p || p < 1) {
        throw std::invalid_argument("stationary_distribution: need square matrix");
    }
    for (Index i = 0; i < p; ++i) {
        if (std::abs(p_matrix.row(i).sum() - 1.0) > 1e-8 ||
            p_matrix.row(i).minCoeff() < -1e-12) {
            throw std::invalid_argument(
                "stationary_distribution: matrix is not row-stochastic");
        }
    }
    const long long cap = 100000;
    const Vector uniform = Vector::Constant(p, 1.0 / static_cast<double>(p));
    const Vector pi_a = power_iterate(p_matrix, uniform, cap);
    // Perturbed restart: a reducible chain can leave the uniform start
    // fixed, so check the fixed point is unique.
    Vector perturbed = uniform;
    perturbed(0) += 0.1;
    perturbed /= perturbed.sum();
    const Vector pi_b = power_iterate(p_matrix, perturbed, cap);
    if ((pi_a - pi_b).lpNorm<1>() > 1e-8) {
        throw std::runtime_error(
            "stationary_distribution: stationary distribution is not unique "
            "(non-ergodic chain)");
    }
    return pi_a;
}

Vector simplex_project(const Vector& v) {
    if (!v.allFinite()) {
        throw std::invalid_argument("simplex_project: non-finite entries");
    }
    const Index n = v.size();
    std::vector<double> sorted(v.data(), v.data() + n);
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    double cum = 0.0, theta = 0.0;
    for (Index k = 0; k < n; ++k) {
        cum += sorted[static_cast<std::size_t>(k)];
        const double t = (cum - 1.0) / static_cast<double>(k + 1);
        if (sorted[static_cast<std::size_t>(k)] - t > 0.0) theta = t;
    }
    Vector out(n);
    for (Index i = 0; i < n; ++i) out(i) = std::max(v(i) - theta, 0.0);
    return out;
}

Matrix plugin_transition(const Matrix& f_hat) {
    const Index p = f_hat.rows();
    if (f_hat.cols() != p) {
        throw std::invalid_argument("plugin_transition: need square matrix");
    }
    Matrix p_hat(p, p);
    for (Index i = 0; i < p; ++i) {
        const double mass = f_hat.row(i).sum();
        if (mass > 0.0) {
            p_hat.row(i) = simplex_project(Vector(f_hat.row(i) / mass));
        } else {
            p_hat.row(i).setConstant(1.0 / static_cast<double>(p));
        }
    }
    return p_hat;
}

MarkovTransferEstimate transfer_markov_estimate(const Matrix& f_hat2,
                                                const SourceEstimate& src,
                                                const TransferConfig& cfg) {
    auto [basis, s0] =
        make_anchors(src, f_hat2.rows(), f_hat2.cols(), cfg.rank_increment);
    MarkovTransferEstimate est;
    est.detail = transfer_altproj(f_hat2, basis, s0, cfg);
    est.f_tran = est.detail.l_hat.value + est.detail.s_hat;
    est.p_tran = plugin_transition(est.f_tran);
    return est;
}

}  // namespace anchor
