// channel.cpp — Kraus-form processes and their derived representations.

#include "ips/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ips {

// ------------------------------ construction --------------------------------

Channel Channel::from_kraus(std::vector<Matrix> ops, const Tolerance& tol) {
    tol.validate();
    if (ops.empty()) {
        throw ParameterError("Channel: Kraus list must be non-empty");
    }
    const Index d = ops.front().rows();
    if (d <= 0) {
        throw DimensionError("Channel: Kraus operators must be non-empty matrices");
    }
    for (const Matrix& k : ops) {
        if (k.rows() != d || k.cols() != d) {
            throw DimensionError("Channel: Kraus operators must be square with equal dimensions");
        }
        if (!all_finite(k)) {
            throw ParameterError("Channel: Kraus operator has non-finite entries");
        }
    }

    Matrix acc = Matrix::Zero(d, d);
    for (const Matrix& k : ops) acc += k.adjoint() * k;
    const double tp_residual = frob(acc - Matrix::Identity(d, d));
    if (tp_residual > tol.verify) {
        throw ContractError("Channel: Kraus set is not trace-preserving", tp_residual);
    }

    Channel e;
    e.dim_ = d;
    e.kraus_ = std::move(ops);
    e.cache_ = std::make_shared<Cache>();
    return e;
}

const Matrix& Channel::superoperator() const {
    std::call_once(cache_->sop_once, [this] {
        Matrix s = Matrix::Zero(dim_ * dim_, dim_ * dim_);
        for (const Matrix& k : kraus_) s += kron(k.conjugate(), k);
        cache_->sop = std::move(s);
    });
    return cache_->sop;
}

const Matrix& Channel::choi() const {
    std::call_once(cache_->choi_once, [this] {
        Matrix j = Matrix::Zero(dim_ * dim_, dim_ * dim_);
        for (const Matrix& k : kraus_) {
            const Vector v = vec(k);
            j += v * v.adjoint();
        }
        cache_->choi = std::move(j);
    });
    return cache_->choi;
}

Matrix Channel::apply(const Matrix& x) const {
    if (x.rows() != dim_ || x.cols() != dim_) {
        throw DimensionError("Channel::apply: dimension mismatch");
    }
    Matrix out = Matrix::Zero(dim_, dim_);
    for (const Matrix& k : kraus_) out += k * x * k.adjoint();
    return out;
}

Matrix Channel::apply_adjoint(const Matrix& x) const {
    if (x.rows() != dim_ || x.cols() != dim_) {
        throw DimensionError("Channel::apply_adjoint: dimension mismatch");
    }
    Matrix out = Matrix::Zero(dim_, dim_);
    for (const Matrix& k : kraus_) out += k.adjoint() * x * k;
    return out;
}

ChannelReport Channel::report(const Tolerance& tol) const {
    ChannelReport r;
    r.dim = dim_;

    Matrix ktk = Matrix::Zero(dim_, dim_);
    Matrix kkt = Matrix::Zero(dim_, dim_);
    for (const Matrix& k : kraus_) {
        ktk += k.adjoint() * k;
        kkt += k * k.adjoint();
    }
    r.tp_residual = frob(ktk - Matrix::Identity(dim_, dim_));
    r.is_tp = r.tp_residual <= tol.verify;
    r.unital_residual = frob(kkt - Matrix::Identity(dim_, dim_));
    r.is_unital = r.unital_residual <= tol.verify;

    HermEig choi_eig = herm_eig(choi(), tol);
    r.min_choi_eigenvalue = choi_eig.values.size() > 0 ? choi_eig.values.minCoeff() : 0.0;
    r.is_cp = r.min_choi_eigenvalue >= -tol.verify;
    return r;
}

// ----------------------------- derived channels ------------------------------

Channel compose(const Channel& r, const Channel& e, const Tolerance& tol) {
    if (r.dim() != e.dim()) {
        throw DimensionError("compose: channel dimensions differ");
    }
    std::vector<Matrix> ops;
    ops.reserve(r.kraus().size() * e.kraus().size());
    for (const Matrix& rj : r.kraus()) {
        for (const Matrix& ki : e.kraus()) {
            ops.push_back(rj * ki);
        }
    }
    return Channel::from_kraus(std::move(ops), tol);
}

Matrix power_mean(const Channel& e, long n) {
    if (n < 0) {
        throw ParameterError("power_mean: order must be non-negative");
    }
    const Index dd = e.dim() * e.dim();
    if (n == 0) return Matrix::Identity(dd, dd);

    // sum(m) = Σ_{j=0}^{m-1} S^j via sum(2k) = (I + S^k) sum(k),
    // sum(2k+1) = I + S·sum(2k), tracking S^m alongside.
    const Matrix& s = e.superoperator();
    const Matrix eye = Matrix::Identity(dd, dd);

    std::function<std::pair<Matrix, Matrix>(long)> sum_pow = [&](long m) -> std::pair<Matrix, Matrix> {
        if (m == 1) return {eye, s};
        if (m % 2 == 0) {
            auto [half_sum, half_pow] = sum_pow(m / 2);
            return {half_sum + half_pow * half_sum, half_pow * half_pow};
        }
        auto [even_sum, even_pow] = sum_pow(m - 1);
        return {eye + s * even_sum, s * even_pow};
    };

    auto [total, unused_pow] = sum_pow(n + 1);
    (void)unused_pow;
    return total / static_cast<double>(n + 1);
}

// ------------------------- reference constructors ---------------------------

Channel identity_channel(Index dim, const Tolerance& tol) {
    return Channel::from_kraus({Matrix::Identity(dim, dim)}, tol);
}

Channel unitary_channel(const Matrix& u, const Tolerance& tol) {
    if (u.rows() != u.cols()) {
        throw DimensionError("unitary_channel: matrix must be square");
    }
    const double res = frob(u.adjoint() * u - Matrix::Identity(u.rows(), u.cols()));
    if (res > tol.verify) {
        throw ContractError("unitary_channel: matrix is not unitary", res);
    }
    return Channel::from_kraus({u}, tol);
}

Channel mixed_unitary_channel(const std::vector<Matrix>& unitaries,
                              const std::vector<double>& weights,
                              const Tolerance& tol) {
    if (unitaries.empty() || unitaries.size() != weights.size()) {
        throw ParameterError("mixed_unitary_channel: need matching non-empty unitary/weight lists");
    }
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (total <= 0.0) {
        throw ParameterError("mixed_unitary_channel: weights must sum to a positive value");
    }
    std::vector<Matrix> ops;
    ops.reserve(unitaries.size());
    for (size_t i = 0; i < unitaries.size(); ++i) {
        if (weights[i] < 0.0) {
            throw ParameterError("mixed_unitary_channel: weights must be non-negative");
        }
        ops.push_back(std::sqrt(weights[i] / total) * unitaries[i]);
    }
    return Channel::from_kraus(std::move(ops), tol);
}

Channel random_channel(Index dim, Index kraus_rank, Rng& rng, const Tolerance& tol) {
    if (dim <= 0 || kraus_rank <= 0) {
        throw ParameterError("random_channel: dimensions must be positive");
    }
    // First dim columns of a Haar unitary on dim·rank dimensions form a random
    // isometry; its dim×dim blocks are a valid Kraus set.
    Matrix w = haar_unitary(dim * kraus_rank, rng).leftCols(dim);
    std::vector<Matrix> ops;
    ops.reserve(static_cast<size_t>(kraus_rank));
    for (Index b = 0; b < kraus_rank; ++b) {
        ops.push_back(w.middleRows(b * dim, dim));
    }
    return Channel::from_kraus(std::move(ops), tol);
}

Channel random_unital_channel(Index dim, Index count, Rng& rng, const Tolerance& tol) {
    std::vector<Matrix> us;
    std::vector<double> ws;
    std::uniform_real_distribution<double> unif(0.2, 1.0);
    for (Index i = 0; i < count; ++i) {
        us.push_back(haar_unitary(dim, rng));
        ws.push_back(unif(rng));
    }
    return mixed_unitary_channel(us, ws, tol);
}

Channel reference_example_channel(const Tolerance& tol) {
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

    std::vector<Matrix> a_ops;
    a_ops.push_back(basis_op(3, 0, 0) + basis_op(3, 1, 1));
    a_ops.push_back(inv_sqrt2 * basis_op(3, 0, 2));
    a_ops.push_back(inv_sqrt2 * basis_op(3, 1, 2));

    std::vector<Matrix> b_ops;
    b_ops.push_back(0.5 * basis_op(2, 0, 0));
    b_ops.push_back(0.5 * basis_op(2, 0, 1));
    b_ops.push_back((std::sqrt(3.0) / 2.0) * basis_op(2, 1, 0));
    b_ops.push_back((std::sqrt(3.0) / 2.0) * basis_op(2, 1, 1));

    std::vector<Matrix> ops;
    ops.reserve(a_ops.size() * b_ops.size());
    for (const Matrix& a : a_ops) {
        for (const Matrix& b : b_ops) {
            ops.push_back(kron(a, b));
        }
    }
    return Channel::from_kraus(std::move(ops), tol);
}

// --------------------------- planted structures -----------------------------

void canonicalize_shape(std::vector<std::pair<Index, Index>>& shape) {
    std::sort(shape.begin(), shape.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second > b.second;
    });
}

namespace {

// Full-rank probability vector with entries bounded away from zero.
RealVector random_full_rank_probs(Index n, Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    RealVector p(n);
    for (Index i = 0; i < n; ++i) p(i) = unif(rng) + 0.2;
    p /= p.sum();
    return p;
}

}  // namespace

PlantedChannel make_planted(const std::vector<std::pair<Index, Index>>& shape,
                            Index extra_dim, std::uint64_t seed,
                            const Tolerance& tol) {
    if (shape.empty()) {
        throw ParameterError("make_planted: shape must contain at least one block");
    }
    Index block_total = 0;
    for (const auto& [dk, nk] : shape) {
        if (dk <= 0 || nk <= 0) {
            throw ParameterError("make_planted: block dimensions must be positive");
        }
        block_total += dk * nk;
    }
    if (extra_dim < 0) {
        throw ParameterError("make_planted: leak dimension must be non-negative");
    }
    const Index d = block_total + extra_dim;
    if (d > 32) {
        throw ParameterError("make_planted: total dimension " + std::to_string(d) +
                             " exceeds the supported cap of 32");
    }

    Rng rng(seed ^ 0x9e3779b97f4a7c15ull);
    std::uniform_real_distribution<double> mix(0.55, 0.85);

    std::vector<Matrix> ops;
    PlantedStructure truth;
    truth.leak_dim = extra_dim;
    truth.spectral_gap = 1.0;

    Index offset = 0;
    for (const auto& [dk, nk] : shape) {
        const Index bdim = dk * nk;

        // Embedding of the block into H (pre-conjugation): plain coordinate
        // injection at the running offset.
        Matrix embed = Matrix::Zero(d, bdim);
        embed.block(offset, 0, bdim, bdim) = Matrix::Identity(bdim, bdim);

        // Noise on the multiplicity factor: (1−p)·U·U† + p·reset-to-τ.
        const double p = mix(rng);
        Matrix v = haar_unitary(nk, rng);
        std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
        Vector phases(nk);
        for (Index i = 0; i < nk; ++i) phases(i) = std::polar(1.0, phase(rng));
        Matrix u = v * phases.asDiagonal() * v.adjoint();

        RealVector tau_probs = random_full_rank_probs(nk, rng);
        Matrix tau = v * tau_probs.asDiagonal().toDenseMatrix().cast<Complex>() * v.adjoint();
        tau = (tau + tau.adjoint()) * 0.5;

        std::vector<Matrix> block_kraus;
        block_kraus.push_back(std::sqrt(1.0 - p) * u);
        for (Index j = 0; j < nk; ++j) {
            for (Index l = 0; l < nk; ++l) {
                block_kraus.push_back(std::sqrt(p * tau_probs(j)) * v.col(j) *
                                      Matrix::Identity(nk, nk).row(l));
            }
        }

        const Matrix eye_d = Matrix::Identity(dk, dk);
        for (const Matrix& bk : block_kraus) {
            ops.push_back(embed * kron(eye_d, bk) * embed.adjoint());
        }

        if (nk > 1) truth.spectral_gap = std::min(truth.spectral_gap, p);
        truth.shape.emplace_back(dk, nk);
        truth.tau_states.push_back(tau);
        truth.block_isometries.push_back(embed);
        offset += bdim;
    }

    // Drain each leak basis vector into a random unit vector of the blocks.
    for (Index t = 0; t < extra_dim; ++t) {
        Vector target = Vector::Zero(d);
        Vector g = ginibre(block_total, 1, rng).col(0);
        target.head(block_total) = g / g.norm();
        Vector source = Vector::Zero(d);
        source(block_total + t) = 1.0;
        ops.push_back(target * source.adjoint());
    }

    Matrix support = Matrix::Zero(d, d);
    support.topLeftCorner(block_total, block_total) = Matrix::Identity(block_total, block_total);

    // Hide the block structure behind a global unitary change of basis.
    Matrix g = haar_unitary(d, rng);
    for (Matrix& k : ops) k = g * k * g.adjoint();
    truth.support = g * support * g.adjoint();
    for (Matrix& iso : truth.block_isometries) iso = g * iso;

    // Reorder blocks (with their taus and isometries) into canonical order.
    std::vector<size_t> order(truth.shape.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (truth.shape[a].first != truth.shape[b].first) {
            return truth.shape[a].first > truth.shape[b].first;
        }
        return truth.shape[a].second > truth.shape[b].second;
    });
    PlantedStructure sorted;
    sorted.support = std::move(truth.support);
    sorted.spectral_gap = truth.spectral_gap;
    sorted.leak_dim = truth.leak_dim;
    for (size_t idx : order) {
        sorted.shape.push_back(truth.shape[idx]);
        sorted.tau_states.push_back(std::move(truth.tau_states[idx]));
        sorted.block_isometries.push_back(std::move(truth.block_isometries[idx]));
    }

    return PlantedChannel{Channel::from_kraus(std::move(ops), tol), std::move(sorted)};
}

}  // namespace ips
