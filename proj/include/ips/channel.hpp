// channel.hpp — Quantum processes in Kraus form, their superoperator and Choi
// representations, composition, Cesàro power means, and reference/test
// channel constructors.

#pragma once

#include "ips/matcore.hpp"

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ips {

struct ChannelReport {
    bool is_tp = false;
    double tp_residual = 0.0;       // ‖Σ K†K − I‖_F
    bool is_unital = false;
    double unital_residual = 0.0;   // ‖Σ K K† − I‖_F
    bool is_cp = true;              // by construction from Kraus form
    double min_choi_eigenvalue = 0.0;
    Index dim = 0;
};

// A completely positive trace-preserving map ρ ↦ Σ K_i ρ K_i†. Immutable
// after construction; the superoperator and Choi forms are built lazily and
// shared across copies (single-assignment, so concurrent first access is
// safe and every reader sees the same value).
class Channel {
public:
    // Validates shape agreement and the trace-preservation condition
    // Σ K†K = I; throws ContractError with the residual otherwise.
    static Channel from_kraus(std::vector<Matrix> ops, const Tolerance& tol = {});

    Index dim() const noexcept { return dim_; }
    const std::vector<Matrix>& kraus() const noexcept { return kraus_; }

    // d²×d² matrix S with S·vec(ρ) = vec(𝓔(ρ)) under column-stacking, i.e.
    // S = Σ conj(K_i) ⊗ K_i.
    const Matrix& superoperator() const;

    // Choi matrix Σ vec(K_i) vec(K_i)†; PSD, trace d.
    const Matrix& choi() const;

    // Schrödinger-picture action Σ K X K†.
    Matrix apply(const Matrix& x) const;

    // Heisenberg-picture adjoint Σ K† X K (unital, not TP in general).
    Matrix apply_adjoint(const Matrix& x) const;

    // Superoperator of the adjoint map, equal to superoperator()†.
    Matrix adjoint_superoperator() const { return superoperator().adjoint(); }

    ChannelReport report(const Tolerance& tol = {}) const;

private:
    Channel() = default;

    Index dim_ = 0;
    std::vector<Matrix> kraus_;

    struct Cache {
        std::once_flag sop_once;
        std::once_flag choi_once;
        Matrix sop;
        Matrix choi;
    };
    std::shared_ptr<Cache> cache_;
};

// Kraus set {R_j K_i}; re-validates trace preservation.
Channel compose(const Channel& r, const Channel& e, const Tolerance& tol = {});

// Superoperator of the Cesàro mean (1/(N+1)) Σ_{n=0}^{N} Sⁿ, computed with a
// halving recursion so large N costs O(log N) multiplies.
Matrix power_mean(const Channel& e, long n);

// ------------------------- reference constructors ---------------------------

Channel identity_channel(Index dim, const Tolerance& tol = {});
Channel unitary_channel(const Matrix& u, const Tolerance& tol = {});

// Convex mixture of unitary conjugations Σ p_i U_i · U_i†; always unital.
Channel mixed_unitary_channel(const std::vector<Matrix>& unitaries,
                              const std::vector<double>& weights,
                              const Tolerance& tol = {});

// Haar-style random CPTP map with the given Kraus rank, via a random
// isometry into dim × rank environment blocks.
Channel random_channel(Index dim, Index kraus_rank, Rng& rng, const Tolerance& tol = {});

// Random unital channel: mixture of `count` Haar unitary conjugations with
// random weights.
Channel random_unital_channel(Index dim, Index count, Rng& rng, const Tolerance& tol = {});

// The qutrit⊗qubit product channel used throughout the test fixtures: the A
// factor leaves span{|0>,|1>} alone and scatters |2> into it, while the B
// factor resets everything to diag(1/4, 3/4).
Channel reference_example_channel(const Tolerance& tol = {});

// --------------------------- planted structures -----------------------------

// Ground truth attached to a generated channel, used as an oracle by tests
// and by the analyze round-trip checks.
struct PlantedStructure {
    std::vector<std::pair<Index, Index>> shape;  // (d_k, n_k), canonical order
    Matrix support;                              // projector onto ⊕_k C^{d_k}⊗C^{n_k}
    std::vector<Matrix> tau_states;              // n_k×n_k fixed cofactor states
    std::vector<Matrix> block_isometries;        // d×(d_k n_k), columns map (i,α) ↦ H
    double spectral_gap = 0.0;                   // 1 − max non-unit eigenvalue modulus
    Index leak_dim = 0;
};

struct PlantedChannel {
    Channel channel;
    PlantedStructure truth;
};

// Builds H = ⊕_k (C^{d_k} ⊗ C^{n_k}) ⊕ C^m and a channel acting as
// identity ⊗ 𝓔_k on each block, where 𝓔_k mixes a random unitary conjugation
// with a reset to a random full-rank fixed state τ_k (mixing weight ≥ 0.55,
// so the non-unit spectrum has modulus ≤ 0.45). The leak space C^m is drained
// into the blocks by rank-one Kraus operators, and the whole construction is
// conjugated by a seeded Haar unitary.
PlantedChannel make_planted(const std::vector<std::pair<Index, Index>>& shape,
                            Index extra_dim, std::uint64_t seed,
                            const Tolerance& tol = {});

// Canonical shape order: d_k descending, ties by n_k descending.
void canonicalize_shape(std::vector<std::pair<Index, Index>>& shape);

}  // namespace ips
