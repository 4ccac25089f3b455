// algebra.hpp — Structure discovery for the fixed-point algebra: commutants,
// center, minimal central projections, the block shape {(d_k, n_k)}, block
// isometries, fixed cofactor states, and the Heisenberg echo map.

#pragma once

#include "ips/channel.hpp"
#include "ips/matcore.hpp"
#include "ips/spectral.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace ips {

// The Wedderburn-style decomposition of the algebra isometric to the fixed
// points: 𝓐 ≅ ⊕_k M_{d_k} ⊗ I_{n_k} acting inside range(P).
struct AlgebraStructure {
    std::vector<std::pair<Index, Index>> shape;  // (d_k, n_k), d desc then n desc
    std::vector<Matrix> block_isometries;        // d×(d_k n_k); column (i·n_k+α) ↦ |i⟩⊗|α⟩
    std::vector<Matrix> tau_states;              // n_k×n_k PSD trace-1 cofactors
    Matrix support;                              // the projector P
    Index support_rank = 0;

    // Working data kept for downstream consumers and tests.
    Matrix range_isometry;                       // d×r, orthonormal basis of range(P)
    OperatorSubspace algebra;                    // basis of 𝓐 compressed to r×r
    Index center_dim = 0;
};

// Linear map extending compressed fixed observables from B(range P) to
// B(ker P): for Y in the dual fixed space, F(P Y P) = P̄ Y P̄.
struct EchoMap {
    Index domain_side = 0;     // r
    Index codomain_side = 0;   // d − r
    Matrix matrix;             // (d−r)² × r², vec coordinates; empty when codomain is 0
    Matrix range_isometry;     // d×r
    Matrix kernel_isometry;    // d×(d−r)

    bool empty() const noexcept { return codomain_side == 0; }

    // Apply to a compressed r×r observable.
    Matrix apply(const Matrix& a) const;

    // Reassemble the full d×d observable A ⊕ F(A).
    Matrix extend(const Matrix& a) const;
};

// Orthonormal basis of {X : XK = KX for every K in ops}, via the null space
// of the stacked commutator maps.
OperatorSubspace commutant(const std::vector<Matrix>& ops, const Tolerance& tol = {});

// Recovers the full block decomposition from the spectral data: compress the
// dual fixed space by P, verify closure under products and adjoints, split
// along the center's minimal projections, factor each block into its d_k ⊗ n_k
// tensor structure, and extract the cofactor states from the max-rank fixed
// state. Randomized probes draw from `seed` and are re-sampled on degenerate
// draws, so the result is deterministic given (inputs, seed).
AlgebraStructure structure_from_fixed_spaces(const FixedSpaces& fs, const SupportInfo& sup,
                                             const Channel& e, const Tolerance& tol = {},
                                             std::uint64_t seed = 0xa1b2c3d4u);

// Assembles Σ_k V_k (M_k ⊗ τ_k) V_k†; a fixed point of the channel by
// construction, and a fixed state when the M_k are PSD with traces summing
// to 1.
Matrix fixed_state_form(const AlgebraStructure& structure, const std::vector<Matrix>& m_blocks);

// Least-squares recovery of the block coefficients of a fixed-space element,
// the inverse of fixed_state_form on its range.
std::vector<Matrix> block_coefficients(const AlgebraStructure& structure, const Matrix& x,
                                       const Tolerance& tol = {});

EchoMap echo_map(const FixedSpaces& fs, const AlgebraStructure& structure,
                 const Tolerance& tol = {});

}  // namespace ips
