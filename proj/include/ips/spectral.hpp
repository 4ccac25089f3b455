// spectral.hpp — Fixed-point and rotating-point structure of a channel: the
// spaces Σ and 𝓑, the projection superoperator onto them, and the joint
// support of the fixed states.

#pragma once

#include "ips/channel.hpp"
#include "ips/matcore.hpp"

#include <string>
#include <vector>

namespace ips {

// Which peripheral cluster of the superoperator spectrum to extract.
enum class SpectralMode {
    fixed,      // eigenvalues with |λ − 1| ≤ eig_cluster
    rotating,   // eigenvalues with |1 − |λ|| ≤ eig_cluster
};

// Matched right/left λ-cluster eigenspaces of a channel in operator form.
// `sigma` spans the fixed (or rotating) points of 𝓔, `b_space` those of 𝓔†,
// and `einf` is the superoperator of the spectral projector onto the cluster
// along every other spectral subspace.
struct FixedSpaces {
    OperatorSubspace sigma;
    OperatorSubspace b_space;
    Matrix einf;
    Vector cluster_values;               // eigenvalues inside the cluster
    double spectral_gap = 0.0;           // 1 − max modulus outside the cluster (1 if none)
    SpectralMode mode = SpectralMode::fixed;
    std::vector<std::string> warnings;   // ambiguous-clustering diagnostics
};

// Span of the unit-modulus eigenoperators with their eigenphases. The span is
// HS-orthonormal; eigenoperators are unit-norm and aligned with eigenphases.
struct RotatingSpace {
    OperatorSubspace span;
    std::vector<Matrix> eigenoperators;
    std::vector<Complex> eigenphases;
    double spectral_gap = 0.0;
    std::vector<std::string> warnings;
};

// The joint support 𝓟 of all fixed states, with a fixed state of maximal rank.
struct SupportInfo {
    Matrix projector;
    Index rank = 0;
    Matrix max_rank_fixed_state;  // 𝓔∞(I/d), PSD trace-1, support = projector
};

// Extracts the λ=1 (or peripheral) right and left eigenspaces of the
// superoperator and the spectral projector between them. Eigenvalues inside
// the annulus (eig_cluster, 10·eig_cluster] of the cluster boundary attach a
// warning but do not stop the computation; a right/left multiplicity mismatch
// is a hard error.
FixedSpaces fixed_spaces(const Channel& e, const Tolerance& tol = {},
                         SpectralMode mode = SpectralMode::fixed);

RotatingSpace rotating_space(const Channel& e, const Tolerance& tol = {});

// Cesàro-mean approximation of the fixed-point projector; converges to
// fixed_spaces(...).einf at rate O(1/(N·gap)) when the non-peripheral
// spectrum has modulus ≤ 1 − gap. Kept as an independent route for tests.
Matrix einf_cesaro_oracle(const Channel& e, long n);

// P = support of 𝓔∞(I/d). The flag selects the slower union-of-supports
// construction over projector images of a full matrix basis instead.
SupportInfo joint_support(const FixedSpaces& fs, const Channel& e,
                          const Tolerance& tol = {}, bool use_basis_union = false);

}  // namespace ips
