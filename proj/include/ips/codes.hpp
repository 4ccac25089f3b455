// codes.hpp — Operational layer: distinguishability, the preserved /
// noiseless / unitarily-noiseless / correctable hierarchy, the transpose
// recovery channel, and the end-to-end analysis pipeline.

#pragma once

#include "ips/algebra.hpp"
#include "ips/channel.hpp"
#include "ips/matcore.hpp"
#include "ips/spectral.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace ips {

// An operator subspace of candidate encoded states: the adjoint-closed span
// of the code states, the projector onto their joint support, and designated
// sample states for operational testing.
class Code {
public:
    // Closes the given span under adjoints, orthonormalizes it, and computes
    // the joint support. Sample states must be PSD trace-1 elements of the
    // span; at least one is required.
    static Code from_basis(Index dim, const std::vector<Matrix>& basis,
                           std::vector<Matrix> samples, const Tolerance& tol = {});

    // All states supported on range(p0): the full operator space B(range p0),
    // with pure, mixed, and coherent default samples.
    static Code subspace_code(const Matrix& p0, const Tolerance& tol = {});

    Index dim() const noexcept { return space_.ambient_dim(); }
    const OperatorSubspace& space() const noexcept { return space_; }
    const Matrix& support() const noexcept { return support_; }
    const std::vector<Matrix>& sample_states() const noexcept { return samples_; }
    const std::vector<Matrix>& hermitian_span() const noexcept { return herm_basis_; }

    // A random PSD trace-1 element of the span: a mixture of the samples
    // perturbed along a random Hermitian direction, shrunk until positive.
    Matrix random_state(Rng& rng) const;

private:
    OperatorSubspace space_;
    Matrix support_;
    std::vector<Matrix> samples_;
    std::vector<Matrix> herm_basis_;
};

enum class VerifyMode { preserved, noiseless, unitarily_noiseless, correctable };

std::string to_string(VerifyMode mode);

struct VerificationReport {
    bool pass = false;
    double worst_pair_deviation = 0.0;  // max |‖map(ρ−xρ′)‖₁ − ‖ρ−xρ′‖₁|
    int pairs_tested = 0;
    VerifyMode mode = VerifyMode::preserved;
    std::vector<std::string> diagnostics;
};

// Optimal two-state discrimination probability
// p = (1 + ‖q·rho − (1−q)·rho2‖₁) / 2.
double helstrom(const Matrix& rho, const Matrix& rho2, double q, const Tolerance& tol = {});

// Samples code-state pairs (all sample pairs plus random span states) and
// scales x from a fixed grid {1/4, 1/2, 1, 2, 4} plus 16 log-uniform draws in
// [1e-2, 1e2], and compares ‖𝓔(ρ−xρ′)‖₁ against ‖ρ−xρ′‖₁. A pass is
// sampled evidence; the structural checks in is_noiseless are the
// certificate.
VerificationReport is_preserved(const Channel& e, const Code& code, const Tolerance& tol = {},
                                int trials = 6, std::uint64_t seed = 2026);

// Conjunction of operational evidence (preservation under 𝓔 and under the
// fixed-point projector applied as a map) and the structural certificate
// (injectivity of the projector restricted to the code span).
VerificationReport is_noiseless(const Channel& e, const Code& code, const FixedSpaces& fs,
                                const Tolerance& tol = {}, int trials = 6,
                                std::uint64_t seed = 2026);

// Structural check that the code span lies inside the rotating space, plus
// preservation spot checks under 𝓔ⁿ for n in {1, 2, 3, 5, 8}.
VerificationReport is_unitarily_noiseless(const Channel& e, const Code& code,
                                          const RotatingSpace& rs, const Tolerance& tol = {},
                                          int trials = 6, std::uint64_t seed = 2026);

// Recovery map with Kraus operators P K_i† 𝓔(P)^{-1/2}, completed to a
// trace-preserving channel by one Kraus operator on the orthocomplement of
// support(𝓔(P)). Satisfies (R∘E)(P) = P for any projector P.
Channel transpose_channel(const Channel& e, const Matrix& p, const Tolerance& tol = {});

struct CorrectabilityResult {
    VerificationReport report;
    Channel recovery;
};

// Builds the transpose channel from the code support and checks that the
// code is noiseless for R∘E.
CorrectabilityResult is_correctable(const Channel& e, const Code& code,
                                    const Tolerance& tol = {}, int trials = 6,
                                    std::uint64_t seed = 2026);

// ------------------------------ full pipeline -------------------------------

enum class AnalysisMode { noiseless, unitarily_noiseless };

std::string to_string(AnalysisMode mode);

struct IpsReport {
    AnalysisMode mode = AnalysisMode::noiseless;
    std::vector<std::pair<Index, Index>> shape;
    Index support_rank = 0;
    Index fixed_dim = 0;
    Index rotating_dim = 0;
    std::vector<Matrix> tau_states;

    AlgebraStructure structure;
    FixedSpaces spaces;
    EchoMap echo;

    bool unital = false;
    double unital_residual = 0.0;
    double tp_residual = 0.0;
    Index commutant_dim = 0;
    double spectral_gap = 0.0;
    std::vector<std::string> warnings;

    Tolerance tol;
    std::uint64_t seed = 0;
};

// superoperator → fixed (or rotating) spaces → joint support → algebra
// structure → shape, cofactors, echo map, diagnostics. Deterministic given
// (channel, mode, tolerance, seed); structural failures propagate with stage
// labels.
IpsReport analyze(const Channel& e, AnalysisMode mode, const Tolerance& tol = {},
                  std::uint64_t seed = 1);

}  // namespace ips
