// matcore.hpp — Dense complex linear-algebra substrate: spectra, singular
// values, matrix functions on PSD inputs, and operator subspaces under the
// Hilbert-Schmidt inner product.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace ips {

using Complex = std::complex<double>;
using Matrix  = Eigen::MatrixXcd;
using Vector  = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index   = Eigen::Index;

// ----------------------------- error taxonomy -------------------------------

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Input shapes do not match the operation's requirements.
class DimensionError : public Error {
public:
    using Error::Error;
};

// A caller-supplied value is outside its admissible range.
class ParameterError : public Error {
public:
    using Error::Error;
};

// An input violates a precondition (non-Hermitian, not PSD, not TP, ...).
// Carries the measured residual so noisy (e.g. tomography-derived) inputs
// can be triaged by magnitude.
class ContractError : public Error {
public:
    ContractError(const std::string& msg, double residual)
        : Error(msg + " (residual " + std::to_string(residual) + ")"),
          residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

// A numerical routine failed to meet its accuracy contract.
class NumericError : public Error {
public:
    NumericError(const std::string& msg, double residual)
        : Error(msg + " (residual " + std::to_string(residual) + ")"),
          residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

// A structural identity that should hold exactly (integer ranks, algebra
// closure, matched eigenspace dimensions) failed beyond tolerance.
class StructuralError : public Error {
public:
    StructuralError(const std::string& stage, const std::string& msg)
        : Error("[" + stage + "] " + msg), stage_(stage) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

// ------------------------------- tolerances ---------------------------------

// All numeric decisions are driven by one explicit Tolerance value; there are
// no hidden global knobs.
struct Tolerance {
    double eig_cluster = 1e-9;   // radius for clustering eigenvalues at 1 / on the unit circle
    double rank_cutoff = 1e-10;  // relative singular/eigenvalue cutoff for rank decisions
    double verify      = 1e-8;   // acceptance threshold for verification predicates

    void validate() const {
        if (!(eig_cluster > 0.0) || !(rank_cutoff > 0.0) || !(verify > 0.0)) {
            throw ParameterError("Tolerance: all thresholds must be strictly positive");
        }
        if (rank_cutoff > eig_cluster) {
            throw ParameterError("Tolerance: rank_cutoff must not exceed eig_cluster");
        }
    }
};

// ------------------------------ small helpers -------------------------------

inline double frob(const Matrix& x) { return x.norm(); }

inline bool all_finite(const Matrix& x) { return x.allFinite(); }

// Column-stacking vectorization: vec(X)(i + rows*j) = X(i,j), so that
// vec(A X B) = (B^T ⊗ A) vec(X).
Vector vec(const Matrix& x);
Matrix devec(const Vector& v, Index rows, Index cols);
Matrix devec_square(const Vector& v);

// Kronecker product under the same convention: (A⊗B)((a,b),(a',b')) = A(a,a')B(b,b').
Matrix kron(const Matrix& a, const Matrix& b);

// Partial traces of a matrix on C^{da} ⊗ C^{db}.
Matrix partial_trace_first(const Matrix& m, Index da, Index db);   // -> db×db
Matrix partial_trace_second(const Matrix& m, Index da, Index db);  // -> da×da

Matrix basis_op(Index dim, Index i, Index j);  // |i><j|

// Hilbert-Schmidt inner product tr(X† Y).
Complex hs_inner(const Matrix& x, const Matrix& y);

// ------------------------------- operations ---------------------------------

// Sum of singular values of a square matrix.
double trace_norm(const Matrix& x);

// General (non-Hermitian) eigendecomposition with matched right and left
// eigenvectors: right.col(i) is a unit right eigenvector for values(i), and
// left.col(i)† M = values(i) left.col(i)†. Eigenvalues are sorted by
// decreasing modulus (ties broken by decreasing real part, then imaginary).
struct Spectrum {
    Vector values;
    Matrix right;
    Matrix left;
    double residual = 0.0;  // ‖M·right − right·diag(values)‖_F / max(1, ‖M‖_F)
};

Spectrum eig_general(const Matrix& m, const Tolerance& tol = {});

// Hermitian eigendecomposition: eigenvalues ascending, unitary eigenvectors.
struct HermEig {
    RealVector values;
    Matrix vectors;
};

HermEig herm_eig(const Matrix& h, const Tolerance& tol = {});

// Orthogonal projector onto the span of eigenvectors of a PSD matrix whose
// eigenvalues exceed rank_cutoff relative to the largest.
Matrix support_projector(const Matrix& h, const Tolerance& tol = {});

// Moore-Penrose inverse square root of a PSD matrix: H^{-1/2} on the support,
// zero on the kernel.
Matrix psd_inv_sqrt(const Matrix& h, const Tolerance& tol = {});

// Ordered Schur decomposition: unitary q and upper-triangular t with
// m = q t q†, reordered so the eigenvalues satisfying `select` occupy the
// leading diagonal block. The first `selected` columns of q are then an
// orthonormal basis of the corresponding right invariant subspace.
struct SchurCluster {
    Matrix q;
    Matrix t;
    Index selected = 0;
    Vector values;  // diag(t) after reordering
};

SchurCluster schur_select(const Matrix& m, const std::function<bool(Complex)>& select);

// --------------------------- operator subspaces -----------------------------

// An orthonormal family of d×d matrices under ⟨X,Y⟩ = tr(X†Y), representing a
// subspace of B(H). Immutable after construction.
class OperatorSubspace {
public:
    OperatorSubspace() = default;

    // Accepts an already HS-orthonormal family; validates the Gram matrix.
    static OperatorSubspace from_orthonormal(Index ambient, std::vector<Matrix> basis,
                                             const Tolerance& tol = {});

    Index ambient_dim() const noexcept { return ambient_; }
    Index dim() const noexcept { return static_cast<Index>(basis_.size()); }
    const std::vector<Matrix>& basis() const noexcept { return basis_; }
    const Matrix& basis_matrix() const noexcept { return stacked_; }  // d²×k, columns vec(B_i)

    // Orthogonal projection of X onto the subspace, and expansion coefficients.
    Matrix project(const Matrix& x) const;
    Vector coefficients(const Matrix& x) const;

    // ‖X − proj(X)‖_F / max(1, ‖X‖_F)
    double containment_residual(const Matrix& x) const;
    bool contains(const Matrix& x, double tol) const { return containment_residual(x) <= tol; }

    // ‖B†B − I‖_F, for invariant checks.
    double gram_residual() const;

    friend OperatorSubspace orthonormalize(const std::vector<Matrix>& span,
                                           const Tolerance& tol);

private:
    Index ambient_ = 0;
    std::vector<Matrix> basis_;
    Matrix stacked_;  // ambient²×dim
};

// HS-orthonormal basis of the span of the given matrices. The dimension is
// the numerical rank of their Gram matrix at rank_cutoff (relative to its
// largest eigenvalue). Empty or all-zero input yields the empty subspace.
OperatorSubspace orthonormalize(const std::vector<Matrix>& span, const Tolerance& tol = {});

// sin of the largest principal angle between two subspaces, symmetrized over
// both containment directions; 0 iff the spans coincide.
double max_principal_angle_sin(const OperatorSubspace& a, const OperatorSubspace& b);

// Real-orthonormal Hermitian basis of the Hermitian part of an adjoint-closed
// subspace. For an adjoint-closed span of complex dimension k the result has
// exactly k elements.
std::vector<Matrix> hermitian_basis(const OperatorSubspace& s, const Tolerance& tol = {});

// ------------------------------- randomness ---------------------------------

using Rng = std::mt19937_64;

Matrix ginibre(Index rows, Index cols, Rng& rng);  // i.i.d. standard complex Gaussian entries
Matrix haar_unitary(Index dim, Rng& rng);
Matrix random_density(Index dim, Rng& rng);        // full-rank PSD, trace 1
Matrix random_hermitian(Index dim, Rng& rng);

}  // namespace ips
