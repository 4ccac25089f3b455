// spectral.cpp — peripheral eigenspace extraction and fixed-point projectors.

#include "ips/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace ips {

namespace {

double cluster_distance(Complex z, SpectralMode mode) {
    return mode == SpectralMode::fixed ? std::abs(z - 1.0) : std::abs(1.0 - std::abs(z));
}

std::vector<Matrix> devec_columns(const Matrix& cols, Index d) {
    std::vector<Matrix> out;
    out.reserve(static_cast<size_t>(cols.cols()));
    for (Index i = 0; i < cols.cols(); ++i) {
        out.push_back(devec(cols.col(i), d, d));
    }
    return out;
}

}  // namespace

FixedSpaces fixed_spaces(const Channel& e, const Tolerance& tol, SpectralMode mode) {
    tol.validate();
    const Index d = e.dim();
    const Matrix& s = e.superoperator();

    auto select = [&](Complex z) { return cluster_distance(z, mode) <= tol.eig_cluster; };

    SchurCluster right = schur_select(s, select);
    SchurCluster left = schur_select(s.adjoint(), select);

    if (right.selected != left.selected) {
        std::ostringstream msg;
        msg << "right/left cluster multiplicities disagree (" << right.selected << " vs "
            << left.selected << "); the spectrum is mis-clustered at eig_cluster="
            << tol.eig_cluster;
        throw StructuralError("fixed_spaces", msg.str());
    }
    const Index k = right.selected;
    if (k == 0) {
        // A TP map always fixes at least one state, so an empty cluster in
        // fixed mode means the eigensolve went wrong.
        throw StructuralError("fixed_spaces", "empty peripheral cluster for a TP map");
    }

    FixedSpaces out;
    out.mode = mode;
    out.cluster_values = right.values.head(k);

    // Ambiguity and gap diagnostics from the trailing (unselected) spectrum.
    double max_outside = 0.0;
    for (Index i = k; i < right.values.size(); ++i) {
        const double dist = cluster_distance(right.values(i), mode);
        max_outside = std::max(max_outside, std::abs(right.values(i)));
        if (dist <= 10.0 * tol.eig_cluster) {
            std::ostringstream w;
            w << "eigenvalue " << right.values(i) << " lies within " << dist
              << " of the cluster boundary (annulus (eig_cluster, 10*eig_cluster]); "
                 "membership decided as outside";
            out.warnings.push_back(w.str());
        }
    }
    out.spectral_gap = (right.values.size() > k) ? 1.0 - max_outside : 1.0;

    const Matrix r_basis = right.q.leftCols(k);
    const Matrix l_basis = left.q.leftCols(k);

    // Spectral projector from matched bases: einf = R (L†R)^{-1} L†.
    Matrix overlap = l_basis.adjoint() * r_basis;
    Eigen::FullPivLU<Matrix> lu(overlap);
    if (lu.rank() < k) {
        throw StructuralError("fixed_spaces",
                              "right and left cluster subspaces have deficient overlap");
    }
    out.einf = r_basis * lu.solve(l_basis.adjoint());

    const double idem = frob(out.einf * out.einf - out.einf);
    // In rotating mode S acts as a rotation (not identity) on the cluster, so
    // absorption S·Π = Π weakens to commutation.
    const double invariance =
        (mode == SpectralMode::fixed)
            ? std::max(frob(s * out.einf - out.einf), frob(out.einf * s - out.einf))
            : frob(s * out.einf - out.einf * s);
    if (idem > tol.verify || invariance > tol.verify) {
        throw NumericError("fixed_spaces: spectral projector fails its defining identities",
                           std::max(idem, invariance));
    }

    out.sigma = OperatorSubspace::from_orthonormal(d, devec_columns(r_basis, d), tol);
    out.b_space = OperatorSubspace::from_orthonormal(d, devec_columns(l_basis, d), tol);
    return out;
}

RotatingSpace rotating_space(const Channel& e, const Tolerance& tol) {
    FixedSpaces peripheral = fixed_spaces(e, tol, SpectralMode::rotating);
    const Index d = e.dim();
    const Index k = peripheral.sigma.dim();

    RotatingSpace out;
    out.span = peripheral.sigma;
    out.spectral_gap = peripheral.spectral_gap;
    out.warnings = peripheral.warnings;

    // Diagonalize the restriction of the superoperator to the rotating span
    // to recover genuine eigenoperators with their phases. The restriction of
    // a TP map to its peripheral subspace is semisimple, so this is safe.
    const Matrix& basis = out.span.basis_matrix();  // d²×k, orthonormal
    Matrix restricted = basis.adjoint() * (e.superoperator() * basis);
    Eigen::ComplexEigenSolver<Matrix> ces(restricted, true);
    if (ces.info() != Eigen::Success) {
        throw NumericError("rotating_space: restricted eigensolve failed", frob(restricted));
    }
    for (Index i = 0; i < k; ++i) {
        Vector v = basis * ces.eigenvectors().col(i);
        Matrix x = devec(v, d, d);
        x /= frob(x);
        const Complex lambda = ces.eigenvalues()(i);
        const double res = frob(e.apply(x) - lambda * x);
        if (res > tol.verify) {
            throw NumericError("rotating_space: eigenoperator residual exceeds tolerance", res);
        }
        if (std::abs(1.0 - std::abs(lambda)) > 10.0 * tol.eig_cluster) {
            throw StructuralError("rotating_space",
                                  "restricted spectrum contains a non-peripheral eigenvalue");
        }
        out.eigenoperators.push_back(std::move(x));
        out.eigenphases.push_back(lambda / std::abs(lambda));
    }
    return out;
}

Matrix einf_cesaro_oracle(const Channel& e, long n) {
    if (n < 1) {
        throw ParameterError("einf_cesaro_oracle: order must be at least 1");
    }
    return power_mean(e, n);
}

SupportInfo joint_support(const FixedSpaces& fs, const Channel& e,
                          const Tolerance& tol, bool use_basis_union) {
    tol.validate();
    const Index d = e.dim();
    if (fs.einf.rows() != d * d) {
        throw DimensionError("joint_support: fixed spaces do not match the channel dimension");
    }

    Matrix omega = devec(fs.einf * vec(Matrix::Identity(d, d) / static_cast<double>(d)), d, d);
    const double herm_res = frob(omega - omega.adjoint());
    if (herm_res > tol.verify) {
        throw NumericError("joint_support: projector image of I/d is not Hermitian", herm_res);
    }
    omega = (omega + omega.adjoint()) * 0.5;

    HermEig eig = herm_eig(omega, tol);
    if (eig.values.minCoeff() < -tol.verify) {
        throw NumericError("joint_support: projector image of I/d is not PSD; "
                           "the spectral projector is broken",
                           -eig.values.minCoeff());
    }

    SupportInfo out;
    if (use_basis_union) {
        // Union of the ranges of 𝓔∞ images of the full matrix-unit basis.
        Matrix stacked(d, d * d * d);
        for (Index i = 0; i < d; ++i) {
            for (Index j = 0; j < d; ++j) {
                Matrix img = devec(fs.einf * vec(basis_op(d, i, j)), d, d);
                stacked.middleCols((i * d + j) * d, d) = img;
            }
        }
        Eigen::JacobiSVD<Matrix> svd(stacked, Eigen::ComputeThinU);
        const auto& sv = svd.singularValues();
        const double cut = (sv.size() > 0 ? sv(0) : 0.0) * tol.rank_cutoff;
        Index rank = 0;
        while (rank < sv.size() && sv(rank) > cut) ++rank;
        Matrix u = svd.matrixU().leftCols(rank);
        out.projector = u * u.adjoint();
        out.rank = rank;
    } else {
        out.projector = support_projector(omega, tol);
        out.rank = static_cast<Index>(std::llround(out.projector.trace().real()));
    }

    const double trace = omega.trace().real();
    out.max_rank_fixed_state = omega / (trace > 0.0 ? trace : 1.0);
    return out;
}

}  // namespace ips
