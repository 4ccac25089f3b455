// matcore.cpp — implementation of the dense linear-algebra substrate.

#include "ips/matcore.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ips {

namespace {

void require_square(const Matrix& x, const char* who) {
    if (x.rows() != x.cols()) {
        throw DimensionError(std::string(who) + ": matrix must be square, got " +
                             std::to_string(x.rows()) + "x" + std::to_string(x.cols()));
    }
}

void require_finite(const Matrix& x, const char* who) {
    if (!all_finite(x)) {
        throw NumericError(std::string(who) + ": non-finite entries in result", 0.0);
    }
}

}  // namespace

// ------------------------------ small helpers -------------------------------

Vector vec(const Matrix& x) {
    // Eigen stores column-major, so the raw buffer is already column-stacked.
    return Eigen::Map<const Vector>(x.data(), x.size());
}

Matrix devec(const Vector& v, Index rows, Index cols) {
    if (v.size() != rows * cols) {
        throw DimensionError("devec: vector length " + std::to_string(v.size()) +
                             " does not factor as " + std::to_string(rows) + "x" +
                             std::to_string(cols));
    }
    return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

Matrix devec_square(const Vector& v) {
    const auto d = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(v.size()))));
    if (d * d != v.size()) {
        throw DimensionError("devec_square: length " + std::to_string(v.size()) +
                             " is not a perfect square");
    }
    return devec(v, d, d);
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i) {
        for (Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

Matrix partial_trace_first(const Matrix& m, Index da, Index db) {
    if (m.rows() != da * db || m.cols() != da * db) {
        throw DimensionError("partial_trace_first: dimension mismatch");
    }
    Matrix out = Matrix::Zero(db, db);
    for (Index a = 0; a < da; ++a) {
        out += m.block(a * db, a * db, db, db);
    }
    return out;
}

Matrix partial_trace_second(const Matrix& m, Index da, Index db) {
    if (m.rows() != da * db || m.cols() != da * db) {
        throw DimensionError("partial_trace_second: dimension mismatch");
    }
    Matrix out = Matrix::Zero(da, da);
    for (Index a = 0; a < da; ++a) {
        for (Index ap = 0; ap < da; ++ap) {
            out(a, ap) = m.block(a * db, ap * db, db, db).trace();
        }
    }
    return out;
}

Matrix basis_op(Index dim, Index i, Index j) {
    if (i < 0 || j < 0 || i >= dim || j >= dim) {
        throw ParameterError("basis_op: index out of range");
    }
    Matrix m = Matrix::Zero(dim, dim);
    m(i, j) = 1.0;
    return m;
}

Complex hs_inner(const Matrix& x, const Matrix& y) {
    if (x.rows() != y.rows() || x.cols() != y.cols()) {
        throw DimensionError("hs_inner: shape mismatch");
    }
    return (x.adjoint() * y).trace();
}

// ------------------------------- operations ---------------------------------

double trace_norm(const Matrix& x) {
    require_square(x, "trace_norm");
    if (x.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(x);
    return svd.singularValues().sum();
}

Spectrum eig_general(const Matrix& m, const Tolerance& tol) {
    require_square(m, "eig_general");
    tol.validate();
    const Index n = m.rows();

    Eigen::ComplexEigenSolver<Matrix> ces(m, /*computeEigenvectors=*/true);
    if (ces.info() != Eigen::Success) {
        throw NumericError("eig_general: eigensolver failed to converge", frob(m));
    }

    Vector values = ces.eigenvalues();
    Matrix right = ces.eigenvectors();

    // Left eigenvectors from the inverse of the right eigenvector matrix:
    // V^{-1} M = Λ V^{-1}, so left.col(i) = (V^{-1} row i)†.
    Eigen::FullPivLU<Matrix> lu(right);
    if (!lu.isInvertible()) {
        throw NumericError("eig_general: defective eigenvector matrix; left eigenvectors unavailable",
                           lu.rcond());
    }
    Matrix left = lu.inverse().adjoint();

    // Sort by decreasing modulus, ties by real then imaginary part descending.
    std::vector<Index> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
        const Complex va = values(a), vb = values(b);
        const double ma = std::abs(va), mb = std::abs(vb);
        if (ma != mb) return ma > mb;
        if (va.real() != vb.real()) return va.real() > vb.real();
        return va.imag() > vb.imag();
    });

    Spectrum out;
    out.values.resize(n);
    out.right.resize(n, n);
    out.left.resize(n, n);
    for (Index k = 0; k < n; ++k) {
        out.values(k) = values(order[static_cast<size_t>(k)]);
        out.right.col(k) = right.col(order[static_cast<size_t>(k)]);
        out.left.col(k) = left.col(order[static_cast<size_t>(k)]);
    }

    const double scale = std::max(1.0, frob(m));
    out.residual = frob(m * out.right - out.right * out.values.asDiagonal().toDenseMatrix()) / scale;

    // The accuracy contract only binds on the peripheral part of the spectrum.
    double periph_residual = 0.0;
    for (Index k = 0; k < n; ++k) {
        if (std::abs(1.0 - std::abs(out.values(k))) <= tol.eig_cluster) {
            periph_residual = std::max(
                periph_residual,
                (m * out.right.col(k) - out.values(k) * out.right.col(k)).norm() / scale);
        }
    }
    if (periph_residual > tol.verify) {
        throw NumericError("eig_general: peripheral eigenpair residual exceeds tolerance",
                           periph_residual);
    }
    return out;
}

HermEig herm_eig(const Matrix& h, const Tolerance& tol) {
    require_square(h, "herm_eig");
    tol.validate();
    const double herm_res = frob(h - h.adjoint());
    if (herm_res > tol.verify * std::max(1.0, frob(h))) {
        throw ContractError("herm_eig: input is not Hermitian within tolerance", herm_res);
    }

    Eigen::SelfAdjointEigenSolver<Matrix> es((h + h.adjoint()) * 0.5);
    if (es.info() != Eigen::Success) {
        throw NumericError("herm_eig: eigensolver failed to converge", frob(h));
    }
    HermEig out{es.eigenvalues(), es.eigenvectors()};
    const double recon = frob(h - out.vectors * out.values.asDiagonal() * out.vectors.adjoint());
    if (recon > tol.verify * std::max(1.0, frob(h))) {
        throw NumericError("herm_eig: reconstruction residual exceeds tolerance", recon);
    }
    return out;
}

namespace {

// Shared eigenvalue filter for support / inverse-sqrt style PSD functions.
HermEig psd_eig(const Matrix& h, const Tolerance& tol, const char* who) {
    HermEig eig = herm_eig(h, tol);
    const double scale = eig.values.size() > 0 ? eig.values.cwiseAbs().maxCoeff() : 0.0;
    const double floor = -tol.verify * std::max(1.0, scale);
    if (eig.values.size() > 0 && eig.values.minCoeff() < floor) {
        throw ContractError(std::string(who) + ": input has a negative eigenvalue beyond tolerance",
                            -eig.values.minCoeff());
    }
    return eig;
}

}  // namespace

Matrix support_projector(const Matrix& h, const Tolerance& tol) {
    HermEig eig = psd_eig(h, tol, "support_projector");
    const Index n = h.rows();
    const double top = eig.values.size() > 0 ? eig.values.maxCoeff() : 0.0;
    const double cut = tol.rank_cutoff * std::max(top, 0.0);
    Matrix p = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        if (eig.values(i) > cut && eig.values(i) > 0.0) {
            p += eig.vectors.col(i) * eig.vectors.col(i).adjoint();
        }
    }
    require_finite(p, "support_projector");
    return p;
}

Matrix psd_inv_sqrt(const Matrix& h, const Tolerance& tol) {
    HermEig eig = psd_eig(h, tol, "psd_inv_sqrt");
    const Index n = h.rows();
    const double top = eig.values.size() > 0 ? eig.values.maxCoeff() : 0.0;
    const double cut = tol.rank_cutoff * std::max(top, 0.0);
    Matrix out = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        if (eig.values(i) > cut && eig.values(i) > 0.0) {
            out += (1.0 / std::sqrt(eig.values(i))) * eig.vectors.col(i) * eig.vectors.col(i).adjoint();
        }
    }
    require_finite(out, "psd_inv_sqrt");
    return out;
}

// --------------------------- ordered Schur form ------------------------------

namespace {

// Unitary similarity swapping the adjacent diagonal entries t(i,i) and
// t(i+1,i+1) of an upper-triangular t, applied in place to t and accumulated
// into q. Standard Givens construction from the eigenvector of the 2×2 block.
void swap_adjacent(Matrix& t, Matrix& q, Index i) {
    const Complex a = t(i, i);
    const Complex b = t(i, i + 1);
    const Complex c = t(i + 1, i + 1);

    const Complex w0 = b;
    const Complex w1 = c - a;
    const double nw = std::sqrt(std::norm(w0) + std::norm(w1));
    const double scale = std::abs(a) + std::abs(c) + std::abs(b);

    Eigen::Matrix2cd g;
    if (nw <= 1e-15 * std::max(1.0, scale)) {
        // The 2×2 block is numerically a scalar; a plain exchange suffices.
        g << 0.0, 1.0, 1.0, 0.0;
    } else {
        g << w0 / nw, -std::conj(w1) / nw,
             w1 / nw,  std::conj(w0) / nw;
    }

    t.middleRows(i, 2) = g.adjoint() * t.middleRows(i, 2);
    t.middleCols(i, 2) = t.middleCols(i, 2) * g;
    q.middleCols(i, 2) = q.middleCols(i, 2) * g;
    t(i + 1, i) = 0.0;  // rounding-level by construction
}

}  // namespace

SchurCluster schur_select(const Matrix& m, const std::function<bool(Complex)>& select) {
    require_square(m, "schur_select");
    const Index n = m.rows();

    Eigen::ComplexSchur<Matrix> schur(m, /*computeU=*/true);
    if (schur.info() != Eigen::Success) {
        throw NumericError("schur_select: Schur decomposition failed to converge", frob(m));
    }
    Matrix t = schur.matrixT();
    Matrix q = schur.matrixU();

    // Selection sort on the diagonal: pull each selected eigenvalue to the
    // front with adjacent swaps. Membership is decided once, up front, so a
    // value cannot flip sides as rounding nudges it across the predicate.
    std::vector<bool> chosen(static_cast<size_t>(n));
    for (Index i = 0; i < n; ++i) chosen[static_cast<size_t>(i)] = select(t(i, i));

    Index target = 0;
    for (Index scan = 0; scan < n; ++scan) {
        if (!chosen[static_cast<size_t>(scan)]) continue;
        for (Index k = scan; k > target; --k) {
            swap_adjacent(t, q, k - 1);
            std::swap(chosen[static_cast<size_t>(k - 1)], chosen[static_cast<size_t>(k)]);
        }
        ++target;
    }

    SchurCluster out;
    out.q = std::move(q);
    out.t = std::move(t);
    out.selected = target;
    out.values = out.t.diagonal();

    const double recon = frob(m - out.q * out.t * out.q.adjoint());
    if (recon > 1e-10 * std::max(1.0, frob(m))) {
        throw NumericError("schur_select: reordered factorization lost accuracy", recon);
    }
    return out;
}

// --------------------------- operator subspaces -----------------------------

OperatorSubspace OperatorSubspace::from_orthonormal(Index ambient, std::vector<Matrix> basis,
                                                    const Tolerance& tol) {
    OperatorSubspace s;
    s.ambient_ = ambient;
    s.stacked_.resize(ambient * ambient, static_cast<Index>(basis.size()));
    for (size_t i = 0; i < basis.size(); ++i) {
        if (basis[i].rows() != ambient || basis[i].cols() != ambient) {
            throw DimensionError("OperatorSubspace: basis element has wrong ambient dimension");
        }
        s.stacked_.col(static_cast<Index>(i)) = vec(basis[i]);
    }
    s.basis_ = std::move(basis);
    if (s.gram_residual() > tol.verify * std::max<double>(1.0, static_cast<double>(s.dim()))) {
        throw ContractError("OperatorSubspace: family is not orthonormal", s.gram_residual());
    }
    return s;
}

Matrix OperatorSubspace::project(const Matrix& x) const {
    if (dim() == 0) return Matrix::Zero(x.rows(), x.cols());
    return devec(stacked_ * coefficients(x), ambient_, ambient_);
}

Vector OperatorSubspace::coefficients(const Matrix& x) const {
    if (x.rows() != ambient_ || x.cols() != ambient_) {
        throw DimensionError("OperatorSubspace::coefficients: ambient dimension mismatch");
    }
    return stacked_.adjoint() * vec(x);
}

double OperatorSubspace::containment_residual(const Matrix& x) const {
    return frob(x - project(x)) / std::max(1.0, frob(x));
}

double OperatorSubspace::gram_residual() const {
    const Index k = dim();
    if (k == 0) return 0.0;
    return frob(stacked_.adjoint() * stacked_ - Matrix::Identity(k, k));
}

OperatorSubspace orthonormalize(const std::vector<Matrix>& span, const Tolerance& tol) {
    tol.validate();
    OperatorSubspace out;
    if (span.empty()) return out;

    const Index d = span.front().rows();
    for (const Matrix& m : span) {
        if (m.rows() != d || m.cols() != d) {
            throw DimensionError("orthonormalize: all matrices must share dimensions");
        }
    }
    Matrix stacked(d * d, static_cast<Index>(span.size()));
    for (size_t i = 0; i < span.size(); ++i) stacked.col(static_cast<Index>(i)) = vec(span[i]);

    Eigen::JacobiSVD<Matrix> svd(stacked, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) <= 0.0) {
        out.ambient_ = d;
        out.stacked_.resize(d * d, 0);
        return out;
    }
    // The Gram matrix has eigenvalues σ², so its rank at rank_cutoff is the
    // count of σ above sqrt(rank_cutoff) relative to the largest.
    const double cut = std::sqrt(tol.rank_cutoff) * sv(0);
    Index rank = 0;
    while (rank < sv.size() && sv(rank) > cut) ++rank;

    out.ambient_ = d;
    out.stacked_ = svd.matrixU().leftCols(rank);
    out.basis_.reserve(static_cast<size_t>(rank));
    for (Index i = 0; i < rank; ++i) {
        out.basis_.push_back(devec(out.stacked_.col(i), d, d));
    }
    return out;
}

double max_principal_angle_sin(const OperatorSubspace& a, const OperatorSubspace& b) {
    if (a.ambient_dim() != b.ambient_dim()) {
        throw DimensionError("max_principal_angle_sin: ambient dimensions differ");
    }
    if (a.dim() == 0 && b.dim() == 0) return 0.0;
    if (a.dim() == 0 || b.dim() == 0) return 1.0;

    const Matrix& ba = a.basis_matrix();
    const Matrix& bb = b.basis_matrix();
    auto residual_sigma = [](const Matrix& u, const Matrix& v) {
        // ‖(I − P_v) u‖₂ = sin of the largest angle of span(u) out of span(v).
        Matrix res = u - v * (v.adjoint() * u);
        Eigen::JacobiSVD<Matrix> svd(res);
        return svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
    };
    return std::min(1.0, std::max(residual_sigma(ba, bb), residual_sigma(bb, ba)));
}

std::vector<Matrix> hermitian_basis(const OperatorSubspace& s, const Tolerance& tol) {
    const Index d = s.ambient_dim();
    if (s.dim() == 0) return {};

    // Hermitian/anti-Hermitian splits of the basis span the Hermitian part
    // over the reals; orthonormalize in the realified coordinates so the
    // resulting combinations stay Hermitian.
    std::vector<Matrix> cands;
    cands.reserve(2 * static_cast<size_t>(s.dim()));
    for (const Matrix& b : s.basis()) {
        cands.push_back((b + b.adjoint()) * 0.5);
        cands.push_back((b - b.adjoint()) * Complex(0.0, -0.5));
    }

    Eigen::MatrixXd stacked(2 * d * d, static_cast<Index>(cands.size()));
    for (size_t i = 0; i < cands.size(); ++i) {
        Vector v = vec(cands[i]);
        stacked.col(static_cast<Index>(i)) << v.real(), v.imag();
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) <= 0.0) return {};
    const double cut = std::sqrt(tol.rank_cutoff) * sv(0);
    Index rank = 0;
    while (rank < sv.size() && sv(rank) > cut) ++rank;

    std::vector<Matrix> out;
    out.reserve(static_cast<size_t>(rank));
    for (Index i = 0; i < rank; ++i) {
        Vector v(d * d);
        v.real() = svd.matrixU().col(i).head(d * d);
        v.imag() = svd.matrixU().col(i).tail(d * d);
        Matrix h = devec(v, d, d);
        out.push_back((h + h.adjoint()) * 0.5);  // scrub rounding asymmetry
    }
    return out;
}

// ------------------------------- randomness ---------------------------------

Matrix ginibre(Index rows, Index cols, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j) {
        for (Index i = 0; i < rows; ++i) {
            m(i, j) = Complex(normal(rng), normal(rng));
        }
    }
    return m;
}

Matrix haar_unitary(Index dim, Rng& rng) {
    Matrix g = ginibre(dim, dim, rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    // Fix the phase ambiguity so the distribution is Haar.
    for (Index i = 0; i < dim; ++i) {
        const Complex rii = r(i, i);
        q.col(i) *= (std::abs(rii) > 0.0 ? rii / std::abs(rii) : Complex(1.0));
    }
    return q;
}

Matrix random_density(Index dim, Rng& rng) {
    Matrix g = ginibre(dim, dim, rng);
    Matrix rho = g * g.adjoint();
    rho += Matrix::Identity(dim, dim) * (0.05 * rho.trace().real() / static_cast<double>(dim));
    rho /= rho.trace().real();
    return (rho + rho.adjoint()) * 0.5;
}

Matrix random_hermitian(Index dim, Rng& rng) {
    Matrix g = ginibre(dim, dim, rng);
    return (g + g.adjoint()) * 0.5;
}

}  // namespace ips
