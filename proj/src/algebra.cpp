// algebra.cpp — block decomposition of the fixed-point algebra.

#include "ips/algebra.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace ips {

namespace {

constexpr int kMaxResample = 8;

// Columns of the eigenvector matrix whose eigenvalue exceeds 1/2: an
// orthonormal basis of the range of a numerical projector.
Matrix projector_range(const Matrix& p, const Tolerance& tol) {
    HermEig eig = herm_eig(p, tol);
    Index count = 0;
    for (Index i = 0; i < eig.values.size(); ++i) {
        if (eig.values(i) > 0.5) ++count;
    }
    Matrix out(p.rows(), count);
    Index at = 0;
    for (Index i = 0; i < eig.values.size(); ++i) {
        if (eig.values(i) > 0.5) out.col(at++) = eig.vectors.col(i);
    }
    return out;
}

// Groups ascending eigenvalues into clusters split at gaps larger than the
// threshold; returns one index range [begin, end) per cluster.
std::vector<std::pair<Index, Index>> cluster_eigenvalues(const RealVector& values,
                                                         double split_gap) {
    std::vector<std::pair<Index, Index>> out;
    if (values.size() == 0) return out;
    Index begin = 0;
    for (Index i = 1; i < values.size(); ++i) {
        if (values(i) - values(i - 1) > split_gap) {
            out.emplace_back(begin, i);
            begin = i;
        }
    }
    out.emplace_back(begin, values.size());
    return out;
}

Matrix random_hermitian_combination(const std::vector<Matrix>& herm_basis, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix z = Matrix::Zero(herm_basis.front().rows(), herm_basis.front().cols());
    for (const Matrix& h : herm_basis) z += normal(rng) * h;
    return z;
}

}  // namespace

// ------------------------------- commutant ----------------------------------

OperatorSubspace commutant(const std::vector<Matrix>& ops, const Tolerance& tol) {
    tol.validate();
    if (ops.empty()) {
        throw ParameterError("commutant: operator list must be non-empty");
    }
    const Index d = ops.front().rows();
    for (const Matrix& k : ops) {
        if (k.rows() != d || k.cols() != d) {
            throw DimensionError("commutant: operators must be square with equal dimensions");
        }
    }

    // XK = KX  ⟺  (K^T ⊗ I − I ⊗ K) vec(X) = 0.
    const Matrix eye = Matrix::Identity(d, d);
    Matrix stacked(static_cast<Index>(ops.size()) * d * d, d * d);
    for (size_t i = 0; i < ops.size(); ++i) {
        stacked.middleRows(static_cast<Index>(i) * d * d, d * d) =
            kron(ops[i].transpose(), eye) - kron(eye, ops[i]);
    }

    // Floor the cutoff at the operators' own scale: when every commutator is
    // numerically zero the stacked map is pure noise, and a cutoff relative to
    // its largest singular value would mistake that noise for structure.
    double op_scale = 0.0;
    for (const Matrix& k : ops) op_scale = std::max(op_scale, frob(k));
    Eigen::JacobiSVD<Matrix> svd(stacked, Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double cut = tol.rank_cutoff * std::max(sv.size() > 0 ? sv(0) : 0.0, op_scale);
    Index rank = 0;
    while (rank < sv.size() && sv(rank) > cut) ++rank;

    std::vector<Matrix> basis;
    for (Index i = rank; i < d * d; ++i) {
        basis.push_back(devec(svd.matrixV().col(i), d, d));
    }
    return OperatorSubspace::from_orthonormal(d, std::move(basis), tol);
}

// ----------------------- structure from fixed spaces ------------------------

namespace {

// Null space, in coefficient coordinates, of the commutator constraints of an
// orthonormal algebra basis: vectors c with Σ c_i A_i central in span{A_i}.
Matrix center_coefficients(const std::vector<Matrix>& basis, const Tolerance& tol) {
    const Index k = static_cast<Index>(basis.size());
    const Index rr = basis.front().rows() * basis.front().cols();
    Matrix stacked(k * rr, k);
    for (Index j = 0; j < k; ++j) {
        for (Index i = 0; i < k; ++i) {
            stacked.block(j * rr, i, rr, 1) = vec(basis[static_cast<size_t>(i)] * basis[static_cast<size_t>(j)] -
                                                  basis[static_cast<size_t>(j)] * basis[static_cast<size_t>(i)]);
        }
    }
    // The basis is HS-orthonormal, so unit scale is the right absolute floor
    // for the fully abelian case where every commutator vanishes.
    Eigen::JacobiSVD<Matrix> svd(stacked, Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double cut = tol.rank_cutoff * std::max(sv.size() > 0 ? sv(0) : 0.0, 1.0);
    Index rank = 0;
    while (rank < sv.size() && sv(rank) > cut) ++rank;
    return svd.matrixV().rightCols(k - rank);
}

struct BlockSplit {
    Matrix basis_cols;  // r×m_k orthonormal columns spanning the block
};

// Splits range(P) along the minimal central projections located by a generic
// Hermitian element of the center.
std::vector<BlockSplit> split_by_center(const std::vector<Matrix>& center_herm,
                                        Index expected_blocks, const Tolerance& tol,
                                        Rng& rng) {
    const double split_gap = std::max(1e-6, 10.0 * tol.eig_cluster);
    for (int attempt = 0; attempt < kMaxResample; ++attempt) {
        Matrix z = random_hermitian_combination(center_herm, rng);
        HermEig eig = herm_eig(z, tol);
        auto clusters = cluster_eigenvalues(eig.values, split_gap);
        if (static_cast<Index>(clusters.size()) != expected_blocks) continue;

        std::vector<BlockSplit> out;
        out.reserve(clusters.size());
        for (const auto& [begin, end] : clusters) {
            BlockSplit b;
            b.basis_cols = eig.vectors.middleCols(begin, end - begin);
            out.push_back(std::move(b));
        }
        return out;
    }
    throw StructuralError("algebra",
                          "center spectrum failed to separate into " +
                              std::to_string(expected_blocks) + " clusters after " +
                              std::to_string(kMaxResample) + " generic draws");
}

// Unitary m×m change of basis realizing the block algebra as M_d ⊗ I_n:
// columns ordered so column (i·n + α) is the image of |i⟩⊗|α⟩.
Matrix tensor_factorization(const std::vector<Matrix>& block_basis, Index d_k, Index n_k,
                            const Tolerance& tol, Rng& rng) {
    const Index m = block_basis.front().rows();
    if (d_k == 1) {
        return Matrix::Identity(m, m);
    }

    auto herm = hermitian_basis(
        OperatorSubspace::from_orthonormal(m, block_basis, tol), tol);
    const double split_gap = std::max(1e-6, 10.0 * tol.eig_cluster);

    for (int attempt = 0; attempt < kMaxResample; ++attempt) {
        // A generic Hermitian element has d_k distinct eigenvalues, each with
        // multiplicity n_k; its eigenspaces label the d-factor basis.
        Matrix h = random_hermitian_combination(herm, rng);
        HermEig eig = herm_eig(h, tol);
        auto clusters = cluster_eigenvalues(eig.values, split_gap);
        if (static_cast<Index>(clusters.size()) != d_k) continue;
        bool sizes_ok = true;
        for (const auto& [begin, end] : clusters) {
            if (end - begin != n_k) { sizes_ok = false; break; }
        }
        if (!sizes_ok) continue;

        std::vector<Matrix> eigenspaces;
        eigenspaces.reserve(static_cast<size_t>(d_k));
        for (const auto& [begin, end] : clusters) {
            eigenspaces.push_back(eig.vectors.middleCols(begin, end - begin));
        }

        // A second generic element transports the multiplicity basis of the
        // first eigenspace consistently into the others: its (i,1) block is a
        // scalar multiple of a unitary.
        Matrix g = random_hermitian_combination(herm, rng);
        Matrix t(m, m);
        t.leftCols(n_k) = eigenspaces[0];
        bool transport_ok = true;
        for (Index i = 1; i < d_k; ++i) {
            Matrix g_block = eigenspaces[static_cast<size_t>(i)].adjoint() * g * eigenspaces[0];
            const double scale = g_block.norm() / std::sqrt(static_cast<double>(n_k));
            if (scale < 1e-8 * std::max(1.0, g.norm())) { transport_ok = false; break; }
            Matrix w = g_block / scale;
            if (frob(w.adjoint() * w - Matrix::Identity(n_k, n_k)) > 1e-6) {
                transport_ok = false;
                break;
            }
            t.middleCols(i * n_k, n_k) = eigenspaces[static_cast<size_t>(i)] * w;
        }
        if (!transport_ok) continue;

        if (frob(t.adjoint() * t - Matrix::Identity(m, m)) > 1e-8) continue;

        // Definitive check: every algebra element factors as â ⊗ I_n in the
        // new basis.
        bool factored = true;
        for (const Matrix& a : block_basis) {
            Matrix tilted = t.adjoint() * a * t;
            Matrix head = partial_trace_second(tilted, d_k, n_k) / static_cast<double>(n_k);
            if (frob(tilted - kron(head, Matrix::Identity(n_k, n_k))) >
                10.0 * tol.verify * std::max(1.0, frob(tilted))) {
                factored = false;
                break;
            }
        }
        if (!factored) continue;
        return t;
    }
    throw StructuralError("algebra", "tensor factorization of a central block failed after " +
                                         std::to_string(kMaxResample) + " generic draws");
}

}  // namespace

AlgebraStructure structure_from_fixed_spaces(const FixedSpaces& fs, const SupportInfo& sup,
                                             const Channel& e, const Tolerance& tol,
                                             std::uint64_t seed) {
    tol.validate();
    if (sup.projector.rows() != e.dim()) {
        throw DimensionError("structure_from_fixed_spaces: support does not match the channel");
    }
    const Index r = sup.rank;
    Rng rng(seed ^ 0x5bd1e995u);

    AlgebraStructure out;
    out.support = sup.projector;
    out.support_rank = r;
    out.range_isometry = projector_range(sup.projector, tol);
    if (out.range_isometry.cols() != r) {
        throw StructuralError("algebra", "support projector rank disagrees with its eigenvalues");
    }
    const Matrix& c = out.range_isometry;

    // Step 1: compress the dual fixed space by P to get the algebra.
    std::vector<Matrix> compressed;
    compressed.reserve(static_cast<size_t>(fs.b_space.dim()));
    for (const Matrix& y : fs.b_space.basis()) {
        compressed.push_back(c.adjoint() * y * c);
    }
    out.algebra = orthonormalize(compressed, tol);
    if (out.algebra.dim() != fs.b_space.dim()) {
        std::ostringstream msg;
        msg << "compression of the dual fixed space by P lost rank (" << fs.b_space.dim()
            << " -> " << out.algebra.dim() << "); the clustering is inconsistent";
        throw StructuralError("algebra", msg.str());
    }
    const auto& alg = out.algebra.basis();
    const Index k = out.algebra.dim();

    // Step 2: closure under products and adjoints.
    double closure = 0.0;
    for (const Matrix& a : alg) {
        closure = std::max(closure, out.algebra.containment_residual(a.adjoint()));
        for (const Matrix& b : alg) {
            closure = std::max(closure, out.algebra.containment_residual(a * b));
        }
    }
    closure = std::max(closure, out.algebra.containment_residual(Matrix::Identity(r, r)));
    if (closure > 10.0 * tol.verify) {
        throw StructuralError("algebra",
                              "compressed dual fixed space is not closed under the algebra "
                              "operations (residual " + std::to_string(closure) +
                              "); the λ=1 clustering was wrong");
    }

    // Step 3: center = null space of the commutator constraints inside 𝓐.
    Matrix center_coeff = center_coefficients(alg, tol);
    out.center_dim = center_coeff.cols();
    std::vector<Matrix> center_ops;
    center_ops.reserve(static_cast<size_t>(out.center_dim));
    for (Index i = 0; i < center_coeff.cols(); ++i) {
        Matrix z = Matrix::Zero(r, r);
        for (Index j = 0; j < k; ++j) z += center_coeff(j, i) * alg[static_cast<size_t>(j)];
        center_ops.push_back(std::move(z));
    }
    auto center_herm = hermitian_basis(
        OperatorSubspace::from_orthonormal(r, center_ops, tol), tol);
    if (static_cast<Index>(center_herm.size()) != out.center_dim) {
        throw StructuralError("algebra", "center is not adjoint-closed");
    }

    // Steps 4-6: minimal central projections, then per-block dimensions and
    // tensor factorization.
    auto blocks = split_by_center(center_herm, out.center_dim, tol, rng);

    struct BlockData {
        Index d_k, n_k;
        Matrix isometry;  // d×(d_k n_k)
        Matrix tau;
    };
    std::vector<BlockData> data;

    Index dim_check = 0, rank_check = 0;
    for (const auto& block : blocks) {
        const Index m = block.basis_cols.cols();

        std::vector<Matrix> block_ops;
        block_ops.reserve(static_cast<size_t>(k));
        for (const Matrix& a : alg) {
            block_ops.push_back(block.basis_cols.adjoint() * a * block.basis_cols);
        }
        OperatorSubspace block_alg = orthonormalize(block_ops, tol);

        const auto d_k = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(block_alg.dim()))));
        if (d_k * d_k != block_alg.dim() || d_k <= 0 || m % d_k != 0) {
            std::ostringstream msg;
            msg << "block of size " << m << " carries an algebra of dimension " << block_alg.dim()
                << ", which is not a perfect square dividing the block";
            throw StructuralError("algebra", msg.str());
        }
        const Index n_k = m / d_k;

        Matrix t = tensor_factorization(block_alg.basis(), d_k, n_k, tol, rng);
        BlockData bd;
        bd.d_k = d_k;
        bd.n_k = n_k;
        bd.isometry = c * block.basis_cols * t;

        // Step 7: cofactor state from the max-rank fixed state.
        Matrix omega_k = bd.isometry.adjoint() * sup.max_rank_fixed_state * bd.isometry;
        Matrix tau_raw = partial_trace_first(omega_k, d_k, n_k);
        Matrix m_raw = partial_trace_second(omega_k, d_k, n_k);
        const double w = omega_k.trace().real();
        if (w <= 0.0) {
            throw StructuralError("algebra", "max-rank fixed state has no weight on a block");
        }
        const double split_res = frob(omega_k - kron(m_raw, tau_raw) / w);
        if (split_res > 10.0 * tol.verify * std::max(1.0, frob(omega_k))) {
            throw StructuralError("algebra",
                                  "max-rank fixed state does not factor over a block (residual " +
                                      std::to_string(split_res) + ")");
        }
        bd.tau = (tau_raw + tau_raw.adjoint()) * (0.5 / tau_raw.trace().real());
        data.push_back(std::move(bd));

        dim_check += d_k * d_k;
        rank_check += d_k * n_k;
    }

    if (dim_check != fs.sigma.dim() || rank_check != r) {
        std::ostringstream msg;
        msg << "dimension bookkeeping failed: sum d_k^2 = " << dim_check << " vs fixed dim "
            << fs.sigma.dim() << ", sum d_k n_k = " << rank_check << " vs support rank " << r;
        throw StructuralError("algebra", msg.str());
    }

    std::stable_sort(data.begin(), data.end(), [](const BlockData& a, const BlockData& b) {
        if (a.d_k != b.d_k) return a.d_k > b.d_k;
        return a.n_k > b.n_k;
    });
    for (auto& bd : data) {
        out.shape.emplace_back(bd.d_k, bd.n_k);
        out.block_isometries.push_back(std::move(bd.isometry));
        out.tau_states.push_back(std::move(bd.tau));
    }
    return out;
}

// --------------------------- fixed-state assembly ----------------------------

Matrix fixed_state_form(const AlgebraStructure& structure, const std::vector<Matrix>& m_blocks) {
    if (m_blocks.size() != structure.shape.size()) {
        throw DimensionError("fixed_state_form: block count does not match the shape");
    }
    const Index d = structure.support.rows();
    Matrix out = Matrix::Zero(d, d);
    for (size_t i = 0; i < m_blocks.size(); ++i) {
        const auto [d_k, n_k] = structure.shape[i];
        if (m_blocks[i].rows() != d_k || m_blocks[i].cols() != d_k) {
            throw DimensionError("fixed_state_form: block " + std::to_string(i) + " must be " +
                                 std::to_string(d_k) + "x" + std::to_string(d_k));
        }
        const Matrix& v = structure.block_isometries[i];
        out += v * kron(m_blocks[i], structure.tau_states[i]) * v.adjoint();
    }
    return out;
}

std::vector<Matrix> block_coefficients(const AlgebraStructure& structure, const Matrix& x,
                                       const Tolerance& tol) {
    std::vector<Matrix> out;
    out.reserve(structure.shape.size());
    for (size_t i = 0; i < structure.shape.size(); ++i) {
        const auto [d_k, n_k] = structure.shape[i];
        const Matrix& v = structure.block_isometries[i];
        Matrix y = v.adjoint() * x * v;

        // For y = M ⊗ τ with τ full rank: tr_2(y·(I ⊗ τ^{-1})) = n·M.
        HermEig te = herm_eig(structure.tau_states[i], tol);
        Matrix tau_inv = Matrix::Zero(n_k, n_k);
        for (Index j = 0; j < n_k; ++j) {
            if (te.values(j) > tol.rank_cutoff) {
                tau_inv += (1.0 / te.values(j)) * te.vectors.col(j) * te.vectors.col(j).adjoint();
            }
        }
        out.push_back(partial_trace_second(y * kron(Matrix::Identity(d_k, d_k), tau_inv), d_k, n_k) /
                      static_cast<double>(n_k));
    }
    return out;
}

// -------------------------------- echo map ----------------------------------

Matrix EchoMap::apply(const Matrix& a) const {
    if (a.rows() != domain_side || a.cols() != domain_side) {
        throw DimensionError("EchoMap::apply: expected a compressed observable");
    }
    if (empty()) return Matrix::Zero(0, 0);
    return devec(matrix * vec(a), codomain_side, codomain_side);
}

Matrix EchoMap::extend(const Matrix& a) const {
    Matrix out = range_isometry * a * range_isometry.adjoint();
    if (!empty()) {
        out += kernel_isometry * apply(a) * kernel_isometry.adjoint();
    }
    return out;
}

EchoMap echo_map(const FixedSpaces& fs, const AlgebraStructure& structure, const Tolerance& tol) {
    tol.validate();
    const Index d = structure.support.rows();
    const Index r = structure.support_rank;

    EchoMap out;
    out.domain_side = r;
    out.codomain_side = d - r;
    out.range_isometry = structure.range_isometry;

    if (out.codomain_side == 0) {
        out.kernel_isometry = Matrix(d, 0);
        out.matrix = Matrix(0, r * r);
        return out;
    }

    Matrix complement = Matrix::Identity(d, d) - structure.support;
    out.kernel_isometry = projector_range(complement, tol);
    if (out.kernel_isometry.cols() != d - r) {
        throw StructuralError("echo_map", "support complement has unexpected rank");
    }
    const Matrix& c = out.range_isometry;
    const Matrix& cbar = out.kernel_isometry;

    const Index k = fs.b_space.dim();
    Matrix a_stack(r * r, k);
    Matrix d_stack((d - r) * (d - r), k);
    for (Index i = 0; i < k; ++i) {
        const Matrix& y = fs.b_space.basis()[static_cast<size_t>(i)];
        const double corner = std::max(frob(c.adjoint() * y * cbar), frob(cbar.adjoint() * y * c));
        if (corner > tol.verify) {
            throw StructuralError("echo_map",
                                  "dual fixed observable has an off-diagonal corner block of norm " +
                                      std::to_string(corner));
        }
        a_stack.col(i) = vec(c.adjoint() * y * c);
        d_stack.col(i) = vec(cbar.adjoint() * y * cbar);
    }

    Eigen::JacobiSVD<Matrix> svd(a_stack, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double cut = (sv.size() > 0 ? sv(0) : 0.0) * std::sqrt(tol.rank_cutoff);
    Index rank = 0;
    while (rank < sv.size() && sv(rank) > cut) ++rank;

    Matrix pinv = Matrix::Zero(k, r * r);
    for (Index i = 0; i < rank; ++i) {
        pinv += (1.0 / sv(i)) * svd.matrixV().col(i) * svd.matrixU().col(i).adjoint();
    }
    out.matrix = d_stack * pinv;

    const double consistency = frob(out.matrix * a_stack - d_stack);
    if (consistency > tol.verify * std::max(1.0, frob(d_stack))) {
        throw StructuralError("echo_map",
                              "echo assignment is multivalued (residual " +
                                  std::to_string(consistency) + ")");
    }
    return out;
}

}  // namespace ips
