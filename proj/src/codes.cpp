// codes.cpp — preservation checks, recovery construction, and the pipeline.

#include "ips/codes.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ips {

namespace {

void check_density(const Matrix& rho, const Tolerance& tol, const char* who) {
    if (rho.rows() != rho.cols()) {
        throw DimensionError(std::string(who) + ": states must be square");
    }
    const double herm = frob(rho - rho.adjoint());
    if (herm > tol.verify) {
        throw ContractError(std::string(who) + ": state is not Hermitian", herm);
    }
    HermEig eig = herm_eig((rho + rho.adjoint()) * 0.5, tol);
    if (eig.values.minCoeff() < -tol.verify) {
        throw ContractError(std::string(who) + ": state has a negative eigenvalue",
                            -eig.values.minCoeff());
    }
    const double tr_err = std::abs(rho.trace().real() - 1.0) + std::abs(rho.trace().imag());
    if (tr_err > tol.verify) {
        throw ContractError(std::string(who) + ": state is not trace-1", tr_err);
    }
}

}  // namespace

// ---------------------------------- codes -----------------------------------

Code Code::from_basis(Index dim, const std::vector<Matrix>& basis,
                      std::vector<Matrix> samples, const Tolerance& tol) {
    tol.validate();
    if (basis.empty()) {
        throw ParameterError("Code: basis must be non-empty");
    }
    if (samples.empty()) {
        throw ParameterError("Code: at least one sample state is required");
    }

    std::vector<Matrix> closed;
    closed.reserve(2 * basis.size());
    for (const Matrix& b : basis) {
        if (b.rows() != dim || b.cols() != dim) {
            throw DimensionError("Code: basis element has wrong dimension");
        }
        closed.push_back(b);
        closed.push_back(b.adjoint());
    }

    Code code;
    code.space_ = orthonormalize(closed, tol);
    if (code.space_.dim() == 0) {
        throw ParameterError("Code: basis spans only the zero operator");
    }
    code.herm_basis_ = hermitian_basis(code.space_, tol);

    // Joint support: union of the ranges of the (adjoint-closed) basis.
    Matrix stacked(dim, code.space_.dim() * dim);
    for (Index i = 0; i < code.space_.dim(); ++i) {
        stacked.middleCols(i * dim, dim) = code.space_.basis()[static_cast<size_t>(i)];
    }
    Eigen::JacobiSVD<Matrix> svd(stacked, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    const double cut = (sv.size() > 0 ? sv(0) : 0.0) * tol.rank_cutoff;
    Index rank = 0;
    while (rank < sv.size() && sv(rank) > cut) ++rank;
    Matrix u = svd.matrixU().leftCols(rank);
    code.support_ = u * u.adjoint();

    for (const Matrix& s : samples) {
        check_density(s, tol, "Code");
        if (code.space_.containment_residual(s) > 10.0 * tol.verify) {
            throw ContractError("Code: sample state lies outside the span",
                                code.space_.containment_residual(s));
        }
        const double off = frob(s - code.support_ * s * code.support_);
        if (off > 10.0 * tol.verify) {
            throw ContractError("Code: sample state leaks outside the joint support", off);
        }
    }
    code.samples_ = std::move(samples);
    return code;
}

Code Code::subspace_code(const Matrix& p0, const Tolerance& tol) {
    tol.validate();
    if (p0.rows() != p0.cols()) {
        throw DimensionError("subspace_code: projector must be square");
    }
    const double proj_res = std::max(frob(p0 - p0.adjoint()), frob(p0 * p0 - p0));
    if (proj_res > tol.verify) {
        throw ContractError("subspace_code: input is not an orthogonal projector", proj_res);
    }
    const Index d = p0.rows();

    HermEig eig = herm_eig(p0, tol);
    std::vector<Index> kept;
    for (Index i = 0; i < d; ++i) {
        if (eig.values(i) > 0.5) kept.push_back(i);
    }
    const auto r = static_cast<Index>(kept.size());
    if (r == 0) {
        throw ParameterError("subspace_code: projector has rank zero");
    }
    Matrix c(d, r);
    for (Index i = 0; i < r; ++i) c.col(i) = eig.vectors.col(kept[static_cast<size_t>(i)]);

    std::vector<Matrix> basis;
    for (Index i = 0; i < r; ++i) {
        for (Index j = 0; j < r; ++j) {
            basis.push_back(c.col(i) * c.col(j).adjoint());
        }
    }

    std::vector<Matrix> samples;
    for (Index i = 0; i < r; ++i) {
        samples.push_back(c.col(i) * c.col(i).adjoint());
    }
    samples.push_back(c * c.adjoint() / static_cast<double>(r));
    if (r >= 2) {
        Vector plus = (c.col(0) + c.col(1)) / std::sqrt(2.0);
        samples.push_back(plus * plus.adjoint());
    }
    return from_basis(d, basis, std::move(samples), tol);
}

Matrix Code::random_state(Rng& rng) const {
    std::exponential_distribution<double> expo(1.0);
    Matrix base = Matrix::Zero(dim(), dim());
    double total = 0.0;
    for (const Matrix& s : samples_) {
        const double w = expo(rng);
        base += w * s;
        total += w;
    }
    base /= total;

    if (herm_basis_.empty()) return base;
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix h = Matrix::Zero(dim(), dim());
    for (const Matrix& hb : herm_basis_) h += normal(rng) * hb;
    h /= std::max(frob(h), 1e-300);

    double eps = 0.5;
    for (int iter = 0; iter < 12; ++iter) {
        Matrix cand = base + eps * h;
        Eigen::SelfAdjointEigenSolver<Matrix> es((cand + cand.adjoint()) * 0.5);
        if (es.eigenvalues().minCoeff() >= -1e-12) {
            cand = (cand + cand.adjoint()) * 0.5;
            return cand / cand.trace().real();
        }
        eps *= 0.5;
    }
    return base;
}

// ------------------------------ distinguishing ------------------------------

double helstrom(const Matrix& rho, const Matrix& rho2, double q, const Tolerance& tol) {
    if (q < 0.0 || q > 1.0) {
        throw ParameterError("helstrom: prior must lie in [0, 1]");
    }
    check_density(rho, tol, "helstrom");
    check_density(rho2, tol, "helstrom");
    return 0.5 * (1.0 + trace_norm(q * rho - (1.0 - q) * rho2));
}

std::string to_string(VerifyMode mode) {
    switch (mode) {
        case VerifyMode::preserved: return "preserved";
        case VerifyMode::noiseless: return "noiseless";
        case VerifyMode::unitarily_noiseless: return "unitarily-noiseless";
        case VerifyMode::correctable: return "correctable";
    }
    return "?";
}

namespace {

using Applier = std::function<Matrix(const Matrix&)>;

// Worst deviation of ‖map(ρ−xρ′)‖₁ from ‖ρ−xρ′‖₁ over sampled pairs and a
// grid plus random draws of x.
VerificationReport preservation_probe(const Applier& map, const Code& code,
                                      const Tolerance& tol, int trials, Rng& rng,
                                      VerifyMode mode) {
    std::vector<Matrix> states = code.sample_states();
    for (int t = 0; t < trials; ++t) states.push_back(code.random_state(rng));

    std::vector<double> xs = {0.25, 0.5, 1.0, 2.0, 4.0};
    std::uniform_real_distribution<double> log_unif(-2.0, 2.0);
    for (int i = 0; i < 16; ++i) xs.push_back(std::pow(10.0, log_unif(rng)));

    VerificationReport rep;
    rep.mode = mode;
    for (size_t i = 0; i < states.size(); ++i) {
        for (size_t j = i + 1; j < states.size(); ++j) {
            ++rep.pairs_tested;
            for (double x : xs) {
                const Matrix diff = states[i] - x * states[j];
                const double before = trace_norm(diff);
                const double after = trace_norm(map(diff));
                rep.worst_pair_deviation =
                    std::max(rep.worst_pair_deviation, std::abs(after - before));
            }
        }
    }
    rep.pass = rep.worst_pair_deviation <= tol.verify;
    return rep;
}

Applier channel_applier(const Channel& e) {
    return [&e](const Matrix& x) { return e.apply(x); };
}

Applier superop_applier(Matrix s, Index d) {
    return [s = std::move(s), d](const Matrix& x) { return devec(s * vec(x), d, d); };
}

}  // namespace

VerificationReport is_preserved(const Channel& e, const Code& code, const Tolerance& tol,
                                int trials, std::uint64_t seed) {
    tol.validate();
    if (e.dim() != code.dim()) {
        throw DimensionError("is_preserved: channel and code dimensions differ");
    }
    Rng rng(seed);
    return preservation_probe(channel_applier(e), code, tol, trials, rng,
                              VerifyMode::preserved);
}

VerificationReport is_noiseless(const Channel& e, const Code& code, const FixedSpaces& fs,
                                const Tolerance& tol, int trials, std::uint64_t seed) {
    tol.validate();
    if (e.dim() != code.dim()) {
        throw DimensionError("is_noiseless: channel and code dimensions differ");
    }
    Rng rng(seed);

    VerificationReport under_e =
        preservation_probe(channel_applier(e), code, tol, trials, rng, VerifyMode::noiseless);
    VerificationReport under_proj = preservation_probe(
        superop_applier(fs.einf, e.dim()), code, tol, trials, rng, VerifyMode::noiseless);

    // Structural certificate: the fixed-point projector restricted to the
    // code span must be injective.
    const Matrix restricted = fs.einf * code.space().basis_matrix();
    Eigen::JacobiSVD<Matrix> svd(restricted);
    const auto& sv = svd.singularValues();
    const double cut = std::sqrt(tol.rank_cutoff) * std::max(sv.size() > 0 ? sv(0) : 0.0, 1.0);
    Index rank = 0;
    while (rank < sv.size() && sv(rank) > cut) ++rank;
    const bool injective = rank == code.space().dim();

    VerificationReport rep;
    rep.mode = VerifyMode::noiseless;
    rep.pairs_tested = under_e.pairs_tested + under_proj.pairs_tested;
    rep.worst_pair_deviation =
        std::max(under_e.worst_pair_deviation, under_proj.worst_pair_deviation);
    rep.pass = under_e.pass && under_proj.pass && injective;

    std::ostringstream note;
    note << "operational: deviation " << under_e.worst_pair_deviation << " under the channel, "
         << under_proj.worst_pair_deviation << " under the fixed-point projector";
    rep.diagnostics.push_back(note.str());
    std::ostringstream inj;
    inj << "structural: projector rank on span " << rank << "/" << code.space().dim()
        << (injective ? " (injective)" : " (NOT injective)");
    rep.diagnostics.push_back(inj.str());
    return rep;
}

VerificationReport is_unitarily_noiseless(const Channel& e, const Code& code,
                                          const RotatingSpace& rs, const Tolerance& tol,
                                          int trials, std::uint64_t seed) {
    tol.validate();
    if (e.dim() != code.dim()) {
        throw DimensionError("is_unitarily_noiseless: channel and code dimensions differ");
    }
    Rng rng(seed);

    double containment = 0.0;
    for (const Matrix& b : code.space().basis()) {
        containment = std::max(containment, rs.span.containment_residual(b));
    }
    const bool inside = containment <= tol.verify;

    VerificationReport rep;
    rep.mode = VerifyMode::unitarily_noiseless;
    const Matrix& s = e.superoperator();
    Matrix power = Matrix::Identity(s.rows(), s.cols());
    int applied = 0;
    for (int n : {1, 2, 3, 5, 8}) {
        while (applied < n) {
            power = s * power;
            ++applied;
        }
        VerificationReport probe = preservation_probe(
            superop_applier(power, e.dim()), code, tol, trials, rng,
            VerifyMode::unitarily_noiseless);
        rep.pairs_tested += probe.pairs_tested;
        rep.worst_pair_deviation = std::max(rep.worst_pair_deviation, probe.worst_pair_deviation);
    }
    rep.pass = inside && rep.worst_pair_deviation <= tol.verify;

    std::ostringstream note;
    note << "span containment residual in rotating space: " << containment
         << (inside ? " (inside)" : " (OUTSIDE)");
    rep.diagnostics.push_back(note.str());
    return rep;
}

// ---------------------------- transpose recovery -----------------------------

Channel transpose_channel(const Channel& e, const Matrix& p, const Tolerance& tol) {
    tol.validate();
    const Index d = e.dim();
    if (p.rows() != d || p.cols() != d) {
        throw DimensionError("transpose_channel: projector dimension mismatch");
    }
    const double proj_res = std::max(frob(p - p.adjoint()), frob(p * p - p));
    if (proj_res > tol.verify) {
        throw ContractError("transpose_channel: input is not an orthogonal projector", proj_res);
    }

    const Matrix ep = e.apply(p);
    if (frob(ep) <= tol.verify) {
        throw ParameterError("transpose_channel: the channel annihilates the code support");
    }
    const Matrix normalizer = psd_inv_sqrt(ep, tol);
    const Matrix q = support_projector(ep, tol);

    std::vector<Matrix> ops;
    ops.reserve(e.kraus().size() + 1);
    for (const Matrix& k : e.kraus()) {
        Matrix r = p * k.adjoint() * normalizer;
        if (frob(r) > 1e-14 * static_cast<double>(d)) {
            ops.push_back(std::move(r));
        }
    }
    // Σ R†R = support(𝓔(P)); one more Kraus operator on the orthocomplement
    // completes the map to trace-preserving on all of H.
    const Matrix completion = Matrix::Identity(d, d) - q;
    if (frob(completion) > 1e-14 * static_cast<double>(d)) {
        ops.push_back(completion);
    }
    return Channel::from_kraus(std::move(ops), tol);
}

CorrectabilityResult is_correctable(const Channel& e, const Code& code, const Tolerance& tol,
                                    int trials, std::uint64_t seed) {
    tol.validate();
    Channel recovery = transpose_channel(e, code.support(), tol);
    Channel corrected = compose(recovery, e, tol);
    FixedSpaces fs = fixed_spaces(corrected, tol);

    VerificationReport rep = is_noiseless(corrected, code, fs, tol, trials, seed);
    rep.mode = VerifyMode::correctable;
    std::ostringstream note;
    note << "transpose recovery uses " << recovery.kraus().size() << " Kraus operators";
    rep.diagnostics.push_back(note.str());
    return CorrectabilityResult{std::move(rep), std::move(recovery)};
}

// ------------------------------ full pipeline -------------------------------

std::string to_string(AnalysisMode mode) {
    return mode == AnalysisMode::noiseless ? "noiseless" : "unitarily-noiseless";
}

IpsReport analyze(const Channel& e, AnalysisMode mode, const Tolerance& tol,
                  std::uint64_t seed) {
    tol.validate();
    IpsReport rep;
    rep.mode = mode;
    rep.tol = tol;
    rep.seed = seed;

    const SpectralMode smode =
        mode == AnalysisMode::noiseless ? SpectralMode::fixed : SpectralMode::rotating;
    rep.spaces = fixed_spaces(e, tol, smode);
    rep.warnings = rep.spaces.warnings;
    rep.spectral_gap = rep.spaces.spectral_gap;

    // Both cluster multiplicities go in the report, whichever mode drives the
    // decomposition.
    if (smode == SpectralMode::fixed) {
        rep.fixed_dim = rep.spaces.sigma.dim();
        SchurCluster periph = schur_select(e.superoperator(), [&](Complex z) {
            return std::abs(1.0 - std::abs(z)) <= tol.eig_cluster;
        });
        rep.rotating_dim = periph.selected;
    } else {
        rep.rotating_dim = rep.spaces.sigma.dim();
        SchurCluster fixed = schur_select(e.superoperator(), [&](Complex z) {
            return std::abs(z - 1.0) <= tol.eig_cluster;
        });
        rep.fixed_dim = fixed.selected;
    }

    SupportInfo sup = joint_support(rep.spaces, e, tol);
    rep.structure = structure_from_fixed_spaces(rep.spaces, sup, e, tol, seed);
    rep.shape = rep.structure.shape;
    rep.support_rank = rep.structure.support_rank;
    rep.tau_states = rep.structure.tau_states;
    rep.echo = echo_map(rep.spaces, rep.structure, tol);

    ChannelReport cr = e.report(tol);
    rep.unital = cr.is_unital;
    rep.unital_residual = cr.unital_residual;
    rep.tp_residual = cr.tp_residual;
    rep.commutant_dim = commutant(e.kraus(), tol).dim();
    return rep;
}

}  // namespace ips
