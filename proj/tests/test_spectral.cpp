#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ips/algebra.hpp"
#include "ips/spectral.hpp"
#include "test_helpers.hpp"

#include <cmath>

using namespace ips;
using namespace ips::testing;

namespace {

Channel dephasing_qubit() {
    return Channel::from_kraus({basis_op(2, 0, 0), basis_op(2, 1, 1)});
}

// Explicit span of the reference example's fixed states: σ_A ⊗ τ for σ_A on
// the {|0>,|1>} corner of the qutrit.
OperatorSubspace reference_fixed_span() {
    std::vector<Matrix> span;
    for (Index a = 0; a < 2; ++a) {
        for (Index b = 0; b < 2; ++b) {
            span.push_back(kron(basis_op(3, a, b), tau_quarter()));
        }
    }
    return orthonormalize(span);
}

OperatorSubspace reference_dual_span() {
    std::vector<Matrix> span;
    for (Index a = 0; a < 2; ++a) {
        for (Index b = 0; b < 2; ++b) {
            Matrix s = basis_op(3, a, b);
            span.push_back(kron(s + 0.5 * s.trace() * basis_op(3, 2, 2), Matrix::Identity(2, 2)));
        }
    }
    return orthonormalize(span);
}

}  // namespace

TEST_CASE("fixed_spaces of the identity channel spans everything") {
    FixedSpaces fs = fixed_spaces(identity_channel(2));
    CHECK(fs.sigma.dim() == 4);
    CHECK(fs.b_space.dim() == 4);
    CHECK(frob(fs.einf - Matrix::Identity(4, 4)) <= 1e-12);
    CHECK(fs.spectral_gap == doctest::Approx(1.0));
}

TEST_CASE("fixed_spaces of dephasing finds the pointer projectors") {
    FixedSpaces fs = fixed_spaces(dephasing_qubit());
    CHECK(fs.sigma.dim() == 2);
    OperatorSubspace expect = orthonormalize({basis_op(2, 0, 0), basis_op(2, 1, 1)});
    CHECK(max_principal_angle_sin(fs.sigma, expect) <= 1e-10);
    CHECK(max_principal_angle_sin(fs.b_space, expect) <= 1e-10);
}

TEST_CASE("fixed_spaces of the reference example") {
    Channel e = reference_example_channel();
    FixedSpaces fs = fixed_spaces(e);
    CHECK(fs.sigma.dim() == 4);
    CHECK(fs.b_space.dim() == 4);
    CHECK(max_principal_angle_sin(fs.sigma, reference_fixed_span()) <= 1e-9);
    CHECK(max_principal_angle_sin(fs.b_space, reference_dual_span()) <= 1e-9);

    // Invariants: every basis element is fixed by the corresponding picture.
    for (const Matrix& x : fs.sigma.basis()) {
        CHECK(frob(e.apply(x) - x) <= 1e-8);
    }
    for (const Matrix& y : fs.b_space.basis()) {
        CHECK(frob(e.apply_adjoint(y) - y) <= 1e-8);
    }
    const Matrix& s = e.superoperator();
    CHECK(frob(fs.einf * fs.einf - fs.einf) <= 1e-8);
    CHECK(frob(s * fs.einf - fs.einf) <= 1e-8);
    CHECK(frob(fs.einf * s - fs.einf) <= 1e-8);
}

TEST_CASE("the reference example separates all three subspaces") {
    Channel e = reference_example_channel();
    FixedSpaces fs = fixed_spaces(e);
    OperatorSubspace comm = commutant(e.kraus());
    CHECK(comm.dim() == 1);
    CHECK(max_principal_angle_sin(fs.sigma, fs.b_space) > 1e-7);
    CHECK(max_principal_angle_sin(fs.sigma, comm) > 1e-7);
    CHECK(max_principal_angle_sin(fs.b_space, comm) > 1e-7);
}

TEST_CASE("unital channels: fixed spaces coincide in both pictures") {
    Rng rng(101);
    for (int t = 0; t < 10; ++t) {
        Channel e = random_unital_channel(2 + (t % 4), 2 + (t % 3), rng);
        FixedSpaces fs = fixed_spaces(e);
        CHECK(max_principal_angle_sin(fs.sigma, fs.b_space) <= 1e-8);
        OperatorSubspace comm = commutant(e.kraus());
        CHECK(fs.sigma.dim() == comm.dim());
        CHECK(max_principal_angle_sin(fs.sigma, comm) <= 1e-7);
    }
}

TEST_CASE("einf image lands in the fixed span") {
    Rng rng(103);
    Channel e = reference_example_channel();
    FixedSpaces fs = fixed_spaces(e);
    for (int t = 0; t < 200; ++t) {
        Matrix x = ginibre(6, 6, rng);
        Matrix img = devec(fs.einf * vec(x), 6, 6);
        CHECK(fs.sigma.containment_residual(img) <= 1e-8);
    }
}

TEST_CASE("Cesàro oracle converges to the spectral projector") {
    Channel id = identity_channel(3);
    FixedSpaces fs_id = fixed_spaces(id);
    CHECK(frob(einf_cesaro_oracle(id, 5) - fs_id.einf) <= 1e-12);

    // Dephasing: S^n = S for n ≥ 1, so the mean is (I + N·S)/(N+1) and the
    // distance to the projector decays exactly like ‖I − S‖/(N+1).
    Channel deph = dephasing_qubit();
    FixedSpaces fs_deph = fixed_spaces(deph);
    const Matrix& s_deph = deph.superoperator();
    CHECK(frob(einf_cesaro_oracle(deph, 1) - 0.5 * (Matrix::Identity(4, 4) + s_deph)) <= 1e-14);
    CHECK(frob(einf_cesaro_oracle(deph, 1000) - fs_deph.einf) ==
          doctest::Approx(frob(Matrix::Identity(4, 4) - s_deph) / 1001.0).epsilon(1e-10));

    Channel e = reference_example_channel();
    FixedSpaces fs = fixed_spaces(e);
    const double d2 = frob(einf_cesaro_oracle(e, 100) - fs.einf);
    const double d3 = frob(einf_cesaro_oracle(e, 1000) - fs.einf);
    const double d4 = frob(einf_cesaro_oracle(e, 10000) - fs.einf);
    CHECK(d4 <= 1e-3);
    CHECK(d3 <= d2);
    CHECK(d4 <= d3);

    CHECK_THROWS_AS(einf_cesaro_oracle(e, 0), ParameterError);
}

TEST_CASE("rotating space of a unitary conjugation is everything") {
    Matrix u = Matrix::Identity(2, 2);
    u(1, 1) = std::polar(1.0, 1.0);
    RotatingSpace rs = rotating_space(unitary_channel(u));
    CHECK(rs.span.dim() == 4);
    REQUIRE(rs.eigenphases.size() == 4);

    // Phases are {1, 1, e^{i}, e^{-i}} as a multiset.
    int at_one = 0, at_plus = 0, at_minus = 0;
    for (Complex phase : rs.eigenphases) {
        if (std::abs(phase - 1.0) <= 1e-9) ++at_one;
        if (std::abs(phase - std::polar(1.0, 1.0)) <= 1e-9) ++at_plus;
        if (std::abs(phase - std::polar(1.0, -1.0)) <= 1e-9) ++at_minus;
    }
    CHECK(at_one == 2);
    CHECK(at_plus == 1);
    CHECK(at_minus == 1);
}

TEST_CASE("rotating space equals fixed space for gapped channels") {
    Channel deph = dephasing_qubit();
    RotatingSpace rs = rotating_space(deph);
    FixedSpaces fs = fixed_spaces(deph);
    CHECK(rs.span.dim() == 2);
    CHECK(max_principal_angle_sin(rs.span, fs.sigma) <= 1e-10);

    Channel e = reference_example_channel();
    RotatingSpace rse = rotating_space(e);
    FixedSpaces fse = fixed_spaces(e);
    CHECK(rse.span.dim() == 4);
    CHECK(max_principal_angle_sin(rse.span, fse.sigma) <= 1e-9);
}

TEST_CASE("rotating eigenoperators satisfy the eigenvalue relation") {
    Rng rng(107);
    Matrix u = haar_unitary(3, rng);
    Channel e = unitary_channel(u);
    RotatingSpace rs = rotating_space(e);
    REQUIRE(rs.eigenoperators.size() == 9);
    for (size_t i = 0; i < rs.eigenoperators.size(); ++i) {
        const Matrix& x = rs.eigenoperators[i];
        CHECK(frob(e.apply(x) - rs.eigenphases[i] * x) <= 1e-8);
    }
}

TEST_CASE("joint_support of simple channels") {
    Channel id = identity_channel(3);
    FixedSpaces fs = fixed_spaces(id);
    SupportInfo sup = joint_support(fs, id);
    CHECK(sup.rank == 3);
    CHECK(frob(sup.projector - Matrix::Identity(3, 3)) <= 1e-10);
}

TEST_CASE("joint_support of the reference example is the 4-dim corner") {
    Channel e = reference_example_channel();
    FixedSpaces fs = fixed_spaces(e);
    SupportInfo sup = joint_support(fs, e);
    CHECK(sup.rank == 4);
    Matrix expect = kron(basis_op(3, 0, 0) + basis_op(3, 1, 1), Matrix::Identity(2, 2));
    CHECK(frob(sup.projector - expect) <= 1e-9);

    // The max-rank state is a fixed state with that support.
    CHECK(std::abs(sup.max_rank_fixed_state.trace().real() - 1.0) <= 1e-10);
    CHECK(frob(e.apply(sup.max_rank_fixed_state) - sup.max_rank_fixed_state) <= 1e-9);
    CHECK(frob(support_projector(sup.max_rank_fixed_state) - expect) <= 1e-9);

    // Union-of-supports fallback agrees.
    SupportInfo viaUnion = joint_support(fs, e, Tolerance{}, /*use_basis_union=*/true);
    CHECK(viaUnion.rank == 4);
    CHECK(frob(viaUnion.projector - sup.projector) <= 1e-9);
}

TEST_CASE("joint_support matches planted ground truth") {
    auto planted = make_planted({{2, 2}}, 2, 31);
    FixedSpaces fs = fixed_spaces(planted.channel);
    SupportInfo sup = joint_support(fs, planted.channel);
    CHECK(sup.rank == 4);
    CHECK(frob(sup.projector - planted.truth.support) <= 1e-9);
}

TEST_CASE("random fixed states are supported inside P") {
    Rng rng(109);
    auto planted = make_planted({{2, 1}, {1, 2}}, 1, 41);
    Channel e = planted.channel;
    FixedSpaces fs = fixed_spaces(e);
    SupportInfo sup = joint_support(fs, e);
    const Index d = e.dim();
    Matrix complement = Matrix::Identity(d, d) - sup.projector;
    for (int t = 0; t < 50; ++t) {
        Matrix seed_state = random_density(d, rng);
        Matrix fixed = devec(fs.einf * vec(seed_state), d, d);
        fixed = (fixed + fixed.adjoint()) * 0.5;  // fixed states of a TP map are Hermitian
        CHECK(frob(complement * fixed * complement) <= 1e-9);
    }
}

TEST_CASE("near-peripheral eigenvalues surface a warning, not an error") {
    // e^{iθ} with θ = 5e-9 sits inside the (eig_cluster, 10·eig_cluster]
    // annulus around 1.
    Matrix u = Matrix::Identity(2, 2);
    u(1, 1) = std::polar(1.0, 5e-9);
    FixedSpaces fs = fixed_spaces(unitary_channel(u));
    CHECK(fs.sigma.dim() == 2);
    CHECK(fs.warnings.size() == 2);
}

