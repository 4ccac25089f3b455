#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ips/algebra.hpp"
#include "test_helpers.hpp"

#include <cmath>

using namespace ips;
using namespace ips::testing;

namespace {

struct Pipeline {
    Channel channel;
    FixedSpaces fs;
    SupportInfo sup;
    AlgebraStructure st;
};

Pipeline run_pipeline(Channel e, std::uint64_t seed = 17) {
    Tolerance tol;
    FixedSpaces fs = fixed_spaces(e, tol);
    SupportInfo sup = joint_support(fs, e, tol);
    AlgebraStructure st = structure_from_fixed_spaces(fs, sup, e, tol, seed);
    return Pipeline{std::move(e), std::move(fs), std::move(sup), std::move(st)};
}

}  // namespace

TEST_CASE("commutant of simple sets") {
    CHECK(commutant({Matrix::Identity(3, 3)}).dim() == 9);
    OperatorSubspace z = commutant({Matrix(pauli_z())});
    CHECK(z.dim() == 2);
    for (const Matrix& x : z.basis()) {
        CHECK(std::abs(x(0, 1)) <= 1e-10);
        CHECK(std::abs(x(1, 0)) <= 1e-10);
    }
    CHECK(commutant(reference_example_channel().kraus()).dim() == 1);
}

TEST_CASE("structure of the identity channel on a qutrit") {
    Pipeline p = run_pipeline(identity_channel(3));
    REQUIRE(p.st.shape.size() == 1);
    CHECK(p.st.shape[0] == std::pair<Index, Index>{3, 1});
    CHECK(p.st.support_rank == 3);
    CHECK(p.st.tau_states[0].rows() == 1);
    CHECK(std::abs(p.st.tau_states[0](0, 0).real() - 1.0) <= 1e-10);
}

TEST_CASE("structure of qubit dephasing is the pointer basis") {
    Pipeline p = run_pipeline(Channel::from_kraus({basis_op(2, 0, 0), basis_op(2, 1, 1)}));
    REQUIRE(p.st.shape.size() == 2);
    CHECK(p.st.shape[0] == std::pair<Index, Index>{1, 1});
    CHECK(p.st.shape[1] == std::pair<Index, Index>{1, 1});
    CHECK(p.st.center_dim == 2);
}

TEST_CASE("structure of the reference example") {
    Pipeline p = run_pipeline(reference_example_channel());
    REQUIRE(p.st.shape.size() == 1);
    CHECK(p.st.shape[0] == std::pair<Index, Index>{2, 2});
    CHECK(p.st.support_rank == 4);
    CHECK(p.st.center_dim == 1);

    HermEig te = herm_eig(p.st.tau_states[0]);
    CHECK(te.values(0) == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(te.values(1) == doctest::Approx(0.75).epsilon(1e-9));

    // Block isometry maps onto the support.
    const Matrix& v = p.st.block_isometries[0];
    CHECK(frob(v.adjoint() * v - Matrix::Identity(4, 4)) <= 1e-10);
    CHECK(frob(v * v.adjoint() - p.st.support) <= 1e-9);
}

TEST_CASE("algebra closure holds for the compressed dual space") {
    Pipeline p = run_pipeline(reference_example_channel());
    const auto& alg = p.st.algebra;
    for (const Matrix& a : alg.basis()) {
        CHECK(alg.containment_residual(a.adjoint()) <= 1e-8);
        for (const Matrix& b : alg.basis()) {
            CHECK(alg.containment_residual(a * b) <= 1e-8);
        }
    }
    CHECK(alg.dim() == p.fs.b_space.dim());
}

TEST_CASE("fixed_state_form reproduces states") {
    // Identity channel: the assembled state is just the input.
    Pipeline id = run_pipeline(identity_channel(2));
    Rng rng(3);
    Matrix rho = random_density(2, rng);
    // The recovered d-factor basis can be any unitary rotation of the
    // computational one, so compare through the isometry.
    const Matrix& v = id.st.block_isometries[0];
    Matrix m = v.adjoint() * rho * v;
    CHECK(frob(fixed_state_form(id.st, {m}) - rho) <= 1e-10);

    // Reference example with the maximally mixed logical block.
    Pipeline pe = run_pipeline(reference_example_channel());
    Matrix assembled = fixed_state_form(pe.st, {Matrix::Identity(2, 2) / 2.0});
    Matrix expect = kron(basis_op(3, 0, 0) + basis_op(3, 1, 1), tau_quarter()) / 2.0;
    CHECK(frob(assembled - expect) <= 1e-9);

    // Planted channel: assembled states are fixed.
    auto planted = make_planted({{2, 2}}, 2, 7);
    Pipeline pl = run_pipeline(planted.channel);
    for (int t = 0; t < 5; ++t) {
        Matrix g = ginibre(2, 2, rng);
        Matrix psd = g * g.adjoint();
        psd /= psd.trace().real();
        Matrix state = fixed_state_form(pl.st, {psd});
        CHECK(frob(pl.channel.apply(state) - state) <= 1e-9);
    }

    CHECK_THROWS_AS(fixed_state_form(pe.st, {Matrix::Identity(3, 3)}), DimensionError);
}

TEST_CASE("every fixed-space element decomposes through the structure") {
    for (Channel e : {reference_example_channel(), make_planted({{2, 1}, {1, 2}}, 1, 13).channel}) {
        Pipeline p = run_pipeline(std::move(e));
        for (const Matrix& x : p.fs.sigma.basis()) {
            auto blocks = block_coefficients(p.st, x);
            CHECK(frob(fixed_state_form(p.st, blocks) - x) <= 1e-8);
        }
    }
}

TEST_CASE("echo map is absent for unital channels") {
    Rng rng(5);
    Pipeline p = run_pipeline(random_unital_channel(3, 2, rng));
    EchoMap echo = echo_map(p.fs, p.st);
    CHECK(echo.empty());
    CHECK(echo.codomain_side == 0);

    auto planted = make_planted({{2, 2}}, 0, 19);
    Pipeline pl = run_pipeline(planted.channel);
    CHECK(echo_map(pl.fs, pl.st).empty());
}

TEST_CASE("echo map reproduces the reference example's dual observables") {
    Pipeline p = run_pipeline(reference_example_channel());
    EchoMap echo = echo_map(p.fs, p.st);
    CHECK(echo.domain_side == 4);
    CHECK(echo.codomain_side == 2);

    // Every dual fixed observable equals its compression extended by the echo.
    const Matrix& c = echo.range_isometry;
    for (const Matrix& y : p.fs.b_space.basis()) {
        Matrix a = c.adjoint() * y * c;
        CHECK(frob(echo.extend(a) - y) <= 1e-8);
    }

    // And the echo of the compressed algebra spans exactly the stated form:
    // extend(A) against (σ + tr(σ)/2 |2><2|) ⊗ I.
    std::vector<Matrix> expected;
    for (Index a = 0; a < 2; ++a) {
        for (Index b = 0; b < 2; ++b) {
            Matrix s = basis_op(3, a, b);
            expected.push_back(
                kron(s + 0.5 * s.trace() * basis_op(3, 2, 2), Matrix::Identity(2, 2)));
        }
    }
    std::vector<Matrix> reconstructed;
    for (const Matrix& a : p.st.algebra.basis()) reconstructed.push_back(echo.extend(a));
    CHECK(max_principal_angle_sin(orthonormalize(reconstructed), orthonormalize(expected)) <=
          1e-8);
}

TEST_CASE("planted shapes are recovered exactly over 50 seeded instances") {
    const std::vector<std::vector<std::pair<Index, Index>>> shapes = {
        {{2, 1}}, {{1, 1}, {1, 1}}, {{2, 2}}, {{3, 1}, {1, 2}}};
    for (int instance = 0; instance < 50; ++instance) {
        const auto& shape = shapes[static_cast<size_t>(instance) % shapes.size()];
        const Index leak = (instance / 4) % 3;
        auto planted = make_planted(shape, leak, 1000 + instance);
        Pipeline p = run_pipeline(planted.channel, 17 + instance);
        CHECK(p.st.shape == planted.truth.shape);
        CHECK(frob(p.st.support - planted.truth.support) <= 1e-8);

        // Cofactor spectra match block by block (the recovered basis may
        // differ by a within-block unitary).
        for (size_t k = 0; k < p.st.tau_states.size(); ++k) {
            RealVector got = herm_eig(p.st.tau_states[k]).values;
            RealVector want = herm_eig(planted.truth.tau_states[k]).values;
            CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-8);
        }
    }
}

TEST_CASE("unital channels recover maximally mixed cofactors") {
    Rng rng(23);
    for (int t = 0; t < 8; ++t) {
        Channel e = random_unital_channel(2 + (t % 4), 2 + (t % 3), rng);
        Pipeline p = run_pipeline(e, 29 + t);
        for (size_t k = 0; k < p.st.shape.size(); ++k) {
            const auto [dk, nk] = p.st.shape[k];
            CHECK(frob(p.st.tau_states[k] -
                       Matrix::Identity(nk, nk) / static_cast<double>(nk)) <= 1e-7);
        }
        // The fixed space embeds the algebra directly.
        std::vector<Matrix> embedded;
        const Matrix& c = p.st.range_isometry;
        for (const Matrix& a : p.st.algebra.basis()) embedded.push_back(c * a * c.adjoint());
        CHECK(max_principal_angle_sin(p.fs.sigma, orthonormalize(embedded)) <= 1e-7);
    }
}

TEST_CASE("qubit fixed-space dimensions avoid three") {
    Rng rng(31);
    for (int t = 0; t < 100; ++t) {
        Channel e = random_channel(2, 1 + (t % 4), rng);
        FixedSpaces fs = fixed_spaces(e);
        const Index dim = fs.sigma.dim();
        CHECK((dim == 1 || dim == 2 || dim == 4));
    }
}

TEST_CASE("mismatched support data trips a structural error") {
    // Compress the reference example's dual space with the full identity as
    // support: the compressed span is not closed under products.
    Channel e = reference_example_channel();
    FixedSpaces fs = fixed_spaces(e);
    SupportInfo wrong;
    wrong.projector = Matrix::Identity(6, 6);
    wrong.rank = 6;
    wrong.max_rank_fixed_state = Matrix::Identity(6, 6) / 6.0;
    CHECK_THROWS_AS(structure_from_fixed_spaces(fs, wrong, e), StructuralError);
}
