#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ips/channel.hpp"
#include "test_helpers.hpp"

#include <cmath>

using namespace ips;
using namespace ips::testing;

TEST_CASE("from_kraus validates trace preservation") {
    CHECK_NOTHROW(Channel::from_kraus({Matrix::Identity(2, 2)}));
    CHECK_NOTHROW(Channel::from_kraus({basis_op(2, 0, 0), basis_op(2, 1, 1)}));
    CHECK_THROWS_AS(Channel::from_kraus({0.5 * Matrix::Identity(2, 2)}), ContractError);
    CHECK_THROWS_AS(Channel::from_kraus({}), ParameterError);
    CHECK_THROWS_AS(Channel::from_kraus({Matrix::Identity(2, 2), Matrix::Identity(3, 3)}),
                    DimensionError);
}

TEST_CASE("reference example channel is TP but not unital, with 12 Kraus operators") {
    Channel e = reference_example_channel();
    CHECK(e.dim() == 6);
    CHECK(e.kraus().size() == 12);
    ChannelReport rep = e.report();
    CHECK(rep.is_tp);
    CHECK(!rep.is_unital);         // Σ K K† ≠ I: the B factor resets to diag(1/4, 3/4)
    CHECK(rep.unital_residual > 1.0);
    CHECK(rep.is_cp);
    // Same operators as the hand-built list.
    auto expect = reference_example_kraus();
    REQUIRE(expect.size() == e.kraus().size());
    for (size_t i = 0; i < expect.size(); ++i) {
        CHECK(frob(e.kraus()[i] - expect[i]) <= 1e-14);
    }
}

TEST_CASE("superoperator of simple channels") {
    Channel id = identity_channel(2);
    CHECK(frob(id.superoperator() - Matrix::Identity(4, 4)) <= 1e-14);

    // Dephasing: conj(e00)⊗e00 + conj(e11)⊗e11 = diag(1,0,0,1) in vec order.
    Channel deph = Channel::from_kraus({basis_op(2, 0, 0), basis_op(2, 1, 1)});
    Matrix expect = Matrix::Zero(4, 4);
    expect(0, 0) = 1.0;
    expect(3, 3) = 1.0;
    CHECK(frob(deph.superoperator() - expect) <= 1e-14);
}

TEST_CASE("superoperator action matches Kraus application on random states") {
    Rng rng(2);
    Channel e = random_channel(3, 3, rng);
    const Matrix& s = e.superoperator();
    for (int t = 0; t < 100; ++t) {
        Matrix rho = random_density(3, rng);
        Matrix via_kraus = e.apply(rho);
        Matrix via_sop = devec(s * vec(rho), 3, 3);
        CHECK(frob(via_kraus - via_sop) <= 1e-12);
    }
}

TEST_CASE("choi matrices") {
    Channel id = identity_channel(2);
    Matrix j = id.choi();
    // vec(I)vec(I)†: rank one, trace 2.
    CHECK(std::abs(j.trace().real() - 2.0) <= 1e-12);
    Eigen::JacobiSVD<Matrix> svd(j);
    CHECK(svd.singularValues()(0) == doctest::Approx(2.0));
    CHECK(svd.singularValues()(1) <= 1e-12);

    Channel depol = Channel::from_kraus(depolarizing_kraus());
    CHECK(frob(depol.choi() - Matrix::Identity(4, 4) / 2.0) <= 1e-12);

    Rng rng(13);
    for (int t = 0; t < 5; ++t) {
        Channel e = random_channel(3, 2, rng);
        CHECK(e.report().min_choi_eigenvalue >= -1e-8);
    }
}

TEST_CASE("apply on the reference example matches its stated action") {
    Channel e = reference_example_channel();
    Matrix tau = tau_quarter();

    // |2><2| ⊗ τ maps to the even mixture of |0><0| and |1><1| on A, still ⊗ τ.
    Matrix in = kron(basis_op(3, 2, 2), tau);
    Matrix expect = kron(0.5 * (basis_op(3, 0, 0) + basis_op(3, 1, 1)), tau);
    CHECK(frob(e.apply(in) - expect) <= 1e-12);

    // σ_A ⊗ τ is fixed for any 2x2 σ_A on the {|0>,|1>} corner.
    Rng rng(3);
    Matrix sigma3 = Matrix::Zero(3, 3);
    sigma3.topLeftCorner(2, 2) = ginibre(2, 2, rng);
    Matrix fixed = kron(sigma3, tau);
    CHECK(frob(e.apply(fixed) - fixed) <= 1e-12);
}

TEST_CASE("adjoint map basics") {
    Rng rng(5);
    Matrix u = haar_unitary(3, rng);
    Channel uc = unitary_channel(u);
    Matrix x = ginibre(3, 3, rng);
    CHECK(frob(uc.apply_adjoint(x) - u.adjoint() * x * u) <= 1e-12);

    Channel e = random_channel(3, 3, rng);
    CHECK(frob(e.apply_adjoint(Matrix::Identity(3, 3)) - Matrix::Identity(3, 3)) <= 1e-10);

    // Reference example: (σ_A + tr(σ_A)/2 |2><2|) ⊗ I is fixed by the adjoint.
    Channel pe = reference_example_channel();
    Matrix sigma3 = Matrix::Zero(3, 3);
    sigma3.topLeftCorner(2, 2) = ginibre(2, 2, rng);
    Matrix obs = kron(sigma3 + 0.5 * sigma3.trace() * basis_op(3, 2, 2), Matrix::Identity(2, 2));
    CHECK(frob(pe.apply_adjoint(obs) - obs) <= 1e-12);
}

TEST_CASE("adjoint is the Hilbert-Schmidt adjoint") {
    Rng rng(7);
    Channel e = random_channel(4, 2, rng);
    for (int t = 0; t < 20; ++t) {
        Matrix x = ginibre(4, 4, rng), y = ginibre(4, 4, rng);
        Complex lhs = hs_inner(x, e.apply(y));
        Complex rhs = hs_inner(e.apply_adjoint(x), y);
        CHECK(std::abs(lhs - rhs) <= 1e-10);
    }
}

TEST_CASE("compose multiplies superoperators") {
    Rng rng(11);
    Channel e = random_channel(3, 2, rng);
    Channel id = identity_channel(3);

    CHECK(frob(compose(id, e).superoperator() - e.superoperator()) <= 1e-12);
    CHECK(frob(compose(e, id).superoperator() - e.superoperator()) <= 1e-12);

    Channel r = random_channel(3, 3, rng);
    CHECK(frob(compose(r, e).superoperator() - r.superoperator() * e.superoperator()) <= 1e-11);

    CHECK_THROWS_AS(compose(e, identity_channel(2)), DimensionError);
}

TEST_CASE("power_mean explicit cases and halving consistency") {
    Channel id = identity_channel(2);
    CHECK(frob(power_mean(id, 0) - Matrix::Identity(4, 4)) <= 1e-14);
    CHECK(frob(power_mean(id, 57) - Matrix::Identity(4, 4)) <= 1e-12);

    // Dephasing already equals its limit at N=1: the decaying eigenvalues are 0.
    Channel deph = Channel::from_kraus({basis_op(2, 0, 0), basis_op(2, 1, 1)});
    Matrix limit = Matrix::Zero(4, 4);
    limit(0, 0) = 1.0;
    limit(3, 3) = 1.0;
    CHECK(frob(power_mean(deph, 1) - 0.5 * (Matrix::Identity(4, 4) + limit)) <= 1e-14);
    CHECK(frob(power_mean(deph, 1000) - limit) <= 2.0 / 1001.0);

    // Halving recursion against the naive sum.
    Rng rng(13);
    Channel e = random_channel(2, 2, rng);
    const Matrix& s = e.superoperator();
    for (long n : {1L, 2L, 7L, 8L, 13L}) {
        Matrix naive = Matrix::Identity(4, 4);
        Matrix pow = Matrix::Identity(4, 4);
        for (long j = 1; j <= n; ++j) {
            pow = s * pow;
            naive += pow;
        }
        naive /= static_cast<double>(n + 1);
        CHECK(frob(power_mean(e, n) - naive) <= 1e-12);
    }

    CHECK_THROWS_AS(power_mean(e, -1), ParameterError);
}

TEST_CASE("channels preserve trace on random inputs") {
    Rng rng(17);
    for (Channel e : {random_channel(3, 3, rng), random_unital_channel(3, 3, rng),
                      reference_example_channel()}) {
        for (int t = 0; t < 10; ++t) {
            Matrix rho = random_density(e.dim(), rng);
            CHECK(std::abs(e.apply(rho).trace().real() - 1.0) <= 1e-10);
        }
    }
}

TEST_CASE("random_unital_channel is unital") {
    Rng rng(19);
    Channel e = random_unital_channel(4, 3, rng);
    CHECK(e.report().is_unital);
}

TEST_CASE("make_planted ground truth and determinism") {
    auto planted = make_planted({{2, 2}, {1, 1}}, 1, 99);
    CHECK(planted.channel.dim() == 6);
    CHECK(planted.channel.report().is_tp);
    CHECK(planted.truth.shape == std::vector<std::pair<Index, Index>>{{2, 2}, {1, 1}});
    CHECK(planted.truth.spectral_gap >= 0.05);

    // Unit-eigenvalue multiplicity equals Σ d_k².
    SchurCluster sc = schur_select(planted.channel.superoperator(),
                                   [](Complex z) { return std::abs(z - 1.0) <= 1e-9; });
    CHECK(sc.selected == 5);

    // Isometries map onto the support and the planted states are fixed.
    for (size_t k = 0; k < planted.truth.shape.size(); ++k) {
        const Matrix& v = planted.truth.block_isometries[k];
        const auto [dk, nk] = planted.truth.shape[k];
        CHECK(frob(v.adjoint() * v - Matrix::Identity(dk * nk, dk * nk)) <= 1e-12);
        Matrix state = v * kron(Matrix::Identity(dk, dk) / static_cast<double>(dk),
                                planted.truth.tau_states[k]) * v.adjoint();
        CHECK(frob(planted.channel.apply(state) - state) <= 1e-12);
    }

    auto again = make_planted({{2, 2}, {1, 1}}, 1, 99);
    REQUIRE(again.channel.kraus().size() == planted.channel.kraus().size());
    for (size_t i = 0; i < again.channel.kraus().size(); ++i) {
        CHECK(frob(again.channel.kraus()[i] - planted.channel.kraus()[i]) == 0.0);
    }

    CHECK_THROWS_AS(make_planted({{6, 6}}, 0, 1), ParameterError);   // exceeds the cap
    CHECK_THROWS_AS(make_planted({{0, 1}}, 0, 1), ParameterError);
    CHECK_THROWS_AS(make_planted({}, 0, 1), ParameterError);
}

TEST_CASE("lazy representations are shared across copies") {
    Channel e = reference_example_channel();
    Channel copy = e;
    const Matrix* first = &copy.superoperator();
    const Matrix* second = &e.superoperator();
    CHECK(first == second);
}
