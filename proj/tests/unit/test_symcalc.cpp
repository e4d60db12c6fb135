#include <cmath>
#include <random>

#include "doctest.h"
#include "lightcone/errors.hpp"
#include "lightcone/symcalc.hpp"

using namespace lightcone;
using namespace lightcone::symcalc;
using boundary::make_grid;

namespace {

GridPtr grid() { return make_grid({3, 16, -6.0, 6.0, 2}); }

CMat random_herm(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    CMat a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = cplx(nd(rng), nd(rng));
    return 0.5 * (a + a.adjoint());
}

BoundaryOperator random_block_op(const GridPtr& g, std::uint64_t seed) {
    std::vector<int> act;
    for (int i = 3; i < g->n_modes(); i += 11) act.push_back(i);
    CVec diag = CVec::Zero(g->n_modes());
    for (int i = 0; i < g->n_modes(); ++i) diag[i] = 1.0 + 0.01 * i;
    return BoundaryOperator::from_block(g, act, random_herm(static_cast<int>(act.size()), seed), diag);
}

}  // namespace

TEST_CASE("block operators agree with their dense form") {
    const auto g = grid();
    const auto a = random_block_op(g, 1), b = random_block_op(g, 2);
    const CMat A = a.dense(), B = b.dense();
    CHECK(((a * b).dense() - A * B).norm() < 1e-10 * A.norm() * B.norm());
    CHECK(((a + b).dense() - (A + B)).norm() < 1e-12 * A.norm());
    CHECK(((a - b).dense() - (A - B)).norm() < 1e-12 * A.norm());
    CHECK((a.adjoint().dense() - A.adjoint()).norm() < 1e-14 * A.norm());
    CVec x = CVec::Random(g->n_modes());
    CHECK((a.apply(x) - A * x).norm() < 1e-12 * A.norm() * x.norm());
    CHECK(a.hermitian());
    CHECK(a.norm() == doctest::Approx(spectral_norm(A)).epsilon(1e-10));
}

TEST_CASE("functional calculus squares back") {
    const auto g = grid();
    auto a = random_block_op(g, 3);
    a = a * a;  // positive
    const auto r = operator_function(a, [](double x) { return std::sqrt(std::max(x, 0.0)); });
    CHECK(((r * r).dense() - a.dense()).norm() < 1e-9 * a.norm());
    const auto sp = eigh(a);
    CHECK(sp.min() >= -1e-10);
}

TEST_CASE("eigenvalues include the diagonal outside the block") {
    const auto g = grid();
    const auto a = random_block_op(g, 4);
    Eigen::SelfAdjointEigenSolver<CMat> es(a.dense());
    const auto sp = eigh(a, false);
    CHECK(sp.min() == doctest::Approx(es.eigenvalues().minCoeff()).epsilon(1e-10));
    CHECK(sp.max() == doctest::Approx(es.eigenvalues().maxCoeff()).epsilon(1e-10));
}

TEST_CASE("non-hermitian input to the functional calculus is refused") {
    const auto g = grid();
    CMat m = CMat::Zero(2, 2);
    m(0, 1) = 1.0;
    const auto a = BoundaryOperator::from_block(g, {1, 2}, m, CVec::Zero(g->n_modes()));
    CHECK_THROWS_AS(operator_function(a, [](double x) { return x; }), NonHermitian);
}

TEST_CASE("Toeplitz blocks reassemble the operator on the admissible modes") {
    const auto g = grid();
    const auto a = random_block_op(g, 5);
    const auto b = toeplitz_blocks(a);
    const auto back = b.reassemble(g);
    const auto adm = g->admissible_modes();
    CHECK((back.dense(adm) - a.dense(adm)).norm() < 1e-12 * a.norm());
    const Vec sg = g->mode_sigma();
    for (int i : b.plus) CHECK(sg[i] > 0.0);
    for (int i : b.minus) CHECK(sg[i] < 0.0);
}

TEST_CASE("smoothing indicator separates finite rank from a multiplier") {
    const auto g = make_grid({3, 64, -10.0, 10.0, 3});
    // A rank-one block on the lowest positive column decays under every weight.
    std::vector<int> act{g->mode(1, 0)};
    const auto low = BoundaryOperator::from_block(g, act, CMat::Ones(1, 1), CVec::Zero(g->n_modes()));
    CHECK(smoothing_indicator(low).pass);
    // The identity has no decay at all.
    CHECK_FALSE(smoothing_indicator(BoundaryOperator::identity(g)).pass);
}

TEST_CASE("shift operator is unitary and conjugation preserves spectra") {
    const auto g = grid();
    Vec b = Vec::Zero(g->n_ang_modes());
    b[1] = 0.3;
    b[0] = 0.1;
    const auto U = shift_operator(g, b);
    const CMat u = U.dense();
    CHECK((u.adjoint() * u - CMat::Identity(u.rows(), u.cols())).norm() < 1e-10);
    const auto a = random_block_op(g, 6);
    const auto c = conjugate_by_shift(a, b);
    CHECK(eigh(c, false).min() == doctest::Approx(eigh(a, false).min()).epsilon(1e-9));
    CHECK(eigh(c, false).max() == doctest::Approx(eigh(a, false).max()).epsilon(1e-9));
}
