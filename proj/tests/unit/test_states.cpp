#include <cmath>

#include "doctest.h"
#include "lightcone/errors.hpp"
#include "lightcone/states.hpp"

using namespace lightcone;
using namespace lightcone::states;
using boundary::make_grid;

namespace {

GridPtr grid() { return make_grid({3, 16, -12.0, 12.0, 2}); }

GeneratorSpec spec() {
    GeneratorSpec s;
    s.rank = 3;
    return s;
}

// Purity by brute force: P = S(2C - S) must square to one on the full admissible space.
double involution_dense(const CovariancePair& p) {
    const auto g = p.lambda_plus.grid();
    const auto adm = g->admissible_modes();
    const CMat C = c_plus_of(p).dense(adm);
    const Vec sg = g->mode_sigma();
    CMat S = CMat::Zero(adm.size(), adm.size());
    for (std::size_t i = 0; i < adm.size(); ++i) S(i, i) = sg[adm[i]] > 0 ? 1.0 : -1.0;
    const CMat P = S * (2.0 * C - S);
    return (P * P - CMat::Identity(adm.size(), adm.size())).norm();
}

}  // namespace

TEST_CASE("Moretti pair satisfies every state check") {
    const auto p = moretti(grid());
    const auto r = verify_all(p);
    CHECK(r.ccr <= 1e-12);
    CHECK(r.positivity.pass);
    CHECK(r.musc.pass);
    CHECK(r.purity.pass);
    CHECK(involution_dense(p) < 1e-10);
}

TEST_CASE("pure and gauge families behave as expected") {
    const auto g = grid();
    int mixed = 0;
    for (int i = 0; i < 5; ++i) {
        const auto pure = build_pure_covariances(random_purity(g, 100 + i, spec()));
        const auto rp = verify_all(pure);
        CHECK(rp.ccr <= 1e-12);
        CHECK(rp.positivity.pass);
        CHECK(rp.musc.pass);
        CHECK(rp.purity.pass);
        CHECK(involution_dense(pure) < 1e-8);

        const auto gauge = build_gauge_covariances(random_gauge(g, 200 + i, spec(), 0.5));
        const auto rg = verify_all(gauge);
        CHECK(rg.ccr <= 1e-12);
        CHECK(rg.positivity.pass);
        CHECK(rg.musc.pass);
        // Dense route and block route agree on the verdict.
        CHECK((involution_dense(gauge) < 1e-8) == rg.purity.pass);
        mixed += rg.purity.pass ? 0 : 1;
    }
    CHECK(mixed >= 4);
}

TEST_CASE("norm precondition on d") {
    const auto g = grid();
    const auto gen = random_gauge(g, 7, spec(), 1.2);
    CHECK_THROWS_AS(build_gauge_covariances(gen), NormViolation);
    const auto p = build_gauge_covariances(gen, true);
    CHECK_FALSE(verify_positivity(p).pass);
}

TEST_CASE("identity c+ violates the smoothing condition") {
    const auto g = grid();
    const auto p = pair_from_c_plus(symcalc::BoundaryOperator::identity(g), "custom");
    CHECK(verify_ccr(p) <= 1e-12);
    CHECK_FALSE(verify_musc(p).pass);
}

TEST_CASE("Bogoliubov transforms invert and conjugate") {
    const auto gen = random_purity(grid(), 9, spec());
    const auto b = check_bogoliubov(gen);
    CHECK(b.inverse_residual <= 1e-10);
    CHECK(b.conjugation_residual <= 1e-10);
    const auto u = bogoliubov(gen), v = bogoliubov(negated(gen));
    CHECK(((u * v).dense() - CMat::Identity(u.size(), u.size())).norm() < 1e-9);
}

TEST_CASE("zero purity generator gives the Moretti covariance") {
    const auto g = grid();
    const auto p = build_pure_covariances(zero_purity(g));
    const auto m = moretti(g);
    CHECK((p.lambda_plus - m.lambda_plus).norm() < 1e-12);
}

TEST_CASE("one-particle norm is equivalent to the |D_s|^{1/2} norm") {
    const auto g = grid();
    const auto p = build_pure_covariances(random_purity(g, 4, spec()));
    std::vector<boundary::BoundaryFunction> probes;
    for (int i = 0; i < 10; ++i) {
        CVec m = CVec::Zero(g->n_modes());
        for (int k : g->admissible_modes()) m[k] = std::sin(0.37 * k * (i + 1)) + 0.0 * i;
        probes.push_back(boundary::BoundaryFunction::from_modes(g, m));
    }
    const auto e = one_particle_equivalence(p, probes);
    CHECK(e.lower > 0.0);
    CHECK(e.upper < 1e3);
    // Moretti: the one-particle norm is exactly the |D_s|^{1/2} norm.
    const auto em = one_particle_equivalence(moretti(g), probes);
    CHECK(em.lower == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(em.upper == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("shift conjugation keeps the verdicts") {
    const auto g = grid();
    Vec b = Vec::Zero(g->n_ang_modes());
    b[2] = 0.15;
    const auto p = build_pure_covariances(random_purity(g, 12, spec()));
    const auto r = verify_all(conjugate_pair(p, b));
    CHECK(r.ccr <= 1e-12);
    CHECK(r.positivity.pass);
    CHECK(r.musc.pass);
    CHECK(r.purity.pass);
}

TEST_CASE("pairs survive a save and load") {
    const auto p = build_gauge_covariances(random_gauge(grid(), 3, spec(), 0.5));
    const std::string path = "/tmp/lightcone_pair_test.bin";
    save_pair(path, p);
    const auto q = load_pair(path);
    CHECK((q.lambda_plus - p.lambda_plus).norm() == 0.0);
    CHECK((q.lambda_minus - p.lambda_minus).norm() == 0.0);
    CHECK(q.generator == p.generator);
}
