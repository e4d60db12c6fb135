#include <cmath>
#include <random>

#include "doctest.h"
#include "lightcone/boundary.hpp"
#include "lightcone/errors.hpp"

using namespace lightcone;
using namespace lightcone::boundary;

namespace {

GridPtr small_grid(int d = 3) { return make_grid({d, 32, -4.0, 4.0, 4}); }

BoundaryFunction random_function(const GridPtr& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    CVec m = CVec::Zero(g->n_modes());
    for (int k : g->admissible_modes()) m[k] = cplx(nd(rng), nd(rng));
    return BoundaryFunction::from_modes(g, m);
}

// Trigonometric interpolant in s by an explicit DFT, no FFT library involved.
cplx interpolate_s(const BoundaryGrid& g, const CVec& row, double s) {
    const int n = g.n_s();
    cplx acc = 0.0;
    for (int k = -n / 2 + 1; k < n / 2; ++k) {
        cplx c = 0.0;
        for (int j = 0; j < n; ++j) c += row[j] * std::polar(1.0, -2.0 * M_PI * k * j / n);
        c /= double(n);
        acc += c * std::polar(1.0, 2.0 * M_PI * k * (s - g.s_min()) / g.length());
    }
    return acc;
}

}  // namespace

TEST_CASE("transforms round trip between nodes, spectral data and mode vectors") {
    for (int d : {2, 3}) {
        const auto g = small_grid(d);
        const auto f = random_function(g, 5);
        const auto n = f.as_nodes();
        CHECK((n.as_spectral().modes() - f.modes()).norm() < 1e-12 * f.modes().norm());
        CHECK((BoundaryFunction::from_modes(g, f.modes()).nodes() - n.nodes()).norm() < 1e-12 * n.nodes().norm());
        CHECK(n.l2_norm() == doctest::Approx(f.l2_norm()).epsilon(1e-12));
    }
}

TEST_CASE("sigma_C is anti-hermitian and matches the charge pairing") {
    for (int d : {2, 3}) {
        const auto g = small_grid(d);
        for (int i = 0; i < 5; ++i) {
            const auto a = random_function(g, 10 + i), b = random_function(g, 20 + i);
            const cplx ab = symplectic_form(a, b), ba = symplectic_form(b, a);
            CHECK(std::abs(ab + std::conj(ba)) < 1e-10 * std::abs(ab));
            const cplx q = charge_pairing(a, b);
            CHECK(std::abs(cplx(0.0, 1.0) * ab - q) < 1e-11 * std::abs(q));
        }
        const auto a = random_function(g, 99);
        CHECK(std::abs(symplectic_form(a, a).real()) < 1e-10 * std::abs(symplectic_form(a, a)));
    }
}

TEST_CASE("zero function pairs to zero") {
    const auto g = small_grid();
    const BoundaryFunction z(g, BoundaryFunction::Rep::nodes);
    CHECK(symplectic_form(z, random_function(g, 1)) == cplx(0.0));
    CHECK(weighted_cone_norm(z) == 0.0);
}

TEST_CASE("frequency projections partition the identity") {
    const auto g = small_grid();
    const Vec sum = mult_pi_plus(*g) + mult_pi_minus(*g);
    CHECK((sum - mult_identity(*g)).norm() == 0.0);
    const Vec r = mult_range_plus(*g) + mult_range_minus(*g);
    CHECK((r - mult_admissible(*g)).norm() == 0.0);
    for (int n = 0; n < g->n_s(); ++n) {
        if (!g->admissible_column(n)) CHECK(g->sigma_eff(n) == 0.0);
    }
    // |D_s|^{1/2} squared is |D_s|.
    const Vec h = mult_abs_ds_sqrt(*g);
    CHECK((h.cwiseProduct(h) - mult_abs_ds(*g)).norm() < 1e-12);
}

TEST_CASE("Sobolev weights act as products of brackets on a single mode") {
    const auto g = small_grid();
    const Vec sg = g->mode_sigma(), lm = g->mode_lambda();
    const int m = g->admissible_modes()[37];
    CVec e = CVec::Zero(g->n_modes());
    e[m] = 1.0;
    const auto f = BoundaryFunction::from_modes(g, e);
    const double want = std::pow(1.0 + sg[m] * sg[m], 0.75) * std::pow(1.0 + lm[m], -0.25);
    CHECK(sobolev_norm(f, 1.5, -0.5) / sobolev_norm(f, 0.0, 0.0) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("shift map agrees with direct evaluation of the interpolant") {
    const auto g = make_grid({3, 32, -4.0, 4.0, 6});
    const auto f = random_function(g, 7);
    Vec b = Vec::Zero(g->n_ang_modes());
    for (int a = 0; a < g->n_ang_modes(); ++a)
        if (g->angular().degree[a] <= 1) b[a] = 0.1 * (a + 1);
    const auto sh = shift_map(f, b);
    CHECK_FALSE(sh.aliasing);
    const Vec bv = angular_values(*g, b);
    const CMat vals = f.nodes(), out = sh.g.nodes();
    for (int q = 0; q < g->n_ang(); q += 5)
        for (int j = 0; j < g->n_s(); j += 3) {
            const cplx want = interpolate_s(*g, vals.row(q).transpose(), g->s_nodes()[j] + bv[q]);
            CHECK(std::abs(out(q, j) - want) < 1e-10 * vals.cwiseAbs().maxCoeff());
        }
}

TEST_CASE("rough shift profiles are flagged") {
    const auto g = make_grid({3, 16, -4.0, 4.0, 2});
    Vec b = Vec::Zero(g->n_ang_modes());
    b.setConstant(50.0);
    CHECK_THROWS_AS(shift_map(random_function(g, 3), b), AliasingWarning);
    CHECK(shift_map(random_function(g, 3), b, false).aliasing);
}

TEST_CASE("weighted features carry the weighted norm") {
    const auto g = small_grid();
    const auto f = random_function(g, 11);
    for (double alpha : {0.5, 1.0}) {
        WeightedNormOptions o;
        o.alpha = alpha;
        CHECK(weighted_features(f, alpha).norm() == doctest::Approx(weighted_cone_norm(f, o)).epsilon(1e-10));
    }
}

TEST_CASE("taper is a cosine window on the outer fraction") {
    const auto g = make_grid({3, 64, 0.0, 1.0, 2});
    const Vec w = taper_profile(*g, 0.1);
    CHECK(w.maxCoeff() <= 1.0);
    CHECK(w.minCoeff() >= 0.0);
    for (int j = 0; j < 64; ++j) {
        const double s = g->s_nodes()[j];
        if (s > 0.1 && s < 0.9) CHECK(w[j] == 1.0);
    }
}

TEST_CASE("Hardy ratio is bounded below in three dimensions and refused in two") {
    HardyProbe p;
    p.r_max = 1.0;
    p.laplace = Vec::Zero(1);
    p.eval = [](double r, CVec& f, CVec& df) {
        f.resize(1);
        df.resize(1);
        f[0] = std::pow(1.0 - r, 2);
        df[0] = -2.0 * (1.0 - r);
    };
    const auto h = hardy_check(p, 3);
    CHECK(h.ratio >= 0.25 - 1e-6);  // classical constant ((d-2)/2)^2
    CHECK_THROWS_AS(hardy_check(p, 2), DimensionTooLow);
}

TEST_CASE("functions on different grids do not mix") {
    const auto a = random_function(small_grid(), 1);
    const auto b = random_function(make_grid({3, 16, -4.0, 4.0, 4}), 1);
    CHECK_THROWS_AS(symplectic_form(a, b), GridMismatch);
}
