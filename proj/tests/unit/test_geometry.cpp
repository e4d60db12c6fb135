#include <cmath>
#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "lightcone/boundary.hpp"
#include "lightcone/errors.hpp"
#include "lightcone/geometry.hpp"

using namespace lightcone;
using namespace lightcone::geometry;

namespace {

ChartSpec bump_spec() {
    ChartSpec s;
    s.family = "conformal-gaussian";
    s.amplitude = 0.2;
    s.width = 0.7;
    s.center = {0.3, 0.1, -0.2, 0.0};
    s.potential = "conformal";
    return s;
}

std::vector<Vec> samples(int n, int count) {
    std::vector<Vec> out;
    for (int i = 0; i < count; ++i) {
        Vec x(n);
        for (int k = 0; k < n; ++k) x[k] = std::sin(1.7 * i + 0.9 * k) * 0.8;
        out.push_back(x);
    }
    return out;
}

}  // namespace

TEST_CASE("flat chart is the Minkowski metric") {
    const SpacetimeChart chart;
    const Vec x = Vec::LinSpaced(4, 0.1, 0.4);
    CHECK((chart.metric(x) - minkowski_eta(4)).norm() == 0.0);
    CHECK(chart.omega(x) == 1.0);
    CHECK(chart.scalar_curvature(x) == 0.0);
    CHECK(chart.flat());
}

TEST_CASE("chart invariants hold for a conformal bump") {
    const SpacetimeChart chart(bump_spec());
    const auto rep = check_chart(chart, samples(4, 20));
    CHECK(rep.pass);
    CHECK(rep.max_negative == 1);
    CHECK(rep.min_negative == 1);
    CHECK(rep.max_derivative_residual < 1e-6);
    CHECK(rep.max_inverse_residual < 1e-12);
}

TEST_CASE("metric is Omega^2 eta with Omega from its closed form") {
    const SpacetimeChart chart(bump_spec());
    Vec x(4);
    x << 0.2, 0.5, -0.1, 0.3;
    const Vec c = Vec::Map(bump_spec().center.data(), 4);
    const double om = 1.0 + 0.2 * std::exp(-(x - c).squaredNorm() / (0.7 * 0.7));
    CHECK(chart.omega(x) == doctest::Approx(om).epsilon(1e-14));
    CHECK((chart.metric(x) - om * om * minkowski_eta(4)).norm() < 1e-14);
}

TEST_CASE("pointwise Omega and potential match the chart's general forms") {
    for (int d : {2, 3}) {
        ChartSpec s = bump_spec();
        s.d = d;
        s.center.resize(d + 1);
        const SpacetimeChart c(s);
        for (const Vec& x : samples(d + 1, 25)) {
            double om, pot;
            c.omega_potential_at(x[0], x.data() + 1, om, pot);
            CHECK(std::abs(om - c.omega(x)) <= 1e-15 * c.omega(x));
            CHECK(std::abs(c.omega_at(x[0], x.data() + 1) - c.omega(x)) <= 1e-15 * c.omega(x));
            CHECK(std::abs(pot - c.potential(x)) <= 1e-13 * (1.0 + std::abs(c.potential(x))));
        }
    }
}

TEST_CASE("grid fill of Omega and potential matches the pointwise forms") {
    for (int d : {2, 3}) {
        ChartSpec s = bump_spec();
        s.d = d;
        s.center.resize(d + 1);
        const SpacetimeChart c(s);
        const std::vector<double> axis{-0.9, -0.35, 0.0, 0.2, 0.75};
        const std::size_t total = d == 2 ? 25 : 125;
        std::vector<double> om(total), pot(total);
        c.omega_potential_grid(0.4, axis, om.data(), pot.data());
        for (std::size_t idx = 0; idx < total; ++idx) {
            Vec x(d + 1);
            x[0] = 0.4;
            std::size_t r = idx;
            for (int a = 0; a < d; ++a, r /= 5) x[a + 1] = axis[r % 5];
            CHECK(std::abs(om[idx] - c.omega(x)) <= 1e-14);
            CHECK(std::abs(pot[idx] - c.potential(x)) <= 1e-13 * (1.0 + std::abs(c.potential(x))));
        }
    }
}

TEST_CASE("Minkowski null geodesics are straight lines on the reference cone") {
    const SpacetimeChart chart;
    Vec p = Vec::Zero(4);
    Vec k(4);
    k << 1.0, 0.6, 0.0, 0.8;
    const auto pts = null_geodesic(chart, p, k, {0.1, 0.4, 0.9});
    const auto f = ConeDefiningFunction::reference(chart, p);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double lam = std::vector<double>{0.1, 0.4, 0.9}[i];
        CHECK((pts[i] - lam * k).norm() < 1e-10);
        CHECK(std::abs(f.value(pts[i])) < 1e-10);
    }
}

TEST_CASE("null geodesics of a conformally flat chart stay on the flat cone") {
    // Null curves are conformally invariant up to parametrization.
    const SpacetimeChart chart(bump_spec());
    Vec p = Vec::Zero(4);
    const auto f = ConeDefiningFunction::reference(chart, p);
    for (int dir = 0; dir < 6; ++dir) {
        const double a = 0.9 * dir, b = 0.4 * dir + 0.3;
        Vec k(4);
        k << 1.0, std::sin(b) * std::cos(a), std::sin(b) * std::sin(a), std::cos(b);
        k *= 1.0 / chart.omega(p);
        for (const Vec& x : null_geodesic(chart, p, k, {0.2, 0.5, 0.8})) CHECK(std::abs(f.value(x)) < 1e-9 * (1.0 + x.squaredNorm()));
    }
}

TEST_CASE("geodesic fit reproduces the reference form in flat space") {
    const SpacetimeChart chart;
    const Vec p = Vec::Zero(4);
    const auto fit = fit_from_null_geodesics(chart, p);
    const auto ref = ConeDefiningFunction::reference(chart, p);
    CHECK((fit.f.Q - ref.Q).norm() < 1e-8);
    CHECK(fit.max_sample_residual < 1e-8);
}

TEST_CASE("hypothesis check accepts the reference cone and rejects a spacelike quadric") {
    const SpacetimeChart chart;
    const Vec p = Vec::Zero(4);
    CHECK(validate_hypothesis(chart, ConeDefiningFunction::reference(chart, p)).pass);
    Mat Q = Mat::Identity(4, 4);
    bool rejected = false;
    try {
        rejected = !validate_hypothesis(chart, ConeDefiningFunction::quadratic(p, Q)).pass;
    } catch (const Error&) {
        rejected = true;
    }
    CHECK(rejected);
}

TEST_CASE("null coordinates on the flat cone") {
    const SpacetimeChart chart;
    const Vec p = Vec::Zero(4);
    const auto g = boundary::make_grid({3, 32, -2.0, 1.0, 4});
    const auto cone = build_null_coordinates(chart, ConeDefiningFunction::reference(chart, p), g->s_nodes(), g->angular());
    CHECK(cone.residuals.max_null < 1e-10);
    CHECK(cone.residuals.max_cross < 1e-10);
    CHECK(cone.residuals.max_normal_form < 1e-10);
    CHECK(cone.residuals.max_angle_drift < 1e-10);
    CHECK(cone.log_fit.alpha == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(cone.log_fit.alpha_spread < 1e-8);
    for (int j = 0; j < cone.n_s(); ++j)
        for (int q = 0; q < cone.n_ang(); q += 7) {
            const int i = cone.index(j, q);
            const Vec X = cone.X.row(i).transpose();
            // On the cone t = |x| and v = t + |x| = 2t.
            CHECK(std::abs(X[0] - X.tail(3).norm()) < 1e-12 * (1.0 + X[0]));
            CHECK(cone.v[i] == doctest::Approx(2.0 * X[0]).epsilon(1e-10));
            CHECK(cone.v[i] == doctest::Approx(0.1 * std::exp(2.0 * cone.s[j])).epsilon(1e-8));
            // Direction of the generator is the angular node.
            const Vec dir = cone.angular.dirs.row(q).transpose();
            CHECK((X.tail(3) / X.tail(3).norm() - dir).norm() < 1e-10);
        }
}

TEST_CASE("cone graph is the distance to the tip in flat space") {
    const SpacetimeChart chart;
    Vec p(4);
    p << 0.1, 0.2, 0.0, -0.1;
    const auto f = ConeDefiningFunction::reference(chart, p);
    Mat nodes(5, 3);
    nodes << 0, 0, 0, 0.3, 0.1, 0.0, -0.2, 0.4, 0.1, 0.5, 0.5, 0.5, 2.0, 0.0, 0.0;
    const auto G = cone_graph(chart, f, 1.0, nodes);
    CHECK(G.F.size() == 4);  // the last node lies beyond the level
    for (int i = 0; i < G.F.size(); ++i) {
        const Vec x = G.nodes.row(i).transpose();
        CHECK(G.F[i] == doctest::Approx(0.1 + (x - p.tail(3)).norm()).epsilon(1e-10));
    }
    CHECK(G.lipschitz <= 1.0 + 1e-9);
}

TEST_CASE("decay fit recovers a known exponent") {
    Vec s = Vec::LinSpaced(64, -4.0, 0.0);
    Vec sup = (1.5 * s.array()).exp() * 3.0;
    const auto fit = trace_decay_exponent(s, sup, -3.5, -1.0, 0.5);
    CHECK(fit.valid);
    CHECK(fit.slope_s == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(fit.slope_log_v == doctest::Approx(0.75).epsilon(1e-12));
    CHECK_THROWS_AS(trace_decay_exponent(s, sup, -1.0, -0.95, 0.5), WindowTooShort);
    sup[20] = 0.0;
    CHECK_FALSE(trace_decay_exponent(s, sup, -3.5, -1.0, 0.5).valid);
}

TEST_CASE("cone charts survive a save and load") {
    const SpacetimeChart chart;
    const auto g = boundary::make_grid({3, 16, -1.0, 0.5, 3});
    const auto cone = build_null_coordinates(chart, ConeDefiningFunction::reference(chart, Vec::Zero(4)), g->s_nodes(), g->angular());
    const auto path = (std::filesystem::temp_directory_path() / "lightcone_cone_test.bin").string();
    save_cone(path, cone);
    const auto back = load_cone(path);
    std::remove(path.c_str());
    CHECK((back.X - cone.X).norm() == 0.0);
    CHECK((back.beta - cone.beta).norm() == 0.0);
    CHECK(back.log_fit.alpha == cone.log_fit.alpha);
}
