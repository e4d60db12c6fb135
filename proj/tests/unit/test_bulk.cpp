#include <cmath>
#include <memory>

#include "doctest.h"
#include "lightcone/bulk.hpp"
#include "lightcone/errors.hpp"

using namespace lightcone;
using namespace lightcone::bulk;

namespace {

BulkSpec spec2(int per_unit, double t1 = 0.5) {
    BulkSpec s;
    s.d = 2;
    s.dx = 1.0 / per_unit;
    s.half_width = 1.0;
    s.t_p = 0.0;
    s.t1 = t1;
    s.t_end = t1 + 0.1;
    return s;
}

geometry::SpacetimeChart flat(int d) {
    geometry::ChartSpec c;
    c.d = d;
    return geometry::SpacetimeChart(c);
}

Packet bump(double x, double y, double rho) {
    Packet p;
    p.xc = {x, y};
    p.rho = rho;
    return p;
}

}  // namespace

TEST_CASE("grid preconditions") {
    BulkSpec s = spec2(16);
    s.courant = 0.6;
    CHECK_THROWS_AS(BulkGrid{s}, CourantViolation);
    s = spec2(16);
    s.half_width = 0.5;  // no margin around the cone region
    CHECK_THROWS_AS(BulkGrid{s}, ConfigError);
}

TEST_CASE("zero data stay zero") {
    auto g = std::make_shared<BulkGrid>(spec2(16));
    const auto chart = flat(2);
    CauchyData z;
    z.t = 0.5;
    z.phi0.assign(g->size(), 0.0);
    z.phi1.assign(g->size(), 0.0);
    SolveOptions o;
    o.store_times = {0.1, 0.55};
    const auto f = solve_cauchy(z, g, chart, o);
    for (const auto& s : f.slices) CHECK(l2_norm(*g, s.value) == 0.0);
}

TEST_CASE("leapfrog converges to exact Fourier evolution at second order") {
    const auto chart = flat(2);
    std::vector<double> err;
    for (int pu : {16, 32, 64}) {
        auto g = std::make_shared<BulkGrid>(spec2(pu));
        const Packet p = bump(0.1, -0.05, 0.4);
        const auto data = packet_data(*g, 0.5, p, nullptr);
        SolveOptions o;
        o.store_times = {0.1};
        const auto f = solve_cauchy(data, g, chart, o);
        const auto ex = spectral_evolve(*g, data, f.slices[0].t);
        err.push_back(l2_diff(*g, f.slices[0].value, ex.phi0) / l2_norm(*g, ex.phi0));
    }
    const double order = std::log2(err[1] / err[2]);
    CHECK(order == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("discrete energy is conserved and evolution reverses") {
    auto g = std::make_shared<BulkGrid>(spec2(32));
    const auto chart = flat(2);
    const Packet p = bump(0.0, 0.1, 0.35);
    const auto data = packet_data(*g, 0.5, p, nullptr);
    Leapfrog lf(*g, chart);
    lf.start(data, -1);
    const double e0 = lf.energy();
    lf.run_to(0.0);
    CHECK(std::abs(lf.energy() - e0) <= 1e-6 * 0.5 * std::abs(e0));
    // Forward again from the reached levels returns the data to second order.
    SolveOptions o;
    o.store_times = {0.5};
    const auto back = solve_cauchy(spectral_evolve(*g, data, 0.0), g, chart, o);
    CHECK(l2_diff(*g, back.slices[0].value, data.phi0) / l2_norm(*g, data.phi0) < 1e-2);
}

TEST_CASE("constant field restricts to beta^{-1} times the constant") {
    BulkSpec s = spec2(16);
    s.half_width = 1.0;
    const BulkGrid g(s);
    const auto chart = flat(2);
    const auto bg = boundary::make_grid({2, 32, -2.0, 0.0, 4});
    const auto cone = geometry::build_null_coordinates(chart, geometry::ConeDefiningFunction::reference(chart, Vec::Zero(3)),
                                                       bg->s_nodes(), bg->angular());
    CauchyData c;
    c.t = 0.5;
    c.phi0.assign(g.size(), 2.5);
    c.phi1.assign(g.size(), 0.0);
    RestrictOptions o;
    o.taper = 0.0;
    const auto tr = restrict_to_cone(c, g, chart, cone, bg, o);
    const CMat v = tr.nodes();
    for (int j = 0; j < cone.n_s(); ++j)
        // the zero frame leaks a dispersive precursor of order 1e-10 inwards
        for (int q = 0; q < cone.n_ang(); ++q) CHECK(std::abs(v(q, j) - 2.5 / cone.beta[cone.index(j, q)]) < 1e-9 * v.cwiseAbs().maxCoeff());
    const auto an = restrict_analytic([](double, const double*) { return 2.5; }, cone, bg, o);
    // roundoff accumulated over the leapfrog steps down to the cone
    CHECK((an.nodes() - v).norm() < 1e-9 * v.norm());
}

TEST_CASE("leapfrog trace approaches the trace of an exact plane wave") {
    const auto chart = flat(2);
    const auto bg = boundary::make_grid({2, 64, -2.0, 0.0, 8});
    const auto cone = geometry::build_null_coordinates(chart, geometry::ConeDefiningFunction::reference(chart, Vec::Zero(3)),
                                                       bg->s_nodes(), bg->angular());
    auto wave = [](double t, const double* x) { return std::cos(3.0 * x[0] + 4.0 * x[1] - 5.0 * t); };
    const auto exact = restrict_analytic(wave, cone, bg);
    std::vector<double> err;
    for (int pu : {32, 64}) {
        const BulkGrid g(spec2(pu));
        CauchyData d;
        d.t = 0.5;
        d.phi0 = sample(g, [&](const double* x) { return wave(0.5, x); });
        d.phi1 = sample(g, [&](const double* x) { return 5.0 * std::sin(3.0 * x[0] + 4.0 * x[1] - 2.5); });
        const auto tr = restrict_to_cone(d, g, chart, cone, bg);
        err.push_back((tr.nodes() - exact.nodes()).cwiseAbs().maxCoeff() / exact.nodes().cwiseAbs().maxCoeff());
    }
    CHECK(err[1] < err[0] / 3.0);
}

TEST_CASE("causal propagator is antisymmetric and stays in the light cone") {
    BulkSpec s = spec2(32, 0.8);
    s.half_width = 1.2;
    s.t_end = 1.0;
    auto g = std::make_shared<BulkGrid>(s);
    const auto chart = flat(2);
    Source u1, u2;
    u1.tc = 0.4;
    u1.tau = 0.12;
    u1.xc = {0.1, 0.0};
    u1.rho = 0.12;
    u2.tc = 0.6;
    u2.tau = 0.12;
    u2.xc = {-0.1, 0.05};
    u2.rho = 0.12;
    const double e12 = propagator_pairing(u1, u2, *g, chart);
    const double e21 = propagator_pairing(u2, u1, *g, chart);
    CHECK(std::abs(e12 + e21) <= 1e-6 * std::abs(e12));
    const auto f = causal_propagator(u1, g, chart, {0.9});
    const auto& sl = f.slices[0];
    double inside = 0.0, outside = 0.0;
    double x[3] = {0, 0, 0};
    for (std::size_t i = 0; i < g->size(); ++i) {
        g->position(i, x);
        const double r = std::hypot(x[0] - 0.1, x[1]);
        const double reach = u1.rho + (sl.t - u1.t_lo()) + 3.0 * g->dx();
        (r > reach ? outside : inside) = std::max(r > reach ? outside : inside, std::abs(sl.value[i]));
    }
    CHECK(outside <= 1e-4 * inside);
    Source edge = u1;
    edge.xc = {1.15, 0.0};
    CHECK_THROWS_AS(check_support(edge, *g), SupportLeak);
}

TEST_CASE("bulk symplectic form vanishes on equal data and is conserved") {
    auto g = std::make_shared<BulkGrid>(spec2(32));
    const auto chart = flat(2);
    const Packet a = bump(0.1, 0.0, 0.3), b = bump(-0.1, 0.1, 0.3);
    const auto da = packet_data(*g, 0.5, a, nullptr);
    const auto db = packet_data(*g, 0.5, Packet{{0.0, 0.0}, 0.1, 0.0}, &b);
    CHECK(symplectic_from_data(*g, chart, da, da) == 0.0);
    SolveOptions o;
    o.store_times = {0.1, 0.3};
    const auto fa = solve_cauchy(da, g, chart, o), fb = solve_cauchy(db, g, chart, o);
    const double s1 = symplectic_from_levels(*g, chart, fa.slices[0], fb.slices[0]);
    const double s2 = symplectic_from_levels(*g, chart, fa.slices[1], fb.slices[1]);
    CHECK(std::abs(s1 - s2) <= 1e-4 * std::abs(s1));
    CHECK(std::abs(s1 - symplectic_from_data(*g, chart, da, db)) <= 1e-2 * std::abs(s1));
}

TEST_CASE("quadratic B-splines") {
    double integral = 0.0;
    const int n = 30000;
    for (int i = 0; i < n; ++i) integral += bspline2(3.0 * (i + 0.5) / n) * 3.0 / n;
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-8));
    for (double u : {0.3, 1.2, 2.7}) CHECK(dbspline2(u) == doctest::Approx((bspline2(u + 1e-6) - bspline2(u - 1e-6)) / 2e-6).epsilon(1e-6));
    CHECK(bspline2(0.0) == 0.0);
    CHECK(bspline2(3.0) == 0.0);
    const auto basis = make_spline_basis(2, 3, 0.5);
    const Mat M = basis.mass();
    // Mass entry against a midpoint sum over the cube.
    const int m = 400;
    const double h = 1.0 / m;
    double acc = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            const double x[2] = {-0.5 + (i + 0.5) * h, -0.5 + (j + 0.5) * h};
            acc += basis.eval(0, x) * basis.eval(1, x) * h * h;
        }
    CHECK(M(0, 1) == doctest::Approx(acc).epsilon(1e-4));
    Eigen::SelfAdjointEigenSolver<Mat> es(M);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
    CHECK(make_spline_basis(3, 6, 0.5, 50).count() == 50);
}

TEST_CASE("trace operator round trip and rank guard") {
    const auto chart = flat(2);
    const auto bg = boundary::make_grid({2, 64, -2.5, 1.0, 8});
    const auto cone = geometry::build_null_coordinates(chart, geometry::ConeDefiningFunction::reference(chart, Vec::Zero(3)),
                                                       bg->s_nodes(), bg->angular());
    BulkSpec s = spec2(16);
    s.t1 = 0.5;
    s.t_end = 0.5;
    s.half_width = 0.7;
    const BulkGrid g(s);
    const auto basis = make_spline_basis(2, 3, 0.3);
    RestrictOptions o;
    o.cubic = true;
    o.cap_at_t1 = true;
    const auto op = assemble_trace_operator(g, chart, cone, bg, basis, 0.5, o);
    CHECK(op.T.cols() == 2 * basis.count());
    Vec c = Vec::LinSpaced(op.T.cols(), -1.0, 1.0);
    const auto r = goursat_solve(op, op.T * c);
    CHECK(bulk::energy_norm(op, r.coeffs - c) <= 1e-6 * bulk::energy_norm(op, c));
    CHECK(r.forward_residual <= 1e-10);
    CHECK_THROWS_AS(goursat_solve(op, op.T * c, 0.99), RankDeficient);
    // Single-bump column equals the restriction of its own solution.
    Vec e = Vec::Zero(op.T.cols());
    e[0] = 1.0;
    const auto tr = restrict_to_cone(basis_data(g, basis, e, 0.5), g, chart, cone, bg, o);
    CHECK((trace_features(tr, 0.5) - op.T.col(0)).norm() <= 1e-12 * op.T.col(0).norm());
}

TEST_CASE("conformal field map scales by Omega^{-(n-2)/2}") {
    const BulkGrid g(spec2(16));
    geometry::ChartSpec c;
    c.d = 2;
    c.family = "conformal-gaussian";
    c.amplitude = 0.3;
    c.width = 1e6;  // Omega constant on the box
    const geometry::SpacetimeChart target(c);
    Slice s;
    s.t = 0.3;
    s.lo.assign(g.size(), 1.0);
    s.value.assign(g.size(), 2.0);
    s.hi.assign(g.size(), 3.0);
    const auto m = conformal_slice(g, target, s);
    const double k = std::pow(1.3, -0.5);
    CHECK(m.value[5] == doctest::Approx(2.0 * k).epsilon(1e-10));
    CHECK(m.hi[7] == doctest::Approx(3.0 * k).epsilon(1e-10));
    geometry::ChartSpec one;
    one.d = 2;
    const auto id = conformal_slice(g, geometry::SpacetimeChart(one), s);
    CHECK(id.value == s.value);
}
