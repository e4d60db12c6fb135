#include <algorithm>
#include <cmath>

#include "lightcone/bulk.hpp"
#include "lightcone/errors.hpp"

namespace lightcone::bulk {

namespace {

// Space-time quadrature of u * phi * Omega^n over the levels visited.
class PairingQuadrature : public Observer {
public:
    PairingQuadrature(const BulkGrid& g, const SpacetimeChart& chart, const Source& u, bool include_start)
        : g_(g), chart_(chart), u_(u), include_start_(include_start) {}

    void on_level(const LevelView& v) override {
        if (first_) {
            first_ = false;
            if (include_start_) add(v.level[2], v.t[2]);
        }
        add(v.level[3], v.t[3]);
    }
    double value = 0.0;

private:
    const BulkGrid& g_;
    const SpacetimeChart& chart_;
    const Source& u_;
    bool include_start_;
    bool first_ = true;

    void add(const double* phi, double t) {
        if (t <= u_.t_lo() || t >= u_.t_hi()) return;
        const int d = g_.d();
        int lo[3] = {0, 0, 0}, hi[3] = {0, 0, 0};
        for (int a = 0; a < d; ++a) {
            const double c = u_.xc.empty() ? 0.0 : u_.xc[a];
            lo[a] = std::max(0, static_cast<int>(std::floor((c - u_.rho + g_.half_width()) / g_.dx())));
            hi[a] = std::min(g_.nx() - 1, static_cast<int>(std::ceil((c + u_.rho + g_.half_width()) / g_.dx())));
        }
        double x[3] = {0, 0, 0};
        double acc = 0.0;
        for (int k = lo[2]; k <= hi[2]; ++k)
            for (int j = lo[1]; j <= hi[1]; ++j)
                for (int i = lo[0]; i <= hi[0]; ++i) {
                    x[0] = g_.coord(i);
                    x[1] = g_.coord(j);
                    if (d == 3) x[2] = g_.coord(k);
                    const double uv = u_(t, x, d);
                    if (uv == 0.0) continue;
                    acc += uv * phi[g_.index(i, j, k)] * std::pow(chart_.omega_at(t, x), chart_.n());
                }
        value += acc * g_.cell_volume() * g_.dt();
    }
};

}  // namespace

void check_support(const Source& u, const BulkGrid& g) {
    if (!(u.tau > 0.0) || !(u.rho > 0.0)) throw ConfigError("source needs positive tau and rho");
    if (!u.xc.empty() && static_cast<int>(u.xc.size()) != g.d()) throw ConfigError("source centre has wrong dimension");
    for (int a = 0; a < g.d(); ++a) {
        const double c = u.xc.empty() ? 0.0 : u.xc[a];
        if (std::abs(c) + u.rho + 2.0 * g.dx() > g.half_width())
            throw SupportLeak("source support reaches the bulk grid margin");
    }
}

Propagated causal_data(const Source& u, const BulkGrid& g, const SpacetimeChart& chart) {
    check_support(u, g);
    const double dt = g.dt();
    CauchyData zero;
    // Start on a lattice anchored at t_end so that pairings of different
    // sources sample the same time levels; antisymmetry is then exact.
    const double t_ref = g.spec().t_end;
    zero.t = t_ref - std::ceil((t_ref - (u.t_lo() - dt)) / dt - 1e-9) * dt;
    zero.phi0.assign(g.size(), 0.0);
    zero.phi1.assign(g.size(), 0.0);
    // Retarded solve through the source slab; above it E u coincides with E+ u.
    Leapfrog lf(g, chart, &u);
    lf.start(zero, 1);
    lf.run_to(u.t_hi() + 2.0 * dt);
    const LevelView v = lf.view();
    Propagated out;
    out.at_tb.t = v.t[2];
    out.at_tb.phi0.assign(v.level[2], v.level[2] + g.size());
    out.at_tb.phi1.resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) out.at_tb.phi1[i] = (v.level[3][i] - v.level[1][i]) / (2.0 * dt);
    return out;
}

BulkField causal_propagator(const Source& u, std::shared_ptr<const BulkGrid> grid, const SpacetimeChart& chart,
                            const std::vector<double>& times) {
    // E u solves the homogeneous equation everywhere, so its data above the
    // source determine it on both sides.
    const Propagated p = causal_data(u, *grid, chart);
    SolveOptions opt;
    opt.store_times = times;
    return solve_cauchy(p.at_tb, grid, chart, opt);
}

double propagator_pairing(const Source& u1, const Source& u2, const BulkGrid& g, const SpacetimeChart& chart) {
    check_support(u1, g);
    check_support(u2, g);
    const double dt = g.dt();
    // Retarded solve past both supports, then one homogeneous sweep back from
    // the two newest levels. Leapfrog is exactly reversible, so the sweep is the
    // discrete E u2 and the pairing is antisymmetric up to roundoff.
    const double t_ref = g.spec().t_end;
    CauchyData zero;
    zero.t = t_ref - std::ceil((t_ref - (std::min(u1.t_lo(), u2.t_lo()) - dt)) / dt - 1e-9) * dt;
    zero.phi0.assign(g.size(), 0.0);
    zero.phi1.assign(g.size(), 0.0);
    Leapfrog ret(g, chart, &u2);
    ret.start(zero, 1);
    ret.run_to(std::max(u1.t_hi(), u2.t_hi()) + 2.0 * dt);
    const LevelView v = ret.view();
    const Field above(v.level[3], v.level[3] + g.size());
    const Field top(v.level[2], v.level[2] + g.size());

    Leapfrog lf(g, chart);
    PairingQuadrature q(g, chart, u1, true);
    lf.add_observer(&q);
    lf.resume(above, top, v.t[2], -1);
    lf.run_to(u1.t_lo() - dt);
    return q.value;
}

BoundaryFunction causal_trace(const Source& u, const BulkGrid& g, const SpacetimeChart& chart, const ConeChart& cone,
                              const boundary::GridPtr& bgrid, const RestrictOptions& opt) {
    const Propagated p = causal_data(u, g, chart);
    return restrict_to_cone(p.at_tb, g, chart, cone, bgrid, opt);
}

}  // namespace lightcone::bulk
