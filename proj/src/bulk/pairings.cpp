#include <cmath>

#include "lightcone/bulk.hpp"
#include "lightcone/errors.hpp"

namespace lightcone::bulk {

double symplectic_from_data(const BulkGrid& g, const SpacetimeChart& chart, const CauchyData& a, const CauchyData& b) {
    if (a.t != b.t) throw ConfigError("symplectic form needs data on the same slice");
    const int n = chart.n();
    double x[3] = {0, 0, 0};
    double acc = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double w = a.phi1[i] * b.phi0[i] - a.phi0[i] * b.phi1[i];
        if (w == 0.0) continue;
        g.position(i, x);
        acc += std::pow(chart.omega_at(a.t, x), n - 2) * w;
    }
    return acc * g.cell_volume();
}

double symplectic_from_levels(const BulkGrid& g, const SpacetimeChart& chart, const Slice& a, const Slice& b) {
    if (a.t != b.t) throw ConfigError("symplectic form needs slices at the same level");
    const int n = chart.n();
    const double dt = g.dt();
    const double tm = a.t - 0.5 * dt;
    double x[3] = {0, 0, 0};
    double acc = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double w = a.value[i] * b.lo[i] - a.lo[i] * b.value[i];
        if (w == 0.0) continue;
        g.position(i, x);
        acc += std::pow(chart.omega_at(tm, x), n - 2) * w;
    }
    return acc * g.cell_volume() / dt;
}

json MonomorphismResult::to_json() const {
    return json{{"sigma_bulk", sigma_bulk}, {"sigma_boundary", sigma_boundary}, {"residual", residual}};
}

MonomorphismResult verify_monomorphism(const CauchyData& a, const CauchyData& b, const BulkGrid& g,
                                       const SpacetimeChart& chart, const ConeChart& cone,
                                       const boundary::GridPtr& bgrid, const RestrictOptions& opt) {
    MonomorphismResult r;
    r.sigma_bulk = symplectic_from_data(g, chart, a, b);
    const BoundaryFunction ta = restrict_to_cone(a, g, chart, cone, bgrid, opt);
    const BoundaryFunction tb = restrict_to_cone(b, g, chart, cone, bgrid, opt);
    r.sigma_boundary = boundary::symplectic_form(ta, tb).real();
    r.residual = std::abs(r.sigma_boundary - r.sigma_bulk) / std::abs(r.sigma_bulk);
    return r;
}

json TwoPointResult::to_json() const {
    return json{{"lambda_plus", {lambda_plus.real(), lambda_plus.imag()}},
                {"lambda_minus", {lambda_minus.real(), lambda_minus.imag()}},
                {"e_pairing", e_pairing},
                {"ccr_residual", ccr_residual}};
}

TwoPointResult bulk_two_point(const states::CovariancePair& pair, const BoundaryFunction& trace1,
                              const BoundaryFunction& trace2, double e_pairing) {
    TwoPointResult r;
    r.lambda_plus = boundary::inner(trace1, pair.lambda_plus.apply(trace2));
    r.lambda_minus = boundary::inner(trace1, pair.lambda_minus.apply(trace2));
    r.e_pairing = e_pairing;
    const cplx diff = r.lambda_plus - r.lambda_minus - cplx(0.0, e_pairing);
    r.ccr_residual = std::abs(diff) / std::abs(e_pairing);
    return r;
}

}  // namespace lightcone::bulk
