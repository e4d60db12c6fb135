#include <cmath>

#include "lightcone/bulk.hpp"
#include "lightcone/errors.hpp"

namespace lightcone::bulk {

Slice conformal_slice(const BulkGrid& g, const SpacetimeChart& target, const Slice& s) {
    const double k = -0.5 * (target.n() - 2);
    const double dt = g.dt();
    Slice out;
    out.t = s.t;
    auto map = [&](const Field& f, double t, Field& o) {
        o.resize(f.size());
        double x[3] = {0, 0, 0};
        for (std::size_t i = 0; i < f.size(); ++i) {
            g.position(i, x);
            const double om = target.omega_at(t, x);
            if (!(om > 0.0)) throw NonPositiveOmega("conformal factor is not positive");
            o[i] = std::pow(om, k) * f[i];
        }
    };
    map(s.lo, s.t - dt, out.lo);
    map(s.value, s.t, out.value);
    map(s.hi, s.t + dt, out.hi);
    out.dvalue.resize(out.value.size());
    for (std::size_t i = 0; i < out.value.size(); ++i) out.dvalue[i] = (out.hi[i] - out.lo[i]) / (2.0 * dt);
    return out;
}

BulkField conformal_transform(const BulkField& phi, const SpacetimeChart& target) {
    if (!phi.grid) throw ConfigError("bulk field has no grid");
    BulkField out;
    out.grid = phi.grid;
    out.chart = target.spec();
    for (const Slice& s : phi.slices) out.slices.push_back(conformal_slice(*phi.grid, target, s));
    return out;
}

}  // namespace lightcone::bulk
