#include <cmath>

#include "lightcone/boundary.hpp"
#include "lightcone/errors.hpp"

namespace lightcone::boundary {

Vec angular_values(const BoundaryGrid& g, const Vec& coeffs) {
    if (coeffs.size() != g.n_ang_modes()) throw GridMismatch("shift profile needs one coefficient per angular mode");
    return g.angular().Y * coeffs;
}

// Angular bandwidth of exp(i sigma b(theta)) over the resolved band, a Carson
// style estimate: degree of b times (1 + sigma_max max|b|).
double shift_bandwidth(const BoundaryGrid& g, const Vec& b_coeffs) {
    int lb = 0;
    for (int a = 0; a < b_coeffs.size(); ++a)
        if (std::abs(b_coeffs[a]) > 1e-14) lb = std::max(lb, g.angular().degree[a]);
    const double bmax = angular_values(g, b_coeffs).cwiseAbs().maxCoeff();
    return lb * (1.0 + g.sigma_max() * bmax);
}

ShiftResult shift_map(const BoundaryFunction& g, const Vec& b_coeffs, bool strict) {
    const BoundaryGrid& grid = *g.grid();
    ShiftResult r;
    r.bandwidth_estimate = shift_bandwidth(grid, b_coeffs);
    r.aliasing = r.bandwidth_estimate > grid.L();
    if (r.aliasing && strict)
        throw AliasingWarning("shift profile too rough for the angular truncation (estimate " +
                              std::to_string(r.bandwidth_estimate) + ")");
    const Vec b = angular_values(grid, b_coeffs);
    CMat f = fft_s(grid, g.nodes());
    for (int n = 0; n < grid.n_s(); ++n) {
        const double sg = grid.sigma_eff(n);
        for (int q = 0; q < grid.n_ang(); ++q) f(q, n) *= std::polar(1.0, sg * b[q]);
    }
    r.g = BoundaryFunction::from_nodes(g.grid(), ifft_s(grid, f));
    return r;
}

}  // namespace lightcone::boundary
