#include <cmath>
#include <limits>

#include <boost/math/tools/roots.hpp>

#include "lightcone/errors.hpp"
#include "lightcone/geometry.hpp"

namespace lightcone::geometry {

double cone_graph_point(const ConeDefiningFunction& f, const Vec& x, double t_hi) {
    const int n = static_cast<int>(f.p.size());
    const double t0 = f.p[0];
    if ((x - f.p.tail(n - 1)).norm() < 1e-14) return t0;
    auto g = [&](double t) {
        Vec y(n);
        y[0] = t;
        y.tail(n - 1) = x;
        return f.value(y);
    };
    const int scan = 256;
    int changes = 0;
    double a = t0, b = t0;
    double prev = g(t0);
    for (int i = 1; i <= scan; ++i) {
        const double t = t0 + (t_hi - t0) * i / scan;
        const double cur = g(t);
        if ((prev < 0.0) != (cur < 0.0)) {
            ++changes;
            a = t0 + (t_hi - t0) * (i - 1) / scan;
            b = t;
        }
        prev = cur;
    }
    if (changes == 0) throw NoRoot("no cone crossing above the spatial node");
    if (changes > 1) throw MultipleRoots("several cone crossings above the spatial node");
    std::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(g, a, b, boost::math::tools::eps_tolerance<double>(52), iters);
    return 0.5 * (r.first + r.second);
}

ConeGraph cone_graph(const SpacetimeChart& chart, const ConeDefiningFunction& f, double t1, const Mat& nodes) {
    const int n = chart.n();
    if (!(t1 > f.p[0])) throw ConfigError("cone graph: the level must lie to the future of p");
    if (nodes.cols() != n - 1) throw ConfigError("cone graph: nodes need d columns");
    ConeGraph out;
    out.t1 = t1;
    std::vector<int> keep;
    std::vector<double> F;
    for (int i = 0; i < nodes.rows(); ++i) {
        const Vec x = nodes.row(i).transpose();
        const double t_hi = f.p[0] + 4.0 * (t1 - f.p[0]) + 4.0 * (x - f.p.tail(n - 1)).norm();
        const double t = cone_graph_point(f, x, t_hi);
        if (t <= t1) {
            keep.push_back(i);
            F.push_back(t);
        }
    }
    out.nodes.resize(static_cast<int>(keep.size()), n - 1);
    out.F.resize(static_cast<int>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) {
        out.nodes.row(static_cast<int>(k)) = nodes.row(keep[k]);
        out.F[static_cast<int>(k)] = F[k];
    }
    // Lipschitz estimate over nearest-spacing pairs.
    const int m = static_cast<int>(out.F.size());
    double hmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
            const double dd = (out.nodes.row(i) - out.nodes.row(j)).norm();
            if (dd > 0.0) hmin = std::min(hmin, dd);
        }
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
            const double dd = (out.nodes.row(i) - out.nodes.row(j)).norm();
            if (dd > 0.0 && dd <= hmin * (1.0 + 1e-9))
                out.lipschitz = std::max(out.lipschitz, std::abs(out.F[i] - out.F[j]) / dd);
        }
    return out;
}

DecayFit trace_decay_exponent(const Vec& s, const Vec& sup_abs, double s_lo, double s_hi, double alpha) {
    DecayFit fit;
    std::vector<double> xs, ys;
    bool zero = false;
    for (int j = 0; j < s.size(); ++j) {
        if (s[j] < s_lo || s[j] > s_hi) continue;
        xs.push_back(s[j]);
        if (!(sup_abs[j] > 0.0) || !std::isfinite(sup_abs[j])) zero = true;
        ys.push_back(sup_abs[j] > 0.0 ? std::log(sup_abs[j]) : 0.0);
    }
    fit.points = static_cast<int>(xs.size());
    if (fit.points < 8) throw WindowTooShort("decay fit window holds fewer than 8 grid points");
    if (zero) {
        fit.valid = false;
        fit.slope_s = fit.slope_log_v = std::numeric_limits<double>::quiet_NaN();
        return fit;
    }
    const double n = fit.points;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < fit.points; ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    fit.slope_s = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double icpt = (sy - fit.slope_s * sx) / n;
    double rr = 0.0;
    for (int i = 0; i < fit.points; ++i) rr += std::pow(ys[i] - icpt - fit.slope_s * xs[i], 2);
    fit.residual = std::sqrt(rr / n);
    fit.slope_log_v = fit.slope_s * alpha;
    fit.valid = true;
    return fit;
}

}  // namespace lightcone::geometry
