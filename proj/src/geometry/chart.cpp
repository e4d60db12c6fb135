#include <cmath>

#include "lightcone/errors.hpp"
#include "lightcone/geometry.hpp"

namespace lightcone::geometry {

ChartSpec chart_spec_from_json(const json& j) {
    ChartSpec s;
    s.family = j.value("family", s.family);
    s.d = j.value("d", s.d);
    s.amplitude = j.value("amplitude", s.amplitude);
    s.width = j.value("width", s.width);
    if (j.contains("center")) s.center = j.at("center").get<std::vector<double>>();
    s.potential = j.value("potential", s.potential);
    s.mass = j.value("mass", s.mass);
    s.radius = j.value("radius", s.radius);
    return s;
}

json to_json(const ChartSpec& s) {
    json j;
    j["family"] = s.family;
    j["d"] = s.d;
    j["amplitude"] = s.amplitude;
    j["width"] = s.width;
    j["center"] = s.center;
    j["potential"] = s.potential;
    j["mass"] = s.mass;
    j["radius"] = s.radius;
    return j;
}

Mat minkowski_eta(int n) {
    Mat eta = Mat::Identity(n, n);
    eta(0, 0) = -1.0;
    return eta;
}

SpacetimeChart::SpacetimeChart(ChartSpec spec) : spec_(std::move(spec)) {
    if (spec_.d < 1 || spec_.d > 3) throw ConfigError("chart: space dimension must be 1, 2 or 3");
    if (spec_.family == "minkowski") {
        flat_ = true;
    } else if (spec_.family == "conformal-gaussian") {
        flat_ = false;
        if (!(spec_.width > 0.0)) throw ConfigError("chart: width must be positive");
        if (spec_.amplitude <= -1.0) throw ConfigError("chart: amplitude must exceed -1 so that Omega > 0");
    } else {
        throw ConfigError("chart: unknown family '" + spec_.family + "'");
    }
    if (spec_.potential != "zero" && spec_.potential != "mass" && spec_.potential != "conformal")
        throw ConfigError("chart: unknown potential '" + spec_.potential + "'");
    center_ = Vec::Zero(n());
    if (!spec_.center.empty()) {
        if (static_cast<int>(spec_.center.size()) != n()) throw ConfigError("chart: center needs d+1 entries");
        for (int a = 0; a < n(); ++a) center_[a] = spec_.center[a];
    }
}

// Returns Omega and fills d ln Omega, dd ln Omega.
double SpacetimeChart::ln_omega_parts(const Vec& x, Vec* grad, Mat* hess) const {
    const int nn = n();
    if (flat_) {
        if (grad) *grad = Vec::Zero(nn);
        if (hess) *hess = Mat::Zero(nn, nn);
        return 1.0;
    }
    const Vec y = x - center_;
    const double w2 = spec_.width * spec_.width;
    const double e = spec_.amplitude * std::exp(-y.squaredNorm() / w2);
    const double om = 1.0 + e;
    if (grad || hess) {
        const Vec dom = (-2.0 * e / w2) * y;
        if (grad) *grad = dom / om;
        if (hess) {
            Mat dd = (4.0 * e / (w2 * w2)) * (y * y.transpose());
            dd.diagonal().array() -= 2.0 * e / w2;
            *hess = dd / om - (dom * dom.transpose()) / (om * om);
        }
    }
    return om;
}

double SpacetimeChart::omega(const Vec& x) const { return ln_omega_parts(x, nullptr, nullptr); }

Vec SpacetimeChart::dlog_omega(const Vec& x) const {
    Vec g;
    ln_omega_parts(x, &g, nullptr);
    return g;
}

Mat SpacetimeChart::ddlog_omega(const Vec& x) const {
    Mat h;
    ln_omega_parts(x, nullptr, &h);
    return h;
}

Mat SpacetimeChart::metric(const Vec& x) const {
    const double om = omega(x);
    return om * om * minkowski_eta(n());
}

Mat SpacetimeChart::inverse_metric(const Vec& x) const {
    const double om = omega(x);
    return minkowski_eta(n()) / (om * om);
}

std::vector<Mat> SpacetimeChart::metric_derivative(const Vec& x) const {
    Vec g;
    const double om = ln_omega_parts(x, &g, nullptr);
    const Mat eta = minkowski_eta(n());
    std::vector<Mat> out;
    for (int c = 0; c < n(); ++c) out.push_back(2.0 * om * om * g[c] * eta);
    return out;
}

double SpacetimeChart::scalar_curvature(const Vec& x) const {
    if (flat_) return 0.0;
    Vec g;
    Mat hs;
    const double om = ln_omega_parts(x, &g, &hs);
    const Mat eta = minkowski_eta(n());
    const double box = (eta.array() * hs.array()).sum();
    const double sq = g.dot(eta * g);
    const double nn = n();
    return (-2.0 * (nn - 1.0) * box - (nn - 2.0) * (nn - 1.0) * sq) / (om * om);
}

double SpacetimeChart::potential(const Vec& x) const {
    if (spec_.potential == "zero") return 0.0;
    if (spec_.potential == "mass") return spec_.mass * spec_.mass;
    const double nn = n();
    return (nn - 2.0) / (4.0 * (nn - 1.0)) * scalar_curvature(x);
}

Vec SpacetimeChart::christoffel_contract(const Vec& x, const Vec& u) const {
    if (flat_) return Vec::Zero(n());
    const Vec g = dlog_omega(x);
    const Mat eta = minkowski_eta(n());
    const double gu = g.dot(u);
    const double uu = u.dot(eta * u);
    return 2.0 * gu * u - uu * (eta * g);
}

bool SpacetimeChart::in_domain(const Vec& x) const { return x.norm() <= spec_.radius; }

// Pointwise versions for grid loops: closed forms, no allocation. They must
// agree with omega() and potential(); the chart unit tests compare them.
void SpacetimeChart::omega_potential_at(double t, const double* xs, double& om, double& pot) const {
    if (flat_) {
        om = 1.0;
        pot = spec_.potential == "mass" ? spec_.mass * spec_.mass : 0.0;
        return;
    }
    const int nn = n();
    double y[4];
    y[0] = t - center_[0];
    double r2 = y[0] * y[0];
    for (int a = 1; a < nn; ++a) {
        y[a] = xs[a - 1] - center_[a];
        r2 += y[a] * y[a];
    }
    const double w2 = spec_.width * spec_.width;
    const double e = spec_.amplitude * std::exp(-r2 / w2);
    om = 1.0 + e;
    if (spec_.potential == "zero") {
        pot = 0.0;
        return;
    }
    if (spec_.potential == "mass") {
        pot = spec_.mass * spec_.mass;
        return;
    }
    // box and |grad|^2 of ln Omega against eta = diag(-1, 1, ..., 1)
    double box = 0.0, sq = 0.0;
    for (int a = 0; a < nn; ++a) {
        const double sgn = a == 0 ? -1.0 : 1.0;
        const double dom = -2.0 * e / w2 * y[a];
        const double haa = (4.0 * e / (w2 * w2) * y[a] * y[a] - 2.0 * e / w2) / om - dom * dom / (om * om);
        box += sgn * haa;
        sq += sgn * (dom / om) * (dom / om);
    }
    const double fn = nn;
    const double R = (-2.0 * (fn - 1.0) * box - (fn - 2.0) * (fn - 1.0) * sq) / (om * om);
    pot = (fn - 2.0) / (4.0 * (fn - 1.0)) * R;
}

void SpacetimeChart::omega_potential_grid(double t, const std::vector<double>& axis, double* om, double* pot) const {
    const std::size_t m = axis.size();
    const int dd = d();
    const std::size_t total = dd == 1 ? m : dd == 2 ? m * m : m * m * m;
    if (flat_ || spec_.potential != "conformal") {
        std::vector<double> xs(dd);
        for (std::size_t idx = 0; idx < total; ++idx) {
            std::size_t r = idx;
            for (int a = 0; a < dd; ++a) {
                xs[a] = axis[r % m];
                r /= m;
            }
            omega_potential_at(t, xs.data(), om[idx], pot[idx]);
        }
        return;
    }
    // The Gaussian factorises over axes: one exp table per axis.
    const double w2 = spec_.width * spec_.width;
    const double y0 = t - center_[0];
    const double e0 = spec_.amplitude * std::exp(-y0 * y0 / w2);
    std::vector<std::vector<double>> ex(3, std::vector<double>(m, 1.0)), y2(3, std::vector<double>(m, 0.0));
    for (int a = 0; a < dd; ++a)
        for (std::size_t i = 0; i < m; ++i) {
            const double y = axis[i] - center_[a + 1];
            y2[a][i] = y * y;
            ex[a][i] = std::exp(-y * y / w2);
        }
    const double fn = n();
    const double c_pot = (fn - 2.0) / (4.0 * (fn - 1.0));
    const std::size_t mj = dd >= 2 ? m : 1, mk = dd == 3 ? m : 1;
    std::size_t idx = 0;
    for (std::size_t k = 0; k < mk; ++k)
        for (std::size_t j = 0; j < mj; ++j)
            for (std::size_t i = 0; i < m; ++i, ++idx) {
                const double e = e0 * ex[0][i] * ex[1][j] * ex[2][k];
                const double S = -y0 * y0 + y2[0][i] + y2[1][j] + y2[2][k];  // eta(y, y)
                const double o = 1.0 + e;
                const double q = 4.0 * e * e / (w2 * w2) * S / (o * o);
                const double box = (4.0 * e / (w2 * w2) * S - 2.0 * e / w2 * (fn - 2.0)) / o - q;
                om[idx] = o;
                pot[idx] = c_pot * (-2.0 * (fn - 1.0) * box - (fn - 2.0) * (fn - 1.0) * q) / (o * o);
            }
}

double SpacetimeChart::omega_at(double t, const double* xs) const {
    if (flat_) return 1.0;
    const int nn = n();
    double r2 = (t - center_[0]) * (t - center_[0]);
    for (int a = 1; a < nn; ++a) r2 += (xs[a - 1] - center_[a]) * (xs[a - 1] - center_[a]);
    return 1.0 + spec_.amplitude * std::exp(-r2 / (spec_.width * spec_.width));
}

double SpacetimeChart::potential_at(double t, const double* xs) const {
    double om, pot;
    omega_potential_at(t, xs, om, pot);
    return pot;
}

ChartInvariantReport check_chart(const SpacetimeChart& chart, const std::vector<Vec>& samples, double eta_fd) {
    ChartInvariantReport r;
    r.min_abs_det = 1e300;
    r.min_negative = 1 << 20;
    const int n = chart.n();
    for (const Vec& x : samples) {
        const Mat g = chart.metric(x);
        const Mat gi = chart.inverse_metric(x);
        r.max_symmetry = std::max(r.max_symmetry, (g - g.transpose()).cwiseAbs().maxCoeff());
        r.min_abs_det = std::min(r.min_abs_det, std::abs(g.determinant()));
        Eigen::SelfAdjointEigenSolver<Mat> es(g);
        int neg = 0;
        for (int a = 0; a < n; ++a) neg += es.eigenvalues()[a] < 0.0;
        r.max_negative = std::max(r.max_negative, neg);
        r.min_negative = std::min(r.min_negative, neg);
        r.max_inverse_residual = std::max(r.max_inverse_residual, (gi * g - Mat::Identity(n, n)).cwiseAbs().maxCoeff());
        const auto dg = chart.metric_derivative(x);
        for (int c = 0; c < n; ++c) {
            Vec xp = x, xm = x;
            xp[c] += eta_fd;
            xm[c] -= eta_fd;
            const Mat fd = (chart.metric(xp) - chart.metric(xm)) / (2.0 * eta_fd);
            r.max_derivative_residual = std::max(r.max_derivative_residual, (fd - dg[c]).cwiseAbs().maxCoeff());
        }
    }
    r.pass = r.max_symmetry == 0.0 && r.min_abs_det > 1e-12 && r.max_negative == 1 && r.min_negative == 1 &&
             r.max_inverse_residual <= 1e-10;
    return r;
}

}  // namespace lightcone::geometry
