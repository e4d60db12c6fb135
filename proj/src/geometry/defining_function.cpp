#include <cmath>
#include <numbers>

#include <boost/numeric/odeint.hpp>

#include "lightcone/errors.hpp"
#include "lightcone/geometry.hpp"

namespace lightcone::geometry {

namespace odeint = boost::numeric::odeint;
using State = std::vector<double>;

double ConeDefiningFunction::value(const Vec& x) const {
    const Vec y = x - p;
    return y.dot(Q * y);
}

Vec ConeDefiningFunction::gradient(const Vec& x) const { return 2.0 * Q * (x - p); }

ConeDefiningFunction ConeDefiningFunction::reference(const SpacetimeChart& chart, const Vec& p) {
    const double om = chart.omega(p);
    ConeDefiningFunction f;
    f.p = p;
    f.Q = -om * om * minkowski_eta(chart.n());
    return f;
}

ConeDefiningFunction ConeDefiningFunction::quadratic(const Vec& p, const Mat& Q) {
    ConeDefiningFunction f;
    f.p = p;
    f.Q = 0.5 * (Q + Q.transpose());
    return f;
}

std::vector<Vec> null_geodesic(const SpacetimeChart& chart, const Vec& p, const Vec& k, const std::vector<double>& lambdas,
                               double rel_tol) {
    const int n = chart.n();
    State y(2 * n);
    for (int a = 0; a < n; ++a) {
        y[a] = p[a];
        y[n + a] = k[a];
    }
    auto rhs = [&](const State& st, State& dst, double) {
        Vec x(n), u(n);
        for (int a = 0; a < n; ++a) {
            x[a] = st[a];
            u[a] = st[n + a];
        }
        if (!chart.in_domain(x)) throw GeneratorEscapedChart("null geodesic left the chart domain");
        const Vec acc = chart.christoffel_contract(x, u);
        for (int a = 0; a < n; ++a) {
            dst[a] = u[a];
            dst[n + a] = -acc[a];
        }
    };
    std::vector<double> times{0.0};
    times.insert(times.end(), lambdas.begin(), lambdas.end());
    std::vector<Vec> out;
    auto obs = [&](const State& st, double t) {
        if (t == 0.0) return;
        Vec x(n);
        for (int a = 0; a < n; ++a) x[a] = st[a];
        out.push_back(x);
    };
    auto stepper = odeint::make_controlled(1e-30, rel_tol, odeint::runge_kutta_dopri5<State>());
    odeint::integrate_times(stepper, rhs, y, times.begin(), times.end(), 1e-3, obs);
    return out;
}

namespace {

// Deterministic, roughly uniform directions on S^{d-1}.
std::vector<Vec> direction_set(int d, int count) {
    std::vector<Vec> dirs;
    if (d == 1) {
        dirs.push_back(Vec::Constant(1, 1.0));
        dirs.push_back(Vec::Constant(1, -1.0));
        return dirs;
    }
    if (d == 2) {
        for (int i = 0; i < count; ++i) {
            const double a = 2.0 * std::numbers::pi * (i + 0.25) / count;
            Vec v(2);
            v << std::cos(a), std::sin(a);
            dirs.push_back(v);
        }
        return dirs;
    }
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < count; ++i) {
        const double z = 1.0 - 2.0 * (i + 0.5) / count;
        const double r = std::sqrt(1.0 - z * z);
        Vec v(3);
        v << r * std::cos(golden * i), r * std::sin(golden * i), z;
        dirs.push_back(v);
    }
    return dirs;
}

std::vector<Vec> cone_samples(const SpacetimeChart& chart, const Vec& p, int n_dirs, int per_gen, double affine_max,
                              bool both_sheets) {
    const int n = chart.n();
    const double om = chart.omega(p);
    std::vector<double> lam;
    for (int i = 1; i <= per_gen; ++i) lam.push_back(affine_max * i / per_gen);
    std::vector<Vec> pts;
    for (const Vec& psi : direction_set(chart.d(), n_dirs)) {
        for (int sheet = 0; sheet < (both_sheets ? 2 : 1); ++sheet) {
            Vec k(n);
            k[0] = sheet == 0 ? 1.0 : -1.0;
            k.tail(n - 1) = psi;
            k /= om;
            for (Vec& x : null_geodesic(chart, p, k, lam)) pts.push_back(std::move(x));
        }
    }
    return pts;
}

}  // namespace

GeodesicFit fit_from_null_geodesics(const SpacetimeChart& chart, const Vec& p, int n_directions, double affine_max) {
    const int n = chart.n();
    const auto pts = cone_samples(chart, p, n_directions, 8, affine_max, true);
    const int nmono = n * (n + 1) / 2;
    Mat A(static_cast<int>(pts.size()), nmono);
    for (int r = 0; r < A.rows(); ++r) {
        const Vec y = pts[r] - p;
        const double s = 1.0 / y.squaredNorm();
        int c = 0;
        for (int a = 0; a < n; ++a)
            for (int b = a; b < n; ++b) A(r, c++) = y[a] * y[b] * s;
    }
    Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeFullV);
    const Vec coef = svd.matrixV().col(nmono - 1);
    Mat Q(n, n);
    int c = 0;
    for (int a = 0; a < n; ++a)
        for (int b = a; b < n; ++b) {
            const double v = coef[c++];
            if (a == b) Q(a, a) = v;
            else Q(a, b) = Q(b, a) = 0.5 * v;
        }
    const Mat g = chart.metric(p);
    const double scale = -(Q.array() * g.array()).sum() / (Q.array() * Q.array()).sum();
    GeodesicFit fit;
    fit.f = ConeDefiningFunction::quadratic(p, scale * Q);
    fit.n_samples = static_cast<int>(pts.size());
    for (const Vec& x : pts) fit.max_sample_residual = std::max(fit.max_sample_residual, std::abs(fit.f.value(x)));
    return fit;
}

json ValidationReport::to_json() const {
    json j;
    j["max_f_on_cone"] = max_f_on_cone;
    j["grad_at_p"] = grad_at_p;
    j["hessian_residual"] = hessian_residual;
    j["min_grad_on_cone"] = min_grad_on_cone;
    j["n_samples"] = n_samples;
    j["pass"] = pass;
    return j;
}

ValidationReport validate_hypothesis(const SpacetimeChart& chart, const ConeDefiningFunction& f,
                                     const ValidationOptions& opt) {
    const int n = chart.n();
    ValidationReport r;
    // Hessian by central second differences at p.
    const double h = opt.fd_step;
    Mat H(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            Vec e = Vec::Zero(n), e2 = Vec::Zero(n);
            e[a] = h;
            e2[b] = h;
            H(a, b) = (f.value(f.p + e + e2) - f.value(f.p + e - e2) - f.value(f.p - e + e2) + f.value(f.p - e - e2)) /
                      (4.0 * h * h);
        }
    r.hessian_residual = (H + 2.0 * chart.metric(f.p)).cwiseAbs().maxCoeff();
    r.grad_at_p = f.gradient(f.p).cwiseAbs().maxCoeff();

    const auto pts = cone_samples(chart, f.p, opt.n_directions, opt.samples_per_generator, opt.affine_max, false);
    r.n_samples = static_cast<int>(pts.size());
    r.min_grad_on_cone = 1e300;
    for (const Vec& x : pts) {
        r.max_f_on_cone = std::max(r.max_f_on_cone, std::abs(f.value(x)));
        const double gn = f.gradient(x).norm();
        r.min_grad_on_cone = std::min(r.min_grad_on_cone, gn / (x - f.p).norm());
        if (gn <= 1e-12 * std::max(1.0, (x - f.p).norm()))
            throw NonVanishingGradientOnCone("gradient of f vanishes at a cone sample away from p");
    }
    if (r.hessian_residual > 1e-4)
        throw HessianMismatch("Hessian of f at p differs from -2 g(p) by " + std::to_string(r.hessian_residual));
    r.pass = r.max_f_on_cone <= 1e-8 && r.grad_at_p <= 1e-8 && r.hessian_residual <= 1e-6;
    return r;
}

}  // namespace lightcone::geometry
