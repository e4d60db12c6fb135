#include <cmath>
#include <numbers>

#include "lightcone/boundary.hpp"
#include "lightcone/errors.hpp"

namespace lightcone::boundary {

double sobolev_norm(const BoundaryFunction& g, double k, double kp) {
    return apply_multiplier(g, mult_sobolev(*g.grid(), k, kp)).data().norm();
}

Vec taper_profile(const BoundaryGrid& g, double fraction) {
    Vec w = Vec::Ones(g.n_s());
    const double edge = fraction * g.length();
    if (edge <= 0.0) return w;
    for (int j = 0; j < g.n_s(); ++j) {
        const double lo = g.s_nodes()[j] - g.s_min();
        const double hi = g.length() - lo;
        const double e = std::min(lo, hi);
        if (e < edge) w[j] = 0.5 * (1.0 - std::cos(std::numbers::pi * e / edge));
    }
    return w;
}

BoundaryFunction apply_taper(const BoundaryFunction& g, double fraction) {
    CMat v = g.nodes();
    const Vec w = taper_profile(*g.grid(), fraction);
    for (int j = 0; j < v.cols(); ++j) v.col(j) *= w[j];
    return BoundaryFunction::from_nodes(g.grid(), std::move(v));
}

namespace {

// Angular coefficients on the s-nodes and their s-derivatives.
void angular_profile(const BoundaryFunction& psi, CMat& c, CMat& dc) {
    const BoundaryGrid& g = *psi.grid();
    const CMat spec = psi.spectral();
    c = ifft_s(g, spec);
    CMat d = spec;
    for (int n = 0; n < g.n_s(); ++n) d.col(n) *= cplx(0.0, g.sigma_eff(n));
    dc = ifft_s(g, d);
}

}  // namespace

double weighted_cone_norm(const BoundaryFunction& psi, const WeightedNormOptions& opt) {
    const BoundaryGrid& g = *psi.grid();
    if (opt.s0.size() > 0) {
        if (opt.s0.size() != g.n_ang()) throw GridMismatch("cap profile needs one value per angular node");
        const CMat v = psi.nodes();
        double outside = 0.0, total = 0.0;
        for (int j = 0; j < g.n_s(); ++j)
            for (int q = 0; q < g.n_ang(); ++q) {
                const double m = std::norm(v(q, j)) * g.angular().weights[q];
                total += m;
                if (g.s_nodes()[j] > opt.s0[q]) outside += m;
            }
        if (total > 0.0 && outside > opt.support_tol * total)
            throw SupportViolation("function extends beyond the cone cap");
    }
    CMat c, dc;
    angular_profile(psi, c, dc);
    const Vec& lam = g.angular().laplace;
    double sum = 0.0;
    for (int j = 0; j < g.n_s(); ++j) {
        const double wr = g.ds() * std::exp(-g.s_nodes()[j] / opt.alpha);
        double acc = 0.0;
        for (int a = 0; a < g.n_ang_modes(); ++a) acc += std::norm(dc(a, j)) + (1.0 + lam[a]) * std::norm(c(a, j));
        sum += wr * acc;
    }
    return std::sqrt(sum);
}

Vec weighted_features(const BoundaryFunction& psi, double alpha) {
    const BoundaryGrid& g = *psi.grid();
    CMat c, dc;
    angular_profile(psi, c, dc);
    const Vec& lam = g.angular().laplace;
    const int na = g.n_ang_modes();
    Vec f(4 * na * g.n_s());
    int k = 0;
    for (int j = 0; j < g.n_s(); ++j) {
        const double wr = std::sqrt(g.ds() * std::exp(-g.s_nodes()[j] / alpha));
        for (int a = 0; a < na; ++a) {
            const double sl = std::sqrt(1.0 + lam[a]);
            f[k++] = wr * dc(a, j).real();
            f[k++] = wr * dc(a, j).imag();
            f[k++] = wr * sl * c(a, j).real();
            f[k++] = wr * sl * c(a, j).imag();
        }
    }
    return f;
}

HardyResult hardy_ratio(const HardyProbe& probe, int d) {
    Vec x, w;
    sphere::gauss_legendre(16, 0.0, 1.0, x, w);
    HardyResult r;
    CVec f, df;
    // Geometric grading toward r = 0 resolves power-law behaviour at the tip.
    for (int level = 0; level < 80; ++level) {
        const double hi = probe.r_max * std::pow(0.5, level);
        const double lo = hi * 0.5;
        for (int i = 0; i < x.size(); ++i) {
            const double rr = lo + (hi - lo) * x[i];
            const double wq = (hi - lo) * w[i];
            probe.eval(rr, f, df);
            double grad_r = 0.0, grad_t = 0.0, val = 0.0;
            for (int a = 0; a < f.size(); ++a) {
                grad_r += std::norm(df[a]);
                grad_t += probe.laplace[a] * std::norm(f[a]);
                val += std::norm(f[a]);
            }
            r.numerator += wq * (std::pow(rr, d - 1) * grad_r + std::pow(rr, d - 3) * grad_t);
            r.denominator += wq * std::pow(rr, d - 3) * val;
        }
    }
    r.ratio = r.numerator / r.denominator;
    return r;
}

HardyResult hardy_check(const HardyProbe& probe, int d) {
    if (d < 3) throw DimensionTooLow("Hardy inequality has no positive constant for d < 3");
    return hardy_ratio(probe, d);
}

}  // namespace lightcone::boundary
