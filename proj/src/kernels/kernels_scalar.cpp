#include "lightcone/kernels.hpp"

namespace lightcone::kernels::scalar {

void leapfrog_row(const StencilRow& r) {
    const double* c = r.cur;
    const bool three = r.zm != nullptr;
    const double diag = three ? 6.0 : 4.0;
    for (std::size_t i = 1; i + 1 < r.n; ++i) {
        double nb = c[i - 1] + c[i + 1] + r.ym[i] + r.yp[i];
        if (three) nb += r.zm[i] + r.zp[i];
        double v = 2.0 * c[i] - r.prev[i] + r.lam2 * (nb - diag * c[i]);
        if (r.pot) v -= r.pot[i] * c[i];
        r.next[i] = v;
    }
}

void weighted_row(const WeightedRow& r) {
    const double* c = r.cur;
    const double* a = r.a;
    const bool three = r.zm != nullptr;
    for (std::size_t i = 1; i + 1 < r.n; ++i) {
        double flux = 0.5 * (a[i] + a[i + 1]) * (c[i + 1] - c[i]) - 0.5 * (a[i - 1] + a[i]) * (c[i] - c[i - 1]);
        flux += 0.5 * (a[i] + r.ayp[i]) * (r.yp[i] - c[i]) - 0.5 * (a[i] + r.aym[i]) * (c[i] - r.ym[i]);
        if (three)
            flux += 0.5 * (a[i] + r.azp[i]) * (r.zp[i] - c[i]) - 0.5 * (a[i] + r.azm[i]) * (c[i] - r.zm[i]);
        double num = r.atm[i] * (c[i] - r.prev[i]) + r.lam2 * flux;
        if (r.pot) num -= r.pot[i] * c[i];
        r.next[i] = c[i] + num / r.atp[i];
    }
}

void scale_complex(cplx* x, const double* mult, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= mult[i];
}

void mul_complex(cplx* x, const cplx* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= y[i];
}

cplx weighted_dot(const cplx* a, const cplx* b, const double* w, std::size_t n) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ar = a[i].real(), ai = a[i].imag(), br = b[i].real(), bi = b[i].imag();
        re += w[i] * (ar * br + ai * bi);
        im += w[i] * (ar * bi - ai * br);
    }
    return {re, im};
}

}  // namespace lightcone::kernels::scalar
