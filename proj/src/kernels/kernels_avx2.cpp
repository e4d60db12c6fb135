#include "lightcone/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>
#define LIGHTCONE_HAVE_AVX2 1
#else
#define LIGHTCONE_HAVE_AVX2 0
#endif

namespace lightcone::kernels::avx2 {

#if LIGHTCONE_HAVE_AVX2

bool compiled() { return true; }

void leapfrog_row(const StencilRow& r) {
    const double* c = r.cur;
    const bool three = r.zm != nullptr;
    const double diag = three ? 6.0 : 4.0;
    const __m256d two = _mm256_set1_pd(2.0);
    const __m256d lam = _mm256_set1_pd(r.lam2);
    const __m256d dg = _mm256_set1_pd(diag);
    std::size_t i = 1;
    if (r.n >= 2) {
        for (; i + 4 < r.n; i += 4) {
            __m256d cc = _mm256_loadu_pd(c + i);
            __m256d nb = _mm256_add_pd(_mm256_loadu_pd(c + i - 1), _mm256_loadu_pd(c + i + 1));
            nb = _mm256_add_pd(nb, _mm256_add_pd(_mm256_loadu_pd(r.ym + i), _mm256_loadu_pd(r.yp + i)));
            if (three) nb = _mm256_add_pd(nb, _mm256_add_pd(_mm256_loadu_pd(r.zm + i), _mm256_loadu_pd(r.zp + i)));
            __m256d lap = _mm256_fnmadd_pd(dg, cc, nb);
            __m256d v = _mm256_fmsub_pd(two, cc, _mm256_loadu_pd(r.prev + i));
            v = _mm256_fmadd_pd(lam, lap, v);
            if (r.pot) v = _mm256_fnmadd_pd(_mm256_loadu_pd(r.pot + i), cc, v);
            _mm256_storeu_pd(r.next + i, v);
        }
    }
    for (; i + 1 < r.n; ++i) {
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
    const __m256d half = _mm256_set1_pd(0.5);
    const __m256d lam = _mm256_set1_pd(r.lam2);
    std::size_t i = 1;
    for (; i + 4 < r.n; i += 4) {
        __m256d cc = _mm256_loadu_pd(c + i);
        __m256d ac = _mm256_loadu_pd(a + i);
        __m256d fp = _mm256_mul_pd(_mm256_mul_pd(half, _mm256_add_pd(ac, _mm256_loadu_pd(a + i + 1))),
                                   _mm256_sub_pd(_mm256_loadu_pd(c + i + 1), cc));
        __m256d fm = _mm256_mul_pd(_mm256_mul_pd(half, _mm256_add_pd(_mm256_loadu_pd(a + i - 1), ac)),
                                   _mm256_sub_pd(cc, _mm256_loadu_pd(c + i - 1)));
        __m256d flux = _mm256_sub_pd(fp, fm);
        fp = _mm256_mul_pd(_mm256_mul_pd(half, _mm256_add_pd(ac, _mm256_loadu_pd(r.ayp + i))),
                           _mm256_sub_pd(_mm256_loadu_pd(r.yp + i), cc));
        fm = _mm256_mul_pd(_mm256_mul_pd(half, _mm256_add_pd(ac, _mm256_loadu_pd(r.aym + i))),
                           _mm256_sub_pd(cc, _mm256_loadu_pd(r.ym + i)));
        flux = _mm256_add_pd(flux, _mm256_sub_pd(fp, fm));
        if (three) {
            fp = _mm256_mul_pd(_mm256_mul_pd(half, _mm256_add_pd(ac, _mm256_loadu_pd(r.azp + i))),
                               _mm256_sub_pd(_mm256_loadu_pd(r.zp + i), cc));
            fm = _mm256_mul_pd(_mm256_mul_pd(half, _mm256_add_pd(ac, _mm256_loadu_pd(r.azm + i))),
                               _mm256_sub_pd(cc, _mm256_loadu_pd(r.zm + i)));
            flux = _mm256_add_pd(flux, _mm256_sub_pd(fp, fm));
        }
        __m256d num = _mm256_mul_pd(_mm256_loadu_pd(r.atm + i), _mm256_sub_pd(cc, _mm256_loadu_pd(r.prev + i)));
        num = _mm256_fmadd_pd(lam, flux, num);
        if (r.pot) num = _mm256_fnmadd_pd(_mm256_loadu_pd(r.pot + i), cc, num);
        _mm256_storeu_pd(r.next + i, _mm256_add_pd(cc, _mm256_div_pd(num, _mm256_loadu_pd(r.atp + i))));
    }
    for (; i + 1 < r.n; ++i) {
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
    double* xd = reinterpret_cast<double*>(x);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d m = _mm256_castpd128_pd256(_mm_loadu_pd(mult + i));
        m = _mm256_permute4x64_pd(m, 0x50);
        _mm256_storeu_pd(xd + 2 * i, _mm256_mul_pd(_mm256_loadu_pd(xd + 2 * i), m));
    }
    for (; i < n; ++i) x[i] *= mult[i];
}

void mul_complex(cplx* x, const cplx* y, std::size_t n) {
    double* xd = reinterpret_cast<double*>(x);
    const double* yd = reinterpret_cast<const double*>(y);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d xv = _mm256_loadu_pd(xd + 2 * i);
        __m256d yv = _mm256_loadu_pd(yd + 2 * i);
        __m256d yr = _mm256_movedup_pd(yv);
        __m256d yi = _mm256_permute_pd(yv, 0xF);
        __m256d xs = _mm256_permute_pd(xv, 0x5);
        _mm256_storeu_pd(xd + 2 * i, _mm256_fmaddsub_pd(xv, yr, _mm256_mul_pd(xs, yi)));
    }
    for (; i < n; ++i) x[i] *= y[i];
}

cplx weighted_dot(const cplx* a, const cplx* b, const double* w, std::size_t n) {
    const double* ad = reinterpret_cast<const double*>(a);
    const double* bd = reinterpret_cast<const double*>(b);
    __m256d acc_re = _mm256_setzero_pd();
    __m256d acc_im = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d wv = _mm256_permute4x64_pd(_mm256_castpd128_pd256(_mm_loadu_pd(w + i)), 0x50);
        __m256d av = _mm256_mul_pd(wv, _mm256_loadu_pd(ad + 2 * i));
        __m256d bv = _mm256_loadu_pd(bd + 2 * i);
        acc_re = _mm256_fmadd_pd(av, bv, acc_re);
        acc_im = _mm256_fmadd_pd(av, _mm256_permute_pd(bv, 0x5), acc_im);
    }
    alignas(32) double re[4], im[4];
    _mm256_store_pd(re, acc_re);
    _mm256_store_pd(im, acc_im);
    double sre = (re[0] + re[2]) + (re[1] + re[3]);
    double sim = (im[0] + im[2]) - (im[1] + im[3]);
    for (; i < n; ++i) {
        const double ar = a[i].real(), ai = a[i].imag(), br = b[i].real(), bi = b[i].imag();
        sre += w[i] * (ar * br + ai * bi);
        sim += w[i] * (ar * bi - ai * br);
    }
    return {sre, sim};
}

#else

bool compiled() { return false; }
void leapfrog_row(const StencilRow& r) { scalar::leapfrog_row(r); }
void weighted_row(const WeightedRow& r) { scalar::weighted_row(r); }
void scale_complex(cplx* x, const double* m, std::size_t n) { scalar::scale_complex(x, m, n); }
void mul_complex(cplx* x, const cplx* y, std::size_t n) { scalar::mul_complex(x, y, n); }
cplx weighted_dot(const cplx* a, const cplx* b, const double* w, std::size_t n) {
    return scalar::weighted_dot(a, b, w, n);
}

#endif

}  // namespace lightcone::kernels::avx2
