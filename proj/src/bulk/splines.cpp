#include <cmath>

#include "lightcone/bulk.hpp"
#include "lightcone/errors.hpp"
#include "lightcone/sphere.hpp"

namespace lightcone::bulk {

double bspline2(double u) {
    if (u <= 0.0 || u >= 3.0) return 0.0;
    if (u < 1.0) return 0.5 * u * u;
    if (u < 2.0) return 0.5 * (-2.0 * u * u + 6.0 * u - 3.0);
    return 0.5 * (3.0 - u) * (3.0 - u);
}

double dbspline2(double u) {
    if (u <= 0.0 || u >= 3.0) return 0.0;
    if (u < 1.0) return u;
    if (u < 2.0) return -2.0 * u + 3.0;
    return -(3.0 - u);
}

SplineBasis make_spline_basis(int d, int per_axis, double half_cube, int max_count) {
    if (d != 2 && d != 3) throw ConfigError("spline basis supports d = 2 or 3");
    if (per_axis < 1 || !(half_cube > 0.0)) throw ConfigError("spline basis needs per_axis >= 1 and a positive cube");
    SplineBasis b;
    b.d = d;
    b.per_axis = per_axis;
    b.h = 2.0 * half_cube / (per_axis + 2);
    b.lo = -half_cube;
    const int nz = d == 3 ? per_axis : 1;
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < per_axis; ++j)
            for (int i = 0; i < per_axis; ++i) b.idx.push_back({i, j, k});
    if (max_count > 0 && max_count < b.count()) {
        const std::vector<int> order = radial_order(b);
        std::vector<std::array<int, 3>> kept;
        for (int m = 0; m < max_count; ++m) kept.push_back(b.idx[order[m]]);
        b.idx = std::move(kept);
    }
    return b;
}

double SplineBasis::eval(int k, const double* x) const {
    double v = 1.0;
    for (int a = 0; a < d; ++a) {
        v *= bspline2((x[a] - lo) / h - idx[k][a]);
        if (v == 0.0) return 0.0;
    }
    return v;
}

Vec SplineBasis::center(int k) const {
    Vec c(d);
    for (int a = 0; a < d; ++a) c[a] = lo + (idx[k][a] + 1.5) * h;
    return c;
}

namespace {

// 1D Gram matrices of the cardinal splines on the lattice (exact: Gauss-Legendre per cell).
void gram_1d(const SplineBasis& b, Mat& M, Mat& K) {
    const int m = b.per_axis;
    M = Mat::Zero(m, m);
    K = Mat::Zero(m, m);
    Vec x, w;
    sphere::gauss_legendre(3, 0.0, 1.0, x, w);
    for (int cell = 0; cell < m + 2; ++cell)
        for (int q = 0; q < x.size(); ++q) {
            const double u = cell + x[q];
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) {
                    M(i, j) += w[q] * b.h * bspline2(u - i) * bspline2(u - j);
                    K(i, j) += w[q] / b.h * dbspline2(u - i) * dbspline2(u - j);
                }
        }
}

}  // namespace

Mat SplineBasis::mass() const {
    Mat M, K;
    gram_1d(*this, M, K);
    const int n = count();
    Mat G(n, n);
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) {
            double v = 1.0;
            for (int a = 0; a < d; ++a) v *= M(idx[p][a], idx[q][a]);
            G(p, q) = v;
        }
    return G;
}

Mat SplineBasis::stiffness() const {
    Mat M, K;
    gram_1d(*this, M, K);
    const int n = count();
    Mat G = Mat::Zero(n, n);
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q)
            for (int deriv = 0; deriv < d; ++deriv) {
                double v = 1.0;
                for (int a = 0; a < d; ++a) v *= (a == deriv ? K : M)(idx[p][a], idx[q][a]);
                G(p, q) += v;
            }
    return G;
}

CauchyData basis_data(const BulkGrid& g, const SplineBasis& basis, const Vec& coeffs, double t1) {
    const int n = basis.count();
    if (coeffs.size() != 2 * n) throw ConfigError("coefficient vector does not match the spline basis");
    if (g.d() != basis.d) throw ConfigError("spline basis and bulk grid dimensions differ");
    CauchyData c;
    c.t = t1;
    c.h10 = true;
    c.phi0.assign(g.size(), 0.0);
    c.phi1.assign(g.size(), 0.0);
    const int m = basis.per_axis;
    const double hi = basis.lo + (m + 2) * basis.h;
    const int i0 = std::max(0, static_cast<int>(std::floor((basis.lo + g.half_width()) / g.dx())));
    const int i1 = std::min(g.nx() - 1, static_cast<int>(std::ceil((hi + g.half_width()) / g.dx())));
    const int k0 = g.d() == 3 ? i0 : 0, k1 = g.d() == 3 ? i1 : 0;
    std::vector<double> bx(m), by(m), bz(g.d() == 3 ? m : 1, 1.0);
    for (int k = k0; k <= k1; ++k) {
        if (g.d() == 3)
            for (int a = 0; a < m; ++a) bz[a] = bspline2((g.coord(k) - basis.lo) / basis.h - a);
        for (int j = i0; j <= i1; ++j) {
            for (int a = 0; a < m; ++a) by[a] = bspline2((g.coord(j) - basis.lo) / basis.h - a);
            for (int i = i0; i <= i1; ++i) {
                for (int a = 0; a < m; ++a) bx[a] = bspline2((g.coord(i) - basis.lo) / basis.h - a);
                double v0 = 0.0, v1 = 0.0;
                for (int p = 0; p < n; ++p) {
                    const auto& id = basis.idx[p];
                    const double b = bx[id[0]] * by[id[1]] * bz[g.d() == 3 ? id[2] : 0];
                    if (b == 0.0) continue;
                    v0 += coeffs[p] * b;
                    v1 += coeffs[n + p] * b;
                }
                const std::size_t c_idx = g.index(i, j, k);
                c.phi0[c_idx] = v0;
                c.phi1[c_idx] = v1;
            }
        }
    }
    return c;
}

}  // namespace lightcone::bulk
