#include <cmath>
#include <numbers>
#include <stdexcept>

#include <gsl/gsl_integration.h>

#include "lightcone/sphere.hpp"

namespace lightcone::sphere {

void gauss_legendre(int n, double a, double b, Vec& x, Vec& w) {
    gsl_integration_glfixed_table* t = gsl_integration_glfixed_table_alloc(static_cast<std::size_t>(n));
    if (!t) throw std::runtime_error("gauss_legendre: allocation failed");
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < n; ++i) gsl_integration_glfixed_point(a, b, static_cast<std::size_t>(i), &x[i], &w[i], t);
    gsl_integration_glfixed_table_free(t);
}

double real_harmonic(int l, int m, double polar, double azimuth) {
    const int am = std::abs(m);
    const double p = std::sph_legendre(static_cast<unsigned>(l), static_cast<unsigned>(am), polar);
    if (m == 0) return p;
    if (m > 0) return std::numbers::sqrt2 * p * std::cos(am * azimuth);
    return std::numbers::sqrt2 * p * std::sin(am * azimuth);
}

Mat AngularGrid::metric(int node) const {
    if (d == 2) return Mat::Identity(1, 1);
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = 1.0;
    m(1, 1) = sqrt_m[node] * sqrt_m[node];
    return m;
}

AngularGrid make_angular_grid(int d, int L) {
    if (d != 2 && d != 3) throw std::invalid_argument("angular grid supports d = 2 or 3");
    if (L < 0) throw std::invalid_argument("angular truncation must be non-negative");
    AngularGrid g;
    g.d = d;
    g.L = L;
    const double pi = std::numbers::pi;
    const int n_az = 2 * L + 2;
    if (d == 2) {
        g.n_nodes = n_az;
        g.n_modes = 2 * L + 1;
        g.dirs.resize(n_az, 2);
        g.coords.resize(n_az, 1);
        g.weights = Vec::Constant(n_az, 2.0 * pi / n_az);
        g.sqrt_m = Vec::Ones(n_az);
        for (int q = 0; q < n_az; ++q) {
            const double phi = 2.0 * pi * q / n_az;
            g.coords(q, 0) = phi;
            g.dirs(q, 0) = std::cos(phi);
            g.dirs(q, 1) = std::sin(phi);
            Mat dd(2, 1);
            dd << -std::sin(phi), std::cos(phi);
            g.ddirs.push_back(dd);
        }
        g.degree.push_back(0);
        g.order.push_back(0);
        for (int m = 1; m <= L; ++m) {
            g.degree.push_back(m);
            g.order.push_back(m);
            g.degree.push_back(m);
            g.order.push_back(-m);
        }
        g.Y.resize(n_az, g.n_modes);
        for (int q = 0; q < n_az; ++q) {
            const double phi = g.coords(q, 0);
            for (int a = 0; a < g.n_modes; ++a) {
                const int m = g.order[a];
                if (m == 0) g.Y(q, a) = 1.0 / std::sqrt(2.0 * pi);
                else if (m > 0) g.Y(q, a) = std::cos(m * phi) / std::sqrt(pi);
                else g.Y(q, a) = std::sin(-m * phi) / std::sqrt(pi);
            }
        }
    } else {
        Vec x, w;
        gauss_legendre(L + 1, -1.0, 1.0, x, w);
        g.n_nodes = (L + 1) * n_az;
        g.n_modes = (L + 1) * (L + 1);
        g.dirs.resize(g.n_nodes, 3);
        g.coords.resize(g.n_nodes, 2);
        g.weights.resize(g.n_nodes);
        g.sqrt_m.resize(g.n_nodes);
        int q = 0;
        for (int i = 0; i <= L; ++i) {
            const double theta = std::acos(x[i]);
            const double st = std::sin(theta), ct = std::cos(theta);
            for (int k = 0; k < n_az; ++k, ++q) {
                const double phi = 2.0 * pi * k / n_az;
                g.coords(q, 0) = theta;
                g.coords(q, 1) = phi;
                g.dirs(q, 0) = st * std::cos(phi);
                g.dirs(q, 1) = st * std::sin(phi);
                g.dirs(q, 2) = ct;
                g.weights[q] = w[i] * 2.0 * pi / n_az;
                g.sqrt_m[q] = st;
                Mat dd(3, 2);
                dd << ct * std::cos(phi), -st * std::sin(phi),
                      ct * std::sin(phi),  st * std::cos(phi),
                      -st, 0.0;
                g.ddirs.push_back(dd);
            }
        }
        for (int l = 0; l <= L; ++l)
            for (int m = -l; m <= l; ++m) {
                g.degree.push_back(l);
                g.order.push_back(m);
            }
        g.Y.resize(g.n_nodes, g.n_modes);
        for (int n = 0; n < g.n_nodes; ++n)
            for (int a = 0; a < g.n_modes; ++a)
                g.Y(n, a) = real_harmonic(g.degree[a], g.order[a], g.coords(n, 0), g.coords(n, 1));
    }
    g.laplace.resize(g.n_modes);
    for (int a = 0; a < g.n_modes; ++a) {
        const double l = g.degree[a];
        g.laplace[a] = d == 3 ? l * (l + 1.0) : l * l;
    }
    return g;
}

}  // namespace lightcone::sphere
