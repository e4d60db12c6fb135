#pragma once

// Quadrature and harmonic bases on the unit sphere S^{d-1} (d = 2 or 3).

#include <vector>

#include "lightcone/types.hpp"

namespace lightcone::sphere {

struct AngularGrid {
    int d = 3;
    int L = 7;
    int n_nodes = 0;
    int n_modes = 0;
    Mat dirs;                // n_nodes x d unit vectors
    Mat coords;              // n_nodes x (d-1): (polar, azimuth) or (azimuth)
    Vec weights;             // quadrature weights including |m|^{1/2}
    Vec sqrt_m;              // |m|^{1/2} at each node
    std::vector<Mat> ddirs;  // per node, d x (d-1) derivative of dirs w.r.t. coords
    Mat Y;                   // n_nodes x n_modes real orthonormal basis values
    std::vector<int> degree; // l for d = 3, |m| for d = 2
    std::vector<int> order;  // signed m; for d = 2 positive means cosine, negative sine
    Vec laplace;             // -Laplace-Beltrami eigenvalue per mode

    // Angular metric m_ij at a node.
    Mat metric(int node) const;
};

// d = 3: (L+1) Gauss-Legendre nodes in cos(polar) times 2L+2 uniform azimuths.
// d = 2: 2L+2 uniform nodes on the circle.
AngularGrid make_angular_grid(int d, int L);

double real_harmonic(int l, int m, double polar, double azimuth);

// Gauss-Legendre nodes and weights on [a, b].
void gauss_legendre(int n, double a, double b, Vec& x, Vec& w);

}  // namespace lightcone::sphere
