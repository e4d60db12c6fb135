#pragma once

// Spacetime chart near the base point, the cone defining function, null
// coordinates on the cone and the induced boundary data (h, beta).

#include <string>
#include <vector>

#include "json.hpp"
#include "lightcone/sphere.hpp"
#include "lightcone/types.hpp"

namespace lightcone::geometry {

using json = nlohmann::json;

// Named analytic families. "minkowski" is flat; "conformal-gaussian" is
// g = Omega^2 eta with Omega = 1 + A exp(-|x - c|^2 / w^2) over all n
// coordinates. potential: "zero", "mass" (r = m^2) or "conformal"
// (r = (n-2)/(4(n-1)) R).
struct ChartSpec {
    std::string family = "minkowski";
    int d = 3;  // space dimension, n = d + 1
    double amplitude = 0.1;
    double width = 1.0;
    std::vector<double> center;  // empty means origin
    std::string potential = "zero";
    double mass = 0.0;
    double radius = 1e4;  // coordinate radius of the chart domain
};

ChartSpec chart_spec_from_json(const json& j);
json to_json(const ChartSpec& s);

class SpacetimeChart {
public:
    explicit SpacetimeChart(ChartSpec spec = {});

    const ChartSpec& spec() const { return spec_; }
    int d() const { return spec_.d; }
    int n() const { return spec_.d + 1; }
    bool flat() const { return flat_; }

    double omega(const Vec& x) const;
    Vec dlog_omega(const Vec& x) const;   // d_a ln Omega
    Mat ddlog_omega(const Vec& x) const;  // d_a d_b ln Omega
    Mat metric(const Vec& x) const;
    Mat inverse_metric(const Vec& x) const;
    std::vector<Mat> metric_derivative(const Vec& x) const;  // [c](a,b) = d_c g_ab
    double scalar_curvature(const Vec& x) const;
    double potential(const Vec& x) const;
    // Gamma^a_bc u^b u^c
    Vec christoffel_contract(const Vec& x, const Vec& u) const;
    bool in_domain(const Vec& x) const;

    // Same evaluations on plain coordinates, used by the bulk grid.
    double omega_at(double t, const double* xs) const;
    double potential_at(double t, const double* xs) const;
    void omega_potential_at(double t, const double* xs, double& om, double& pot) const;
    // Same on the tensor grid axis^d at time t, first axis fastest.
    void omega_potential_grid(double t, const std::vector<double>& axis, double* om, double* pot) const;

private:
    ChartSpec spec_;
    bool flat_ = true;
    Vec center_;
    double ln_omega_parts(const Vec& x, Vec* grad, Mat* hess) const;
};

Mat minkowski_eta(int n);

struct ChartInvariantReport {
    double max_symmetry = 0.0;
    double min_abs_det = 0.0;
    int max_negative = 0;
    int min_negative = 0;
    double max_inverse_residual = 0.0;
    double max_derivative_residual = 0.0;  // closed form vs central differences
    bool pass = false;
};
ChartInvariantReport check_chart(const SpacetimeChart& chart, const std::vector<Vec>& samples, double eta_fd = 1e-5);

// f(x) = (x - p)^T Q (x - p). Quadratic defining functions cover the
// supported families exactly since their cones are the flat cones.
struct ConeDefiningFunction {
    Vec p;
    Mat Q;

    double value(const Vec& x) const;
    Vec gradient(const Vec& x) const;  // d_a f
    Mat hessian() const { return 2.0 * Q; }

    // (y^0)^2 - |y|^2 in the normal coordinates y = Omega(p) (x - p).
    static ConeDefiningFunction reference(const SpacetimeChart& chart, const Vec& p);
    static ConeDefiningFunction quadratic(const Vec& p, const Mat& Q);
};

// Null geodesic through p with initial velocity k, sampled at the given
// affine parameters (increasing, starting above 0).
std::vector<Vec> null_geodesic(const SpacetimeChart& chart, const Vec& p, const Vec& k, const std::vector<double>& lambdas,
                               double rel_tol = 1e-12);

// Fits f by integrating null geodesics from p over a direction set and taking
// the quadratic form that vanishes on all samples, normalized so its Hessian
// matches -2 g(p) in least squares.
struct GeodesicFit {
    ConeDefiningFunction f;
    double max_sample_residual = 0.0;
    int n_samples = 0;
};
GeodesicFit fit_from_null_geodesics(const SpacetimeChart& chart, const Vec& p, int n_directions = 24,
                                    double affine_max = 1.0);

struct ValidationOptions {
    int n_directions = 32;
    int samples_per_generator = 16;
    double affine_max = 1.0;
    double fd_step = 1e-3;
};

struct ValidationReport {
    double max_f_on_cone = 0.0;
    double grad_at_p = 0.0;
    double hessian_residual = 0.0;
    double min_grad_on_cone = 0.0;
    int n_samples = 0;
    bool pass = false;
    json to_json() const;
};
ValidationReport validate_hypothesis(const SpacetimeChart& chart, const ConeDefiningFunction& f,
                                     const ValidationOptions& opt = {});

struct NullCoordinateOptions {
    double eps0 = 0.1;
    double rel_tol = 1e-10;
    double abs_tol = 1e-24;
};

struct NormalFormResiduals {
    double max_null = 0.0;         // |g(d_s, d_s)| relative
    double max_cross = 0.0;        // |g(d_s, d_theta)| relative
    double max_normal_form = 0.0;  // |g(d_s, .) + df| relative, i.e. g(d_f, d_s) = -1
    double max_angle_drift = 0.0;  // flat charts: |theta(v, psi) - psi| via the direction of X - p
};

struct LogFit {
    double alpha = 0.0;         // mean over generators of the slope of s against ln(v/eps0)
    double alpha_spread = 0.0;  // max - min of the per-generator slopes
    double k_max = 0.0;         // max |s - alpha ln(v/eps0)|
    double k_slope_max = 0.0;   // max |dk/ds| by finite differences
    std::string convention;
};

struct ConeChart {
    int d = 3;
    double eps0 = 0.1;
    Vec p;
    Vec s;
    sphere::AngularGrid angular;
    // Node index j * n_ang + q for s-node j and angular node q.
    Mat X;  // nodes x n
    Mat V;  // nodes x n, generator d_s = -grad f
    Mat J;  // nodes x n(d-1), column block i = d X / d theta^i
    Mat h;  // nodes x (d-1)^2, row-major
    Vec beta;
    Vec v;  // v = y^0 + |ybar| in normal coordinates at p
    NormalFormResiduals residuals;
    LogFit log_fit;

    int n_s() const { return static_cast<int>(s.size()); }
    int n_ang() const { return angular.n_nodes; }
    int index(int j, int q) const { return j * angular.n_nodes + q; }
    Mat h_at(int node) const;

    json summary() const;
};

ConeChart build_null_coordinates(const SpacetimeChart& chart, const ConeDefiningFunction& f, const Vec& s_nodes,
                                 const sphere::AngularGrid& angular, const NullCoordinateOptions& opt = {});

struct InducedMetric {
    Mat h;
    Vec beta;
};
InducedMetric induced_metric_and_beta(const ConeChart& cone, const SpacetimeChart& chart);

void save_cone(const std::string& path, const ConeChart& cone);
ConeChart load_cone(const std::string& path);

struct ConeGraph {
    Mat nodes;  // N x d spatial points
    Vec F;
    double lipschitz = 0.0;
    double t1 = 0.0;
};
// F(x) = the unique future root t of f(t, x) = 0 for spatial nodes with F <= t1.
ConeGraph cone_graph(const SpacetimeChart& chart, const ConeDefiningFunction& f, double t1, const Mat& nodes);
double cone_graph_point(const ConeDefiningFunction& f, const Vec& x, double t_hi);

struct DecayFit {
    double slope_s = 0.0;      // d log sup|trace| / ds
    double slope_log_v = 0.0;  // d log sup|trace| / d ln v = slope_s * alpha
    double residual = 0.0;
    int points = 0;
    bool valid = false;  // false when the trace vanishes somewhere in the window
};
// Least squares of log sup_theta |trace| against s over [s_lo, s_hi].
DecayFit trace_decay_exponent(const Vec& s, const Vec& sup_abs, double s_lo, double s_hi, double alpha);

}  // namespace lightcone::geometry
