#pragma once

// Klein-Gordon dynamics in the cone interior: leapfrog Cauchy solver with a
// spectral oracle, causal propagator, restriction to the cone, bulk pairings,
// the characteristic trace operator and its regularized inverse, and the
// conformal field map.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "lightcone/boundary.hpp"
#include "lightcone/geometry.hpp"
#include "lightcone/states.hpp"

namespace lightcone::bulk {

using json = nlohmann::json;
using boundary::BoundaryFunction;
using geometry::ConeChart;
using geometry::SpacetimeChart;

struct BulkSpec {
    int d = 3;
    double half_width = 1.5;
    double dx = 1.0 / 64.0;
    double courant = 0.5;  // dt / dx
    double t_p = 0.0;      // time of the cone tip
    double t1 = 1.0;       // Sigma_0 level
    double t_end = 1.2;
};

BulkSpec bulk_spec_from_json(const json& j);
json to_json(const BulkSpec& s);

class BulkGrid {
public:
    explicit BulkGrid(BulkSpec spec);

    const BulkSpec& spec() const { return spec_; }
    int d() const { return spec_.d; }
    int nx() const { return n_; }
    int ny() const { return n_; }
    int nz() const { return spec_.d == 3 ? n_ : 1; }
    std::size_t size() const { return static_cast<std::size_t>(nx()) * ny() * nz(); }
    double dx() const { return dx_; }
    double dt() const { return spec_.courant * dx_; }
    double half_width() const { return spec_.half_width; }
    double coord(int i) const { return -spec_.half_width + i * dx_; }
    std::size_t index(int i, int j, int k = 0) const {
        return static_cast<std::size_t>(i) + static_cast<std::size_t>(nx()) * (j + static_cast<std::size_t>(ny()) * k);
    }
    double cell_volume() const;
    // Spatial position of a flat index.
    void position(std::size_t idx, double* x) const;

private:
    BulkSpec spec_;
    int n_ = 0;
    double dx_ = 0.0;
};

using Field = std::vector<double>;

struct CauchyData {
    double t = 0.0;
    Field phi0;  // value
    Field phi1;  // time derivative d_t phi
    bool h10 = false;
};

// Compactly supported space-time bump
//   u = amplitude (1 - ((t - tc)/tau)^2)^p (1 - |x - xc|^2 / rho^2)^p.
struct Source {
    double tc = 0.6, tau = 0.1;
    std::vector<double> xc;  // d entries
    double rho = 0.1;
    double amplitude = 1.0;
    int power = 6;
    double operator()(double t, const double* x, int d) const;
    double t_lo() const { return tc - tau; }
    double t_hi() const { return tc + tau; }
};

// Compact spatial bump used as Cauchy data: amplitude (1 - |x - xc|^2/rho^2)^p,
// optionally multiplied by a plane wave cos(k.x).
struct Packet {
    std::vector<double> xc;
    double rho = 0.3;
    double amplitude = 1.0;
    int power = 6;
    std::vector<double> k;  // empty: no modulation
    double value(const double* x, int d) const;
};
Field sample(const BulkGrid& g, const std::function<double(const double*)>& f);
CauchyData packet_data(const BulkGrid& g, double t, const Packet& value, const Packet* velocity);

// Evolution levels seen by observers; index 3 is the newest level.
struct LevelView {
    const double* level[4] = {nullptr, nullptr, nullptr, nullptr};
    double t[4] = {0, 0, 0, 0};
    int available = 0;  // how many of the four are valid (newest first)
    int dir = 1;
};

class Observer {
public:
    virtual ~Observer() = default;
    virtual void on_level(const LevelView& v) = 0;
};

class Leapfrog {
public:
    Leapfrog(const BulkGrid& g, const SpacetimeChart& chart, const Source* source = nullptr);

    // Taylor start: levels at t - dir dt, t, t + dir dt.
    void start(const CauchyData& data, int dir);
    // Exact restart from two stored levels; behind sits at t_here - dir dt.
    void resume(const Field& behind, const Field& here, double t_here, int dir);
    void step();
    double time() const { return times_[3]; }
    int dir() const { return dir_; }
    LevelView view() const;
    void add_observer(Observer* o) { observers_.push_back(o); }
    // Run until time() passes t_stop (in the direction of travel).
    void run_to(double t_stop);

    double energy() const;  // conserved discrete energy between the two newest levels (flat charts)
    bool weighted() const { return !chart_.flat(); }

    // Coefficient fields of the conservative scheme at time t.
    void coefficients(double t, Field& A, Field& Q) const;

private:
    const BulkGrid& g_;
    const SpacetimeChart& chart_;
    const Source* source_;
    int dir_ = 1;
    Field lv_[4];
    double times_[4] = {0, 0, 0, 0};
    int avail_ = 0;
    Field pot_;  // dt^2 r for flat charts
    Field A_mid_prev_, A_mid_next_, A_now_, Q_now_;
    std::vector<Observer*> observers_;
    double e0_ = 0.0;
    bool drove_ = false;
    int steps_ = 0;
    void notify();
    void add_source(double t, Field& next, const Field* atp) const;
    void laplace(const Field& in, Field& out) const;
};

// Stored slices of a solution: value, centred time derivative and both neighbours.
struct Slice {
    double t = 0.0;
    Field lo, value, hi;  // levels at t - dt, t, t + dt (absolute time order)
    Field dvalue;
};

struct BulkField {
    std::shared_ptr<const BulkGrid> grid;
    geometry::ChartSpec chart;
    std::vector<Slice> slices;
    const Slice& nearest(double t) const;
};

class SliceRecorder : public Observer {
public:
    SliceRecorder(const BulkGrid& g, std::vector<double> times);
    void on_level(const LevelView& v) override;
    std::vector<Slice> slices;

private:
    const BulkGrid& g_;
    std::vector<double> want_;
    std::vector<char> done_;
};

struct SolveOptions {
    std::vector<double> store_times;
};

// Evolves data both ways from data.t and keeps slices at the requested times.
BulkField solve_cauchy(const CauchyData& data, std::shared_ptr<const BulkGrid> grid, const SpacetimeChart& chart,
                       const SolveOptions& opt);

// Exact evolution of periodic Fourier modes (flat chart, constant mass).
CauchyData spectral_evolve(const BulkGrid& g, const CauchyData& data, double t, double mass2 = 0.0);

double l2_norm(const BulkGrid& g, const Field& f);
double l2_diff(const BulkGrid& g, const Field& a, const Field& b);

// Discrete residual of P at the middle level of a slice (interior nodes, max norm).
double kg_residual(const BulkGrid& g, const SpacetimeChart& chart, const Slice& s, const Source* src = nullptr);

// --- cone restriction ---

struct RestrictOptions {
    bool cubic = false;
    double taper = 0.05;
    bool cap_at_t1 = false;  // zero the trace above Sigma_0 (cone cap)
};

class ConeRestrictor : public Observer {
public:
    ConeRestrictor(const BulkGrid& g, const ConeChart& cone, const std::vector<int>& nodes, bool cubic);
    void on_level(const LevelView& v) override;
    // Values phi(X) at the assigned cone nodes (not yet divided by beta).
    const std::vector<double>& values() const { return values_; }
    bool complete() const;

private:
    struct Stencil {
        std::size_t base;
        double w[3][4];
        int width;
        double t;
        int node;
    };
    const BulkGrid& g_;
    bool cubic_;
    std::vector<Stencil> st_;
    std::vector<double> values_;
    std::vector<char> done_;
    double spatial(const double* lv, const Stencil& s) const;
};

// Trace beta^{-1} phi on the cone of the solution with the given data.
BoundaryFunction restrict_to_cone(const CauchyData& data, const BulkGrid& g, const SpacetimeChart& chart,
                                  const ConeChart& cone, const boundary::GridPtr& bgrid, const RestrictOptions& opt = {});
// Same trace with levels from exact Fourier evolution instead of leapfrog (flat, constant mass).
BoundaryFunction restrict_spectral(const CauchyData& data, const BulkGrid& g, double mass2, const ConeChart& cone,
                                   const boundary::GridPtr& bgrid, const RestrictOptions& opt = {});
// Same for an analytic field phi(t, x).
BoundaryFunction restrict_analytic(const std::function<double(double, const double*)>& phi, const ConeChart& cone,
                                   const boundary::GridPtr& bgrid, const RestrictOptions& opt = {});

// --- causal propagator ---

struct Propagated {
    CauchyData at_tb;  // Eu at a level above the source support (Eu = E+ u there)
};
Propagated causal_data(const Source& u, const BulkGrid& g, const SpacetimeChart& chart);
// Eu sampled on slices. Eu is homogeneous, so its data above the source fix it everywhere.
BulkField causal_propagator(const Source& u, std::shared_ptr<const BulkGrid> grid, const SpacetimeChart& chart,
                            const std::vector<double>& times);
// <u1, E u2> by space-time quadrature.
double propagator_pairing(const Source& u1, const Source& u2, const BulkGrid& g, const SpacetimeChart& chart);
BoundaryFunction causal_trace(const Source& u, const BulkGrid& g, const SpacetimeChart& chart, const ConeChart& cone,
                              const boundary::GridPtr& bgrid, const RestrictOptions& opt = {});
void check_support(const Source& u, const BulkGrid& g);

// --- pairings ---

// sigma on a constant-time slice from Cauchy data: int A (phi1_1 phi2_0 - phi1_0 phi2_1), A = Omega^{n-2}.
double symplectic_from_data(const BulkGrid& g, const SpacetimeChart& chart, const CauchyData& a, const CauchyData& b);
// Discrete conserved form between consecutive levels (lo, value) of two slices.
double symplectic_from_levels(const BulkGrid& g, const SpacetimeChart& chart, const Slice& a, const Slice& b);

struct MonomorphismResult {
    double sigma_bulk = 0.0;
    double sigma_boundary = 0.0;
    double residual = 0.0;  // relative
    json to_json() const;
};
MonomorphismResult verify_monomorphism(const CauchyData& a, const CauchyData& b, const BulkGrid& g,
                                       const SpacetimeChart& chart, const ConeChart& cone,
                                       const boundary::GridPtr& bgrid, const RestrictOptions& opt = {});

struct TwoPointResult {
    cplx lambda_plus = 0.0, lambda_minus = 0.0;
    double e_pairing = 0.0;  // <u1, E u2>
    double ccr_residual = 0.0;
    json to_json() const;
};
TwoPointResult bulk_two_point(const states::CovariancePair& pair, const BoundaryFunction& trace1,
                              const BoundaryFunction& trace2, double e_pairing);

// --- characteristic (Goursat) problem ---

struct SplineBasis {
    int d = 3;
    int per_axis = 4;
    double h = 0.0;
    double lo = 0.0;  // left end of the first spline support
    std::vector<std::array<int, 3>> idx;
    int count() const { return static_cast<int>(idx.size()); }
    double eval(int k, const double* x) const;
    Vec center(int k) const;
    Mat mass() const;       // L2 Gram
    Mat stiffness() const;  // H1 seminorm Gram
};
// Quadratic tensor B-splines on a cube of half width `half_cube`; max_count > 0
// keeps only the splines closest to the centre.
SplineBasis make_spline_basis(int d, int per_axis, double half_cube, int max_count = 0);
double bspline2(double u);   // cardinal quadratic B-spline on [0, 3]
double dbspline2(double u);

struct TraceOperator {
    SplineBasis basis;
    Mat T;         // features x M, column j is the weighted-norm feature vector of the j-th trace
    Mat G;         // energy Gram on Sigma_0
    Mat G_inv_sqrt;
    Mat G_sqrt;
    Vec singular_values;  // of T G^{-1/2}, descending
    Mat U, V;             // thin singular vectors of T G^{-1/2}
    double alpha = 0.5;
    double t1 = 1.0;
    double condition() const;
};
// Basis columns: first the value slots B_k, then the velocity slots.
TraceOperator assemble_trace_operator(const BulkGrid& g, const SpacetimeChart& chart, const ConeChart& cone,
                                      const boundary::GridPtr& bgrid, const SplineBasis& basis, double alpha,
                                      const RestrictOptions& opt = {});
CauchyData basis_data(const BulkGrid& g, const SplineBasis& basis, const Vec& coeffs, double t1);
Vec trace_features(const BoundaryFunction& trace, double alpha);

struct GoursatResult {
    Vec coeffs;
    double forward_residual = 0.0;  // ||T c - w|| / ||w|| in the weighted norm
    int rank = 0;
    int cut = 0;
};
GoursatResult goursat_solve(const TraceOperator& op, const Vec& w, double cutoff = 1e-8);
// Plain least squares on the first m basis columns of each slot (nested by distance from the centre).
double enrichment_residual(const TraceOperator& op, const Vec& w, int per_slot);
std::vector<int> radial_order(const SplineBasis& basis);
double energy_norm(const TraceOperator& op, const Vec& coeffs);

// --- conformal map ---

// phi' = Omega^{-(n-2)/2} phi for the target chart g' = Omega^2 eta.
BulkField conformal_transform(const BulkField& phi, const SpacetimeChart& target);
Slice conformal_slice(const BulkGrid& g, const SpacetimeChart& target, const Slice& s);

}  // namespace lightcone::bulk
