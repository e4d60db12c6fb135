#pragma once

// Discretized boundary R x S^{d-1}: periodic s-grid with an FFT, angular
// quadrature with real harmonics, spectral multipliers, norms and the shift
// map g(s, theta) -> g(s + b(theta), theta).

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "lightcone/io.hpp"
#include "lightcone/sphere.hpp"
#include "lightcone/types.hpp"

namespace lightcone::boundary {

using json = nlohmann::json;

struct GridSpec {
    int d = 3;
    int n_s = 128;
    double s_min = -12.0;
    double s_max = 4.0;
    int L = 7;
};

GridSpec grid_spec_from_json(const json& j);
json to_json(const GridSpec& g);

class BoundaryGrid {
public:
    explicit BoundaryGrid(GridSpec spec);

    const GridSpec& spec() const { return spec_; }
    int d() const { return spec_.d; }
    int n_s() const { return spec_.n_s; }
    int L() const { return spec_.L; }
    double s_min() const { return spec_.s_min; }
    double length() const { return spec_.s_max - spec_.s_min; }
    double ds() const { return length() / spec_.n_s; }
    const Vec& s_nodes() const { return s_nodes_; }
    const sphere::AngularGrid& angular() const { return ang_; }
    int n_ang() const { return ang_.n_nodes; }
    int n_ang_modes() const { return ang_.n_modes; }
    int n_modes() const { return spec_.n_s * ang_.n_modes; }
    int mode(int n, int a) const { return n * ang_.n_modes + a; }

    // Fourier frequency of column n and the effective one (0 on the excluded
    // zero and Nyquist columns).
    double sigma(int n) const { return sigma_[n]; }
    double sigma_eff(int n) const { return sigma_eff_[n]; }
    double sigma_max() const;
    bool admissible_column(int n) const { return sigma_eff_[n] != 0.0; }
    bool admissible(int mode) const { return admissible_column(mode / ang_.n_modes); }
    std::vector<int> admissible_modes() const;

    Vec mode_sigma() const;   // per mode, effective
    Vec mode_lambda() const;  // per mode, -Laplace eigenvalue
    Vec node_weights() const; // per node (q + j n_ang), w_q ds

    std::string hash() const;
    bool same(const BoundaryGrid& o) const { return hash() == o.hash(); }

private:
    GridSpec spec_;
    Vec s_nodes_;
    sphere::AngularGrid ang_;
    std::vector<double> sigma_, sigma_eff_;
};

using GridPtr = std::shared_ptr<const BoundaryGrid>;
GridPtr make_grid(const GridSpec& spec);

// Storage: nodes as n_ang x n_s (angular node q, s-node j); spectral as
// n_ang_modes x n_s (angular mode a, Fourier column n). Column-major data of the
// spectral matrix is the mode vector.
class BoundaryFunction {
public:
    enum class Rep { nodes, spectral };

    BoundaryFunction() = default;
    BoundaryFunction(GridPtr grid, Rep rep);  // zero function
    static BoundaryFunction from_nodes(GridPtr grid, CMat values);
    static BoundaryFunction from_spectral(GridPtr grid, CMat coeffs);
    static BoundaryFunction from_modes(GridPtr grid, const CVec& modes);

    const GridPtr& grid() const { return grid_; }
    Rep rep() const { return rep_; }
    const CMat& data() const { return data_; }

    CMat nodes() const;
    CMat spectral() const;
    CVec modes() const;
    BoundaryFunction as_nodes() const { return from_nodes(grid_, nodes()); }
    BoundaryFunction as_spectral() const { return from_spectral(grid_, spectral()); }

    // L2 norm in the current representation (node quadrature or coefficient sum).
    double l2_norm() const;

    json to_json() const;
    static BoundaryFunction from_json(const json& j);
    io::Table to_table() const;

private:
    GridPtr grid_;
    Rep rep_ = Rep::nodes;
    CMat data_;
};

// s-direction transforms on rows; angular transforms by quadrature.
CMat fft_s(const BoundaryGrid& g, const CMat& rows);   // nodes in s -> Fourier, per row
CMat ifft_s(const BoundaryGrid& g, const CMat& rows);  // Fourier -> nodes in s, per row
CMat angular_analysis(const BoundaryGrid& g, const CMat& node_rows);   // n_ang rows -> n_ang_modes rows
CMat angular_synthesis(const BoundaryGrid& g, const CMat& mode_rows);  // n_ang_modes rows -> n_ang rows

void require_same_grid(const BoundaryFunction& a, const BoundaryFunction& b);

// Spectral multipliers, one entry per mode.
using Multiplier = Vec;
Multiplier mult_identity(const BoundaryGrid& g);
Multiplier mult_ds(const BoundaryGrid& g);           // sigma
Multiplier mult_abs_ds(const BoundaryGrid& g);       // |sigma|
Multiplier mult_abs_ds_sqrt(const BoundaryGrid& g);  // |sigma|^{1/2}
Multiplier mult_sgn_ds(const BoundaryGrid& g);       // sign, 0 on excluded columns
// pi+ / pi- as total operators: 1 or 0 on admissible columns, 1/2 on excluded ones.
Multiplier mult_pi_plus(const BoundaryGrid& g);
Multiplier mult_pi_minus(const BoundaryGrid& g);
// Range indicators of the admissible positive / negative frequency sectors.
Multiplier mult_range_plus(const BoundaryGrid& g);
Multiplier mult_range_minus(const BoundaryGrid& g);
Multiplier mult_admissible(const BoundaryGrid& g);
Multiplier mult_bracket_ds(const BoundaryGrid& g, double k);      // <sigma>^k
Multiplier mult_bracket_theta(const BoundaryGrid& g, double k);   // <lambda>^k, <lambda> = (1 + l(l+1))^{1/2}
Multiplier mult_sobolev(const BoundaryGrid& g, double k, double kp);

BoundaryFunction apply_multiplier(const BoundaryFunction& g, const Multiplier& mu);
BoundaryFunction project_admissible(const BoundaryFunction& g);
io::Table multiplier_table(const BoundaryGrid& g, const Multiplier& mu);

// sigma_C(g1, g2) = int (d_s conj(g1) g2 - conj(g1) d_s g2) |m|^{1/2} ds dtheta
// by node quadrature with spectral s-derivatives.
cplx symplectic_form(const BoundaryFunction& g1, const BoundaryFunction& g2);
// (g1 | g2) in L2, spectral coefficient sum.
cplx inner(const BoundaryFunction& g1, const BoundaryFunction& g2);
// (g1 | 2 D_s g2)
cplx charge_pairing(const BoundaryFunction& g1, const BoundaryFunction& g2);

double sobolev_norm(const BoundaryFunction& g, double k, double kp);

// Cosine window over the outer `fraction` of the s-interval at both ends.
Vec taper_profile(const BoundaryGrid& g, double fraction = 0.05);
BoundaryFunction apply_taper(const BoundaryFunction& g, double fraction = 0.05);

// Weighted norm on the cone cap {s < s0(theta)}:
//   int r^{-1} (|d_s psi|^2 + |d_theta psi|^2 + |psi|^2) |m|^{1/2} ds dtheta, r = exp(s / alpha).
struct WeightedNormOptions {
    double alpha = 1.0;
    Vec s0;  // cap per angular node; empty means no cap
    double support_tol = 1e-10;
};
double weighted_cone_norm(const BoundaryFunction& psi, const WeightedNormOptions& opt = {});
// Real feature vector whose Euclidean norm is the weighted norm.
Vec weighted_features(const BoundaryFunction& psi, double alpha = 1.0);

// Radial/angular probe g(r, theta) = sum_a f_a(r) Y_a(theta) on 0 <= r <= r_max.
struct HardyProbe {
    double r_max = 1.0;
    Vec laplace;  // angular eigenvalue for each component
    std::function<void(double r, CVec& f, CVec& df)> eval;
};
struct HardyResult {
    double numerator = 0.0;
    double denominator = 0.0;
    double ratio = 0.0;
};
// [int r^{d-1}|d_r g|^2 + r^{d-3}|d_theta g|^2] / [int r^{d-3}|g|^2], any d.
HardyResult hardy_ratio(const HardyProbe& probe, int d);
// Same value, but flags d < 3 where the inequality has no positive constant.
HardyResult hardy_check(const HardyProbe& probe, int d);

// Shift map. b is given by angular coefficients (n_ang_modes).
struct ShiftResult {
    BoundaryFunction g;  // node representation
    bool aliasing = false;
    double bandwidth_estimate = 0.0;
};
double shift_bandwidth(const BoundaryGrid& g, const Vec& b_coeffs);
ShiftResult shift_map(const BoundaryFunction& g, const Vec& b_coeffs, bool strict = true);
Vec angular_values(const BoundaryGrid& g, const Vec& coeffs);

}  // namespace lightcone::boundary
