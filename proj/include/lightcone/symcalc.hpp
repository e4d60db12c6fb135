#pragma once

// Finite operator calculus on the boundary mode space.
//
// An operator is stored as a dense block on an "active" set of modes plus a
// diagonal acting on every other mode. Multipliers have an empty active set;
// low-rank smoothing perturbations of multipliers stay cheap on fine grids.

#include <functional>
#include <string>
#include <vector>

#include "lightcone/boundary.hpp"

namespace lightcone::symcalc {

using boundary::GridPtr;
using boundary::Multiplier;

class BoundaryOperator {
public:
    BoundaryOperator() = default;

    static BoundaryOperator zero(GridPtr g);
    static BoundaryOperator identity(GridPtr g);
    static BoundaryOperator multiplier(GridPtr g, const Multiplier& mu);
    static BoundaryOperator multiplier(GridPtr g, const CVec& mu);
    // block on `active` (sorted, unique), diag on the rest.
    static BoundaryOperator from_block(GridPtr g, std::vector<int> active, CMat block, CVec diag);
    // Dense operator on the whole mode space.
    static BoundaryOperator from_dense(GridPtr g, const CMat& full);

    const GridPtr& grid() const { return grid_; }
    int size() const { return grid_->n_modes(); }
    const std::vector<int>& active() const { return active_; }
    const CMat& block() const { return block_; }
    const CVec& diag() const { return diag_; }

    // Matrix entries on an arbitrary index set.
    CMat dense(const std::vector<int>& idx) const;
    CMat dense() const;
    BoundaryOperator expanded(const std::vector<int>& superset) const;

    CVec apply(const CVec& x) const;
    boundary::BoundaryFunction apply(const boundary::BoundaryFunction& g) const;
    BoundaryOperator adjoint() const;

    double norm() const;
    double hermitian_residual() const;  // ||A - A*|| / ||A||, 0 for the zero operator
    bool hermitian(double tol = 1e-12) const { return hermitian_residual() <= tol; }

    BoundaryOperator scaled_rows_cols(const Vec& left, const Vec& right) const;  // diag(left) A diag(right)

    friend BoundaryOperator operator*(const BoundaryOperator& a, const BoundaryOperator& b);
    friend BoundaryOperator operator+(const BoundaryOperator& a, const BoundaryOperator& b);
    friend BoundaryOperator operator-(const BoundaryOperator& a, const BoundaryOperator& b);
    friend BoundaryOperator operator*(cplx s, const BoundaryOperator& a);

private:
    GridPtr grid_;
    std::vector<int> active_;
    CMat block_;
    CVec diag_;
};

std::vector<int> merge_sets(const std::vector<int>& a, const std::vector<int>& b);

// Largest singular value of a dense block, via the eigenvalues of M* M.
double spectral_norm(const CMat& m);
double hermitian_norm(const CMat& h);

// Eigen-data of a hermitian operator: block part plus the diagonal outside.
struct Spectrum {
    Vec block_values;
    CMat block_vectors;
    Vec outside_values;
    double min() const;
    double max() const;
};
Spectrum eigh(const BoundaryOperator& a, bool vectors = true);

// V F(Lambda) V* with eigendecomposition residual control.
BoundaryOperator operator_function(const BoundaryOperator& b, const std::function<double(double)>& F);

struct BlockDecomposition {
    std::vector<int> plus, minus;  // mode indices of the two frequency sectors
    CMat pp, pm, mp, mm;
    BoundaryOperator reassemble(const GridPtr& g) const;
};
// c_ab = i_a* c i_b over the admissible modes in `support` (all admissible modes by default).
BlockDecomposition toeplitz_blocks(const BoundaryOperator& c, const std::vector<int>* support = nullptr);
BoundaryOperator from_blocks(const GridPtr& g, const std::vector<int>& plus, const std::vector<int>& minus,
                             const CMat& pp, const CMat& pm, const CMat& mp, const CMat& mm, const CVec& diag_outside);

struct DecayProfile {
    std::vector<double> norms;  // N = 0..N_max
    std::vector<double> ratios;
    double factor = 1.5;
    bool pass = false;
    io::Table table() const;
    nlohmann::json to_json() const;
};
DecayProfile smoothing_indicator(const BoundaryOperator& A, int N_max = 4, double p2 = 0.0, double factor = 1.5);

// Unitary per-Fourier-column angular factor of the shift map.
BoundaryOperator shift_operator(const GridPtr& g, const Vec& b_coeffs);
BoundaryOperator conjugate_by_shift(const BoundaryOperator& A, const Vec& b_coeffs);

void save_operator(const std::string& path, const BoundaryOperator& a);
BoundaryOperator load_operator(const std::string& path);

}  // namespace lightcone::symcalc
