#include <algorithm>
#include <cmath>
#include <limits>

#include "lightcone/errors.hpp"
#include "lightcone/symcalc.hpp"

namespace lightcone::symcalc {

double Spectrum::min() const {
    double m = 1e300;
    if (block_values.size()) m = std::min(m, block_values.minCoeff());
    if (outside_values.size()) m = std::min(m, outside_values.minCoeff());
    return m;
}

double Spectrum::max() const {
    double m = -1e300;
    if (block_values.size()) m = std::max(m, block_values.maxCoeff());
    if (outside_values.size()) m = std::max(m, outside_values.maxCoeff());
    return m;
}

Spectrum eigh(const BoundaryOperator& a, bool vectors) {
    Spectrum s;
    if (a.block().rows()) {
        Eigen::SelfAdjointEigenSolver<CMat> es(a.block(), vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success) throw FunctionalCalculusFailure("eigendecomposition did not converge");
        s.block_values = es.eigenvalues();
        if (vectors) s.block_vectors = es.eigenvectors();
    }
    std::vector<char> in(a.size(), 0);
    for (int i : a.active()) in[i] = 1;
    std::vector<double> out;
    for (int i = 0; i < a.size(); ++i)
        if (!in[i]) out.push_back(a.diag()[i].real());
    s.outside_values = Eigen::Map<Vec>(out.data(), static_cast<Eigen::Index>(out.size()));
    return s;
}

BoundaryOperator operator_function(const BoundaryOperator& b, const std::function<double(double)>& F) {
    if (b.hermitian_residual() > 1e-12) throw NonHermitian("functional calculus needs a hermitian operator");
    CMat blk;
    if (b.block().rows()) {
        const Spectrum s = eigh(b, true);
        const CMat& V = s.block_vectors;
        const double scale = std::max(b.block().norm(), 1e-300);
        const double res = (b.block() * V - V * s.block_values.cast<cplx>().asDiagonal()).norm() / scale;
        if (res > 1e-10) throw FunctionalCalculusFailure("eigendecomposition residual " + std::to_string(res));
        Vec fl(s.block_values.size());
        for (int i = 0; i < fl.size(); ++i) {
            fl[i] = F(s.block_values[i]);
            if (!std::isfinite(fl[i])) throw FunctionalCalculusFailure("F is not finite on the spectrum");
        }
        blk = V * fl.cast<cplx>().asDiagonal() * V.adjoint();
        blk = 0.5 * (blk + blk.adjoint());
    } else {
        blk.resize(0, 0);
    }
    CVec dg(b.size());
    for (int i = 0; i < b.size(); ++i) {
        const double v = F(b.diag()[i].real());
        if (!std::isfinite(v)) throw FunctionalCalculusFailure("F is not finite on the spectrum");
        dg[i] = v;
    }
    return BoundaryOperator::from_block(b.grid(), b.active(), std::move(blk), std::move(dg));
}

namespace {

CMat entries(const BoundaryOperator& a, const std::vector<int>& rows, const std::vector<int>& cols) {
    std::vector<int> pos(a.size(), -1);
    for (std::size_t k = 0; k < a.active().size(); ++k) pos[a.active()[k]] = static_cast<int>(k);
    CMat out = CMat::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) {
        const int pc = pos[cols[c]];
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const int pr = pos[rows[r]];
            if (pr >= 0 && pc >= 0) out(r, c) = a.block()(pr, pc);
            else if (rows[r] == cols[c] && pr < 0) out(r, c) = a.diag()[rows[r]];
        }
    }
    return out;
}

}  // namespace

BlockDecomposition toeplitz_blocks(const BoundaryOperator& c, const std::vector<int>* support) {
    const auto& g = *c.grid();
    std::vector<int> sup = support ? *support : g.admissible_modes();
    BlockDecomposition b;
    const Vec sg = g.mode_sigma();
    for (int m : sup) {
        if (sg[m] > 0) b.plus.push_back(m);
        else if (sg[m] < 0) b.minus.push_back(m);
    }
    b.pp = entries(c, b.plus, b.plus);
    b.pm = entries(c, b.plus, b.minus);
    b.mp = entries(c, b.minus, b.plus);
    b.mm = entries(c, b.minus, b.minus);
    return b;
}

BoundaryOperator from_blocks(const GridPtr& g, const std::vector<int>& plus, const std::vector<int>& minus,
                             const CMat& pp, const CMat& pm, const CMat& mp, const CMat& mm, const CVec& diag_outside) {
    const std::vector<int> u = merge_sets(plus, minus);
    std::vector<int> pos(g->n_modes(), -1);
    for (std::size_t k = 0; k < u.size(); ++k) pos[u[k]] = static_cast<int>(k);
    CMat blk = CMat::Zero(static_cast<Eigen::Index>(u.size()), static_cast<Eigen::Index>(u.size()));
    auto put = [&](const std::vector<int>& rows, const std::vector<int>& cols, const CMat& m) {
        for (std::size_t c = 0; c < cols.size(); ++c)
            for (std::size_t r = 0; r < rows.size(); ++r) blk(pos[rows[r]], pos[cols[c]]) = m(r, c);
    };
    put(plus, plus, pp);
    put(plus, minus, pm);
    put(minus, plus, mp);
    put(minus, minus, mm);
    return BoundaryOperator::from_block(g, u, std::move(blk), diag_outside);
}

BoundaryOperator BlockDecomposition::reassemble(const GridPtr& g) const {
    return from_blocks(g, plus, minus, pp, pm, mp, mm, CVec::Zero(g->n_modes()));
}

io::Table DecayProfile::table() const {
    io::Table t;
    t.header = {"N", "norm", "ratio"};
    for (std::size_t i = 0; i < norms.size(); ++i)
        t.rows.push_back({double(i), norms[i], i == 0 ? 0.0 : ratios[i - 1]});
    return t;
}

nlohmann::json DecayProfile::to_json() const {
    return nlohmann::json{{"norms", norms}, {"ratios", ratios}, {"factor", factor}, {"pass", pass}};
}

DecayProfile smoothing_indicator(const BoundaryOperator& A, int N_max, double p2, double factor) {
    if (N_max < 0 || N_max > 8) throw ConfigError("smoothing indicator: N_max must lie in 0..8");
    const auto& g = *A.grid();
    DecayProfile p;
    p.factor = factor;
    const Vec th = boundary::mult_bracket_theta(g, -p2);
    for (int N = 0; N <= N_max; ++N) {
        const Vec w = boundary::mult_bracket_ds(g, N);
        p.norms.push_back(A.scaled_rows_cols(w, w.cwiseProduct(th)).norm());
    }
    p.pass = true;
    const double floor = 1e-13 * std::max(1.0, p.norms[0]);
    for (int N = 0; N < N_max; ++N) {
        const double a = p.norms[N], b = p.norms[N + 1];
        double r;
        if (b <= floor) r = 0.0;
        else if (a <= floor) r = std::numeric_limits<double>::infinity();
        else r = b / a;
        p.ratios.push_back(r);
        if (r > factor) p.pass = false;
    }
    return p;
}

namespace {

// Unitary polar factor of the angular matrix of exp(i sigma b) in column n.
CMat column_shift(const boundary::BoundaryGrid& g, int n, const Vec& bvals) {
    const double sg = g.sigma_eff(n);
    const int na = g.n_ang_modes();
    if (sg == 0.0) return CMat::Identity(na, na);
    const auto& A = g.angular();
    CVec ph(A.n_nodes);
    for (int q = 0; q < A.n_nodes; ++q) ph[q] = A.weights[q] * std::polar(1.0, sg * bvals[q]);
    const CMat Yc = A.Y.cast<cplx>();
    const CMat B = Yc.transpose() * ph.asDiagonal() * Yc;
    Eigen::JacobiSVD<CMat> svd(B, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().adjoint();
}

}  // namespace

BoundaryOperator shift_operator(const GridPtr& g, const Vec& b_coeffs) {
    const Vec bvals = boundary::angular_values(*g, b_coeffs);
    const int n_modes = g->n_modes(), na = g->n_ang_modes();
    CMat U = CMat::Zero(n_modes, n_modes);
    for (int n = 0; n < g->n_s(); ++n) U.block(n * na, n * na, na, na) = column_shift(*g, n, bvals);
    return BoundaryOperator::from_dense(g, U);
}

BoundaryOperator conjugate_by_shift(const BoundaryOperator& A, const Vec& b_coeffs) {
    const auto& g = *A.grid();
    if (boundary::shift_bandwidth(g, b_coeffs) > g.L())
        throw AliasingWarning("shift profile too rough for the angular truncation");
    const int na = g.n_ang_modes();
    // Columns touched: any active mode, or a diagonal varying over the angular modes.
    std::vector<char> touched(g.n_s(), 0);
    for (int i : A.active()) touched[i / na] = 1;
    std::vector<char> in(A.size(), 0);
    for (int i : A.active()) in[i] = 1;
    for (int n = 0; n < g.n_s(); ++n) {
        if (touched[n]) continue;
        const cplx d0 = A.diag()[g.mode(n, 0)];
        for (int a = 1; a < na; ++a)
            if (std::abs(A.diag()[g.mode(n, a)] - d0) > 0.0) touched[n] = 1;
    }
    std::vector<int> set, cols;
    for (int n = 0; n < g.n_s(); ++n)
        if (touched[n]) {
            cols.push_back(n);
            for (int a = 0; a < na; ++a) set.push_back(g.mode(n, a));
        }
    if (set.empty()) return A;
    const Vec bvals = boundary::angular_values(g, b_coeffs);
    CMat M = A.dense(set);
    for (std::size_t k = 0; k < cols.size(); ++k) {
        const CMat Un = column_shift(g, cols[k], bvals);
        const Eigen::Index o = static_cast<Eigen::Index>(k) * na;
        M.middleRows(o, na) = Un * M.middleRows(o, na);
        M.middleCols(o, na) = M.middleCols(o, na) * Un.adjoint();
    }
    return BoundaryOperator::from_block(A.grid(), set, std::move(M), A.diag());
}

}  // namespace lightcone::symcalc
