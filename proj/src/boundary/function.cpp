#include <cmath>

#include "lightcone/boundary.hpp"
#include "lightcone/errors.hpp"
#include "lightcone/kernels.hpp"

namespace lightcone::boundary {

BoundaryFunction::BoundaryFunction(GridPtr grid, Rep rep) : grid_(std::move(grid)), rep_(rep) {
    if (rep_ == Rep::nodes) data_ = CMat::Zero(grid_->n_ang(), grid_->n_s());
    else data_ = CMat::Zero(grid_->n_ang_modes(), grid_->n_s());
}

BoundaryFunction BoundaryFunction::from_nodes(GridPtr grid, CMat values) {
    if (values.rows() != grid->n_ang() || values.cols() != grid->n_s())
        throw GridMismatch("node values do not match the grid shape");
    BoundaryFunction f;
    f.grid_ = std::move(grid);
    f.rep_ = Rep::nodes;
    f.data_ = std::move(values);
    return f;
}

BoundaryFunction BoundaryFunction::from_spectral(GridPtr grid, CMat coeffs) {
    if (coeffs.rows() != grid->n_ang_modes() || coeffs.cols() != grid->n_s())
        throw GridMismatch("spectral coefficients do not match the grid shape");
    BoundaryFunction f;
    f.grid_ = std::move(grid);
    f.rep_ = Rep::spectral;
    f.data_ = std::move(coeffs);
    return f;
}

BoundaryFunction BoundaryFunction::from_modes(GridPtr grid, const CVec& modes) {
    if (modes.size() != grid->n_modes()) throw GridMismatch("mode vector length differs from the grid");
    CMat c = Eigen::Map<const CMat>(modes.data(), grid->n_ang_modes(), grid->n_s());
    return from_spectral(std::move(grid), std::move(c));
}

CMat BoundaryFunction::nodes() const {
    if (rep_ == Rep::nodes) return data_;
    return angular_synthesis(*grid_, ifft_s(*grid_, data_));
}

CMat BoundaryFunction::spectral() const {
    if (rep_ == Rep::spectral) return data_;
    return fft_s(*grid_, angular_analysis(*grid_, data_));
}

CVec BoundaryFunction::modes() const {
    const CMat c = spectral();
    return Eigen::Map<const CVec>(c.data(), c.size());
}

double BoundaryFunction::l2_norm() const {
    if (rep_ == Rep::spectral) return data_.norm();
    const Vec w = grid_->node_weights();
    return std::sqrt(kernels::weighted_dot(data_.data(), data_.data(), w.data(), w.size()).real());
}

json BoundaryFunction::to_json() const {
    const CMat v = nodes();
    std::vector<double> re(v.size()), im(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        re[i] = v.data()[i].real();
        im[i] = v.data()[i].imag();
    }
    json j;
    j["kind"] = "boundary_function";
    j["grid"] = boundary::to_json(grid_->spec());
    j["layout"] = "angular node fastest, then s node";
    j["re"] = re;
    j["im"] = im;
    return j;
}

BoundaryFunction BoundaryFunction::from_json(const json& j) {
    if (j.value("kind", std::string()) != "boundary_function") throw FormatError("not a boundary function document");
    GridPtr g = make_grid(grid_spec_from_json(j.at("grid")));
    const auto re = j.at("re").get<std::vector<double>>();
    const auto im = j.at("im").get<std::vector<double>>();
    if (re.size() != im.size() || static_cast<int>(re.size()) != g->n_ang() * g->n_s())
        throw FormatError("boundary function value count does not match its grid");
    CMat v(g->n_ang(), g->n_s());
    for (std::size_t i = 0; i < re.size(); ++i) v.data()[i] = cplx(re[i], im[i]);
    return from_nodes(g, v);
}

io::Table BoundaryFunction::to_table() const {
    const CMat v = nodes();
    const auto& A = grid_->angular();
    io::Table t;
    t.header = {"s"};
    if (grid_->d() == 3) {
        t.header.push_back("polar");
        t.header.push_back("azimuth");
    } else {
        t.header.push_back("azimuth");
    }
    t.header.push_back("re");
    t.header.push_back("im");
    for (int j = 0; j < grid_->n_s(); ++j)
        for (int q = 0; q < grid_->n_ang(); ++q) {
            std::vector<double> row{grid_->s_nodes()[j]};
            for (int c = 0; c < A.coords.cols(); ++c) row.push_back(A.coords(q, c));
            row.push_back(v(q, j).real());
            row.push_back(v(q, j).imag());
            t.rows.push_back(std::move(row));
        }
    return t;
}

void require_same_grid(const BoundaryFunction& a, const BoundaryFunction& b) {
    if (!a.grid() || !b.grid() || !a.grid()->same(*b.grid())) throw GridMismatch("boundary functions live on different grids");
}

BoundaryFunction apply_multiplier(const BoundaryFunction& g, const Multiplier& mu) {
    if (mu.size() != g.grid()->n_modes()) throw GridMismatch("multiplier length differs from the mode count");
    CMat c = g.spectral();
    kernels::scale_complex(c.data(), mu.data(), static_cast<std::size_t>(c.size()));
    return BoundaryFunction::from_spectral(g.grid(), std::move(c));
}

BoundaryFunction project_admissible(const BoundaryFunction& g) { return apply_multiplier(g, mult_admissible(*g.grid())); }

namespace {

// d_s on node rows, one periodic spectral derivative per angular node.
CMat ds_nodes(const BoundaryGrid& grid, const CMat& nodes) {
    CMat f = fft_s(grid, nodes);
    for (int n = 0; n < grid.n_s(); ++n) f.col(n) *= cplx(0.0, grid.sigma_eff(n));
    return ifft_s(grid, f);
}

}  // namespace

cplx symplectic_form(const BoundaryFunction& g1, const BoundaryFunction& g2) {
    require_same_grid(g1, g2);
    const BoundaryGrid& grid = *g1.grid();
    const CMat a = g1.nodes(), b = g2.nodes();
    const CMat da = ds_nodes(grid, a), db = ds_nodes(grid, b);
    const Vec w = grid.node_weights();
    const auto n = static_cast<std::size_t>(w.size());
    return kernels::weighted_dot(da.data(), b.data(), w.data(), n) - kernels::weighted_dot(a.data(), db.data(), w.data(), n);
}

cplx inner(const BoundaryFunction& g1, const BoundaryFunction& g2) {
    require_same_grid(g1, g2);
    const CVec a = g1.modes(), b = g2.modes();
    return a.dot(b);
}

cplx charge_pairing(const BoundaryFunction& g1, const BoundaryFunction& g2) {
    return 2.0 * inner(g1, apply_multiplier(g2, mult_ds(*g2.grid())));
}

}  // namespace lightcone::boundary
