#include <algorithm>
#include <cmath>

#include "lightcone/errors.hpp"
#include "lightcone/symcalc.hpp"

namespace lightcone::symcalc {

std::vector<int> merge_sets(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

namespace {

std::vector<int> positions(int n, const std::vector<int>& idx) {
    std::vector<int> pos(n, -1);
    for (std::size_t k = 0; k < idx.size(); ++k) pos[idx[k]] = static_cast<int>(k);
    return pos;
}

}  // namespace

double hermitian_norm(const CMat& h) {
    if (h.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<CMat> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

double spectral_norm(const CMat& m) {
    if (m.size() == 0) return 0.0;
    const CMat mm = m.rows() >= m.cols() ? CMat(m.adjoint() * m) : CMat(m * m.adjoint());
    return std::sqrt(std::max(0.0, hermitian_norm(mm)));
}

BoundaryOperator BoundaryOperator::zero(GridPtr g) {
    const int n = g->n_modes();
    return from_block(std::move(g), {}, CMat(0, 0), CVec::Zero(n));
}

BoundaryOperator BoundaryOperator::identity(GridPtr g) {
    const int n = g->n_modes();
    return from_block(std::move(g), {}, CMat(0, 0), CVec::Ones(n));
}

BoundaryOperator BoundaryOperator::multiplier(GridPtr g, const Multiplier& mu) {
    return multiplier(std::move(g), CVec(mu.cast<cplx>()));
}

BoundaryOperator BoundaryOperator::multiplier(GridPtr g, const CVec& mu) {
    if (mu.size() != g->n_modes()) throw GridMismatch("multiplier length differs from the mode count");
    return from_block(std::move(g), {}, CMat(0, 0), mu);
}

BoundaryOperator BoundaryOperator::from_block(GridPtr g, std::vector<int> active, CMat block, CVec diag) {
    if (!std::is_sorted(active.begin(), active.end()) || std::adjacent_find(active.begin(), active.end()) != active.end())
        throw GridMismatch("active set must be sorted and unique");
    if (block.rows() != static_cast<Eigen::Index>(active.size()) || block.cols() != block.rows())
        throw GridMismatch("operator block does not match its active set");
    if (diag.size() != g->n_modes()) throw GridMismatch("operator diagonal does not match the mode count");
    if (!active.empty() && (active.front() < 0 || active.back() >= g->n_modes()))
        throw GridMismatch("active set outside the mode range");
    BoundaryOperator a;
    a.grid_ = std::move(g);
    a.active_ = std::move(active);
    a.block_ = std::move(block);
    a.diag_ = std::move(diag);
    for (int i : a.active_) a.diag_[i] = 0.0;
    return a;
}

BoundaryOperator BoundaryOperator::from_dense(GridPtr g, const CMat& full) {
    const int n = g->n_modes();
    if (full.rows() != n || full.cols() != n) throw GridMismatch("dense operator shape differs from the mode count");
    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;
    return from_block(std::move(g), std::move(all), full, CVec::Zero(n));
}

CMat BoundaryOperator::dense(const std::vector<int>& idx) const {
    const std::vector<int> pos = positions(size(), active_);
    const int m = static_cast<int>(idx.size());
    CMat out = CMat::Zero(m, m);
    for (int r = 0; r < m; ++r) {
        const int pr = pos[idx[r]];
        if (pr < 0) {
            out(r, r) = diag_[idx[r]];
            continue;
        }
        for (int c = 0; c < m; ++c) {
            const int pc = pos[idx[c]];
            if (pc >= 0) out(r, c) = block_(pr, pc);
        }
    }
    return out;
}

CMat BoundaryOperator::dense() const {
    std::vector<int> all(size());
    for (int i = 0; i < size(); ++i) all[i] = i;
    return dense(all);
}

BoundaryOperator BoundaryOperator::expanded(const std::vector<int>& superset) const {
    return from_block(grid_, superset, dense(superset), diag_);
}

CVec BoundaryOperator::apply(const CVec& x) const {
    if (x.size() != size()) throw GridMismatch("vector length differs from the mode count");
    CVec y = diag_.cwiseProduct(x);
    if (!active_.empty()) {
        CVec xs(active_.size());
        for (std::size_t k = 0; k < active_.size(); ++k) xs[k] = x[active_[k]];
        const CVec ys = block_ * xs;
        for (std::size_t k = 0; k < active_.size(); ++k) y[active_[k]] = ys[k];
    }
    return y;
}

boundary::BoundaryFunction BoundaryOperator::apply(const boundary::BoundaryFunction& g) const {
    if (!g.grid()->same(*grid_)) throw GridMismatch("operator and function live on different grids");
    return boundary::BoundaryFunction::from_modes(g.grid(), apply(g.modes()));
}

BoundaryOperator BoundaryOperator::adjoint() const {
    return from_block(grid_, active_, block_.adjoint(), diag_.conjugate());
}

double BoundaryOperator::norm() const {
    double out = 0.0;
    const std::vector<int> pos = positions(size(), active_);
    for (int i = 0; i < size(); ++i)
        if (pos[i] < 0) out = std::max(out, std::abs(diag_[i]));
    const double herm = block_.rows() ? (block_ - block_.adjoint()).cwiseAbs().maxCoeff() : 0.0;
    const double scale = block_.rows() ? block_.cwiseAbs().maxCoeff() : 0.0;
    return std::max(out, herm <= 1e-14 * scale ? hermitian_norm(block_) : spectral_norm(block_));
}

double BoundaryOperator::hermitian_residual() const {
    const double n = norm();
    if (n == 0.0) return 0.0;
    double out = 0.0;
    const std::vector<int> pos = positions(size(), active_);
    for (int i = 0; i < size(); ++i)
        if (pos[i] < 0) out = std::max(out, 2.0 * std::abs(diag_[i].imag()));
    if (block_.rows()) {
        const CMat skew = cplx(0.0, 1.0) * (block_ - block_.adjoint());
        out = std::max(out, hermitian_norm(skew));
    }
    return out / n;
}

BoundaryOperator BoundaryOperator::scaled_rows_cols(const Vec& left, const Vec& right) const {
    CMat b = block_;
    for (std::size_t c = 0; c < active_.size(); ++c)
        for (std::size_t r = 0; r < active_.size(); ++r) b(r, c) *= left[active_[r]] * right[active_[c]];
    CVec dg = diag_;
    for (int i = 0; i < size(); ++i) dg[i] *= left[i] * right[i];
    return from_block(grid_, active_, std::move(b), std::move(dg));
}

BoundaryOperator operator*(const BoundaryOperator& a, const BoundaryOperator& b) {
    if (!a.grid_->same(*b.grid_)) throw GridMismatch("operators live on different grids");
    if (a.active_.empty()) {
        CMat blk = b.block_;
        for (std::size_t r = 0; r < b.active_.size(); ++r) blk.row(r) *= a.diag_[b.active_[r]];
        return BoundaryOperator::from_block(b.grid_, b.active_, std::move(blk), a.diag_.cwiseProduct(b.diag_));
    }
    if (b.active_.empty()) {
        CMat blk = a.block_;
        for (std::size_t c = 0; c < a.active_.size(); ++c) blk.col(c) *= b.diag_[a.active_[c]];
        return BoundaryOperator::from_block(a.grid_, a.active_, std::move(blk), a.diag_.cwiseProduct(b.diag_));
    }
    const std::vector<int> u = merge_sets(a.active_, b.active_);
    CMat blk = a.dense(u) * b.dense(u);
    return BoundaryOperator::from_block(a.grid_, u, std::move(blk), a.diag_.cwiseProduct(b.diag_));
}

BoundaryOperator operator+(const BoundaryOperator& a, const BoundaryOperator& b) {
    if (!a.grid_->same(*b.grid_)) throw GridMismatch("operators live on different grids");
    const std::vector<int> u = merge_sets(a.active_, b.active_);
    CMat blk = a.dense(u) + b.dense(u);
    return BoundaryOperator::from_block(a.grid_, u, std::move(blk), a.diag_ + b.diag_);
}

BoundaryOperator operator-(const BoundaryOperator& a, const BoundaryOperator& b) { return a + cplx(-1.0) * b; }

BoundaryOperator operator*(cplx s, const BoundaryOperator& a) {
    return BoundaryOperator::from_block(a.grid_, a.active_, s * a.block_, s * a.diag_);
}

void save_operator(const std::string& path, const BoundaryOperator& a) {
    io::Container c;
    c.kind = "boundary_operator";
    c.meta["grid"] = boundary::to_json(a.grid()->spec());
    c.meta["grid_hash"] = a.grid()->hash();
    c.meta["hermitian"] = a.hermitian();
    std::vector<std::int64_t> act(a.active().begin(), a.active().end());
    c.put("active", act);
    c.put("block", a.block());
    c.put("diag", CMat(a.diag()));
    io::write_container(path, c);
}

BoundaryOperator load_operator(const std::string& path) {
    const io::Container c = io::read_container(path);
    if (c.kind != "boundary_operator") throw FormatError("container is not a boundary operator: " + path);
    GridPtr g = boundary::make_grid(boundary::grid_spec_from_json(c.meta.at("grid")));
    if (g->hash() != c.meta.at("grid_hash").get<std::string>()) throw FormatError("grid hash mismatch in " + path);
    const auto act = c.get_index("active");
    std::vector<int> active(act.begin(), act.end());
    CMat block = c.get_complex("block");
    if (active.empty()) block.resize(0, 0);
    return BoundaryOperator::from_block(g, std::move(active), std::move(block), c.get_complex("diag").col(0));
}

}  // namespace lightcone::symcalc
