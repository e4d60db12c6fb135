#include <cmath>

#include "lightcone/errors.hpp"
#include "lightcone/states.hpp"

namespace lightcone::states {

namespace {

CVec pi_plus_diag(const GridPtr& g) { return boundary::mult_pi_plus(*g).cast<cplx>(); }

BoundaryOperator hermitized(const BoundaryOperator& a) {
    const CMat b = 0.5 * (a.block() + a.block().adjoint());
    CVec d = a.diag();
    for (int i = 0; i < d.size(); ++i) d[i] = d[i].real();
    return BoundaryOperator::from_block(a.grid(), a.active(), b, d);
}

CMat sqrt_one_plus(const GridPtr& g, const std::vector<int>& set, const CMat& h) {
    // (1 + h)^{1/2} = 1 + F(h) with F(z) = (1 + z)^{1/2} - 1, F(0) = 0.
    const BoundaryOperator op = BoundaryOperator::from_block(g, set, h, CVec::Zero(g->n_modes()));
    const BoundaryOperator f = symcalc::operator_function(op, [](double z) { return std::sqrt(1.0 + z) - 1.0; });
    return CMat::Identity(h.rows(), h.cols()) + f.block();
}

}  // namespace

BoundaryOperator two_abs_ds_sqrt(const GridPtr& g) {
    return BoundaryOperator::multiplier(g, Vec((2.0 * boundary::mult_abs_ds(*g).array()).sqrt().matrix()));
}

BoundaryOperator two_abs_ds_inv_sqrt(const GridPtr& g) {
    Vec w = boundary::mult_abs_ds(*g);
    for (int i = 0; i < w.size(); ++i) w[i] = w[i] > 0 ? 1.0 / std::sqrt(2.0 * w[i]) : 0.0;
    return BoundaryOperator::multiplier(g, w);
}

CovariancePair pair_from_c_plus(const BoundaryOperator& c_plus, const std::string& generator) {
    const GridPtr& g = c_plus.grid();
    const Vec w = (2.0 * boundary::mult_abs_ds(*g).array()).sqrt().matrix();
    CovariancePair p;
    p.generator = generator;
    p.lambda_plus = hermitized(c_plus.scaled_rows_cols(w, w));
    p.lambda_minus = p.lambda_plus - BoundaryOperator::multiplier(g, Vec(2.0 * boundary::mult_ds(*g)));
    return p;
}

BoundaryOperator c_plus_of(const CovariancePair& p) {
    const GridPtr& g = p.lambda_plus.grid();
    const Vec w = two_abs_ds_inv_sqrt(g).diag().real();
    return p.lambda_plus.scaled_rows_cols(w, w);
}

BoundaryOperator c_minus_of(const CovariancePair& p) {
    const GridPtr& g = p.lambda_minus.grid();
    const Vec w = two_abs_ds_inv_sqrt(g).diag().real();
    return p.lambda_minus.scaled_rows_cols(w, w);
}

CovariancePair moretti(const GridPtr& g) {
    CovariancePair p = pair_from_c_plus(BoundaryOperator::multiplier(g, pi_plus_diag(g)), "moretti");
    return p;
}

CovariancePair build_gauge_covariances(const GaugeGenerators& gen, bool bypass_norm) {
    const auto& S = gen.sectors;
    double dn = 0.0;
    if (gen.d.size()) {
        Eigen::JacobiSVD<CMat> svd(gen.d);
        dn = svd.singularValues()[0];
    }
    if (!bypass_norm && dn > 1.0 + 1e-12) throw NormViolation("||d|| = " + std::to_string(dn) + " exceeds 1");
    const CMat pp = CMat::Identity(S.plus.size(), S.plus.size()) + gen.a_plus.adjoint() * gen.a_plus;
    const CMat pm = gen.a_plus.adjoint() * gen.d * gen.a_minus;
    const CMat mm = gen.a_minus.adjoint() * gen.a_minus;
    const BoundaryOperator c =
        symcalc::from_blocks(gen.grid, S.plus, S.minus, pp, pm, pm.adjoint(), mm, pi_plus_diag(gen.grid));
    CovariancePair p = pair_from_c_plus(c, "gauge");
    p.meta["d_norm"] = dn;
    p.meta["sector_sizes"] = {S.plus.size(), S.minus.size()};
    return p;
}

BoundaryOperator pure_c_plus(const PurityGenerator& gen) {
    const auto& S = gen.sectors;
    if (gen.a.size() == 0) return BoundaryOperator::multiplier(gen.grid, pi_plus_diag(gen.grid));
    const CMat& a = gen.a;
    const CMat s = sqrt_one_plus(gen.grid, S.minus, a * a.adjoint());
    const CMat pp = CMat::Identity(S.plus.size(), S.plus.size()) + a.adjoint() * a;
    const CMat pm = a.adjoint() * s;
    const CMat mp = s * a;
    const CMat mm = a * a.adjoint();
    return symcalc::from_blocks(gen.grid, S.plus, S.minus, pp, pm, mp, mm, pi_plus_diag(gen.grid));
}

CovariancePair build_pure_covariances(const PurityGenerator& gen) {
    CovariancePair p = pair_from_c_plus(pure_c_plus(gen), "pure");
    p.meta["sector_sizes"] = {gen.sectors.plus.size(), gen.sectors.minus.size()};
    return p;
}

PurityGenerator negated(const PurityGenerator& gen) {
    PurityGenerator n = gen;
    n.a = -gen.a;
    return n;
}

BoundaryOperator bogoliubov(const PurityGenerator& gen) {
    const auto& S = gen.sectors;
    const int n = gen.grid->n_modes();
    if (gen.a.size() == 0) return BoundaryOperator::identity(gen.grid);
    const CMat& a = gen.a;
    const CMat sm = sqrt_one_plus(gen.grid, S.minus, a * a.adjoint());
    const CMat sp = sqrt_one_plus(gen.grid, S.plus, a.adjoint() * a);
    return symcalc::from_blocks(gen.grid, S.plus, S.minus, sp, a.adjoint(), a, sm, CVec::Ones(n));
}

json BogoliubovReport::to_json() const {
    return json{{"inverse_residual", inverse_residual}, {"conjugation_residual", conjugation_residual}};
}

BogoliubovReport check_bogoliubov(const PurityGenerator& gen) {
    BogoliubovReport r;
    const BoundaryOperator u = bogoliubov(gen), um = bogoliubov(negated(gen));
    r.inverse_residual = (u * um - BoundaryOperator::identity(gen.grid)).norm();
    const BoundaryOperator c0 = BoundaryOperator::multiplier(gen.grid, pi_plus_diag(gen.grid));
    r.conjugation_residual = (u.adjoint() * c0 * u - pure_c_plus(gen)).norm();
    return r;
}

CovariancePair conjugate_pair(const CovariancePair& p, const Vec& b_coeffs) {
    CovariancePair q;
    q.generator = p.generator;
    q.meta = p.meta;
    q.meta["shifted"] = true;
    q.lambda_plus = hermitized(symcalc::conjugate_by_shift(p.lambda_plus, b_coeffs));
    q.lambda_minus = hermitized(symcalc::conjugate_by_shift(p.lambda_minus, b_coeffs));
    return q;
}

namespace {

void put_op(io::Container& c, const std::string& prefix, const BoundaryOperator& a) {
    std::vector<std::int64_t> act(a.active().begin(), a.active().end());
    c.put(prefix + "_active", act);
    c.put(prefix + "_block", a.block());
    c.put(prefix + "_diag", CMat(a.diag()));
}

BoundaryOperator get_op(const io::Container& c, const std::string& prefix, const GridPtr& g) {
    const auto act = c.get_index(prefix + "_active");
    std::vector<int> active(act.begin(), act.end());
    CMat block = c.get_complex(prefix + "_block");
    if (active.empty()) block.resize(0, 0);
    return BoundaryOperator::from_block(g, std::move(active), std::move(block), c.get_complex(prefix + "_diag").col(0));
}

}  // namespace

void save_pair(const std::string& path, const CovariancePair& p) {
    io::Container c;
    c.kind = "covariance_pair";
    c.meta["grid"] = boundary::to_json(p.lambda_plus.grid()->spec());
    c.meta["grid_hash"] = p.lambda_plus.grid()->hash();
    c.meta["generator"] = p.generator;
    c.meta["generator_meta"] = p.meta;
    put_op(c, "lambda_plus", p.lambda_plus);
    put_op(c, "lambda_minus", p.lambda_minus);
    io::write_container(path, c);
}

CovariancePair load_pair(const std::string& path) {
    const io::Container c = io::read_container(path);
    if (c.kind != "covariance_pair") throw FormatError("container is not a covariance pair: " + path);
    GridPtr g = boundary::make_grid(boundary::grid_spec_from_json(c.meta.at("grid")));
    if (g->hash() != c.meta.at("grid_hash").get<std::string>()) throw FormatError("grid hash mismatch in " + path);
    CovariancePair p;
    p.generator = c.meta.at("generator").get<std::string>();
    p.meta = c.meta.at("generator_meta");
    p.lambda_plus = get_op(c, "lambda_plus", g);
    p.lambda_minus = get_op(c, "lambda_minus", g);
    return p;
}

}  // namespace lightcone::states
