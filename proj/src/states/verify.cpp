#include <cmath>
#include <limits>

#include "lightcone/errors.hpp"
#include "lightcone/states.hpp"

namespace lightcone::states {

using symcalc::hermitian_norm;
using symcalc::spectral_norm;

double verify_ccr(const CovariancePair& p) {
    const GridPtr& g = p.lambda_plus.grid();
    const BoundaryOperator two_ds = BoundaryOperator::multiplier(g, Vec(2.0 * boundary::mult_ds(*g)));
    return (p.lambda_plus - p.lambda_minus - two_ds).norm() / two_ds.norm();
}

json PositivityReport::to_json() const {
    return json{{"min_eig_plus", min_plus}, {"min_eig_minus", min_minus}, {"norm_plus", norm_plus},
                {"norm_minus", norm_minus}, {"pass", pass}};
}

PositivityReport verify_positivity(const CovariancePair& p) {
    PositivityReport r;
    const symcalc::Spectrum sp = symcalc::eigh(p.lambda_plus, false);
    const symcalc::Spectrum sm = symcalc::eigh(p.lambda_minus, false);
    r.min_plus = sp.min();
    r.min_minus = sm.min();
    r.norm_plus = std::max(std::abs(sp.min()), std::abs(sp.max()));
    r.norm_minus = std::max(std::abs(sm.min()), std::abs(sm.max()));
    r.pass = r.min_plus >= -1e-10 * r.norm_plus && r.min_minus >= -1e-10 * r.norm_minus;
    return r;
}

json MuscReport::to_json() const {
    return json{{"opposite_sector_of_c_plus", minus_c_plus.to_json()},
                {"opposite_sector_of_c_minus", plus_c_minus.to_json()},
                {"c_plus_minus_projector", c_plus_rest.to_json()},
                {"c_minus_minus_projector", c_minus_rest.to_json()},
                {"pass", pass}};
}

MuscReport verify_musc(const CovariancePair& p, int N_max, double factor) {
    const GridPtr& g = p.lambda_plus.grid();
    const BoundaryOperator cp = c_plus_of(p), cm = c_minus_of(p);
    const BoundaryOperator rp = BoundaryOperator::multiplier(g, boundary::mult_range_plus(*g));
    const BoundaryOperator rm = BoundaryOperator::multiplier(g, boundary::mult_range_minus(*g));
    MuscReport r;
    r.minus_c_plus = symcalc::smoothing_indicator(rm * cp, N_max, 0.0, factor);
    r.plus_c_minus = symcalc::smoothing_indicator(rp * cm, N_max, 0.0, factor);
    r.c_plus_rest = symcalc::smoothing_indicator(cp - rp, N_max, 0.0, factor);
    r.c_minus_rest = symcalc::smoothing_indicator(cm - rm, N_max, 0.0, factor);
    r.pass = r.minus_c_plus.pass && r.plus_c_minus.pass && r.c_plus_rest.pass && r.c_minus_rest.pass;
    return r;
}

json PurityReport::to_json() const {
    return json{{"reconstruction_residual", reconstruction}, {"involution_residual", involution},
                {"support", sectors.plus.size() + sectors.minus.size()}, {"pass", pass}};
}

namespace {

CMat herm_function(const CMat& h, double (*f)(double)) {
    Eigen::SelfAdjointEigenSolver<CMat> es(h);
    Vec v = es.eigenvalues();
    for (int i = 0; i < v.size(); ++i) v[i] = f(v[i]);
    return es.eigenvectors() * v.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

CMat stack(const CMat& pp, const CMat& pm, const CMat& mp, const CMat& mm) {
    const Eigen::Index np = pp.rows(), nm = mm.rows();
    CMat c(np + nm, np + nm);
    c.topLeftCorner(np, np) = pp;
    c.topRightCorner(np, nm) = pm;
    c.bottomLeftCorner(nm, np) = mp;
    c.bottomRightCorner(nm, nm) = mm;
    return c;
}

}  // namespace

PurityReport purity_check(const CovariancePair& p) {
    const GridPtr& g = p.lambda_plus.grid();
    const BoundaryOperator c = c_plus_of(p);
    const Vec rp = boundary::mult_range_plus(*g);
    // Support: the dense block plus any admissible mode whose diagonal is not the projector value.
    std::vector<char> in(g->n_modes(), 0);
    for (int i : c.active()) in[i] = 1;
    std::vector<int> extra;
    for (int i : g->admissible_modes())
        if (!in[i] && std::abs(c.diag()[i] - rp[i]) > 1e-12) extra.push_back(i);
    std::vector<int> support;
    for (int i : symcalc::merge_sets(c.active(), extra))
        if (g->admissible(i)) support.push_back(i);
    const symcalc::BlockDecomposition b = symcalc::toeplitz_blocks(c, &support);

    PurityReport r;
    r.sectors.plus = b.plus;
    r.sectors.minus = b.minus;
    const Eigen::Index np = b.pp.rows(), nm = b.mm.rows();
    if (np + nm == 0) {
        r.pass = true;
        return r;
    }
    const CMat one_mm = CMat::Identity(nm, nm) + b.mm;
    if (nm > 0) {
        Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (one_mm + one_mm.adjoint()), Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-10) throw NegativeBlock("1 + c_-- has a negative eigenvalue");
    }
    const CMat inv_sqrt = nm ? herm_function(0.5 * (one_mm + one_mm.adjoint()),
                                             [](double x) { return 1.0 / std::sqrt(std::max(x, 1e-300)); })
                             : CMat(0, 0);
    r.a_hat = nm ? CMat(inv_sqrt * b.mp) : CMat::Zero(0, np);
    const CMat& a = r.a_hat;
    const CMat aa = a * a.adjoint();
    const CMat s = nm ? herm_function(CMat::Identity(nm, nm) + aa, [](double x) { return std::sqrt(std::max(x, 0.0)); })
                      : CMat(0, 0);
    const CMat C = stack(b.pp, b.pm, b.mp, b.mm);
    const CMat Ca = stack(CMat::Identity(np, np) + a.adjoint() * a, a.adjoint() * s, s * a, aa);
    r.reconstruction = spectral_norm(C - Ca) / std::max(spectral_norm(C), 1e-300);
    Vec sg(np + nm);
    sg.head(np).setOnes();
    sg.tail(nm).setConstant(-1.0);
    const CMat S = sg.cast<cplx>().asDiagonal();
    const CMat P = S * (2.0 * C - S);
    r.involution = spectral_norm(P * P - CMat::Identity(np + nm, np + nm));
    r.pass = r.reconstruction <= 1e-8 && r.involution <= 1e-8;
    return r;
}

double one_particle_norm(const CovariancePair& p, const boundary::BoundaryFunction& g) {
    const CVec x = boundary::project_admissible(g).modes();
    const CVec v = p.lambda_plus.apply(x) + p.lambda_minus.apply(x);
    return std::sqrt(std::max(0.0, x.dot(v).real()));
}

Equivalence one_particle_equivalence(const CovariancePair& p, const std::vector<boundary::BoundaryFunction>& probes) {
    Equivalence e;
    e.lower = std::numeric_limits<double>::infinity();
    const GridPtr& g = p.lambda_plus.grid();
    const BoundaryOperator w = two_abs_ds_sqrt(g);
    for (const auto& f : probes) {
        const CVec x = boundary::project_admissible(f).modes();
        const double den = w.apply(x).norm();
        if (den == 0.0) continue;
        const double r = one_particle_norm(p, f) / den;
        e.lower = std::min(e.lower, r);
        e.upper = std::max(e.upper, r);
    }
    return e;
}

json PairReport::to_json() const {
    json j;
    j["commutator_identity"] = {{"residual", ccr}, {"pass", ccr_pass}};
    j["positivity"] = positivity.to_json();
    j["boundary_smoothing"] = musc.to_json();
    j["purity"] = purity.to_json();
    return j;
}

PairReport verify_all(const CovariancePair& p, int N_max, double factor) {
    PairReport r;
    r.ccr = verify_ccr(p);
    r.ccr_pass = r.ccr <= 1e-12;
    r.positivity = verify_positivity(p);
    r.musc = verify_musc(p, N_max, factor);
    try {
        r.purity = purity_check(p);
    } catch (const NegativeBlock&) {
        r.purity.pass = false;
        r.purity.reconstruction = std::numeric_limits<double>::infinity();
    }
    return r;
}

}  // namespace lightcone::states
