#include <cmath>
#include <random>

#include "lightcone/errors.hpp"
#include "lightcone/states.hpp"

namespace lightcone::states {

Vec generator_envelope(const boundary::BoundaryGrid& g, const GeneratorSpec& spec) {
    const double s0 = spec.sigma0 > 0 ? spec.sigma0 : g.sigma_max() / 4.0;
    const double l0 = spec.ell0 > 0 ? spec.ell0 : std::max(0.5, g.L() / 2.0);
    Vec e(g.n_modes());
    const Vec sg = g.mode_sigma();
    for (int m = 0; m < g.n_modes(); ++m) {
        const double l = g.angular().degree[m % g.n_ang_modes()];
        e[m] = g.admissible(m) ? std::exp(-std::pow(sg[m] / s0, 2) - std::pow(l / l0, 2)) : 0.0;
    }
    return e;
}

Sectors active_sectors(const boundary::BoundaryGrid& g, const GeneratorSpec& spec) {
    const Vec e = generator_envelope(g, spec);
    const Vec sg = g.mode_sigma();
    Sectors s;
    for (int m = 0; m < g.n_modes(); ++m) {
        if (!(e[m] >= spec.cut) || e[m] == 0.0) continue;
        (sg[m] > 0 ? s.plus : s.minus).push_back(m);
    }
    return s;
}

namespace {

using Rng = std::mt19937_64;

// k orthonormal columns over a sector, each a complex Gaussian shaped by the envelope.
CMat sector_basis(Rng& rng, const std::vector<int>& modes, const Vec& env, int k) {
    std::normal_distribution<double> nd(0.0, 1.0);
    const int n = static_cast<int>(modes.size());
    k = std::min(k, n);
    CMat Z(n, k);
    for (int c = 0; c < k; ++c)
        for (int r = 0; r < n; ++r) {
            const double re = nd(rng), im = nd(rng);
            Z(r, c) = cplx(re, im) * (env[modes[r]] / std::sqrt(2.0));
        }
    Eigen::HouseholderQR<CMat> qr(Z);
    return qr.householderQ() * CMat::Identity(n, k);
}

Vec singular_values(Rng& rng, int k, double lo, double hi) {
    std::uniform_real_distribution<double> ud(lo, hi);
    Vec s(k);
    for (int i = 0; i < k; ++i) s[i] = ud(rng);
    return s;
}

CMat random_square(Rng& rng, int k) {
    std::normal_distribution<double> nd(0.0, 1.0);
    CMat M(k, k);
    for (int c = 0; c < k; ++c)
        for (int r = 0; r < k; ++r) {
            const double re = nd(rng), im = nd(rng);
            M(r, c) = cplx(re, im);
        }
    return M;
}

}  // namespace

GaugeGenerators random_gauge(const GridPtr& g, std::uint64_t seed, const GeneratorSpec& spec, double d_norm) {
    if (spec.rank < 1 || spec.rank > 8) throw ConfigError("generator rank must lie in 1..8");
    Rng rng(seed);
    GaugeGenerators gen;
    gen.grid = g;
    gen.sectors = active_sectors(*g, spec);
    const Vec env = generator_envelope(*g, spec);
    if (gen.sectors.plus.empty() || gen.sectors.minus.empty()) throw ConfigError("generator envelope selects no modes");
    const CMat Up = sector_basis(rng, gen.sectors.plus, env, spec.rank);
    const CMat Vp = sector_basis(rng, gen.sectors.plus, env, spec.rank);
    const CMat Um = sector_basis(rng, gen.sectors.minus, env, spec.rank);
    const CMat Vm = sector_basis(rng, gen.sectors.minus, env, spec.rank);
    const int kp = static_cast<int>(Up.cols()), km = static_cast<int>(Um.cols());
    const Vec sp = singular_values(rng, kp, spec.sv_lo, spec.sv_hi);
    const Vec sm = singular_values(rng, km, 2.0, 4.0);
    gen.a_plus = Up * sp.cast<cplx>().asDiagonal() * Vp.adjoint();
    gen.a_minus = Um * sm.cast<cplx>().asDiagonal() * Vm.adjoint();
    CMat M = random_square(rng, std::max(kp, km)).topLeftCorner(kp, km);
    Eigen::JacobiSVD<CMat> svd(M);
    M *= d_norm / svd.singularValues()[0];
    gen.d = Up * M * Um.adjoint();
    return gen;
}

PurityGenerator random_purity(const GridPtr& g, std::uint64_t seed, const GeneratorSpec& spec) {
    if (spec.rank < 1 || spec.rank > 8) throw ConfigError("generator rank must lie in 1..8");
    Rng rng(seed);
    PurityGenerator gen;
    gen.grid = g;
    gen.sectors = active_sectors(*g, spec);
    const Vec env = generator_envelope(*g, spec);
    if (gen.sectors.plus.empty() || gen.sectors.minus.empty()) throw ConfigError("generator envelope selects no modes");
    const CMat Um = sector_basis(rng, gen.sectors.minus, env, spec.rank);
    const CMat Vp = sector_basis(rng, gen.sectors.plus, env, spec.rank);
    const int k = static_cast<int>(std::min(Um.cols(), Vp.cols()));
    const Vec s = singular_values(rng, k, spec.sv_lo, spec.sv_hi);
    gen.a = Um.leftCols(k) * s.cast<cplx>().asDiagonal() * Vp.leftCols(k).adjoint();
    return gen;
}

PurityGenerator zero_purity(const GridPtr& g) {
    PurityGenerator gen;
    gen.grid = g;
    gen.a = CMat(0, 0);
    return gen;
}

BoundaryOperator as_operator(const PurityGenerator& gen) {
    const auto& S = gen.sectors;
    const CMat zp = CMat::Zero(S.plus.size(), S.plus.size());
    const CMat zm = CMat::Zero(S.minus.size(), S.minus.size());
    const CMat zpm = CMat::Zero(S.plus.size(), S.minus.size());
    return symcalc::from_blocks(gen.grid, S.plus, S.minus, zp, zpm, gen.a, zm, CVec::Zero(gen.grid->n_modes()));
}

BoundaryOperator as_operator_d(const GaugeGenerators& gen) {
    const auto& S = gen.sectors;
    const CMat zp = CMat::Zero(S.plus.size(), S.plus.size());
    const CMat zm = CMat::Zero(S.minus.size(), S.minus.size());
    const CMat zmp = CMat::Zero(S.minus.size(), S.plus.size());
    return symcalc::from_blocks(gen.grid, S.plus, S.minus, zp, gen.d, zmp, zm, CVec::Zero(gen.grid->n_modes()));
}

}  // namespace lightcone::states
