#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "lightcone/bulk.hpp"
#include "lightcone/cli.hpp"
#include "lightcone/errors.hpp"
#include "lightcone/states.hpp"

namespace lightcone::cli {

namespace {

using boundary::BoundaryFunction;
using boundary::GridPtr;

// ---------- shared plumbing ----------

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent stream per (purpose, index) so toggling one check never shifts another's draws.
std::uint64_t derive(std::uint64_t seed, const std::string& tag, int i) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : tag) h = (h ^ c) * 1099511628211ULL;
    return splitmix(splitmix(seed ^ h) + static_cast<std::uint64_t>(i));
}

int chart_d(const Scenario& sc) { return sc.cfg.at("chart").at("d").get<int>(); }

geometry::ChartSpec chart_spec(const Scenario& sc) {
    const json& c = sc.cfg.at("chart");
    geometry::ChartSpec s;
    s.family = c.at("family").get<std::string>();
    s.d = c.at("d").get<int>();
    s.amplitude = c.at("amplitude").get<double>();
    s.width = c.at("width").get<double>();
    s.center = c.at("center").get<std::vector<double>>();
    s.potential = c.at("potential").get<std::string>();
    s.mass = c.at("mass").get<double>();
    s.radius = c.at("radius").get<double>();
    return s;
}

boundary::GridSpec grid_spec(const json& g, int d) {
    return {d, g.at("n_s").get<int>(), g.at("s_min").get<double>(), g.at("s_max").get<double>(), g.at("L").get<int>()};
}

Vec base_point(const Scenario& sc) {
    const int n = chart_d(sc) + 1;
    const auto p = sc.cfg.at("cone").at("p").get<std::vector<double>>();
    Vec out = Vec::Zero(n);
    if (p.empty()) {
        out[0] = sc.cfg.at("bulk").at("t_p").get<double>();
    } else {
        for (int i = 0; i < n; ++i) out[i] = p[i];
        if (out[0] != sc.cfg.at("bulk").at("t_p").get<double>()) throw ConfigError("scenario: cone.p[0] must equal bulk.t_p");
    }
    return out;
}

struct ConeSetup {
    std::unique_ptr<geometry::SpacetimeChart> chart;
    geometry::ConeDefiningFunction f;
    GridPtr bgrid;
    geometry::ConeChart cone;
};

std::unique_ptr<ConeSetup> build_cone(const Scenario& sc, const json& grid_cfg, const geometry::ChartSpec& cs) {
    auto out = std::make_unique<ConeSetup>();
    out->chart = std::make_unique<geometry::SpacetimeChart>(cs);
    const Vec p = base_point(sc);
    if (sc.cfg.at("cone").at("defining_function").get<std::string>() == "geodesic-fit")
        out->f = geometry::fit_from_null_geodesics(*out->chart, p).f;
    else
        out->f = geometry::ConeDefiningFunction::reference(*out->chart, p);
    out->bgrid = boundary::make_grid(grid_spec(grid_cfg, cs.d));
    geometry::NullCoordinateOptions no;
    no.eps0 = sc.cfg.at("cone").at("eps0").get<double>();
    out->cone = geometry::build_null_coordinates(*out->chart, out->f, out->bgrid->s_nodes(), out->bgrid->angular(), no);
    return out;
}

std::unique_ptr<ConeSetup> build_cone(const Scenario& sc, const json& grid_cfg) {
    return build_cone(sc, grid_cfg, chart_spec(sc));
}

bulk::BulkSpec bulk_spec(const Scenario& sc, int per_unit) {
    const json& b = sc.cfg.at("bulk");
    bulk::BulkSpec s;
    s.d = chart_d(sc);
    s.half_width = b.at("half_width").get<double>();
    s.dx = 1.0 / per_unit;
    s.courant = b.at("courant").get<double>();
    s.t_p = b.at("t_p").get<double>();
    s.t1 = b.at("t1").get<double>();
    s.t_end = b.at("t_end").get<double>();
    return s;
}

int pick_level(const json& levels, int level, const std::string& what) {
    const int n = static_cast<int>(levels.size());
    if (level < 0) level = n - 1;
    if (level >= n) throw ConfigError("--level " + std::to_string(level) + " is out of range for " + what);
    return levels[level].get<int>();
}

std::vector<double> vec_of(const json& a) { return a.get<std::vector<double>>(); }

bulk::CauchyData probe_data(const Scenario& sc, const bulk::BulkGrid& g, int which) {
    const json& p = sc.cfg.at("probes").at("packets").at(which);
    bulk::Packet pk;
    pk.xc = vec_of(p.at("center"));
    pk.rho = p.at("radius").get<double>();
    bulk::Packet zero;
    zero.xc = pk.xc;
    zero.amplitude = 0.0;
    const double t1 = g.spec().t1;
    if (p.at("slot").get<std::string>() == "value") return bulk::packet_data(g, t1, pk, nullptr);
    return bulk::packet_data(g, t1, zero, &pk);
}

bulk::Source probe_source(const Scenario& sc, int which) {
    const json& p = sc.cfg.at("probes").at("sources").at(which);
    bulk::Source s;
    s.tc = p.at("t").get<double>();
    s.tau = p.at("tau").get<double>();
    s.xc = vec_of(p.at("center"));
    s.rho = p.at("radius").get<double>();
    return s;
}

Check make_check(const std::string& name, const std::string& condition, bool pass, json details = json::object()) {
    Check c;
    c.name = name;
    c.condition = condition;
    c.pass = pass;
    c.details = std::move(details);
    return c;
}

CVec random_modes(const boundary::BoundaryGrid& g, std::mt19937_64& rng) {
    std::normal_distribution<double> nd(0.0, 1.0);
    CVec m = CVec::Zero(g.n_modes());
    for (int k : g.admissible_modes()) {
        const double re = nd(rng);
        const double im = nd(rng);
        m[k] = cplx(re, im);
    }
    return m;
}

// Band-limited shift profile: degrees <= 2, scaled to max |b| = amplitude on the quadrature nodes.
Vec random_shift(const boundary::BoundaryGrid& g, std::uint64_t seed, double amplitude) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    const auto& ang = g.angular();
    Vec b = Vec::Zero(ang.n_modes);
    for (int a = 0; a < ang.n_modes; ++a)
        if (ang.degree[a] <= 2) b[a] = nd(rng);
    const double peak = boundary::angular_values(g, b).cwiseAbs().maxCoeff();
    if (peak > 0.0) b *= amplitude / peak;
    return b;
}

// ---------- geometry ----------

// Cubic lattice inside the ball; the Lipschitz estimate compares nearest-spacing neighbours.
Mat graph_nodes(int d, double radius, int per_radius) {
    const double h = radius / per_radius;
    std::vector<Vec> pts;
    const int kz = d == 3 ? per_radius : 0;
    for (int k = -kz; k <= kz; ++k)
        for (int j = -per_radius; j <= per_radius; ++j)
            for (int i = -per_radius; i <= per_radius; ++i) {
                Vec x(d);
                x[0] = i * h;
                x[1] = j * h;
                if (d == 3) x[2] = k * h;
                if (x.norm() <= radius) pts.push_back(x);
            }
    Mat nodes(static_cast<int>(pts.size()), d);
    for (std::size_t i = 0; i < pts.size(); ++i) nodes.row(static_cast<int>(i)) = pts[i].transpose();
    return nodes;
}

void geometry_checks(const Scenario& sc, const ConeSetup& cs, Report& r) {
    const auto& chart = *cs.chart;
    const auto& cone = cs.cone;
    {
        Check c;
        c.name = "defining_function";
        c.condition = "cone defining function vanishes on null generators with non-degenerate gradient away from the tip";
        try {
            const auto v = geometry::validate_hypothesis(chart, cs.f);
            c.pass = v.pass;
            c.details = v.to_json();
        } catch (const Error& e) {
            c.pass = false;
            c.details = {{"error", e.kind()}, {"message", e.what()}};
        }
        r.checks.push_back(std::move(c));
    }
    const auto& res = cone.residuals;
    const double nf_tol = sc.tol("normal_form");
    const double worst = std::max({res.max_null, res.max_cross, res.max_normal_form});
    r.checks.push_back(make_check("normal_form", "cone metric in null normal form: g(d_s,d_s) = g(d_s,d_theta) = 0 and g(grad f, d_s) = -1",
                                  worst <= nf_tol,
                                  {{"max_null", res.max_null},
                                   {"max_cross", res.max_cross},
                                   {"max_normal_form", res.max_normal_form},
                                   {"max_angle_drift", res.max_angle_drift},
                                   {"tolerance", nf_tol}}));
    const auto& lf = cone.log_fit;
    const bool log_ok = lf.alpha_spread <= sc.tol("log_alpha_spread") && lf.k_max <= sc.tol("k_bound") &&
                        lf.k_slope_max <= sc.tol("k_slope_bound");
    r.checks.push_back(make_check(
        "null_coordinate_logarithm",
        "s = alpha ln(v/eps0) + k(s, theta) with one alpha across generators and bounded, smooth k", log_ok,
        {{"alpha", lf.alpha},
         {"alpha_spread", lf.alpha_spread},
         {"k_max", lf.k_max},
         {"k_slope_max", lf.k_slope_max},
         {"convention", lf.convention},
         {"tolerance_spread", sc.tol("log_alpha_spread")},
         {"discrepancy",
          "with the normal form -2 df ds the affine parameter scales like v^2 along each generator, so the fitted "
          "slope is alpha = 1/2; a unit-slope logarithm s = ln(v/eps0) + k would leave k growing linearly in s"}}));
    const double t1 = sc.cfg.at("bulk").at("t1").get<double>();
    const double tp = sc.cfg.at("bulk").at("t_p").get<double>();
    const Mat nodes = graph_nodes(chart.d(), 0.95 * (t1 - tp), 8);
    const auto graph = geometry::cone_graph(chart, cs.f, t1, nodes);
    r.checks.push_back(make_check("cone_graph", "cone below the initial slice is the graph of a 1-Lipschitz time function",
                                  graph.lipschitz <= 1.0 + 1e-6,
                                  {{"lipschitz", graph.lipschitz}, {"nodes", nodes.rows()}, {"F_max", graph.F.maxCoeff()}}));
}

// ---------- states ----------

struct Family {
    std::string name;
    std::string expect;  // pure | mixed | any
    std::vector<states::CovariancePair> pairs;
    std::vector<states::PurityGenerator> generators;  // pure family only
};

states::GeneratorSpec generator_spec(const json& st) {
    states::GeneratorSpec g;
    g.rank = st.at("rank").get<int>();
    g.sigma0 = st.at("sigma0").get<double>();
    g.ell0 = st.at("ell0").get<double>();
    g.sv_lo = st.at("sv_lo").get<double>();
    g.sv_hi = st.at("sv_hi").get<double>();
    return g;
}

std::string expectation(const json& st, const std::string& family) {
    const std::string e = st.at("expect_purity").get<std::string>();
    if (e != "auto") return e;
    if (family == "gauge") return "mixed";
    if (family == "pure" || family == "moretti") return "pure";
    return "any";
}

std::vector<Family> build_families(const Scenario& sc, const GridPtr& g) {
    const json& st = sc.cfg.at("state");
    const std::string recipe = st.at("recipe").get<std::string>();
    const int count = st.at("count").get<int>();
    const auto spec = generator_spec(st);
    std::vector<Family> out;
    if (recipe == "gauge" || recipe == "suite") {
        Family f{"gauge", expectation(st, "gauge"), {}, {}};
        for (int i = 0; i < count; ++i) {
            const auto gen = states::random_gauge(g, derive(sc.seed(), "gauge", i), spec, st.at("d_norm").get<double>());
            f.pairs.push_back(states::build_gauge_covariances(gen, st.at("bypass_norm").get<bool>()));
        }
        out.push_back(std::move(f));
    }
    if (recipe == "pure" || recipe == "suite") {
        Family f{"pure", expectation(st, "pure"), {}, {}};
        for (int i = 0; i < count; ++i) {
            f.generators.push_back(states::random_purity(g, derive(sc.seed(), "pure", i), spec));
            f.pairs.push_back(states::build_pure_covariances(f.generators.back()));
        }
        out.push_back(std::move(f));
    }
    if (recipe == "moretti" || recipe == "suite") out.push_back({"moretti", expectation(st, "moretti"), {states::moretti(g)}, {}});
    if (recipe == "identity")
        out.push_back({"identity", expectation(st, "identity"),
                       {states::pair_from_c_plus(symcalc::BoundaryOperator::identity(g), "custom")}, {}});
    if (recipe == "custom") {
        auto p = states::load_pair(st.at("file").get<std::string>());
        if (!p.lambda_plus.grid()->same(*g)) throw ConfigError("state.file was saved on a different grid than state.grid");
        out.push_back({"custom", expectation(st, "custom"), {std::move(p)}, {}});
    }
    return out;
}

Check charge_check(const Scenario& sc, const GridPtr& g) {
    const int n = sc.cfg.at("state").at("charge_pairs").get<int>();
    std::mt19937_64 rng(derive(sc.seed(), "charge", 0));
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto g1 = BoundaryFunction::from_modes(g, random_modes(*g, rng));
        const auto g2 = BoundaryFunction::from_modes(g, random_modes(*g, rng));
        const cplx lhs = cplx(0.0, 1.0) * boundary::symplectic_form(g1, g2);
        const cplx rhs = boundary::charge_pairing(g1, g2);
        // Cauchy-Schwarz bound of the pairing.
        const auto dg2 = boundary::apply_multiplier(g2, 2.0 * boundary::mult_ds(*g));
        const double scale = std::sqrt(std::abs(boundary::inner(g1, g1)) * std::abs(boundary::inner(dg2, dg2)));
        worst = std::max(worst, std::abs(lhs - rhs) / std::max(std::abs(rhs), scale));
    }
    return make_check("charge_identity", "i sigma_C(g1, g2) equals the pairing (g1 | 2 D_s g2)", worst <= sc.tol("charge_identity"),
                      {{"pairs", n}, {"max_relative_residual", worst}, {"tolerance", sc.tol("charge_identity")}});
}

io::Table smoothing_table(const states::MuscReport& m) {
    io::Table t;
    t.header = {"N", "opposite_sector_c_plus", "opposite_sector_c_minus", "c_plus_minus_projector", "c_minus_minus_projector"};
    for (std::size_t k = 0; k < m.minus_c_plus.norms.size(); ++k)
        t.rows.push_back({static_cast<double>(k), m.minus_c_plus.norms[k], m.plus_c_minus.norms[k], m.c_plus_rest.norms[k],
                          m.c_minus_rest.norms[k]});
    return t;
}

void state_checks(const Scenario& sc, Report& r) {
    const json& st = sc.cfg.at("state");
    const GridPtr g = boundary::make_grid(grid_spec(st.at("grid"), chart_d(sc)));
    r.data["state_grid"] = boundary::to_json(g->spec());
    r.data["state_grid_modes"] = g->n_modes();
    const int N_max = st.at("N_max").get<int>();
    const double factor = st.at("factor").get<double>();

    if (sc.enabled("charge_identity")) r.checks.push_back(charge_check(sc, g));
    if (!sc.enabled("state") && !sc.enabled("shift_covariance")) return;

    const auto families = build_families(sc, g);
    if (sc.enabled("state")) {
        double ccr_worst = 0.0;
        bool pos_ok = true, musc_ok = true, purity_ok = true;
        double worst_ratio = 0.0;
        int musc_fail = 0, pos_fail = 0, total = 0;
        json fam_json = json::object();
        for (const auto& fam : families) {
            json rows = json::array();
            int pure_count = 0;
            for (const auto& p : fam.pairs) {
                const auto pr = states::verify_all(p, N_max, factor);
                ccr_worst = std::max(ccr_worst, pr.ccr);
                pos_ok = pos_ok && pr.positivity.pass;
                musc_ok = musc_ok && pr.musc.pass;
                ++total;
                pos_fail += pr.positivity.pass ? 0 : 1;
                musc_fail += pr.musc.pass ? 0 : 1;
                worst_ratio = std::min({worst_ratio, pr.positivity.min_plus / std::max(pr.positivity.norm_plus, 1e-300),
                                        pr.positivity.min_minus / std::max(pr.positivity.norm_minus, 1e-300)});
                pure_count += pr.purity.pass ? 1 : 0;
                rows.push_back(pr.to_json());
                if (r.tables.count("smoothing_" + fam.name) == 0) r.tables["smoothing_" + fam.name] = smoothing_table(pr.musc);
            }
            const int n = static_cast<int>(fam.pairs.size());
            bool ok = true;
            if (fam.expect == "pure") ok = pure_count == n;
            if (fam.expect == "mixed") ok = (n - pure_count) >= static_cast<int>(std::ceil(sc.tol("mixed_fail_fraction") * n - 1e-9));
            purity_ok = purity_ok && ok;
            fam_json[fam.name] = {{"pairs", rows}, {"expect_purity", fam.expect}, {"pure_count", pure_count}, {"count", n},
                                  {"purity_as_expected", ok}};
        }
        r.data["families"] = fam_json;
        r.checks.push_back(make_check("commutator_identity", "lambda+ - lambda- = i sigma_C as operators",
                                      ccr_worst <= sc.tol("ccr"), {{"max_residual", ccr_worst}, {"tolerance", sc.tol("ccr")}}));
        r.checks.push_back(make_check("positivity", "lambda+ >= 0 and lambda- >= 0 up to 1e-10 of their norms", pos_ok,
                                      {{"min_eigenvalue_over_norm", worst_ratio}, {"failing_pairs", pos_fail}, {"pairs", total}}));
        r.checks.push_back(make_check("boundary_smoothing",
                                      "opposite-frequency blocks of c+ and c- decay faster than any Sobolev weight on the resolved band",
                                      musc_ok, {{"failing_pairs", musc_fail}, {"pairs", total}}));
        json counts = json::object();
        for (const auto& [k, v] : fam_json.items()) counts[k] = {{"pure", v["pure_count"]}, {"of", v["count"]}, {"expect", v["expect_purity"]}};
        r.checks.push_back(make_check("purity", "block form of a pure state: c+ is the covariance of some purity generator a",
                                      purity_ok, counts));
        for (const auto& fam : families) {
            if (fam.generators.empty()) continue;
            double inv = 0.0, conj = 0.0;
            for (const auto& gen : fam.generators) {
                const auto b = states::check_bogoliubov(gen);
                inv = std::max(inv, b.inverse_residual);
                conj = std::max(conj, b.conjugation_residual);
            }
            r.checks.push_back(make_check("bogoliubov", "u(a) u(-a) = 1 and u(a)* c+(0) u(a) = c+(a)",
                                          std::max(inv, conj) <= sc.tol("bogoliubov"),
                                          {{"inverse_residual", inv}, {"conjugation_residual", conj}, {"tolerance", sc.tol("bogoliubov")}}));
        }
    }

    if (sc.enabled("shift_covariance")) {
        const int shifts = st.at("shifts").get<int>();
        const double amp = st.at("shift_amplitude").get<double>();
        bool ok = true;
        json rows = json::array();
        for (int i = 0; i < shifts; ++i) {
            const Vec b = random_shift(*g, derive(sc.seed(), "shift", i), amp);
            for (const auto& fam : families) {
                const auto& p = fam.pairs.front();
                const bool pure_before = states::purity_check(p).pass;
                const auto pr = states::verify_all(states::conjugate_pair(p, b), N_max, factor);
                const bool this_ok = pr.ccr <= sc.tol("ccr") && pr.positivity.pass && pr.musc.pass && pr.purity.pass == pure_before;
                ok = ok && this_ok;
                rows.push_back({{"shift", i}, {"family", fam.name}, {"ccr", pr.ccr}, {"positivity", pr.positivity.pass},
                                {"boundary_smoothing", pr.musc.pass}, {"pure_before", pure_before},
                                {"pure_after", pr.purity.pass}, {"pass", this_ok}});
            }
        }
        r.checks.push_back(make_check("shift_covariance",
                                      "every state check keeps its outcome after conjugation by the shift s -> s + b(theta)", ok,
                                      {{"runs", rows}, {"amplitude", amp}}));
    }
}

// ---------- bulk ----------

bulk::RestrictOptions restrict_options(const Scenario& sc) {
    bulk::RestrictOptions ro;
    ro.cubic = sc.cfg.at("bulk").at("cubic").get<bool>();
    return ro;
}

bulk::MonomorphismResult monomorphism_at(const Scenario& sc, const ConeSetup& cs, int per_unit) {
    const bulk::BulkGrid g(bulk_spec(sc, per_unit));
    const auto a = probe_data(sc, g, 0);
    const auto b = probe_data(sc, g, 1);
    return bulk::verify_monomorphism(a, b, g, *cs.chart, cs.cone, cs.bgrid, restrict_options(sc));
}

// Relative L2 gap between leapfrog and exact Fourier evolution of the first probe at mid-time.
double leapfrog_gap(const Scenario& sc, const ConeSetup& cs, int per_unit) {
    auto g = std::make_shared<bulk::BulkGrid>(bulk_spec(sc, per_unit));
    const auto a = probe_data(sc, *g, 0);
    const double tm = 0.5 * (g->spec().t_p + g->spec().t1);
    bulk::SolveOptions so;
    so.store_times = {tm};
    const auto fld = bulk::solve_cauchy(a, g, *cs.chart, so);
    const auto& sl = fld.slices.front();
    const auto ex = bulk::spectral_evolve(*g, a, sl.t);
    return bulk::l2_diff(*g, sl.value, ex.phi0) / bulk::l2_norm(*g, ex.phi0);
}

void bulk_ccr_checks(const Scenario& sc, const ConeSetup& cs, int per_unit, Report& r) {
    const bulk::BulkGrid g(bulk_spec(sc, per_unit));
    const auto u1 = probe_source(sc, 0);
    const auto u2 = probe_source(sc, 1);
    const auto ro = restrict_options(sc);
    const double e12 = bulk::propagator_pairing(u1, u2, g, *cs.chart);
    const double e21 = bulk::propagator_pairing(u2, u1, g, *cs.chart);
    const double anti = std::abs(e12 + e21) / std::abs(e12);
    r.checks.push_back(make_check("propagator_antisymmetry", "<u1, E u2> = -<u2, E u1>", anti <= sc.tol("antisymmetry"),
                                  {{"e12", e12}, {"e21", e21}, {"residual", anti}, {"tolerance", sc.tol("antisymmetry")}}));

    const auto t1 = bulk::causal_trace(u1, g, *cs.chart, cs.cone, cs.bgrid, ro);
    const auto t2 = bulk::causal_trace(u2, g, *cs.chart, cs.cone, cs.bgrid, ro);
    const json& pr = sc.cfg.at("probes");
    states::GeneratorSpec gs = generator_spec(sc.cfg.at("state"));
    gs.sigma0 = pr.at("pure_sigma0").get<double>();
    gs.ell0 = pr.at("pure_ell0").get<double>();
    std::vector<std::pair<std::string, states::CovariancePair>> pairs;
    pairs.emplace_back("moretti", states::moretti(cs.bgrid));
    pairs.emplace_back("pure", states::build_pure_covariances(states::random_purity(cs.bgrid, derive(sc.seed(), "bulk-pure", 0), gs)));
    double worst = 0.0, min_diag = std::numeric_limits<double>::infinity(), max_diag = 0.0;
    json rows = json::object();
    for (const auto& [name, pair] : pairs) {
        const double ccr = states::verify_ccr(pair);
        const auto tp = bulk::bulk_two_point(pair, t1, t2, e12);
        const auto self = bulk::bulk_two_point(pair, t1, t1, 0.0);
        const auto self2 = bulk::bulk_two_point(pair, t2, t2, 0.0);
        worst = std::max(worst, tp.ccr_residual);
        for (const auto& sp : {self, self2}) {
            min_diag = std::min({min_diag, sp.lambda_plus.real(), sp.lambda_minus.real()});
            max_diag = std::max({max_diag, sp.lambda_plus.real(), sp.lambda_minus.real()});
        }
        rows[name] = {{"boundary_ccr", ccr}, {"two_point", tp.to_json()},
                      {"self_lambda_plus", self.lambda_plus.real()}, {"self_lambda_minus", self.lambda_minus.real()}};
    }
    r.checks.push_back(make_check("bulk_commutator", "Lambda+ - Lambda- = i <u1, E u2> for pulled-back boundary pairs",
                                  worst <= sc.tol("bulk_ccr"),
                                  {{"pairs", rows}, {"max_residual", worst}, {"tolerance", sc.tol("bulk_ccr")}, {"dx", g.dx()}}));
    r.checks.push_back(make_check("bulk_positivity", "Lambda+(u, u) >= 0 and Lambda-(u, u) >= 0", min_diag >= -1e-10 * max_diag,
                                  {{"min_value", min_diag}, {"max_value", max_diag}, {"relative_floor", -1e-10}}));
}

// Exponent of the trace near the tip, fitted in ln v.
void decay_checks(const Scenario& sc, Report& r) {
    const json& dc = sc.cfg.at("decay");
    const int d = chart_d(sc);
    geometry::ChartSpec flat;
    flat.d = d;
    const auto cs = build_cone(sc, dc.at("boundary"), flat);
    const double td = dc.at("t_data").get<double>();
    const double tp = sc.cfg.at("bulk").at("t_p").get<double>();
    bulk::BulkSpec bs;
    bs.d = d;
    bs.t_p = tp;
    bs.t1 = td;
    bs.t_end = td;
    bs.dx = 1.0 / dc.at("level").get<int>();
    bs.courant = sc.cfg.at("bulk").at("courant").get<double>();
    const double width = dc.at("width").get<double>();
    const double radius = dc.at("radius").get<double>();
    bs.half_width = (d == 3 ? 7.0 * width : 3.0 * radius) + (td - tp) + 4.0 * bs.dx;
    const bulk::BulkGrid g(bs);

    auto profile = [&](const BoundaryFunction& tr) {
        const CMat v = tr.nodes();
        Vec sup(v.cols());
        for (int j = 0; j < v.cols(); ++j) sup[j] = v.col(j).cwiseAbs().maxCoeff();
        return sup;
    };
    const Vec& s = cs->bgrid->s_nodes();
    const double lo = dc.at("fit")[0].get<double>(), hi = dc.at("fit")[1].get<double>();
    const double alpha = cs->cone.log_fit.alpha;
    const double expected = 0.5 * (d - 1);
    json details = {{"expected", expected}, {"window", {lo, hi}}, {"alpha", alpha}, {"dx", g.dx()}};
    bool ok = true;

    bulk::CauchyData data;
    if (d == 3) {
        // Spherical wave (f(tau + r) - f(tau - r)) / r, tau = t - t_data, regular at r = 0.
        auto f = [&](double u) { return u * std::exp(-u * u / (2.0 * width * width)); };
        auto df = [&](double u) { return (1.0 - u * u / (width * width)) * std::exp(-u * u / (2.0 * width * width)); };
        auto phi = [&](double t, const double* x) {
            const double rr = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
            const double tau = t - td;
            if (rr < 1e-8) return 2.0 * df(tau);
            return (f(tau + rr) - f(tau - rr)) / rr;
        };
        auto dphi = [&](double t, const double* x) {
            const double rr = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
            const double tau = t - td;
            if (rr < 1e-8) {
                const double h = 1e-5;
                return (df(tau + h) - df(tau - h)) / h;
            }
            return (df(tau + rr) - df(tau - rr)) / rr;
        };
        data.t = td;
        data.phi0 = bulk::sample(g, [&](const double* x) { return phi(td, x); });
        data.phi1 = bulk::sample(g, [&](const double* x) { return dphi(td, x); });
        const auto exact = bulk::restrict_analytic(phi, cs->cone, cs->bgrid);
        const auto fit = geometry::trace_decay_exponent(s, profile(exact), lo, hi, alpha);
        details["closed_form_exponent"] = fit.slope_log_v;
        ok = ok && fit.valid && std::abs(fit.slope_log_v - expected) <= sc.tol("decay");
    } else {
        bulk::Packet pk;
        pk.xc = {0.0, 0.0};
        pk.rho = radius;
        data = bulk::packet_data(g, td, pk, nullptr);
    }
    const auto tr = bulk::restrict_to_cone(data, g, *cs->chart, cs->cone, cs->bgrid, restrict_options(sc));
    const auto fit = geometry::trace_decay_exponent(s, profile(tr), lo, hi, alpha);
    details["exponent"] = fit.slope_log_v;
    details["fit_residual"] = fit.residual;
    details["points"] = fit.points;
    ok = ok && fit.valid && std::abs(fit.slope_log_v - expected) <= sc.tol("decay");
    details["tolerance"] = sc.tol("decay");
    r.checks.push_back(make_check("trace_decay", "sup over theta of the trace decays like v^{(d-1)/2} at the tip", ok, details));
}

void conformal_checks(const Scenario& sc, Report& r) {
    const json& cf = sc.cfg.at("conformal");
    const int d = chart_d(sc);
    geometry::ChartSpec flat_spec;
    flat_spec.d = d;
    const geometry::SpacetimeChart flat(flat_spec);
    geometry::ChartSpec ts;
    ts.family = "conformal-gaussian";
    ts.d = d;
    ts.amplitude = cf.at("amplitude").get<double>();
    ts.width = cf.at("width").get<double>();
    ts.center = vec_of(cf.at("center"));
    ts.potential = "conformal";
    const geometry::SpacetimeChart target(ts);
    const int k_num = -(d + 1 - 2);  // power of Omega is k_num / 2
    const double k = 0.5 * k_num;
    const double te = cf.at("t_eval").get<double>();

    std::vector<double> hs, residuals;
    json rows = json::array();
    double sym_exact = 0.0, sym_evolved = 0.0, field_gap = 0.0;
    for (const auto& lv : cf.at("levels")) {
        auto g = std::make_shared<bulk::BulkGrid>(bulk_spec(sc, lv.get<int>()));
        const double dt = g->dt();
        const auto a = probe_data(sc, *g, 0);
        const auto b = probe_data(sc, *g, 1);
        auto slice_of = [&](const bulk::CauchyData& data) {
            bulk::Slice s;
            s.t = te;
            s.lo = bulk::spectral_evolve(*g, data, te - dt).phi0;
            s.value = bulk::spectral_evolve(*g, data, te).phi0;
            s.hi = bulk::spectral_evolve(*g, data, te + dt).phi0;
            s.dvalue.resize(s.value.size());
            for (std::size_t i = 0; i < s.value.size(); ++i) s.dvalue[i] = (s.hi[i] - s.lo[i]) / (2.0 * dt);
            return s;
        };
        const auto sa = bulk::conformal_slice(*g, target, slice_of(a));
        const double res = bulk::kg_residual(*g, target, sa);
        hs.push_back(g->dx());
        residuals.push_back(res);

        // Symplectic invariance with exact time derivatives of the mapped data.
        auto mapped = [&](const bulk::CauchyData& data, double t) {
            const auto ex = bulk::spectral_evolve(*g, data, t);
            bulk::CauchyData out;
            out.t = t;
            out.phi0.resize(ex.phi0.size());
            out.phi1.resize(ex.phi0.size());
            double x[3] = {0, 0, 0};
            for (std::size_t i = 0; i < ex.phi0.size(); ++i) {
                g->position(i, x);
                Vec X(d + 1);
                X[0] = t;
                for (int m = 0; m < d; ++m) X[m + 1] = x[m];
                const double om = target.omega_at(t, x);
                const double w = std::pow(om, k);
                const double dl = target.dlog_omega(X)[0];
                out.phi0[i] = w * ex.phi0[i];
                out.phi1[i] = w * (ex.phi1[i] + k * dl * ex.phi0[i]);
            }
            return out;
        };
        const auto ea = bulk::spectral_evolve(*g, a, te), eb = bulk::spectral_evolve(*g, b, te);
        const double sigma = bulk::symplectic_from_data(*g, flat, ea, eb);
        const double sigma_t = bulk::symplectic_from_data(*g, target, mapped(a, te), mapped(b, te));
        sym_exact = std::abs(sigma_t - sigma) / std::abs(sigma);

        // Second route: evolve the mapped data in the curved chart and pair the discrete levels.
        bulk::SolveOptions so;
        so.store_times = {te};
        const double t1 = g->spec().t1;
        const auto fa = bulk::solve_cauchy(mapped(a, t1), g, target, so);
        const auto fb = bulk::solve_cauchy(mapped(b, t1), g, target, so);
        const auto& la = fa.slices.front();
        const auto& lb = fb.slices.front();
        sym_evolved = std::abs(bulk::symplectic_from_levels(*g, target, la, lb) - sigma) / std::abs(sigma);
        const auto ref = bulk::conformal_slice(*g, target, slice_of(a));
        field_gap = bulk::l2_diff(*g, la.value, ref.value) / bulk::l2_norm(*g, ref.value);
        rows.push_back({{"dx", g->dx()}, {"field_residual", res}, {"symplectic_exact_derivatives", sym_exact},
                        {"symplectic_evolved", sym_evolved}, {"evolved_vs_mapped_l2", field_gap}});
    }
    const double order = fitted_order(hs, residuals);
    r.checks.push_back(make_check("conformal_field_equation",
                                  "the mapped flat solution solves the conformally coupled equation up to second-order truncation",
                                  std::abs(order - 2.0) <= sc.tol("conformal_order"),
                                  {{"order", order}, {"levels", rows}, {"tolerance", sc.tol("conformal_order")}}));
    const double tol = sc.tol("conformal_symplectic");
    r.checks.push_back(make_check("conformal_symplectic", "sigma'(phi'1, phi'2) = sigma(phi1, phi2) under the conformal field map",
                                  sym_exact <= tol && sym_evolved <= tol,
                                  {{"exact_derivatives", sym_exact}, {"evolved", sym_evolved}, {"tolerance", tol}}));
}

// ---------- goursat ----------

Vec spline_packet(const bulk::SplineBasis& basis) {
    const int n = basis.count();
    Vec c = Vec::Zero(2 * n);
    for (int k = 0; k < n; ++k) {
        Vec x = basis.center(k);
        x[0] -= 0.05;
        const double e = std::exp(-x.squaredNorm() / 0.08);
        c[k] = e;
        c[n + k] = 0.5 * x[1] * e;
    }
    return c;
}

}  // namespace

double fitted_order(const std::vector<double>& h, const std::vector<double>& err) {
    if (h.size() != err.size() || h.size() < 2) throw ConfigError("order fit needs at least two levels");
    const int n = static_cast<int>(h.size());
    double mx = 0, my = 0;
    for (int i = 0; i < n; ++i) {
        mx += std::log(h[i]);
        my += std::log(err[i]);
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0;
    for (int i = 0; i < n; ++i) {
        sxy += (std::log(h[i]) - mx) * (std::log(err[i]) - my);
        sxx += (std::log(h[i]) - mx) * (std::log(h[i]) - mx);
    }
    return sxy / sxx;
}

Report run_geometry(const Scenario& sc) {
    Report r;
    r.command = "geometry";
    r.scenario = sc.name();
    const auto cs = build_cone(sc, sc.cfg.at("boundary"));
    r.data["chart"] = geometry::to_json(cs->chart->spec());
    r.data["cone"] = cs->cone.summary();
    if (sc.enabled("geometry")) geometry_checks(sc, *cs, r);
    io::Table t;
    t.header = {"s", "v_mean", "beta_min", "beta_max"};
    const int na = cs->cone.n_ang();
    for (int j = 0; j < cs->cone.n_s(); ++j) {
        double vm = 0, bmin = 1e300, bmax = -1e300;
        for (int q = 0; q < na; ++q) {
            const int i = cs->cone.index(j, q);
            vm += cs->cone.v[i] / na;
            bmin = std::min(bmin, cs->cone.beta[i]);
            bmax = std::max(bmax, cs->cone.beta[i]);
        }
        t.rows.push_back({cs->cone.s[j], vm, bmin, bmax});
    }
    r.tables["profile"] = t;
    if (sc.cfg.at("output").at("dump_fields").get<bool>()) {
        io::Container c;
        c.kind = "cone";
        c.meta = cs->cone.summary();
        c.put("s", Mat(cs->cone.s));
        c.put("X", cs->cone.X);
        c.put("beta", Mat(cs->cone.beta));
        c.put("v", Mat(cs->cone.v));
        r.blobs["cone"] = c;
    }
    return r;
}

Report run_state(const Scenario& sc) {
    Report r;
    r.command = "state";
    r.scenario = sc.name();
    state_checks(sc, r);
    return r;
}

Report run_verify(const Scenario& sc, int level) {
    Report r;
    r.command = "verify";
    r.scenario = sc.name();
    state_checks(sc, r);
    const int per_unit = pick_level(sc.cfg.at("bulk").at("levels"), level, "bulk.levels");
    r.data["dx"] = 1.0 / per_unit;
    if (sc.enabled("monomorphism") || sc.enabled("bulk_ccr")) {
        const auto cs = build_cone(sc, sc.cfg.at("boundary"));
        if (sc.enabled("monomorphism")) {
            const auto m = monomorphism_at(sc, *cs, per_unit);
            json det = m.to_json();
            det["tolerance"] = sc.tol("monomorphism");
            det["dx"] = 1.0 / per_unit;
            r.checks.push_back(make_check("monomorphism", "sigma_C(rho phi1, rho phi2) = sigma(phi1, phi2) for the cone trace rho",
                                          m.residual <= sc.tol("monomorphism"), det));
        }
        if (sc.enabled("bulk_ccr")) bulk_ccr_checks(sc, *cs, per_unit, r);
    }
    if (sc.enabled("trace_decay")) decay_checks(sc, r);
    if (sc.enabled("conformal")) conformal_checks(sc, r);
    return r;
}

Report run_goursat(const Scenario& sc, int level) {
    Report r;
    r.command = "goursat";
    r.scenario = sc.name();
    if (!sc.enabled("goursat")) return r;
    const json& gc = sc.cfg.at("goursat");
    const int d = chart_d(sc);
    const auto cs = build_cone(sc, gc.at("boundary"));
    const auto basis = bulk::make_spline_basis(d, gc.at("per_axis").get<int>(), gc.at("half_cube").get<double>(),
                                               gc.at("count").get<int>());
    bulk::RestrictOptions ro;
    ro.cubic = gc.at("cubic").get<bool>();
    ro.cap_at_t1 = true;
    const double alpha = cs->cone.log_fit.alpha;
    const double cutoff = gc.at("cutoff").get<double>();
    r.data["basis_functions"] = 2 * basis.count();
    r.data["alpha"] = alpha;

    const json& levels = gc.at("levels");
    const int chosen = pick_level(levels, level, "goursat.levels");
    auto spec_for = [&](int per_unit) {
        bulk::BulkSpec s = bulk_spec(sc, per_unit);
        s.t_end = s.t1;
        // Only the part of the box below the initial slice matters, plus the margin.
        s.half_width = (s.t1 - s.t_p) + 0.125;
        return s;
    };
    std::vector<double> conds;
    io::Table sv;
    sv.header = {"index"};
    std::vector<Vec> svals;
    std::unique_ptr<bulk::TraceOperator> op;
    std::unique_ptr<bulk::BulkGrid> grid;
    for (const auto& lv : levels) {
        const int pu = lv.get<int>();
        auto g = std::make_unique<bulk::BulkGrid>(spec_for(pu));
        auto o = std::make_unique<bulk::TraceOperator>(bulk::assemble_trace_operator(*g, *cs->chart, cs->cone, cs->bgrid, basis, alpha, ro));
        conds.push_back(o->condition());
        svals.push_back(o->singular_values);
        sv.header.push_back("dx_1_over_" + std::to_string(pu));
        if (pu == chosen && !op) {
            op = std::move(o);
            grid = std::move(g);
        }
    }
    for (int i = 0; i < svals.front().size(); ++i) {
        std::vector<double> row{static_cast<double>(i)};
        for (const auto& v : svals) row.push_back(v[i]);
        sv.rows.push_back(row);
    }
    r.tables["singular_values"] = sv;
    const double cmax = *std::max_element(conds.begin(), conds.end());
    const double cmin = *std::min_element(conds.begin(), conds.end());
    const double variation = cmax / cmin - 1.0;
    r.checks.push_back(make_check("condition_stability",
                                  "condition number of the energy-normalized trace operator is stable under refinement",
                                  levels.size() >= 2 && variation <= sc.tol("condition_stability"),
                                  {{"conditions", conds}, {"variation", variation}, {"levels", levels},
                                   {"tolerance", sc.tol("condition_stability")}}));

    // In-basis round trip.
    std::mt19937_64 rng(derive(sc.seed(), "goursat-round-trip", 0));
    std::normal_distribution<double> nd(0.0, 1.0);
    Vec c(op->T.cols());
    for (int i = 0; i < c.size(); ++i) c[i] = nd(rng);
    const auto rt = bulk::goursat_solve(*op, op->T * c, cutoff);
    const double rt_err = bulk::energy_norm(*op, rt.coeffs - c) / bulk::energy_norm(*op, c);
    r.checks.push_back(make_check("in_basis_round_trip", "data recovered from the trace of a basis combination",
                                  rt_err <= sc.tol("round_trip"),
                                  {{"energy_error", rt_err}, {"forward_residual", rt.forward_residual}, {"rank", rt.rank},
                                   {"cut", rt.cut}, {"tolerance", sc.tol("round_trip")}}));

    // Packet recovery with the trace from an independent route.
    const Vec cp = spline_packet(basis);
    const auto data = bulk::basis_data(*grid, basis, cp, grid->spec().t1);
    const auto trace = cs->chart->flat() ? bulk::restrict_spectral(data, *grid, 0.0, cs->cone, cs->bgrid, ro)
                                         : bulk::restrict_to_cone(data, *grid, *cs->chart, cs->cone, cs->bgrid, ro);
    const Vec w = bulk::trace_features(trace, alpha);
    const auto pr = bulk::goursat_solve(*op, w, cutoff);
    const double pk_err = bulk::energy_norm(*op, pr.coeffs - cp) / bulk::energy_norm(*op, cp);
    r.checks.push_back(make_check("packet_recovery", "Cauchy data of a smooth packet recovered from its exact cone trace",
                                  pk_err <= sc.tol("packet_recovery"),
                                  {{"energy_error", pk_err}, {"forward_residual", pr.forward_residual},
                                   {"trace_mismatch", (op->T * cp - w).norm() / w.norm()},
                                   {"trace_route", cs->chart->flat() ? "exact Fourier evolution" : "leapfrog"},
                                   {"dx", grid->dx()}, {"tolerance", sc.tol("packet_recovery")}}));

    // Density proxy: forward residual under nested enrichment for random smooth traces.
    const auto counts = gc.at("enrichment").get<std::vector<int>>();
    io::Table en;
    en.header = {"per_slot"};
    const int traces = gc.at("random_traces").get<int>();
    std::vector<std::vector<double>> res(counts.size());
    bool monotone = true;
    json final_res = json::array();
    for (int k = 0; k < traces; ++k) {
        en.header.push_back("trace_" + std::to_string(k));
        std::mt19937_64 rk(derive(sc.seed(), "goursat-density", k));
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        bulk::Packet pv, pw;
        pv.xc.resize(d);
        pw.xc.resize(d);
        for (int m = 0; m < d; ++m) {
            pv.xc[m] = 0.25 * u(rk);
            pw.xc[m] = 0.25 * u(rk);
        }
        pv.rho = 0.4 + 0.1 * u(rk);
        pw.rho = 0.4 + 0.1 * u(rk);
        pw.amplitude = u(rk);
        const auto dd = bulk::packet_data(*grid, grid->spec().t1, pv, &pw);
        const auto tr = cs->chart->flat() ? bulk::restrict_spectral(dd, *grid, 0.0, cs->cone, cs->bgrid, ro)
                                          : bulk::restrict_to_cone(dd, *grid, *cs->chart, cs->cone, cs->bgrid, ro);
        const Vec wk = bulk::trace_features(tr, alpha);
        double prev = 1e300;
        for (std::size_t i = 0; i < counts.size(); ++i) {
            const double e = bulk::enrichment_residual(*op, wk, std::min(counts[i], basis.count()));
            res[i].push_back(e);
            monotone = monotone && e <= prev * (1.0 + 1e-9);
            prev = e;
        }
        final_res.push_back(prev);
    }
    for (std::size_t i = 0; i < counts.size(); ++i) {
        std::vector<double> row{static_cast<double>(counts[i])};
        row.insert(row.end(), res[i].begin(), res[i].end());
        en.rows.push_back(row);
    }
    r.tables["enrichment"] = en;
    Check dens = make_check("density_enrichment", "forward residual of random smooth traces decreases as the basis is enriched",
                            monotone, {{"final_residuals", final_res}, {"per_slot", counts}});
    if (d == 2) {
        // No claim is made in two space dimensions; the sweep is reported only.
        dens.informational = true;
        dens.details["note"] = "two space dimensions: reported without a conclusion";
    }
    r.checks.push_back(std::move(dens));
    return r;
}

Report run_sweep(const Scenario& sc) {
    const auto levels = sc.cfg.at("sweep").at("levels").get<std::vector<int>>();
    if (levels.size() < 3) throw ConfigError("sweep needs at least three refinement levels");
    Report r;
    r.command = "sweep";
    r.scenario = sc.name();
    const auto cs = build_cone(sc, sc.cfg.at("boundary"));
    const bool flat = cs->chart->flat();
    std::vector<double> hs, mono, gap;
    io::Table t;
    t.header = {"dx", "monomorphism_residual"};
    if (flat) t.header.push_back("leapfrog_vs_exact_l2");
    for (int pu : levels) {
        hs.push_back(1.0 / pu);
        mono.push_back(monomorphism_at(sc, *cs, pu).residual);
        std::vector<double> row{1.0 / pu, mono.back()};
        if (flat) {
            gap.push_back(leapfrog_gap(sc, *cs, pu));
            row.push_back(gap.back());
        }
        t.rows.push_back(row);
    }
    r.tables["convergence"] = t;
    const double mo = fitted_order(hs, mono);
    r.checks.push_back(make_check("monomorphism_order", "monomorphism residual converges at second order under refinement",
                                  mo >= sc.tol("monomorphism_order"),
                                  {{"order", mo}, {"residuals", mono}, {"dx", hs}, {"minimum", sc.tol("monomorphism_order")}}));
    r.checks.push_back(make_check("monomorphism", "sigma_C(rho phi1, rho phi2) = sigma(phi1, phi2) at the finest level",
                                  mono.back() <= sc.tol("monomorphism"),
                                  {{"residual", mono.back()}, {"dx", hs.back()}, {"tolerance", sc.tol("monomorphism")}}));
    if (flat) {
        const double lo = fitted_order(hs, gap);
        r.checks.push_back(make_check("leapfrog_order", "leapfrog agrees with exact Fourier evolution at second order",
                                      std::abs(lo - 2.0) <= sc.tol("leapfrog_order"),
                                      {{"order", lo}, {"errors", gap}, {"tolerance", sc.tol("leapfrog_order")}}));
    }
    return r;
}

}  // namespace lightcone::cli
