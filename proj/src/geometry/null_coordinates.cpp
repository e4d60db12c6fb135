#include <algorithm>
#include <cmath>

#include <boost/numeric/odeint.hpp>

#include "lightcone/errors.hpp"
#include "lightcone/geometry.hpp"
#include "lightcone/io.hpp"

namespace lightcone::geometry {

namespace odeint = boost::numeric::odeint;
using State = std::vector<double>;

Mat ConeChart::h_at(int node) const {
    const int k = d - 1;
    Mat m(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) m(i, j) = h(node, i * k + j);
    return m;
}

json ConeChart::summary() const {
    json j;
    j["d"] = d;
    j["eps0"] = eps0;
    j["n_s"] = n_s();
    j["s_min"] = s[0];
    j["s_max"] = s[s.size() - 1];
    j["angular_L"] = angular.L;
    j["n_angular"] = angular.n_nodes;
    j["max_null"] = residuals.max_null;
    j["max_cross"] = residuals.max_cross;
    j["max_normal_form"] = residuals.max_normal_form;
    j["max_angle_drift"] = residuals.max_angle_drift;
    j["alpha"] = log_fit.alpha;
    j["alpha_spread"] = log_fit.alpha_spread;
    j["k_max"] = log_fit.k_max;
    j["k_slope_max"] = log_fit.k_slope_max;
    j["convention"] = log_fit.convention;
    j["beta_min"] = beta.minCoeff();
    j["beta_max"] = beta.maxCoeff();
    return j;
}

namespace {

struct GeneratorSystem {
    const SpacetimeChart& chart;
    const ConeDefiningFunction& f;
    int n, k;

    void operator()(const State& st, State& dst, double) const {
        Vec x(n);
        for (int a = 0; a < n; ++a) x[a] = st[a];
        if (!chart.in_domain(x)) throw GeneratorEscapedChart("generator left the chart domain");
        const Mat gi = chart.inverse_metric(x);
        const Vec df = f.gradient(x);
        const Vec V = -gi * df;
        // d V^a / d x^c = -g^{ab} (H_bc - 2 d_b f d_c ln Omega)
        const Mat DV = -gi * (f.hessian() - 2.0 * df * chart.dlog_omega(x).transpose());
        for (int a = 0; a < n; ++a) dst[a] = V[a];
        for (int i = 0; i < k; ++i) {
            Eigen::Map<const Vec> Ji(st.data() + n + i * n, n);
            const Vec dJ = DV * Ji;
            for (int a = 0; a < n; ++a) dst[n + i * n + a] = dJ[a];
        }
    }
};

}  // namespace

InducedMetric induced_metric_and_beta(const ConeChart& cone, const SpacetimeChart& chart) {
    const int n = cone.d + 1, k = cone.d - 1;
    const int nodes = static_cast<int>(cone.X.rows());
    InducedMetric out;
    out.h.resize(nodes, k * k);
    out.beta.resize(nodes);
    for (int node = 0; node < nodes; ++node) {
        const Vec x = cone.X.row(node).transpose();
        const Mat g = chart.metric(x);
        Mat J(n, k);
        for (int i = 0; i < k; ++i) J.col(i) = cone.J.row(node).segment(i * n, n).transpose();
        const Mat h = J.transpose() * g * J;
        const double det = h.determinant();
        if (!(det > 0.0)) throw SingularInducedMetric("induced metric degenerate at cone node " + std::to_string(node));
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) out.h(node, i * k + j) = h(i, j);
        const int q = node % cone.angular.n_nodes;
        const double sm = cone.angular.sqrt_m[q];
        const double det_m = sm * sm;  // |m| = sin^2 for the round 2-sphere, 1 on the circle
        out.beta[node] = std::pow(det_m / det, 0.25);
    }
    return out;
}

ConeChart build_null_coordinates(const SpacetimeChart& chart, const ConeDefiningFunction& f, const Vec& s_nodes,
                                 const sphere::AngularGrid& angular, const NullCoordinateOptions& opt) {
    if (chart.d() != angular.d) throw ConfigError("null coordinates: angular grid dimension differs from chart");
    if (chart.d() < 2) throw ConfigError("null coordinates need d >= 2");
    if (!(opt.eps0 > 0.0)) throw ConfigError("null coordinates: eps0 must be positive");
    for (int j = 1; j < s_nodes.size(); ++j)
        if (!(s_nodes[j] > s_nodes[j - 1])) throw ConfigError("null coordinates: s nodes must increase");

    const int n = chart.n(), k = chart.d() - 1;
    const int n_ang = angular.n_nodes, n_s = static_cast<int>(s_nodes.size());
    ConeChart c;
    c.d = chart.d();
    c.eps0 = opt.eps0;
    c.p = f.p;
    c.s = s_nodes;
    c.angular = angular;
    c.X.resize(n_s * n_ang, n);
    c.V.resize(n_s * n_ang, n);
    c.J.resize(n_s * n_ang, n * k);
    c.v.resize(n_s * n_ang);

    const double om_p = chart.omega(f.p);
    GeneratorSystem sys{chart, f, n, k};

    std::vector<int> fwd, bwd;
    for (int j = 0; j < n_s; ++j) (s_nodes[j] >= 0.0 ? fwd : bwd).push_back(j);
    std::reverse(bwd.begin(), bwd.end());

    for (int q = 0; q < n_ang; ++q) {
        State seed(n + n * k, 0.0);
        const Vec psi = angular.dirs.row(q).transpose();
        const double half = 0.5 * opt.eps0 / om_p;
        seed[0] = f.p[0] + half;
        for (int a = 1; a < n; ++a) seed[a] = f.p[a] + half * psi[a - 1];
        for (int i = 0; i < k; ++i)
            for (int a = 1; a < n; ++a) seed[n + i * n + a] = half * angular.ddirs[q](a - 1, i);

        auto record = [&](const State& st, int j) {
            const int node = c.index(j, q);
            Vec x(n);
            for (int a = 0; a < n; ++a) x[a] = st[a];
            const Vec V = -chart.inverse_metric(x) * f.gradient(x);
            c.X.row(node) = x.transpose();
            c.V.row(node) = V.transpose();
            for (int i = 0; i < n * k; ++i) c.J(node, i) = st[n + i];
            const Vec y = om_p * (x - f.p);
            const double r = y.tail(n - 1).norm();
            c.v[node] = y[0] + r;
            Vec dv(n);
            dv[0] = om_p;
            dv.tail(n - 1) = om_p * y.tail(n - 1) / std::max(r, 1e-300);
            if (std::abs(V.dot(dv)) < 1e-14)
                throw DegenerateGenerator("generator tangent is degenerate against dv at node " + std::to_string(node));
        };

        auto run = [&](const std::vector<int>& order, double dir) {
            std::vector<double> times{0.0};
            std::vector<int> targets;
            for (int j : order) {
                if (s_nodes[j] == 0.0) {
                    record(seed, j);
                } else {
                    times.push_back(s_nodes[j]);
                    targets.push_back(j);
                }
            }
            if (targets.empty()) return;
            State st = seed;
            std::size_t idx = 0;
            auto obs = [&](const State& x, double) {
                if (idx > 0) record(x, targets[idx - 1]);
                ++idx;
            };
            auto stepper = odeint::make_controlled(opt.abs_tol, opt.rel_tol, odeint::runge_kutta_dopri5<State>());
            odeint::integrate_times(stepper, std::ref(sys), st, times.begin(), times.end(), dir * 1e-3, obs);
        };
        run(fwd, 1.0);
        run(bwd, -1.0);
    }

    const InducedMetric im = induced_metric_and_beta(c, chart);
    c.h = im.h;
    c.beta = im.beta;

    // Normal-form residuals, relative to the local scale of the vectors.
    NormalFormResiduals& res = c.residuals;
    for (int node = 0; node < n_s * n_ang; ++node) {
        const Vec x = c.X.row(node).transpose();
        const Mat g = chart.metric(x);
        const Vec V = c.V.row(node).transpose();
        const double gs = std::abs(g(0, 0));
        const double vv = V.squaredNorm() * gs;
        res.max_null = std::max(res.max_null, std::abs(V.dot(g * V)) / vv);
        for (int i = 0; i < k; ++i) {
            const Vec Ji = c.J.row(node).segment(i * n, n).transpose();
            res.max_cross = std::max(res.max_cross, std::abs(V.dot(g * Ji)) / (std::sqrt(vv) * Ji.norm() * std::sqrt(gs)));
        }
        const Vec df = f.gradient(x);
        res.max_normal_form = std::max(res.max_normal_form, (g * V + df).norm() / df.norm());
        if (chart.flat()) {
            const int q = node % n_ang;
            Vec dir = (x - f.p).tail(n - 1);
            dir.normalize();
            res.max_angle_drift =
                std::max(res.max_angle_drift, (dir - angular.dirs.row(q).transpose()).cwiseAbs().maxCoeff());
        }
    }

    // Logarithmic law s = alpha ln(v/eps0) + k per generator.
    LogFit& lf = c.log_fit;
    double amin = 1e300, amax = -1e300, asum = 0.0;
    for (int q = 0; q < n_ang; ++q) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (int j = 0; j < n_s; ++j) {
            const double xl = std::log(c.v[c.index(j, q)] / opt.eps0), ys = s_nodes[j];
            sx += xl;
            sy += ys;
            sxx += xl * xl;
            sxy += xl * ys;
        }
        const double a = (n_s * sxy - sx * sy) / (n_s * sxx - sx * sx);
        amin = std::min(amin, a);
        amax = std::max(amax, a);
        asum += a;
    }
    lf.alpha = asum / n_ang;
    lf.alpha_spread = amax - amin;
    for (int q = 0; q < n_ang; ++q) {
        double kprev = 0.0;
        for (int j = 0; j < n_s; ++j) {
            const double kk = s_nodes[j] - lf.alpha * std::log(c.v[c.index(j, q)] / opt.eps0);
            lf.k_max = std::max(lf.k_max, std::abs(kk));
            if (j > 0) lf.k_slope_max = std::max(lf.k_slope_max, std::abs(kk - kprev) / (s_nodes[j] - s_nodes[j - 1]));
            kprev = kk;
        }
    }
    lf.convention =
        "d_s = -grad f, the past-directed gradient of f reversed, so s increases toward the future; "
        "s = 0 on v = eps0; alpha is fitted, a unit logarithmic slope is not assumed";
    return c;
}

void save_cone(const std::string& path, const ConeChart& cone) {
    io::Container c;
    c.kind = "cone_chart";
    c.meta["d"] = cone.d;
    c.meta["eps0"] = cone.eps0;
    c.meta["L"] = cone.angular.L;
    c.meta["summary"] = cone.summary();
    c.put("p", Mat(cone.p));
    c.put("s", Mat(cone.s));
    c.put("X", cone.X);
    c.put("V", cone.V);
    c.put("J", cone.J);
    c.put("h", cone.h);
    c.put("beta", Mat(cone.beta));
    c.put("v", Mat(cone.v));
    io::write_container(path, c);
}

ConeChart load_cone(const std::string& path) {
    const io::Container c = io::read_container(path);
    if (c.kind != "cone_chart") throw FormatError("container is not a cone chart: " + path);
    ConeChart cone;
    cone.d = c.meta.at("d").get<int>();
    cone.eps0 = c.meta.at("eps0").get<double>();
    cone.angular = sphere::make_angular_grid(cone.d, c.meta.at("L").get<int>());
    cone.p = c.get_real("p").col(0);
    cone.s = c.get_real("s").col(0);
    cone.X = c.get_real("X");
    cone.V = c.get_real("V");
    cone.J = c.get_real("J");
    cone.h = c.get_real("h");
    cone.beta = c.get_real("beta").col(0);
    cone.v = c.get_real("v").col(0);
    const json& s = c.meta.at("summary");
    cone.residuals.max_null = s.at("max_null");
    cone.residuals.max_cross = s.at("max_cross");
    cone.residuals.max_normal_form = s.at("max_normal_form");
    cone.residuals.max_angle_drift = s.at("max_angle_drift");
    cone.log_fit.alpha = s.at("alpha");
    cone.log_fit.alpha_spread = s.at("alpha_spread");
    cone.log_fit.k_max = s.at("k_max");
    cone.log_fit.k_slope_max = s.at("k_slope_max");
    cone.log_fit.convention = s.at("convention");
    return cone;
}

}  // namespace lightcone::geometry
