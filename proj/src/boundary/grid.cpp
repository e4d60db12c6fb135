#include <cmath>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "lightcone/boundary.hpp"
#include "lightcone/errors.hpp"

namespace lightcone::boundary {

GridSpec grid_spec_from_json(const json& j) {
    GridSpec g;
    g.d = j.value("d", g.d);
    g.n_s = j.value("n_s", g.n_s);
    g.s_min = j.value("s_min", g.s_min);
    g.s_max = j.value("s_max", g.s_max);
    g.L = j.value("L", g.L);
    return g;
}

json to_json(const GridSpec& g) {
    return json{{"d", g.d}, {"n_s", g.n_s}, {"s_min", g.s_min}, {"s_max", g.s_max}, {"L", g.L}};
}

BoundaryGrid::BoundaryGrid(GridSpec spec) : spec_(spec) {
    if (spec_.n_s < 4 || (spec_.n_s & (spec_.n_s - 1)) != 0) throw ConfigError("boundary grid: n_s must be a power of two >= 4");
    if (!(spec_.s_max > spec_.s_min)) throw ConfigError("boundary grid: s_max must exceed s_min");
    if (spec_.L < 0 || spec_.L > 40) throw ConfigError("boundary grid: L out of range");
    ang_ = sphere::make_angular_grid(spec_.d, spec_.L);
    s_nodes_.resize(spec_.n_s);
    for (int j = 0; j < spec_.n_s; ++j) s_nodes_[j] = spec_.s_min + j * ds();
    sigma_.resize(spec_.n_s);
    sigma_eff_.resize(spec_.n_s);
    const int N = spec_.n_s;
    for (int n = 0; n < N; ++n) {
        const int k = n <= N / 2 ? n : n - N;
        sigma_[n] = 2.0 * std::numbers::pi * k / length();
        sigma_eff_[n] = (n == 0 || n == N / 2) ? 0.0 : sigma_[n];
    }
}

double BoundaryGrid::sigma_max() const {
    double m = 0.0;
    for (double s : sigma_eff_) m = std::max(m, std::abs(s));
    return m;
}

std::vector<int> BoundaryGrid::admissible_modes() const {
    std::vector<int> out;
    for (int m = 0; m < n_modes(); ++m)
        if (admissible(m)) out.push_back(m);
    return out;
}

Vec BoundaryGrid::mode_sigma() const {
    Vec v(n_modes());
    for (int n = 0; n < n_s(); ++n)
        for (int a = 0; a < n_ang_modes(); ++a) v[mode(n, a)] = sigma_eff_[n];
    return v;
}

Vec BoundaryGrid::mode_lambda() const {
    Vec v(n_modes());
    for (int n = 0; n < n_s(); ++n)
        for (int a = 0; a < n_ang_modes(); ++a) v[mode(n, a)] = ang_.laplace[a];
    return v;
}

Vec BoundaryGrid::node_weights() const {
    Vec w(n_ang() * n_s());
    for (int j = 0; j < n_s(); ++j)
        for (int q = 0; q < n_ang(); ++q) w[q + j * n_ang()] = ang_.weights[q] * ds();
    return w;
}

std::string BoundaryGrid::hash() const {
    return "d" + std::to_string(spec_.d) + "/ns" + std::to_string(spec_.n_s) + "/s" + io::format_double(spec_.s_min) +
           ":" + io::format_double(spec_.s_max) + "/L" + std::to_string(spec_.L);
}

GridPtr make_grid(const GridSpec& spec) { return std::make_shared<const BoundaryGrid>(spec); }

namespace {

std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

CMat fft_rows(const CMat& in, int sign) {
    CMat out = in;
    const int rows = static_cast<int>(in.rows()), N = static_cast<int>(in.cols());
    if (rows == 0 || N == 0) return out;
    auto* p = reinterpret_cast<fftw_complex*>(out.data());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lk(plan_mutex());
        int n[1] = {N};
        plan = fftw_plan_many_dft(1, n, rows, p, nullptr, rows, 1, p, nullptr, rows, 1, sign, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lk(plan_mutex());
        fftw_destroy_plan(plan);
    }
    return out;
}

}  // namespace

CMat fft_s(const BoundaryGrid& g, const CMat& rows) {
    if (rows.cols() != g.n_s()) throw GridMismatch("fft_s: column count differs from n_s");
    return fft_rows(rows, FFTW_FORWARD) * (g.ds() / std::sqrt(g.length()));
}

CMat ifft_s(const BoundaryGrid& g, const CMat& rows) {
    if (rows.cols() != g.n_s()) throw GridMismatch("ifft_s: column count differs from n_s");
    return fft_rows(rows, FFTW_BACKWARD) / std::sqrt(g.length());
}

CMat angular_analysis(const BoundaryGrid& g, const CMat& node_rows) {
    const auto& A = g.angular();
    const Mat WY = A.weights.asDiagonal() * A.Y;
    return WY.transpose().cast<cplx>() * node_rows;
}

CMat angular_synthesis(const BoundaryGrid& g, const CMat& mode_rows) {
    return g.angular().Y.cast<cplx>() * mode_rows;
}

Multiplier mult_identity(const BoundaryGrid& g) { return Vec::Ones(g.n_modes()); }

Multiplier mult_ds(const BoundaryGrid& g) { return g.mode_sigma(); }

Multiplier mult_abs_ds(const BoundaryGrid& g) { return g.mode_sigma().cwiseAbs(); }

Multiplier mult_abs_ds_sqrt(const BoundaryGrid& g) { return g.mode_sigma().cwiseAbs().cwiseSqrt(); }

Multiplier mult_sgn_ds(const BoundaryGrid& g) {
    Vec s = g.mode_sigma();
    for (int i = 0; i < s.size(); ++i) s[i] = s[i] > 0 ? 1.0 : (s[i] < 0 ? -1.0 : 0.0);
    return s;
}

Multiplier mult_pi_plus(const BoundaryGrid& g) {
    Vec s = g.mode_sigma();
    for (int i = 0; i < s.size(); ++i) s[i] = s[i] > 0 ? 1.0 : (s[i] < 0 ? 0.0 : 0.5);
    return s;
}

Multiplier mult_pi_minus(const BoundaryGrid& g) {
    Vec s = g.mode_sigma();
    for (int i = 0; i < s.size(); ++i) s[i] = s[i] < 0 ? 1.0 : (s[i] > 0 ? 0.0 : 0.5);
    return s;
}

Multiplier mult_range_plus(const BoundaryGrid& g) { return (g.mode_sigma().array() > 0.0).cast<double>(); }

Multiplier mult_range_minus(const BoundaryGrid& g) { return (g.mode_sigma().array() < 0.0).cast<double>(); }

Multiplier mult_admissible(const BoundaryGrid& g) { return (g.mode_sigma().array() != 0.0).cast<double>(); }

Multiplier mult_bracket_ds(const BoundaryGrid& g, double k) {
    return (1.0 + g.mode_sigma().array().square()).pow(0.5 * k).matrix();
}

Multiplier mult_bracket_theta(const BoundaryGrid& g, double k) {
    return (1.0 + g.mode_lambda().array()).pow(0.5 * k).matrix();
}

Multiplier mult_sobolev(const BoundaryGrid& g, double k, double kp) {
    return mult_bracket_ds(g, k).cwiseProduct(mult_bracket_theta(g, kp));
}

io::Table multiplier_table(const BoundaryGrid& g, const Multiplier& mu) {
    io::Table t;
    t.header = {"mode", "n", "a", "sigma", "lambda", "value"};
    const Vec sg = g.mode_sigma(), lm = g.mode_lambda();
    for (int m = 0; m < g.n_modes(); ++m)
        t.rows.push_back({double(m), double(m / g.n_ang_modes()), double(m % g.n_ang_modes()), sg[m], lm[m], mu[m]});
    return t;
}

}  // namespace lightcone::boundary
