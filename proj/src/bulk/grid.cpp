#include <cmath>

#include "lightcone/bulk.hpp"
#include "lightcone/errors.hpp"

namespace lightcone::bulk {

BulkSpec bulk_spec_from_json(const json& j) {
    BulkSpec s;
    s.d = j.value("d", s.d);
    s.half_width = j.value("half_width", s.half_width);
    if (j.contains("dx")) s.dx = j.at("dx").get<double>();
    if (j.contains("n_per_unit")) s.dx = 1.0 / j.at("n_per_unit").get<double>();
    s.courant = j.value("courant", s.courant);
    s.t_p = j.value("t_p", s.t_p);
    s.t1 = j.value("t1", s.t1);
    s.t_end = j.value("t_end", s.t_end);
    return s;
}

json to_json(const BulkSpec& s) {
    return json{{"d", s.d},           {"half_width", s.half_width}, {"dx", s.dx}, {"courant", s.courant},
                {"t_p", s.t_p},       {"t1", s.t1},                 {"t_end", s.t_end}};
}

BulkGrid::BulkGrid(BulkSpec spec) : spec_(spec) {
    if (spec_.d != 2 && spec_.d != 3) throw ConfigError("bulk grid supports d = 2 or 3");
    if (!(spec_.dx > 0.0) || !(spec_.half_width > 0.0)) throw ConfigError("bulk grid needs dx > 0 and half_width > 0");
    // Coordinate speed of light is 1 for the conformally flat families, so the
    // CFL ratio is dt/dx times sqrt(d); we keep the stricter fixed bound 0.5.
    if (!(spec_.courant > 0.0) || spec_.courant > 0.5)
        throw CourantViolation("Courant ratio " + std::to_string(spec_.courant) + " exceeds 0.5");
    const double cells = 2.0 * spec_.half_width / spec_.dx;
    n_ = static_cast<int>(std::lround(cells)) + 1;
    dx_ = 2.0 * spec_.half_width / (n_ - 1);
    if (n_ < 8) throw ConfigError("bulk grid too coarse");
    // Boundary reflections must not reach the cone region |x| <= t - t_p for t <= t1.
    if (spec_.half_width < (spec_.t1 - spec_.t_p) + 2.0 * dx_)
        throw ConfigError("bulk box leaves less than two cells of margin around the cone region");
    if (spec_.t_end < spec_.t1) throw ConfigError("t_end must not be below t1");
}

double BulkGrid::cell_volume() const { return std::pow(dx_, spec_.d); }

void BulkGrid::position(std::size_t idx, double* x) const {
    const int i = static_cast<int>(idx % nx());
    const std::size_t rest = idx / nx();
    const int j = static_cast<int>(rest % ny());
    const int k = static_cast<int>(rest / ny());
    x[0] = coord(i);
    x[1] = coord(j);
    if (spec_.d == 3) x[2] = coord(k);
}

double Source::operator()(double t, const double* x, int d) const {
    const double a = (t - tc) / tau;
    if (std::abs(a) >= 1.0) return 0.0;
    double r2 = 0.0;
    for (int i = 0; i < d; ++i) {
        const double c = xc.empty() ? 0.0 : xc[i];
        r2 += (x[i] - c) * (x[i] - c);
    }
    const double b = r2 / (rho * rho);
    if (b >= 1.0) return 0.0;
    return amplitude * std::pow(1.0 - a * a, power) * std::pow(1.0 - b, power);
}

double Packet::value(const double* x, int d) const {
    double r2 = 0.0, phase = 0.0;
    for (int i = 0; i < d; ++i) {
        const double c = xc.empty() ? 0.0 : xc[i];
        r2 += (x[i] - c) * (x[i] - c);
        if (!k.empty()) phase += k[i] * (x[i] - c);
    }
    const double b = r2 / (rho * rho);
    if (b >= 1.0) return 0.0;
    double v = amplitude * std::pow(1.0 - b, power);
    if (!k.empty()) v *= std::cos(phase);
    return v;
}

Field sample(const BulkGrid& g, const std::function<double(const double*)>& f) {
    Field out(g.size(), 0.0);
    double x[3] = {0, 0, 0};
    for (int k = 0; k < g.nz(); ++k)
        for (int j = 1; j < g.ny() - 1; ++j)
            for (int i = 1; i < g.nx() - 1; ++i) {
                if (g.d() == 3 && (k == 0 || k == g.nz() - 1)) continue;
                x[0] = g.coord(i);
                x[1] = g.coord(j);
                x[2] = g.d() == 3 ? g.coord(k) : 0.0;
                out[g.index(i, j, k)] = f(x);
            }
    return out;
}

CauchyData packet_data(const BulkGrid& g, double t, const Packet& value, const Packet* velocity) {
    CauchyData c;
    c.t = t;
    const int d = g.d();
    c.phi0 = sample(g, [&](const double* x) { return value.value(x, d); });
    if (velocity)
        c.phi1 = sample(g, [&](const double* x) { return velocity->value(x, d); });
    else
        c.phi1.assign(g.size(), 0.0);
    return c;
}

double l2_norm(const BulkGrid& g, const Field& f) {
    double s = 0.0;
    for (double v : f) s += v * v;
    return std::sqrt(s * g.cell_volume());
}

double l2_diff(const BulkGrid& g, const Field& a, const Field& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s * g.cell_volume());
}

}  // namespace lightcone::bulk
