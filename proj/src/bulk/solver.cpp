#include <algorithm>
#include <cmath>
#include <utility>

#include "lightcone/bulk.hpp"
#include "lightcone/errors.hpp"
#include "lightcone/kernels.hpp"

namespace lightcone::bulk {

namespace {

constexpr double kGrowthLimit = 1e3;

}  // namespace

Leapfrog::Leapfrog(const BulkGrid& g, const SpacetimeChart& chart, const Source* source)
    : g_(g), chart_(chart), source_(source) {
    if (chart.d() != g.d()) throw ConfigError("chart and bulk grid dimensions differ");
    if (!weighted()) {
        // Flat chart: the potential is time independent.
        const double dt2 = g.dt() * g.dt();
        Field pot(g.size(), 0.0);
        bool any = false;
        double x[3] = {0, 0, 0};
        for (std::size_t i = 0; i < g.size(); ++i) {
            g.position(i, x);
            pot[i] = dt2 * chart.potential_at(0.0, x);
            any = any || pot[i] != 0.0;
        }
        if (any) pot_ = std::move(pot);
    }
}

void Leapfrog::coefficients(double t, Field& A, Field& Q) const {
    const int n = chart_.n();
    A.resize(g_.size());
    Q.resize(g_.size());
    std::vector<double> axis(g_.nx());
    for (int i = 0; i < g_.nx(); ++i) axis[i] = g_.coord(i);
    chart_.omega_potential_grid(t, axis, A.data(), Q.data());
    for (std::size_t i = 0; i < g_.size(); ++i) {
        const double om = A[i];
        if (!(om > 0.0)) throw NonPositiveOmega("conformal factor is not positive on the bulk grid");
        const double om2 = om * om;
        A[i] = n == 4 ? om2 : std::pow(om, n - 2);
        Q[i] *= A[i] * om2;
    }
}

// Flat: discrete Laplacian. Weighted: div(A grad) with the face means used by the stepper.
void Leapfrog::laplace(const Field& in, Field& out) const {
    out.assign(g_.size(), 0.0);
    const int nx = g_.nx(), ny = g_.ny(), nz = g_.nz();
    const bool three = g_.d() == 3;
    const std::size_t sy = nx, sz = static_cast<std::size_t>(nx) * ny;
    const double inv = 1.0 / (g_.dx() * g_.dx());
    const bool w = weighted();
    const int k0 = three ? 1 : 0, k1 = three ? nz - 1 : 1;
    for (int k = k0; k < k1; ++k)
        for (int j = 1; j < ny - 1; ++j)
            for (int i = 1; i < nx - 1; ++i) {
                const std::size_t c = g_.index(i, j, k);
                const std::size_t nb[6] = {c - 1, c + 1, c - sy, c + sy, three ? c - sz : c, three ? c + sz : c};
                const int cnt = three ? 6 : 4;
                double acc = 0.0;
                for (int m = 0; m < cnt; ++m) {
                    const double a = w ? 0.5 * (A_now_[c] + A_now_[nb[m]]) : 1.0;
                    acc += a * (in[nb[m]] - in[c]);
                }
                out[c] = acc * inv;
            }
}

void Leapfrog::add_source(double t, Field& next, const Field* atp) const {
    if (!source_) return;
    if (t <= source_->t_lo() || t >= source_->t_hi()) return;
    const int d = g_.d();
    const double dt2 = g_.dt() * g_.dt();
    int lo[3] = {0, 0, 0}, hi[3] = {0, 0, 0};
    for (int a = 0; a < 3; ++a) {
        if (a >= d) break;
        const double c = source_->xc.empty() ? 0.0 : source_->xc[a];
        lo[a] = std::max(1, static_cast<int>(std::floor((c - source_->rho + g_.half_width()) / g_.dx())));
        hi[a] = std::min(g_.nx() - 2, static_cast<int>(std::ceil((c + source_->rho + g_.half_width()) / g_.dx())));
    }
    double x[3] = {0, 0, 0};
    for (int k = lo[2]; k <= hi[2]; ++k)
        for (int j = lo[1]; j <= hi[1]; ++j)
            for (int i = lo[0]; i <= hi[0]; ++i) {
                x[0] = g_.coord(i);
                x[1] = g_.coord(j);
                if (d == 3) x[2] = g_.coord(k);
                const double u = (*source_)(t, x, d);
                if (u == 0.0) continue;
                const std::size_t c = g_.index(i, j, k);
                if (atp) {
                    const double om = chart_.omega_at(t, x);
                    next[c] += dt2 * std::pow(om, chart_.n()) * u / (*atp)[c];
                } else {
                    next[c] += dt2 * u;
                }
            }
}

void Leapfrog::start(const CauchyData& data, int dir) {
    if (data.phi0.size() != g_.size() || data.phi1.size() != g_.size())
        throw ConfigError("Cauchy data does not match the bulk grid");
    dir_ = dir >= 0 ? 1 : -1;
    const double dt = g_.dt();
    const double t0 = data.t;
    Field acc, jerk;
    if (weighted()) {
        Field Am, Ap, Qm;
        coefficients(t0, A_now_, Q_now_);
        coefficients(t0 - 0.5 * dt, Am, Qm);
        coefficients(t0 + 0.5 * dt, Ap, Qm);
        laplace(data.phi0, acc);
        for (std::size_t i = 0; i < g_.size(); ++i) {
            const double adot = (Ap[i] - Am[i]) / dt;
            acc[i] = (acc[i] - adot * data.phi1[i] - Q_now_[i] * data.phi0[i]) / A_now_[i];
        }
        jerk.assign(g_.size(), 0.0);
    } else {
        laplace(data.phi0, acc);
        laplace(data.phi1, jerk);
        if (!pot_.empty()) {
            const double inv = 1.0 / (dt * dt);
            for (std::size_t i = 0; i < g_.size(); ++i) {
                acc[i] -= pot_[i] * inv * data.phi0[i];
                jerk[i] -= pot_[i] * inv * data.phi1[i];
            }
        }
    }
    if (source_ && t0 > source_->t_lo() && t0 < source_->t_hi()) {
        Field u(g_.size(), 0.0);
        add_source(t0, u, nullptr);
        const double inv = 1.0 / (dt * dt);
        for (std::size_t i = 0; i < g_.size(); ++i) {
            double s = u[i] * inv;
            if (weighted()) {
                double x[3];
                g_.position(i, x);
                s *= std::pow(chart_.omega_at(t0, x), chart_.n()) / A_now_[i];
            }
            acc[i] += s;
        }
    }
    auto taylor = [&](double h) {
        Field out(g_.size());
        for (std::size_t i = 0; i < g_.size(); ++i)
            out[i] = data.phi0[i] + h * data.phi1[i] + 0.5 * h * h * acc[i] + h * h * h / 6.0 * jerk[i];
        return out;
    };
    lv_[0].assign(g_.size(), 0.0);
    lv_[1] = taylor(-dir_ * dt);
    lv_[2] = data.phi0;
    lv_[3] = taylor(dir_ * dt);
    times_[0] = t0 - 2.0 * dir_ * dt;
    times_[1] = t0 - dir_ * dt;
    times_[2] = t0;
    times_[3] = t0 + dir_ * dt;
    // Keep the Dirichlet frame exactly zero.
    for (int m = 1; m < 4; ++m) {
        Field& f = lv_[m];
        for (std::size_t i = 0; i < g_.size(); ++i) {
            const int ix = static_cast<int>(i % g_.nx());
            const std::size_t rest = i / g_.nx();
            const int iy = static_cast<int>(rest % g_.ny());
            const int iz = static_cast<int>(rest / g_.ny());
            const bool edge = ix == 0 || ix == g_.nx() - 1 || iy == 0 || iy == g_.ny() - 1 ||
                              (g_.d() == 3 && (iz == 0 || iz == g_.nz() - 1));
            if (edge) f[i] = 0.0;
        }
    }
    avail_ = 3;
    steps_ = 0;
    if (weighted()) {
        Field q;
        coefficients(times_[3] - 0.5 * dir_ * dt, A_mid_next_, q);
    }
    e0_ = energy();
    drove_ = false;
    notify();
}

void Leapfrog::resume(const Field& behind, const Field& here, double t_here, int dir) {
    if (behind.size() != g_.size() || here.size() != g_.size())
        throw ConfigError("restart levels do not match the bulk grid");
    dir_ = dir >= 0 ? 1 : -1;
    const double dt = g_.dt();
    lv_[0].assign(g_.size(), 0.0);
    lv_[1].assign(g_.size(), 0.0);
    lv_[2] = behind;
    lv_[3] = here;
    times_[0] = t_here - 3.0 * dir_ * dt;
    times_[1] = t_here - 2.0 * dir_ * dt;
    times_[2] = t_here - dir_ * dt;
    times_[3] = t_here;
    avail_ = 2;
    steps_ = 0;
    if (weighted()) {
        Field q;
        coefficients(t_here - 0.5 * dir_ * dt, A_mid_next_, q);
    }
    e0_ = energy();
    drove_ = false;
    notify();
}

double Leapfrog::energy() const {
    const Field& cur = lv_[3];
    const Field& prev = lv_[2];
    const double dt = g_.dt(), dx = g_.dx();
    const bool three = g_.d() == 3;
    const std::size_t sy = g_.nx(), sz = static_cast<std::size_t>(g_.nx()) * g_.ny();
    double kin = 0.0, pot = 0.0;
    const int k1 = three ? g_.nz() - 1 : 1;
    for (int k = 0; k < k1; ++k)
        for (int j = 0; j < g_.ny() - 1; ++j)
            for (int i = 0; i < g_.nx() - 1; ++i) {
                const std::size_t c = g_.index(i, j, k);
                const double v = (cur[c] - prev[c]) / dt;
                kin += v * v;
                pot += (cur[c + 1] - cur[c]) * (prev[c + 1] - prev[c]);
                pot += (cur[c + sy] - cur[c]) * (prev[c + sy] - prev[c]);
                if (three) pot += (cur[c + sz] - cur[c]) * (prev[c + sz] - prev[c]);
                if (!pot_.empty()) kin += pot_[c] / (dt * dt) * cur[c] * prev[c];
            }
    return 0.5 * (kin + pot / (dx * dx)) * g_.cell_volume();
}

void Leapfrog::step() {
    if (avail_ < 2) throw ConfigError("leapfrog stepped before start");
    const double dt = g_.dt();
    const double tn = times_[3];
    Field next = std::move(lv_[0]);
    next.resize(g_.size(), 0.0);
    const Field& cur = lv_[3];
    const Field& prev = lv_[2];
    const int nx = g_.nx(), ny = g_.ny(), nz = g_.nz();
    const bool three = g_.d() == 3;
    const std::size_t sy = nx, sz = static_cast<std::size_t>(nx) * ny;
    const double lam2 = (dt / g_.dx()) * (dt / g_.dx());
    const int k0 = three ? 1 : 0, k1 = three ? nz - 1 : 1;
    if (!weighted()) {
        for (int k = k0; k < k1; ++k)
            for (int j = 1; j < ny - 1; ++j) {
                const std::size_t b = g_.index(0, j, k);
                kernels::StencilRow r;
                r.cur = cur.data() + b;
                r.prev = prev.data() + b;
                r.next = next.data() + b;
                r.ym = cur.data() + b - sy;
                r.yp = cur.data() + b + sy;
                if (three) {
                    r.zm = cur.data() + b - sz;
                    r.zp = cur.data() + b + sz;
                }
                r.pot = pot_.empty() ? nullptr : pot_.data() + b;
                r.n = nx;
                r.lam2 = lam2;
                kernels::leapfrog_row(r);
            }
        add_source(tn, next, nullptr);
    } else {
        // A at t_n (faces), t_n -/+ dt/2 (time fluxes), potential at t_n.
        A_mid_prev_ = std::move(A_mid_next_);
        coefficients(tn, A_now_, Q_now_);
        Field q;
        coefficients(tn + 0.5 * dir_ * dt, A_mid_next_, q);
        Field pot(g_.size());
        for (std::size_t i = 0; i < g_.size(); ++i) pot[i] = dt * dt * Q_now_[i];
        for (int k = k0; k < k1; ++k)
            for (int j = 1; j < ny - 1; ++j) {
                const std::size_t b = g_.index(0, j, k);
                kernels::WeightedRow r;
                r.cur = cur.data() + b;
                r.prev = prev.data() + b;
                r.next = next.data() + b;
                r.ym = cur.data() + b - sy;
                r.yp = cur.data() + b + sy;
                r.a = A_now_.data() + b;
                r.aym = A_now_.data() + b - sy;
                r.ayp = A_now_.data() + b + sy;
                if (three) {
                    r.zm = cur.data() + b - sz;
                    r.zp = cur.data() + b + sz;
                    r.azm = A_now_.data() + b - sz;
                    r.azp = A_now_.data() + b + sz;
                }
                r.atm = A_mid_prev_.data() + b;
                r.atp = A_mid_next_.data() + b;
                r.pot = pot.data() + b;
                r.n = nx;
                r.lam2 = lam2;
                kernels::weighted_row(r);
            }
        add_source(tn, next, &A_mid_next_);
    }
    for (int m = 0; m < 3; ++m) {
        lv_[m] = std::move(lv_[m + 1]);
        times_[m] = times_[m + 1];
    }
    lv_[3] = std::move(next);
    times_[3] = tn + dir_ * dt;
    avail_ = std::min(4, avail_ + 1);
    ++steps_;

    if (steps_ % 16 == 0) {
        const double e = energy();
        // Energy may grow freely until the forcing has switched off.
        const bool driven = source_ && (dir_ > 0 ? times_[3] < source_->t_hi() + dt : times_[3] > source_->t_lo() - dt);
        if (!std::isfinite(e)) throw UnstableGrowth("non-finite field during leapfrog evolution");
        if (driven || e0_ <= 0.0) {
            e0_ = std::max(e0_, e);
            drove_ = drove_ || driven;
        } else if (drove_) {
            e0_ = e;  // first look after the forcing switched off
            drove_ = false;
        } else if (e > kGrowthLimit * e0_) {
            throw UnstableGrowth("discrete energy grew by more than " + std::to_string(kGrowthLimit));
        }
    }
    notify();
}

void Leapfrog::run_to(double t_stop) {
    const double eps = 1e-9 * g_.dt();
    while (dir_ * (times_[3] - t_stop) < -eps) step();
}

LevelView Leapfrog::view() const {
    LevelView v;
    for (int m = 0; m < 4; ++m) {
        v.level[m] = lv_[m].empty() ? nullptr : lv_[m].data();
        v.t[m] = times_[m];
    }
    v.available = avail_;
    v.dir = dir_;
    return v;
}

void Leapfrog::notify() {
    const LevelView v = view();
    for (Observer* o : observers_) o->on_level(v);
}

SliceRecorder::SliceRecorder(const BulkGrid& g, std::vector<double> times)
    : g_(g), want_(std::move(times)), done_(want_.size(), 0) {}

void SliceRecorder::on_level(const LevelView& v) {
    if (v.available < 3) return;
    const double dt = g_.dt();
    for (std::size_t w = 0; w < want_.size(); ++w) {
        if (done_[w]) continue;
        if (std::abs(v.t[2] - want_[w]) > 0.5 * dt + 1e-12) continue;
        Slice s;
        s.t = v.t[2];
        const double* lo = v.dir > 0 ? v.level[1] : v.level[3];
        const double* hi = v.dir > 0 ? v.level[3] : v.level[1];
        s.lo.assign(lo, lo + g_.size());
        s.hi.assign(hi, hi + g_.size());
        s.value.assign(v.level[2], v.level[2] + g_.size());
        s.dvalue.resize(g_.size());
        for (std::size_t i = 0; i < g_.size(); ++i) s.dvalue[i] = (s.hi[i] - s.lo[i]) / (2.0 * dt);
        slices.push_back(std::move(s));
        done_[w] = 1;
    }
}

const Slice& BulkField::nearest(double t) const {
    if (slices.empty()) throw ConfigError("bulk field has no stored slices");
    std::size_t best = 0;
    for (std::size_t i = 1; i < slices.size(); ++i)
        if (std::abs(slices[i].t - t) < std::abs(slices[best].t - t)) best = i;
    return slices[best];
}

BulkField solve_cauchy(const CauchyData& data, std::shared_ptr<const BulkGrid> grid, const SpacetimeChart& chart,
                       const SolveOptions& opt) {
    BulkField out;
    out.grid = grid;
    out.chart = chart.spec();
    std::vector<double> back, fwd;
    for (double t : opt.store_times) (t <= data.t ? back : fwd).push_back(t);
    const double dt = grid->dt();
    for (int pass = 0; pass < 2; ++pass) {
        auto& want = pass == 0 ? back : fwd;
        if (want.empty()) continue;
        const int dir = pass == 0 ? -1 : 1;
        Leapfrog lf(*grid, chart);
        SliceRecorder rec(*grid, want);
        lf.add_observer(&rec);
        lf.start(data, dir);
        const double target = dir < 0 ? *std::min_element(want.begin(), want.end()) - 2.0 * dt
                                       : *std::max_element(want.begin(), want.end()) + 2.0 * dt;
        lf.run_to(target);
        for (auto& s : rec.slices) out.slices.push_back(std::move(s));
    }
    std::sort(out.slices.begin(), out.slices.end(), [](const Slice& a, const Slice& b) { return a.t < b.t; });
    return out;
}

double kg_residual(const BulkGrid& g, const SpacetimeChart& chart, const Slice& s, const Source* src) {
    // Applies the same conservative stencil as the stepper and reports
    // max |P phi - source| over interior nodes, relative to max |div(A grad phi)|.
    const int n = chart.n();
    const double dt = g.dt(), dx = g.dx();
    const bool three = g.d() == 3;
    const std::size_t sy = g.nx(), sz = static_cast<std::size_t>(g.nx()) * g.ny();
    double worst = 0.0, scale = 0.0;
    double x[3] = {0, 0, 0};
    const int k0 = three ? 1 : 0, k1 = three ? g.nz() - 1 : 1;
    auto A = [&](double t, const double* p) { return std::pow(chart.omega_at(t, p), n - 2); };
    for (int k = k0; k < k1; ++k)
        for (int j = 1; j < g.ny() - 1; ++j)
            for (int i = 1; i < g.nx() - 1; ++i) {
                const std::size_t c = g.index(i, j, k);
                x[0] = g.coord(i);
                x[1] = g.coord(j);
                if (three) x[2] = g.coord(k);
                const double a0 = A(s.t, x);
                const double am = A(s.t - 0.5 * dt, x), ap = A(s.t + 0.5 * dt, x);
                const double tt = (ap * (s.hi[c] - s.value[c]) - am * (s.value[c] - s.lo[c])) / (dt * dt);
                double flux = 0.0;
                const std::size_t nb[6] = {c - 1, c + 1, c - sy, c + sy, three ? c - sz : c, three ? c + sz : c};
                const int cnt = three ? 6 : 4;
                for (int m = 0; m < cnt; ++m) {
                    double y[3] = {x[0], x[1], x[2]};
                    const int axis = m / 2;
                    y[axis] += (m % 2 == 0 ? -dx : dx);
                    flux += 0.5 * (a0 + A(s.t, y)) * (s.value[nb[m]] - s.value[c]);
                }
                flux /= dx * dx;
                const double om = chart.omega_at(s.t, x);
                double r = tt - flux + std::pow(om, n) * chart.potential_at(s.t, x) * s.value[c];
                if (src) r -= std::pow(om, n) * (*src)(s.t, x, g.d());
                worst = std::max(worst, std::abs(r));
                scale = std::max(scale, std::abs(flux));
            }
    return scale > 0.0 ? worst / scale : worst;
}

}  // namespace lightcone::bulk
