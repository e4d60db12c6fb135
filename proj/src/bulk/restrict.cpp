#include <algorithm>
#include <cmath>
#include <numeric>

#include "lightcone/bulk.hpp"
#include "lightcone/errors.hpp"

namespace lightcone::bulk {

namespace {

// Keys cubic convolution weights (a = -1/2) for offsets -1, 0, 1, 2.
void keys_weights(double f, double* w) {
    auto k = [](double x) {
        x = std::abs(x);
        if (x < 1.0) return 1.5 * x * x * x - 2.5 * x * x + 1.0;
        if (x < 2.0) return -0.5 * x * x * x + 2.5 * x * x - 4.0 * x + 2.0;
        return 0.0;
    };
    w[0] = k(1.0 + f);
    w[1] = k(f);
    w[2] = k(1.0 - f);
    w[3] = k(2.0 - f);
}

void lagrange(const double* ts, int n, double t, double* w) {
    for (int m = 0; m < n; ++m) {
        double p = 1.0;
        for (int k = 0; k < n; ++k)
            if (k != m) p *= (t - ts[k]) / (ts[m] - ts[k]);
        w[m] = p;
    }
}

void check_cone_grid(const ConeChart& cone, const boundary::BoundaryGrid& bg) {
    if (cone.n_s() != bg.n_s() || cone.n_ang() != bg.n_ang() || cone.d != bg.d())
        throw GridMismatch("cone chart nodes do not match the boundary grid");
}

BoundaryFunction assemble_trace(const ConeChart& cone, const boundary::GridPtr& bgrid, const std::vector<double>& phi,
                                const RestrictOptions& opt) {
    CMat vals = CMat::Zero(cone.n_ang(), cone.n_s());
    for (int j = 0; j < cone.n_s(); ++j)
        for (int q = 0; q < cone.n_ang(); ++q) {
            const int node = cone.index(j, q);
            vals(q, j) = phi[node] / cone.beta[node];
        }
    BoundaryFunction f = BoundaryFunction::from_nodes(bgrid, std::move(vals));
    if (opt.taper > 0.0) f = boundary::apply_taper(f, opt.taper);
    return f;
}

}  // namespace

ConeRestrictor::ConeRestrictor(const BulkGrid& g, const ConeChart& cone, const std::vector<int>& nodes, bool cubic)
    : g_(g), cubic_(cubic), values_(nodes.size(), 0.0), done_(nodes.size(), 0) {
    const int d = g.d();
    const int width = cubic ? 4 : 2;
    st_.reserve(nodes.size());
    for (std::size_t m = 0; m < nodes.size(); ++m) {
        const int node = nodes[m];
        Stencil s{};
        s.width = width;
        s.t = cone.X(node, 0);
        s.node = static_cast<int>(m);
        int start[3] = {0, 0, 0};
        for (int a = 0; a < 3; ++a) {
            if (a >= d) {
                s.w[a][0] = 1.0;
                for (int k = 1; k < 4; ++k) s.w[a][k] = 0.0;
                continue;
            }
            const double u = (cone.X(node, a + 1) + g.half_width()) / g.dx();
            int i0 = static_cast<int>(std::floor(u));
            const double f = u - i0;
            if (cubic) {
                keys_weights(f, s.w[a]);
                i0 -= 1;
            } else {
                s.w[a][0] = 1.0 - f;
                s.w[a][1] = f;
            }
            if (i0 < 0 || i0 + width - 1 > g.nx() - 1)
                throw InterpolationOutOfBounds("cone node outside the bulk grid");
            start[a] = i0;
        }
        s.base = g.index(start[0], start[1], d == 3 ? start[2] : 0);
        st_.push_back(s);
    }
}

double ConeRestrictor::spatial(const double* lv, const Stencil& s) const {
    const std::size_t sy = g_.nx(), sz = static_cast<std::size_t>(g_.nx()) * g_.ny();
    const int wz = g_.d() == 3 ? s.width : 1;
    double acc = 0.0;
    for (int c = 0; c < wz; ++c)
        for (int b = 0; b < s.width; ++b) {
            const double wbc = s.w[1][b] * s.w[2][c];
            if (wbc == 0.0) continue;
            const double* row = lv + s.base + b * sy + c * sz;
            double r = 0.0;
            for (int a = 0; a < s.width; ++a) r += s.w[0][a] * row[a];
            acc += wbc * r;
        }
    return acc;
}

void ConeRestrictor::on_level(const LevelView& v) {
    const int first = 4 - v.available;
    const double eps = 1e-9 * g_.dt();
    // Levels usable for this call: linear uses everything available, cubic
    // stops one level short of the newest so the node sits in a central interval.
    const double front = cubic_ && v.available == 4 ? v.t[2] : v.t[3];
    const double oldest = v.t[first];
    for (auto& s : st_) {
        if (done_[s.node]) continue;
        if (v.dir * (s.t - front) > eps) continue;
        if (v.dir * (s.t - oldest) < -eps) continue;  // behind the evolution; stays incomplete
        double value = 0.0;
        if (!cubic_) {
            int m = first;
            while (m + 1 < 3 && v.dir * (s.t - v.t[m + 1]) > 0.0) ++m;
            const double th = (s.t - v.t[m]) / (v.t[m + 1] - v.t[m]);
            value = (1.0 - th) * spatial(v.level[m], s) + th * spatial(v.level[m + 1], s);
        } else {
            double w[4];
            lagrange(v.t + first, v.available, s.t, w);
            for (int m = 0; m < v.available; ++m) value += w[m] * spatial(v.level[first + m], s);
        }
        values_[s.node] = value;
        done_[s.node] = 1;
    }
}

bool ConeRestrictor::complete() const {
    return std::all_of(done_.begin(), done_.end(), [](char c) { return c != 0; });
}

BoundaryFunction restrict_to_cone(const CauchyData& data, const BulkGrid& g, const SpacetimeChart& chart,
                                  const ConeChart& cone, const boundary::GridPtr& bgrid, const RestrictOptions& opt) {
    check_cone_grid(cone, *bgrid);
    const int total = static_cast<int>(cone.X.rows());
    std::vector<double> phi(total, 0.0);
    std::vector<int> back, fwd;
    const double t_cap = g.spec().t1;
    for (int i = 0; i < total; ++i) {
        const double t = cone.X(i, 0);
        if (opt.cap_at_t1 && t > t_cap) continue;
        (t <= data.t ? back : fwd).push_back(i);
    }
    const double dt = g.dt();
    for (int pass = 0; pass < 2; ++pass) {
        const auto& nodes = pass == 0 ? back : fwd;
        if (nodes.empty()) continue;
        const int dir = pass == 0 ? -1 : 1;
        ConeRestrictor rs(g, cone, nodes, opt.cubic);
        Leapfrog lf(g, chart);
        lf.add_observer(&rs);
        lf.start(data, dir);
        double target = data.t;
        for (int i : nodes) target = dir < 0 ? std::min(target, cone.X(i, 0)) : std::max(target, cone.X(i, 0));
        lf.run_to(target + dir * 2.0 * dt);
        if (!rs.complete()) throw InterpolationOutOfBounds("cone nodes outside the evolved time range");
        for (std::size_t m = 0; m < nodes.size(); ++m) phi[nodes[m]] = rs.values()[m];
    }
    return assemble_trace(cone, bgrid, phi, opt);
}

BoundaryFunction restrict_spectral(const CauchyData& data, const BulkGrid& g, double mass2, const ConeChart& cone,
                                   const boundary::GridPtr& bgrid, const RestrictOptions& opt) {
    check_cone_grid(cone, *bgrid);
    const int total = static_cast<int>(cone.X.rows());
    std::vector<double> phi(total, 0.0);
    std::vector<int> back, fwd;
    for (int i = 0; i < total; ++i) {
        const double t = cone.X(i, 0);
        if (opt.cap_at_t1 && t > g.spec().t1) continue;
        (t <= data.t ? back : fwd).push_back(i);
    }
    const double dt = g.dt();
    for (int pass = 0; pass < 2; ++pass) {
        const auto& nodes = pass == 0 ? back : fwd;
        if (nodes.empty()) continue;
        const int dir = pass == 0 ? -1 : 1;
        double target = data.t;
        for (int i : nodes) target = dir < 0 ? std::min(target, cone.X(i, 0)) : std::max(target, cone.X(i, 0));
        ConeRestrictor rs(g, cone, nodes, opt.cubic);
        // Same level sequence as the stepper, but every level is the exact Fourier evolution.
        Field lv[4];
        LevelView v;
        v.dir = dir;
        v.available = 0;
        for (int n = -1;; ++n) {
            const double t = data.t + n * dir * dt;
            for (int m = 0; m < 3; ++m) {
                lv[m] = std::move(lv[m + 1]);
                v.t[m] = v.t[m + 1];
            }
            lv[3] = spectral_evolve(g, data, t, mass2).phi0;
            v.t[3] = t;
            v.available = std::min(4, v.available + 1);
            for (int m = 0; m < 4; ++m) v.level[m] = lv[m].empty() ? nullptr : lv[m].data();
            if (v.available >= 3) rs.on_level(v);
            if (dir * (t - target) > 2.0 * dt) break;
        }
        if (!rs.complete()) throw InterpolationOutOfBounds("cone nodes outside the evolved time range");
        for (std::size_t m = 0; m < nodes.size(); ++m) phi[nodes[m]] = rs.values()[m];
    }
    return assemble_trace(cone, bgrid, phi, opt);
}

BoundaryFunction restrict_analytic(const std::function<double(double, const double*)>& phi, const ConeChart& cone,
                                   const boundary::GridPtr& bgrid, const RestrictOptions& opt) {
    check_cone_grid(cone, *bgrid);
    const int total = static_cast<int>(cone.X.rows());
    std::vector<double> vals(total, 0.0);
    double x[3] = {0, 0, 0};
    for (int i = 0; i < total; ++i) {
        for (int a = 0; a < cone.d; ++a) x[a] = cone.X(i, a + 1);
        vals[i] = phi(cone.X(i, 0), x);
    }
    return assemble_trace(cone, bgrid, vals, opt);
}

}  // namespace lightcone::bulk
