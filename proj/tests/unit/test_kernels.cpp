#include <random>
#include <vector>

#include "doctest.h"
#include "lightcone/kernels.hpp"

using namespace lightcone;
using namespace lightcone::kernels;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

double max_gap(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("vector leapfrog row matches the scalar reference") {
    if (!avx2::compiled() || detected_isa() != Isa::avx2) return;
    std::mt19937_64 rng(1);
    for (std::size_t n : {3u, 4u, 5u, 7u, 9u, 17u, 64u, 131u}) {
        for (int three = 0; three < 2; ++three) {
            for (int with_pot = 0; with_pot < 2; ++with_pot) {
                auto cur = random_vec(rng, n), prev = random_vec(rng, n), ym = random_vec(rng, n), yp = random_vec(rng, n),
                     zm = random_vec(rng, n), zp = random_vec(rng, n), pot = random_vec(rng, n, 0.0, 0.01);
                std::vector<double> a(n, 0.0), b(n, 0.0);
                StencilRow r;
                r.cur = cur.data();
                r.prev = prev.data();
                r.ym = ym.data();
                r.yp = yp.data();
                r.zm = three ? zm.data() : nullptr;
                r.zp = three ? zp.data() : nullptr;
                r.pot = with_pot ? pot.data() : nullptr;
                r.n = n;
                r.lam2 = 0.25;
                r.next = a.data();
                scalar::leapfrog_row(r);
                r.next = b.data();
                avx2::leapfrog_row(r);
                CHECK(max_gap(a, b) <= 1e-14);
                CHECK(a.front() == 0.0);  // boundary entries are left alone
                CHECK(b.back() == 0.0);
            }
        }
    }
}

TEST_CASE("vector weighted row matches the scalar reference") {
    if (!avx2::compiled() || detected_isa() != Isa::avx2) return;
    std::mt19937_64 rng(2);
    for (std::size_t n : {3u, 6u, 13u, 100u}) {
        for (int three = 0; three < 2; ++three) {
            auto cur = random_vec(rng, n), prev = random_vec(rng, n), ym = random_vec(rng, n), yp = random_vec(rng, n),
                 zm = random_vec(rng, n), zp = random_vec(rng, n);
            auto A = random_vec(rng, n, 0.5, 1.5), aym = random_vec(rng, n, 0.5, 1.5), ayp = random_vec(rng, n, 0.5, 1.5),
                 azm = random_vec(rng, n, 0.5, 1.5), azp = random_vec(rng, n, 0.5, 1.5), atm = random_vec(rng, n, 0.5, 1.5),
                 atp = random_vec(rng, n, 0.5, 1.5), pot = random_vec(rng, n, 0.0, 0.01);
            std::vector<double> a(n, 0.0), b(n, 0.0);
            WeightedRow r;
            r.cur = cur.data();
            r.prev = prev.data();
            r.ym = ym.data();
            r.yp = yp.data();
            r.zm = three ? zm.data() : nullptr;
            r.zp = three ? zp.data() : nullptr;
            r.a = A.data();
            r.aym = aym.data();
            r.ayp = ayp.data();
            r.azm = three ? azm.data() : nullptr;
            r.azp = three ? azp.data() : nullptr;
            r.atm = atm.data();
            r.atp = atp.data();
            r.pot = pot.data();
            r.n = n;
            r.lam2 = 0.25;
            r.next = a.data();
            scalar::weighted_row(r);
            r.next = b.data();
            avx2::weighted_row(r);
            CHECK(max_gap(a, b) <= 1e-13);
        }
    }
}

TEST_CASE("weighted row with unit coefficients reduces to the flat stencil") {
    std::mt19937_64 rng(3);
    const std::size_t n = 33;
    auto cur = random_vec(rng, n), prev = random_vec(rng, n), ym = random_vec(rng, n), yp = random_vec(rng, n),
         zm = random_vec(rng, n), zp = random_vec(rng, n);
    std::vector<double> one(n, 1.0), a(n, 0.0), b(n, 0.0);
    StencilRow s{cur.data(), prev.data(), a.data(), ym.data(), yp.data(), zm.data(), zp.data(), nullptr, n, 0.2};
    leapfrog_row(s);
    WeightedRow w;
    w.cur = cur.data();
    w.prev = prev.data();
    w.next = b.data();
    w.ym = ym.data();
    w.yp = yp.data();
    w.zm = zm.data();
    w.zp = zp.data();
    w.a = w.aym = w.ayp = w.azm = w.azp = w.atm = w.atp = one.data();
    w.n = n;
    w.lam2 = 0.2;
    weighted_row(w);
    CHECK(max_gap(a, b) <= 1e-14);
}

TEST_CASE("complex kernels agree across variants") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> nd;
    for (std::size_t n : {0u, 1u, 2u, 3u, 5u, 8u, 129u}) {
        std::vector<cplx> x(n), y(n), x2;
        std::vector<double> m(n), w(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = {nd(rng), nd(rng)};
            y[i] = {nd(rng), nd(rng)};
            m[i] = nd(rng);
            w[i] = std::abs(nd(rng));
        }
        cplx ref = 0.0;
        for (std::size_t i = 0; i < n; ++i) ref += w[i] * std::conj(x[i]) * y[i];
        CHECK(std::abs(scalar::weighted_dot(x.data(), y.data(), w.data(), n) - ref) <= 1e-12 * (1.0 + std::abs(ref)) + 1e-12);
        if (!avx2::compiled() || detected_isa() != Isa::avx2) continue;
        CHECK(std::abs(avx2::weighted_dot(x.data(), y.data(), w.data(), n) - ref) <= 1e-12 * (1.0 + n));
        auto a = x, b = x;
        scalar::scale_complex(a.data(), m.data(), n);
        avx2::scale_complex(b.data(), m.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(a[i] - b[i]) == 0.0);
        a = x;
        b = x;
        scalar::mul_complex(a.data(), y.data(), n);
        avx2::mul_complex(b.data(), y.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-15 * (1.0 + std::abs(a[i])));
    }
}

TEST_CASE("forcing the scalar path is honoured and reversible") {
    const Isa before = active_isa();
    force_isa(Isa::scalar);
    CHECK(active_isa() == Isa::scalar);
    force_isa(Isa::avx2);
    CHECK(active_isa() == detected_isa());
    force_isa(before);
    CHECK(std::string(isa_name(Isa::scalar)) == "scalar");
}
