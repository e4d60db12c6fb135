#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/SVD>

#include "lightcone/bulk.hpp"
#include "lightcone/errors.hpp"

namespace lightcone::bulk {

Vec trace_features(const BoundaryFunction& trace, double alpha) {
    // Traces of real fields are real; keep the real half of the feature vector.
    const Vec full = boundary::weighted_features(trace, alpha);
    Vec f(full.size() / 2);
    for (Eigen::Index i = 0; i < f.size() / 2; ++i) {
        f[2 * i] = full[4 * i];
        f[2 * i + 1] = full[4 * i + 2];
    }
    return f;
}

double TraceOperator::condition() const {
    if (singular_values.size() == 0) return 0.0;
    const double lo = singular_values[singular_values.size() - 1];
    return lo > 0.0 ? singular_values[0] / lo : std::numeric_limits<double>::infinity();
}

TraceOperator assemble_trace_operator(const BulkGrid& g, const SpacetimeChart& chart, const ConeChart& cone,
                                      const boundary::GridPtr& bgrid, const SplineBasis& basis, double alpha,
                                      const RestrictOptions& opt) {
    TraceOperator op;
    op.basis = basis;
    op.alpha = alpha;
    op.t1 = g.spec().t1;
    const int n = basis.count();
    const int M = 2 * n;
    RestrictOptions ro = opt;
    ro.cap_at_t1 = true;
    for (int col = 0; col < M; ++col) {
        Vec e = Vec::Zero(M);
        e[col] = 1.0;
        const CauchyData data = basis_data(g, basis, e, op.t1);
        const Vec f = trace_features(restrict_to_cone(data, g, chart, cone, bgrid, ro), alpha);
        if (col == 0) op.T = Mat::Zero(f.size(), M);
        op.T.col(col) = f;
    }
    // Energy Gram: H1 seminorm for the value slot, L2 for the velocity slot.
    op.G = Mat::Zero(M, M);
    op.G.topLeftCorner(n, n) = basis.stiffness();
    op.G.bottomRightCorner(n, n) = basis.mass();
    Eigen::SelfAdjointEigenSolver<Mat> es(op.G);
    const Vec ev = es.eigenvalues();
    if (ev.minCoeff() <= 0.0) throw RankDeficient("energy Gram of the spline basis is singular");
    op.G_inv_sqrt = es.eigenvectors() * ev.cwiseInverse().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
    op.G_sqrt = es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
    const Mat Tn = op.T * op.G_inv_sqrt;
    Eigen::BDCSVD<Mat> svd(Tn, Eigen::ComputeThinU | Eigen::ComputeThinV);
    op.singular_values = svd.singularValues();
    op.U = svd.matrixU();
    op.V = svd.matrixV();
    return op;
}

GoursatResult goursat_solve(const TraceOperator& op, const Vec& w, double cutoff) {
    if (w.size() != op.T.rows()) throw ConfigError("trace feature vector has the wrong size");
    GoursatResult r;
    const Vec& sv = op.singular_values;
    const double top = sv.size() ? sv[0] : 0.0;
    Vec y = op.U.transpose() * w;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv[i] > cutoff * top) {
            y[i] /= sv[i];
            ++r.rank;
        } else {
            y[i] = 0.0;
            ++r.cut;
        }
    }
    if (r.cut * 2 > sv.size())
        throw RankDeficient("more than half of the singular values fall below the cutoff");
    r.coeffs = op.G_inv_sqrt * (op.V * y);
    const double wn = w.norm();
    r.forward_residual = wn > 0.0 ? (op.T * r.coeffs - w).norm() / wn : 0.0;
    return r;
}

std::vector<int> radial_order(const SplineBasis& basis) {
    std::vector<int> order(basis.count());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return basis.center(a).squaredNorm() < basis.center(b).squaredNorm(); });
    return order;
}

double enrichment_residual(const TraceOperator& op, const Vec& w, int per_slot) {
    const int n = op.basis.count();
    per_slot = std::clamp(per_slot, 1, n);
    const std::vector<int> order = radial_order(op.basis);
    Mat A(op.T.rows(), 2 * per_slot);
    for (int m = 0; m < per_slot; ++m) {
        A.col(m) = op.T.col(order[m]);
        A.col(per_slot + m) = op.T.col(n + order[m]);
    }
    const Vec c = A.colPivHouseholderQr().solve(w);
    return (A * c - w).norm() / w.norm();
}

double energy_norm(const TraceOperator& op, const Vec& coeffs) { return std::sqrt(coeffs.dot(op.G * coeffs)); }

}  // namespace lightcone::bulk
