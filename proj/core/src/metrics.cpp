#include "cinecam/metrics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "cinecam/error.hpp"

namespace cinecam {

namespace {

Eigen::MatrixXd stack(const std::vector<TrajFeatures>& set) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(set.size()), kTrajFeatureDim);
    for (std::size_t i = 0; i < set.size(); ++i)
        m.row(static_cast<Eigen::Index>(i)) = set[i].values.transpose();
    return m;
}

Eigen::MatrixXd covariance(const Eigen::MatrixXd& x, const Eigen::VectorXd& mu) {
    const Eigen::MatrixXd centered = x.rowwise() - mu.transpose();
    Eigen::MatrixXd c =
        (centered.transpose() * centered) / static_cast<double>(x.rows() - 1);
    c.diagonal().array() += 1e-6;
    return c;
}

double trace_sqrt_product(const Eigen::MatrixXd& ca, const Eigen::MatrixXd& cb) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_a(ca);
    const Eigen::MatrixXd sqrt_a =
        es_a.eigenvectors() *
        es_a.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
        es_a.eigenvectors().transpose();
    Eigen::MatrixXd m = sqrt_a * cb * sqrt_a;
    m = 0.5 * (m + m.transpose());  // kill asymmetric round-off
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_m(m);
    return es_m.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
}

}  // namespace

double frechet_distance(const std::vector<TrajFeatures>& a,
                        const std::vector<TrajFeatures>& b) {
    if (a.size() < 3 || b.size() < 3)
        throw TooFewSamples("frechet_distance: needs >= 3 samples per set");
    const Eigen::MatrixXd xa = stack(a), xb = stack(b);
    const Eigen::VectorXd mu_a = xa.colwise().mean(), mu_b = xb.colwise().mean();
    const Eigen::MatrixXd ca = covariance(xa, mu_a), cb = covariance(xb, mu_b);
    // averaging both sqrt orders makes the value exactly argument-symmetric
    const double tr_sqrt = 0.5 * (trace_sqrt_product(ca, cb) + trace_sqrt_product(cb, ca));
    const double val =
        (mu_a - mu_b).squaredNorm() + ca.trace() + cb.trace() - 2.0 * tr_sqrt;
    return std::max(val, 0.0);
}

Prdc prdc(const std::vector<TrajFeatures>& generated,
          const std::vector<TrajFeatures>& reference, int k) {
    if (k < 1) throw DomainError("prdc: k must be >= 1");
    if (generated.size() <= static_cast<std::size_t>(k) ||
        reference.size() <= static_cast<std::size_t>(k))
        throw TooFewSamples("prdc: each set must have more than k samples");

    Eigen::MatrixXd g = stack(generated), r = stack(reference);
    const Eigen::VectorXd mu = r.colwise().mean();
    Eigen::VectorXd sd(kTrajFeatureDim);
    for (int d = 0; d < kTrajFeatureDim; ++d) {
        const double var = (r.col(d).array() - mu[d]).square().mean();
        sd[d] = var > 1e-24 ? std::sqrt(var) : 1.0;
    }
    for (int d = 0; d < kTrajFeatureDim; ++d) {
        g.col(d) = (g.col(d).array() - mu[d]) / sd[d];
        r.col(d) = (r.col(d).array() - mu[d]) / sd[d];
    }

    const Eigen::Index ng = g.rows(), nr = r.rows();
    auto knn_radii = [k](const Eigen::MatrixXd& x) {
        const Eigen::Index n = x.rows();
        Eigen::VectorXd radii(n);
        std::vector<double> dists;
        for (Eigen::Index i = 0; i < n; ++i) {
            dists.clear();
            for (Eigen::Index j = 0; j < n; ++j)
                if (j != i) dists.push_back((x.row(i) - x.row(j)).norm());
            std::nth_element(dists.begin(), dists.begin() + (k - 1), dists.end());
            radii[i] = dists[static_cast<std::size_t>(k - 1)];
        }
        return radii;
    };
    const Eigen::VectorXd radii_r = knn_radii(r), radii_g = knn_radii(g);

    Prdc out;
    long long hits = 0;
    std::vector<bool> covered(static_cast<std::size_t>(nr), false);
    long long inside_any = 0;
    for (Eigen::Index i = 0; i < ng; ++i) {
        bool any = false;
        for (Eigen::Index j = 0; j < nr; ++j) {
            if ((g.row(i) - r.row(j)).norm() <= radii_r[j]) {
                ++hits;
                any = true;
                covered[static_cast<std::size_t>(j)] = true;
            }
        }
        if (any) ++inside_any;
    }
    out.precision = static_cast<double>(inside_any) / static_cast<double>(ng);
    out.density = static_cast<double>(hits) / (static_cast<double>(k) * static_cast<double>(ng));
    long long cov = 0;
    for (bool c : covered) cov += c ? 1 : 0;
    out.coverage = static_cast<double>(cov) / static_cast<double>(nr);

    long long recalled = 0;
    for (Eigen::Index j = 0; j < nr; ++j) {
        for (Eigen::Index i = 0; i < ng; ++i) {
            if ((r.row(j) - g.row(i)).norm() <= radii_g[i]) {
                ++recalled;
                break;
            }
        }
    }
    out.recall = static_cast<double>(recalled) / static_cast<double>(nr);
    return out;
}

}  // namespace cinecam
