#ifndef ERGOLAB_SPECTRAL_HPP
#define ERGOLAB_SPECTRAL_HPP

#include <ergolab/graphing.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ergolab {

struct SpectralEstimate {
    double value = 0.0;
    std::string method;  // "exact-eigensolve" or "power-iteration"
    int iterations = 0;
    double residual = 0.0;
};

namespace detail {

constexpr std::size_t kExactEigensolveCap = 2000;
constexpr double kPowerResidualTol = 1e-8;
constexpr int kPowerMaxIters = 100000;

/// Deterministic start vector: all ones plus an index-dependent perturbation.
inline Eigen::VectorXd power_start(std::size_t n) {
    Eigen::VectorXd v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[static_cast<Eigen::Index>(i)] = 1.0 + 1e-3 * static_cast<double>(i % 17);
    return v;
}

/// Power iteration for the top eigenvalue of a symmetric nonnegative matrix,
/// given as a matrix-vector product. `shift` is added to the diagonal during
/// the iteration and subtracted from the reported value: with shift >= ||A||
/// the shifted operator is PSD with a simple top eigenvalue, so the iteration
/// converges on bipartite graphs too (where +-lambda_1 would otherwise tie).
template <typename MatVec>
SpectralEstimate power_iteration(std::size_t n, MatVec&& apply, double shift = 0.0) {
    SpectralEstimate est;
    est.method = "power-iteration";
    Eigen::VectorXd v = power_start(n);
    v.normalize();
    Eigen::VectorXd w(n);
    double lambda = 0.0;
    for (int it = 1; it <= kPowerMaxIters; ++it) {
        apply(v, w);
        if (shift != 0.0) w += shift * v;
        lambda = v.dot(w);
        double res = (w - lambda * v).norm();
        est.iterations = it;
        est.residual = res;
        double nw = w.norm();
        if (nw == 0.0) {  // zero matrix
            est.value = 0.0;
            est.residual = 0.0;
            return est;
        }
        v = w / nw;
        if (res < kPowerResidualTol) break;
    }
    est.value = lambda - shift;
    return est;
}

/// Dense symmetric top |eigenvalue|.
inline double sym_norm(const Eigen::MatrixXd& a) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
    double lo = std::abs(es.eigenvalues().minCoeff());
    double hi = std::abs(es.eigenvalues().maxCoeff());
    return std::max(lo, hi);
}

/// Operator norm (top singular value) of a dense matrix.
inline double op_norm(const Eigen::MatrixXd& a) {
    return std::sqrt(sym_norm(a.transpose() * a));
}

/// Permutation matrix of an automorphism restricted to one class, in the
/// class's sorted vertex order: (P f)(x) = f(theta^{-1}(x)), i.e.
/// P[pos(theta(y)), pos(y)] = 1.
inline Eigen::MatrixXd class_perm_matrix(const Automorphism& theta, const std::vector<int>& cls) {
    const std::size_t c = cls.size();
    std::vector<int> pos;  // dense lookup via binary search instead
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(c, c);
    auto idx = [&cls](int point) {
        return static_cast<Eigen::Index>(
            std::lower_bound(cls.begin(), cls.end(), point) - cls.begin());
    };
    for (std::size_t j = 0; j < c; ++j) p(idx(theta(cls[j])), static_cast<Eigen::Index>(j)) = 1.0;
    return p;
}

}  // namespace detail

/// Adjacency matrix of a class graph in sorted vertex order; self-loops add
/// 2 to the diagonal so row sums stay 2n.
inline Eigen::MatrixXd adjacency_matrix(const ClassGraph& cg) {
    const std::size_t c = cg.vertices.size();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(c, c);
    auto idx = [&cg](int point) {
        return static_cast<Eigen::Index>(
            std::lower_bound(cg.vertices.begin(), cg.vertices.end(), point) - cg.vertices.begin());
    };
    for (const auto& e : cg.edges) {
        if (e.u == e.v) {
            a(idx(e.u), idx(e.u)) += 2.0;
        } else {
            a(idx(e.u), idx(e.v)) += 1.0;
            a(idx(e.v), idx(e.u)) += 1.0;
        }
    }
    return a;
}

/// ||T|| with T = sum_i (u(theta_i) + u(theta_i^{-1})): the largest
/// adjacency eigenvalue across class graphs.
inline SpectralEstimate operator_norm(const Graphing& g) {
    SpectralEstimate best;
    best.method = "exact-eigensolve";
    for (const auto& cg : class_graphs(g)) {
        SpectralEstimate e;
        if (cg.vertices.size() <= detail::kExactEigensolveCap) {
            e.method = "exact-eigensolve";
            e.value = detail::sym_norm(adjacency_matrix(cg));
        } else {
            Eigen::MatrixXd a = adjacency_matrix(cg);
            e = detail::power_iteration(
                cg.vertices.size(),
                [&a](const Eigen::VectorXd& v, Eigen::VectorXd& w) { w = a * v; },
                static_cast<double>(2 * g.n()));
        }
        if (e.value >= best.value) {
            best.value = e.value;
            best.method = e.method;
            best.iterations = std::max(best.iterations, e.iterations);
            best.residual = std::max(best.residual, e.residual);
        }
    }
    return best;
}

/// ||(1/m) sum_j u(psi_j)|| per class, maximized over classes. The averaged
/// permutation matrix need not be symmetric, so this is a singular value.
inline double average_norm(const Graphing& g, const std::vector<Automorphism>& words) {
    if (words.empty()) throw std::invalid_argument("empty word list");
    for (const auto& w : words)
        if (!w.valid_for(g.rel)) throw std::invalid_argument("word not in the full group");
    double best = 0.0;
    for (const auto& c : g.rel.classes) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(c.size(), c.size());
        for (const auto& w : words) m += detail::class_perm_matrix(w, c);
        m /= static_cast<double>(words.size());
        best = std::max(best, detail::op_norm(m));
    }
    return best;
}

}  // namespace ergolab

#endif
