#ifndef TEMPONET_NNLS_HPP
#define TEMPONET_NNLS_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

namespace temponet::detail {

// Lawson-Hanson active set for min 1/2 x'Gx - b'x subject to x >= 0, with G
// symmetric positive semi-definite (the normal-equation form of NNLS).
// Variables whose diagonal entry in G is (numerically) zero are pinned to 0.
inline Eigen::VectorXd nnls_gram(const Eigen::MatrixXd& gram, const Eigen::VectorXd& rhs) {
    const int n = static_cast<int>(rhs.size());
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    if (n == 0) return x;

    const double gmax = gram.diagonal().cwiseAbs().maxCoeff();
    if (gmax <= 0.0) return x;
    const double scale = std::max(rhs.cwiseAbs().maxCoeff(), gmax);
    const double tol = 1e-12 * scale * n;

    std::vector<char> usable(n);
    for (int k = 0; k < n; ++k) usable[k] = gram(k, k) > 1e-14 * gmax;

    std::vector<char> passive(n, 0);
    Eigen::VectorXd grad = rhs;
    const int max_outer = 3 * n + 10;

    auto solve_passive = [&](Eigen::VectorXd& z) {
        std::vector<int> idx;
        for (int k = 0; k < n; ++k)
            if (passive[k]) idx.push_back(k);
        const int m = static_cast<int>(idx.size());
        Eigen::MatrixXd gp(m, m);
        Eigen::VectorXd bp(m);
        for (int a = 0; a < m; ++a) {
            bp(a) = rhs(idx[a]);
            for (int b = 0; b < m; ++b) gp(a, b) = gram(idx[a], idx[b]);
        }
        Eigen::VectorXd zp = gp.ldlt().solve(bp);
        if (!zp.allFinite()) zp = gp.completeOrthogonalDecomposition().solve(bp);
        z.setZero(n);
        for (int a = 0; a < m; ++a) z(idx[a]) = zp(a);
    };

    for (int outer = 0; outer < max_outer; ++outer) {
        int best = -1;
        double best_grad = tol;
        for (int k = 0; k < n; ++k) {
            if (!passive[k] && usable[k] && grad(k) > best_grad) {
                best_grad = grad(k);
                best = k;
            }
        }
        if (best < 0) break;
        passive[best] = 1;

        Eigen::VectorXd z;
        for (int inner = 0; inner < 3 * n + 10; ++inner) {
            solve_passive(z);
            bool feasible = true;
            for (int k = 0; k < n; ++k)
                if (passive[k] && z(k) <= 0.0) feasible = false;
            if (feasible) break;
            double alpha = 1.0;
            for (int k = 0; k < n; ++k) {
                if (passive[k] && z(k) <= 0.0) {
                    const double denom = x(k) - z(k);
                    if (denom > 0.0) alpha = std::min(alpha, x(k) / denom);
                }
            }
            x += alpha * (z - x);
            for (int k = 0; k < n; ++k) {
                if (passive[k] && x(k) <= 1e-15 * scale) {
                    passive[k] = 0;
                    x(k) = 0.0;
                }
            }
        }
        x = z;
        for (int k = 0; k < n; ++k)
            if (!passive[k] || x(k) < 0.0) x(k) = 0.0;
        grad = rhs - gram * x;
    }
    return x;
}

} // namespace temponet::detail

#endif // TEMPONET_NNLS_HPP
