#ifndef TEMPONET_KMEANS_HPP
#define TEMPONET_KMEANS_HPP

#include "temponet/error.hpp"
#include "temponet/random.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

namespace temponet {

struct KMeansResult {
    std::vector<int> labels;
    double inertia = 0.0; // within-cluster sum of squares
};

// Globally optimal 1-D K-means by dynamic programming over the sorted values
// (optimal clusters are contiguous runs). Labels are ordered by value, so label 0
// holds the smallest values. O(K n^2), fine for node counts in the hundreds.
inline KMeansResult kmeans_1d(std::span<const double> values, int k) {
    const int n = static_cast<int>(values.size());
    if (k < 1 || k > n) throw InvalidArgument("kmeans_1d: k must be in [1, n]");

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return values[a] < values[b]; });
    std::vector<double> sorted(n);
    for (int i = 0; i < n; ++i) sorted[i] = values[order[i]];

    std::vector<double> s1(n + 1, 0.0), s2(n + 1, 0.0);
    for (int i = 0; i < n; ++i) {
        s1[i + 1] = s1[i] + sorted[i];
        s2[i + 1] = s2[i] + sorted[i] * sorted[i];
    }
    // SSE of sorted[a..b) computed around its own mean for accuracy.
    auto sse = [&](int a, int b) {
        const double cnt = b - a;
        const double mean = (s1[b] - s1[a]) / cnt;
        double s = 0.0;
        for (int i = a; i < b; ++i) s += (sorted[i] - mean) * (sorted[i] - mean);
        return s;
    };
    // Precompute costs; n is small.
    std::vector<double> cost(static_cast<std::size_t>(n) * (n + 1), 0.0);
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b <= n; ++b) cost[static_cast<std::size_t>(a) * (n + 1) + b] = sse(a, b);
    auto c = [&](int a, int b) { return cost[static_cast<std::size_t>(a) * (n + 1) + b]; };

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> dp(k + 1, std::vector<double>(n + 1, inf));
    std::vector<std::vector<int>> cut(k + 1, std::vector<int>(n + 1, 0));
    dp[0][0] = 0.0;
    for (int m = 1; m <= k; ++m) {
        for (int b = m; b <= n; ++b) {
            for (int a = m - 1; a < b; ++a) {
                if (dp[m - 1][a] == inf) continue;
                const double v = dp[m - 1][a] + c(a, b);
                if (v < dp[m][b]) {
                    dp[m][b] = v;
                    cut[m][b] = a;
                }
            }
        }
    }
    KMeansResult res;
    res.labels.assign(n, 0);
    res.inertia = dp[k][n];
    int b = n;
    for (int m = k; m >= 1; --m) {
        const int a = cut[m][b];
        for (int i = a; i < b; ++i) res.labels[order[i]] = m - 1;
        b = a;
    }
    return res;
}

// Lloyd's algorithm with k-means++ seeding, best of `restarts` runs.
// Rows of `points` are observations.
inline KMeansResult kmeans(const Eigen::MatrixXd& points, int k, Rng& rng, int restarts = 10, int max_iters = 100) {
    const int n = static_cast<int>(points.rows());
    if (k < 1 || k > n) throw InvalidArgument("kmeans: k must be in [1, n]");
    KMeansResult best;
    best.inertia = std::numeric_limits<double>::infinity();

    for (int run = 0; run < restarts; ++run) {
        Eigen::MatrixXd centers(k, points.cols());
        std::vector<double> dist(n, std::numeric_limits<double>::infinity());
        int first = static_cast<int>(uniform_int(rng, 0, n - 1));
        centers.row(0) = points.row(first);
        for (int c = 1; c < k; ++c) {
            double total = 0.0;
            for (int i = 0; i < n; ++i) {
                dist[i] = std::min(dist[i], (points.row(i) - centers.row(c - 1)).squaredNorm());
                total += dist[i];
            }
            int pick = 0;
            if (total > 0.0) {
                double u = uniform01(rng) * total;
                for (pick = 0; pick < n - 1; ++pick) {
                    u -= dist[pick];
                    if (u < 0.0) break;
                }
            } else {
                pick = static_cast<int>(uniform_int(rng, 0, n - 1));
            }
            centers.row(c) = points.row(pick);
        }

        std::vector<int> labels(n, -1);
        double inertia = 0.0;
        for (int it = 0; it < max_iters; ++it) {
            bool changed = false;
            inertia = 0.0;
            for (int i = 0; i < n; ++i) {
                int arg = 0;
                double bd = std::numeric_limits<double>::infinity();
                for (int c = 0; c < k; ++c) {
                    const double d = (points.row(i) - centers.row(c)).squaredNorm();
                    if (d < bd) {
                        bd = d;
                        arg = c;
                    }
                }
                if (labels[i] != arg) {
                    labels[i] = arg;
                    changed = true;
                }
                inertia += bd;
            }
            if (!changed) break;
            Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
            std::vector<int> counts(k, 0);
            for (int i = 0; i < n; ++i) {
                sums.row(labels[i]) += points.row(i);
                ++counts[labels[i]];
            }
            for (int c = 0; c < k; ++c)
                if (counts[c] > 0) centers.row(c) = sums.row(c) / counts[c];
        }
        if (inertia < best.inertia) {
            best.inertia = inertia;
            best.labels = labels;
        }
    }
    return best;
}

} // namespace temponet

#endif // TEMPONET_KMEANS_HPP
