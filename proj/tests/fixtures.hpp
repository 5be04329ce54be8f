#ifndef TEMPONET_TESTS_FIXTURES_HPP
#define TEMPONET_TESTS_FIXTURES_HPP

#include "temponet/temponet.hpp"

#include <vector>

namespace fixtures {

using namespace temponet;

// Dense symmetric tensor sum_r a_ir a_jr c_kr as canonical cells.
inline DynTensor from_factors(const Eigen::MatrixXd& a, const Eigen::MatrixXd& c, bool self_loops = true) {
    std::vector<TensorEntry> cells;
    const int n = static_cast<int>(a.rows());
    const int horizon = static_cast<int>(c.rows());
    for (int k = 0; k < horizon; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = self_loops ? i : i + 1; j < n; ++j) {
                double v = 0.0;
                for (int r = 0; r < a.cols(); ++r) v += a(i, r) * a(j, r) * c(k, r);
                if (v > 0.0) cells.push_back({i, j, k, v});
            }
    return DynTensor::from_cells(n, horizon, self_loops, std::move(cells));
}

inline Eigen::MatrixXd random_nonneg(int rows, int cols, Rng& rng) {
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = uniform01(rng);
    return m;
}

inline GenerativeModel component(std::vector<double> memberships, std::vector<double> rates, int index = 0) {
    GenerativeModel gm;
    gm.index = index;
    gm.memberships = std::move(memberships);
    gm.rate_samples = std::move(rates);
    return gm;
}

inline GroundTruthCluster constant_cluster(std::vector<int> members, int start, int end, double rate) {
    GroundTruthCluster c;
    c.members = std::move(members);
    c.pieces.push_back({start, end, RatePiece::Kind::Constant, rate, rate});
    return c;
}

inline std::vector<int> range(int lo, int hi) {
    std::vector<int> out;
    for (int i = lo; i < hi; ++i) out.push_back(i);
    return out;
}

} // namespace fixtures

#endif // TEMPONET_TESTS_FIXTURES_HPP
