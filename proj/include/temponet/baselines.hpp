#ifndef TEMPONET_BASELINES_HPP
#define TEMPONET_BASELINES_HPP

// Comparison methods.
//
// BC thresholds each normalized component's memberships into an "in" set and its
// complement; components are ordered by the Frobenius norm of
// lambda_r A_r (x) A_r (x) T_r and the list is [all "in" sets, all complements].
//
// EC clusters every snapshot of the blended similarity
// R_t = (1 - beta) X_t + beta X_{t-1} (spectral embedding + K-means), then unifies
// node sets that recur across snapshots into clusters with lifetimes.

#include "temponet/clustering.hpp"
#include "temponet/cp_decomp.hpp"
#include "temponet/error.hpp"
#include "temponet/eval.hpp"
#include "temponet/kmeans.hpp"
#include "temponet/random.hpp"
#include "temponet/tensor.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace temponet {

struct BcCluster {
    ClusterRecord record;
    double component_norm = 0.0;
    int part = 1; // 1: memberships above threshold, 2: complement
};

inline double component_frobenius_norm(const CpModel& model, int r) {
    return model.scales.at(r) * model.node_loadings.col(r).squaredNorm() * model.time_loadings.col(r).norm();
}

inline std::vector<BcCluster> bc_ranked_list(const CpModel& model, double threshold = 0.5) {
    if (!(threshold > 0.0 && threshold < 1.0)) throw InvalidArgument("BC threshold must be in (0, 1)");
    const auto models = normalize_components(model);
    std::vector<int> order(models.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> norms(models.size());
    for (std::size_t r = 0; r < models.size(); ++r) norms[r] = component_frobenius_norm(model, static_cast<int>(r));
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return norms[a] > norms[b]; });

    std::vector<BcCluster> out;
    for (int part = 1; part <= 2; ++part) {
        for (int r : order) {
            const auto& gm = models[r];
            BcCluster c;
            c.part = part;
            c.component_norm = norms[r];
            c.record.model_index = gm.index;
            for (int i = 0; i < gm.node_count(); ++i)
                if ((gm.memberships[i] > threshold) == (part == 1)) c.record.members.push_back(i);
            if (!c.record.members.empty()) {
                c.record.mean_membership = mean_membership(c.record.members, gm);
                c.record.so_score = so_score(c.record.members, gm);
            }
            out.push_back(std::move(c));
        }
    }
    for (std::size_t k = 0; k < out.size(); ++k) out[k].record.rank_position = static_cast<int>(k) + 1;
    return out;
}

struct EcConfig {
    double beta = 0.5;
    int k = 0; // clusters per snapshot; 0 selects per snapshot by Silhouette in [2, k_max]
    int k_max = 10;
    int restarts = 10;
    std::uint64_t seed = 0;
};

namespace detail {

// Euclidean mean Silhouette of a labelling of embedding rows.
inline double euclidean_silhouette(const Eigen::MatrixXd& pts, const std::vector<int>& labels, int k) {
    const int n = static_cast<int>(pts.rows());
    std::vector<int> size(k, 0);
    for (int l : labels) ++size[l];
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        std::vector<double> sum(k, 0.0);
        for (int j = 0; j < n; ++j)
            if (j != i) sum[labels[j]] += (pts.row(i) - pts.row(j)).norm();
        const int own = labels[i];
        if (size[own] <= 1) continue;
        const double a = sum[own] / (size[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c)
            if (c != own && size[c] > 0) b = std::min(b, sum[c] / size[c]);
        const double m = std::max(a, b);
        if (m > 0.0 && std::isfinite(b)) total += (b - a) / m;
    }
    return total / n;
}

// Normalized-affinity spectral embedding (top-k eigenvectors, rows unit length).
inline Eigen::MatrixXd spectral_embedding(const Eigen::MatrixXd& sim, int k) {
    const int n = static_cast<int>(sim.rows());
    Eigen::VectorXd dinv(n);
    for (int i = 0; i < n; ++i) {
        const double d = sim.row(i).sum();
        dinv[i] = d > 0.0 ? 1.0 / std::sqrt(d) : 0.0;
    }
    const Eigen::MatrixXd m = dinv.asDiagonal() * sim * dinv.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success) throw NumericalError("EC: eigendecomposition failed");
    // Eigenvalues ascending; take the last k.
    Eigen::MatrixXd emb = es.eigenvectors().rightCols(k);
    for (int i = 0; i < n; ++i) {
        const double r = emb.row(i).norm();
        if (r > 0.0 && dinv[i] > 0.0)
            emb.row(i) /= r;
        else
            emb.row(i).setZero();
    }
    return emb;
}

inline Eigen::MatrixXd dense_slice(const DynTensor& x, int t) {
    const int n = x.node_count();
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
    for (const auto& e : x.slice(t)) {
        s(e.i, e.j) += e.value;
        if (e.i != e.j) s(e.j, e.i) += e.value;
    }
    return s;
}

} // namespace detail

// assignments[t][i] = cluster label of node i at snapshot t.
inline std::vector<std::vector<int>> ec_clustering(const DynTensor& x, const EcConfig& cfg) {
    const int n = x.node_count();
    const int horizon = x.horizon();
    if (!(cfg.beta >= 0.0 && cfg.beta <= 1.0)) throw InvalidArgument("EC beta must be in [0, 1]");
    if (cfg.k > n) throw InvalidArgument("EC k = " + std::to_string(cfg.k) + " exceeds |V| = " + std::to_string(n));
    if (cfg.k < 0) throw InvalidArgument("EC k must be >= 0");
    if (cfg.k == 0 && cfg.k_max < 2) throw InvalidArgument("EC k_max must be >= 2");
    if (cfg.restarts < 1) throw InvalidArgument("EC restarts must be >= 1");
    if (horizon < 1) throw InvalidArgument("EC needs at least one snapshot");
    if (n == 0) return std::vector<std::vector<int>>(horizon);

    std::vector<std::vector<int>> out;
    out.reserve(horizon);
    Eigen::MatrixXd prev = Eigen::MatrixXd::Zero(n, n);
    for (int t = 0; t < horizon; ++t) {
        Eigen::MatrixXd cur = detail::dense_slice(x, t);
        const Eigen::MatrixXd sim = t == 0 ? cur : Eigen::MatrixXd((1.0 - cfg.beta) * cur + cfg.beta * prev);
        Rng rng(derive_seed(cfg.seed, "ec-snapshot", static_cast<std::uint64_t>(t)));
        if (cfg.k > 0) {
            const auto emb = detail::spectral_embedding(sim, cfg.k);
            out.push_back(kmeans(emb, cfg.k, rng, cfg.restarts).labels);
        } else {
            const int k_hi = std::min(cfg.k_max, n - 1);
            std::vector<int> best_labels(n, 0);
            double best = -std::numeric_limits<double>::infinity();
            for (int k = 2; k <= k_hi; ++k) {
                const auto emb = detail::spectral_embedding(sim, k);
                auto km = kmeans(emb, k, rng, cfg.restarts);
                const double s = detail::euclidean_silhouette(emb, km.labels, k);
                if (s > best) {
                    best = s;
                    best_labels = std::move(km.labels);
                }
            }
            out.push_back(std::move(best_labels));
        }
        prev = std::move(cur);
    }
    return out;
}

struct EcCluster {
    std::vector<int> members;  // sorted
    std::vector<int> lifetime; // snapshots where the node set occurs
};

struct EcUnifyOptions {
    double jaccard_threshold = 1.0; // 1 = exact node-set equality
    int max_retained = 0;           // 0 = keep all
};

// Unifies recurring node sets; ranked by occurrence count, then size, then smallest member.
inline std::vector<EcCluster> ec_to_clusters(const std::vector<std::vector<int>>& assignments,
                                             const EcUnifyOptions& opts = {}) {
    if (!(opts.jaccard_threshold > 0.0 && opts.jaccard_threshold <= 1.0))
        throw InvalidArgument("EC Jaccard threshold must be in (0, 1]");
    std::vector<EcCluster> clusters;
    std::map<std::vector<int>, int> exact;
    for (std::size_t t = 0; t < assignments.size(); ++t) {
        std::map<int, std::vector<int>> cells;
        for (std::size_t i = 0; i < assignments[t].size(); ++i) cells[assignments[t][i]].push_back(static_cast<int>(i));
        for (auto& [label, members] : cells) {
            int idx = -1;
            if (auto it = exact.find(members); it != exact.end()) {
                idx = it->second;
            } else if (opts.jaccard_threshold < 1.0) {
                for (std::size_t c = 0; c < clusters.size(); ++c) {
                    const double inter = intersection_size(members, clusters[c].members);
                    const double uni = static_cast<double>(members.size() + clusters[c].members.size()) - inter;
                    if (uni > 0.0 && inter / uni >= opts.jaccard_threshold) {
                        idx = static_cast<int>(c);
                        break;
                    }
                }
            }
            if (idx < 0) {
                idx = static_cast<int>(clusters.size());
                exact.emplace(members, idx);
                clusters.push_back({members, {}});
            }
            auto& life = clusters[idx].lifetime;
            if (life.empty() || life.back() != static_cast<int>(t)) life.push_back(static_cast<int>(t));
        }
    }
    std::stable_sort(clusters.begin(), clusters.end(), [](const EcCluster& a, const EcCluster& b) {
        if (a.lifetime.size() != b.lifetime.size()) return a.lifetime.size() > b.lifetime.size();
        if (a.members.size() != b.members.size()) return a.members.size() > b.members.size();
        return a.members.front() < b.members.front();
    });
    if (opts.max_retained > 0 && static_cast<int>(clusters.size()) > opts.max_retained)
        clusters.resize(opts.max_retained);
    return clusters;
}

// Mapping profile for an EC cluster: unit weights and the observed mean count
// per ordered member pair at steps in its lifetime (0 elsewhere).
inline DetectedProfile ec_profile(const EcCluster& c, const DynTensor& x, int source) {
    DetectedProfile p;
    p.members = c.members;
    p.weights.assign(c.members.size(), 1.0);
    p.rate.assign(x.horizon(), 0.0);
    p.source = source;
    const double m = static_cast<double>(c.members.size());
    const double pairs = x.self_loops_allowed() ? m * m : m * (m - 1.0);
    if (pairs <= 0.0) return p;
    std::vector<char> in(x.node_count(), 0);
    for (int i : c.members) in[i] = 1;
    for (int t : c.lifetime) {
        double s = 0.0;
        for (const auto& e : x.slice(t))
            if (in[e.i] && in[e.j]) s += e.multiplicity() * e.value;
        p.rate[t] = s / pairs;
    }
    return p;
}

} // namespace temponet

#endif // TEMPONET_BASELINES_HPP
