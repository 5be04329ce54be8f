#ifndef TEMPONET_CLUSTERING_HPP
#define TEMPONET_CLUSTERING_HPP

// Clustering of generative models: 1-D K-means on memberships with the number of
// clusters picked by the Silhouette criterion under the product similarity
// s(i,j) = a_i * a_j, SO scoring, and the ranked/elbow-filtered cluster list.

#include "temponet/cp_decomp.hpp"
#include "temponet/error.hpp"
#include "temponet/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace temponet {

struct ClusterRecord {
    int model_index = 0;
    std::vector<int> members; // sorted node ids
    double so_score = 0.0;
    int rank_position = 0;    // 1-based; 0 until ranked
    double mean_membership = 0.0;
    bool filtered = false;    // below the elbow cut
    bool degenerate = false;  // no multi-cluster structure in its component
};

struct ClusterOptions {
    int k_max = 10;           // capped at |V| - 1
    double drop_factor = 5.0; // elbow: minimum SO_k / SO_{k+1} ratio for a cut
    // Emit a component as one cluster when its best Silhouette is negative.
    bool collapse_negative = false;
};

inline double node_similarity(const GenerativeModel& gm, int i, int j) {
    return gm.memberships.at(i) * gm.memberships.at(j);
}

// Mean Silhouette score; labels[i] is node i's cluster id (any integers).
// d(i, C) averages s(i, j) over all j in C, including j == i.
inline double silhouette(std::span<const int> labels, const GenerativeModel& gm) {
    const int n = gm.node_count();
    if (static_cast<int>(labels.size()) != n) throw InvalidArgument("silhouette: one label per node required");
    std::map<int, std::pair<double, int>> sums; // label -> (sum of a, size)
    for (int i = 0; i < n; ++i) {
        auto& s = sums[labels[i]];
        s.first += gm.memberships[i];
        s.second += 1;
    }
    if (sums.size() < 2) throw InvalidArgument("silhouette requires at least two non-empty clusters");

    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const double ai = gm.memberships[i];
        double own = 0.0;
        double best_other = -std::numeric_limits<double>::infinity();
        double best_any = -std::numeric_limits<double>::infinity();
        for (const auto& [label, s] : sums) {
            const double d = ai * s.first / s.second;
            if (label == labels[i])
                own = d;
            else
                best_other = std::max(best_other, d);
            best_any = std::max(best_any, d);
        }
        if (best_any > 0.0) total += (own - best_other) / best_any;
    }
    return total / n;
}

inline double so_score(std::span<const int> members, const GenerativeModel& gm) {
    if (members.empty()) throw InvalidArgument("so_score: cluster must be non-empty");
    double s = 0.0;
    for (int i : members) s += gm.memberships.at(i);
    const double mean = s / static_cast<double>(members.size());
    double rate = 0.0;
    for (double v : gm.rate_samples) rate += v;
    return mean * mean * rate;
}

namespace detail {

inline ClusterRecord make_record(const GenerativeModel& gm, std::vector<int> members) {
    std::sort(members.begin(), members.end());
    ClusterRecord rec;
    rec.model_index = gm.index;
    double s = 0.0;
    for (int i : members) s += gm.memberships[i];
    rec.mean_membership = s / static_cast<double>(members.size());
    rec.so_score = so_score(members, gm);
    rec.members = std::move(members);
    return rec;
}

} // namespace detail

struct SilhouetteChoice {
    int k = 1;
    double score = 0.0;
    std::vector<int> labels;
};

// Best K in [2, min(k_max, #distinct values)] by mean Silhouette; ties keep the smaller K.
inline SilhouetteChoice choose_k(const GenerativeModel& gm, int k_max) {
    std::vector<double> distinct = gm.memberships;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    const int k_hi = std::min<int>(k_max, static_cast<int>(distinct.size()));
    SilhouetteChoice best;
    best.score = -std::numeric_limits<double>::infinity();
    for (int k = 2; k <= k_hi; ++k) {
        auto km = kmeans_1d(gm.memberships, k);
        const double s = silhouette(km.labels, gm);
        if (s > best.score) {
            best = {k, s, std::move(km.labels)};
        }
    }
    return best;
}

inline std::vector<ClusterRecord> cluster_component(const GenerativeModel& gm, int k_max,
                                                    bool collapse_negative = false) {
    if (k_max < 2) throw InvalidArgument("cluster_component: k_max must be >= 2");
    std::vector<ClusterRecord> out;
    const int n = gm.node_count();
    if (n == 0 || gm.is_zero()) return out;

    auto choice = choose_k(gm, k_max);
    if (choice.k < 2 || (collapse_negative && choice.score < 0.0)) {
        std::vector<int> all(n);
        std::iota(all.begin(), all.end(), 0);
        auto rec = detail::make_record(gm, std::move(all));
        rec.degenerate = true;
        out.push_back(std::move(rec));
        return out;
    }
    std::vector<std::vector<int>> cells(choice.k);
    for (int i = 0; i < n; ++i) cells[choice.labels[i]].push_back(i);
    // Highest-membership cell first.
    for (int c = choice.k - 1; c >= 0; --c)
        if (!cells[c].empty()) out.push_back(detail::make_record(gm, std::move(cells[c])));
    return out;
}

// Sorts by SO (descending, ties by model index then smallest member), assigns
// rank positions and marks everything after the elbow cut as filtered.
inline std::vector<ClusterRecord> rank_and_filter(std::vector<ClusterRecord> clusters, double drop_factor = 5.0) {
    std::stable_sort(clusters.begin(), clusters.end(), [](const ClusterRecord& a, const ClusterRecord& b) {
        if (a.so_score != b.so_score) return a.so_score > b.so_score;
        if (a.model_index != b.model_index) return a.model_index < b.model_index;
        const int ma = a.members.empty() ? std::numeric_limits<int>::max() : a.members.front();
        const int mb = b.members.empty() ? std::numeric_limits<int>::max() : b.members.front();
        return ma < mb;
    });
    for (std::size_t k = 0; k < clusters.size(); ++k) {
        clusters[k].rank_position = static_cast<int>(k) + 1;
        clusters[k].filtered = false;
    }
    std::size_t cut = clusters.size();
    double best_ratio = drop_factor;
    for (std::size_t k = 0; k + 1 < clusters.size(); ++k) {
        const double hi = clusters[k].so_score;
        const double lo = clusters[k + 1].so_score;
        double ratio;
        if (hi <= 0.0)
            ratio = 1.0;
        else if (lo <= 0.0)
            ratio = std::numeric_limits<double>::infinity();
        else
            ratio = hi / lo;
        if (ratio > best_ratio) {
            best_ratio = ratio;
            cut = k + 1;
        }
    }
    for (std::size_t k = cut; k < clusters.size(); ++k) clusters[k].filtered = true;
    return clusters;
}

// Clusters every component and returns the ranked, filtered list.
inline std::vector<ClusterRecord> cluster_models(std::span<const GenerativeModel> models, const ClusterOptions& opts) {
    std::vector<ClusterRecord> all;
    for (const auto& gm : models) {
        const int k_max = std::max(2, std::min(opts.k_max, gm.node_count() - 1));
        auto recs = cluster_component(gm, k_max, opts.collapse_negative);
        all.insert(all.end(), recs.begin(), recs.end());
    }
    return rank_and_filter(std::move(all), opts.drop_factor);
}

} // namespace temponet

#endif // TEMPONET_CLUSTERING_HPP
