#ifndef TEMPONET_EVAL_HPP
#define TEMPONET_EVAL_HPP

// Evaluation against planted ground truth: detected-to-truth mapping by the
// normalized reconstruction distance E, member and cluster precision/recall/F1,
// precision-recall curves over the ranked list, lifetime F1 and cluster norms.

#include "temponet/clustering.hpp"
#include "temponet/cp_decomp.hpp"
#include "temponet/error.hpp"
#include "temponet/lifetime.hpp"
#include "temponet/synthgen.hpp"
#include "temponet/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace temponet {

// A detected cluster as seen by the mapping: pair (m, o) is modelled as
// weights[m] * weights[o] * rate[t] for members m, o and 0 otherwise.
struct DetectedProfile {
    std::vector<int> members;     // sorted
    std::vector<double> weights;  // one per member (b_m)
    std::vector<double> rate;     // one per analysis step
    int source = -1;              // generating component; clusters may share a truth only with equal source
};

// Planted expectation x*: rate[t] on every member pair, 0 elsewhere.
struct TruthProfile {
    std::vector<int> members; // sorted
    std::vector<double> rate;
};

inline double f1_score(double p, double r) {
    return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

// Planted per-pair expectation aggregated to windows of width w (summed).
inline TruthProfile truth_profile(const GroundTruthCluster& gt, int fine_horizon, int w = 1) {
    if (w < 1) throw InvalidArgument("truth_profile: granularity must be >= 1");
    TruthProfile p;
    p.members = gt.members;
    const int coarse = (fine_horizon + w - 1) / w;
    p.rate.assign(coarse, 0.0);
    for (int t = 0; t < fine_horizon; ++t) p.rate[t / w] += gt.rate(t);
    return p;
}

// Profile from a generative model; uses the fitted rate when given, else raw samples.
inline DetectedProfile model_profile(std::span<const int> members, const GenerativeModel& gm,
                                     const PiecewiseRate* fitted = nullptr) {
    DetectedProfile p;
    p.members.assign(members.begin(), members.end());
    for (int m : p.members) p.weights.push_back(gm.memberships.at(m));
    p.rate = fitted ? fitted->sample() : gm.rate_samples;
    p.source = gm.index;
    return p;
}

// E = sum_t sum_{m,o in U} (b_m b_o L_t - c_m c_o P_t)^2 / sum_t sum_{m,o in C*} P_t^2,
// U = detected u truth, b = detected weights, c = truth indicator. Pairs are ordered
// (mirrors counted); the diagonal m == o is included only when include_diagonal.
// Evaluated in closed form over per-set moments, so E is exactly 0 for a perfect
// match and exactly 1 for an empty detection.
inline double mapping_distance(const DetectedProfile& det, const TruthProfile& truth, bool include_diagonal) {
    if (det.weights.size() != det.members.size())
        throw InvalidArgument("mapping_distance: one weight per detected member required");
    if (!det.members.empty() && det.rate.size() != truth.rate.size())
        throw InvalidArgument("mapping_distance: detected rate has " + std::to_string(det.rate.size()) +
                              " steps, truth has " + std::to_string(truth.rate.size()));

    const double nc = static_cast<double>(truth.members.size());
    double sum_b2 = 0.0, sum_b4 = 0.0, sum_bc = 0.0, sum_b2c = 0.0;
    for (std::size_t k = 0; k < det.members.size(); ++k) {
        const double b = det.weights[k];
        sum_b2 += b * b;
        sum_b4 += b * b * b * b;
        if (std::binary_search(truth.members.begin(), truth.members.end(), det.members[k])) {
            sum_bc += b;
            sum_b2c += b * b;
        }
    }
    double qbb = sum_b2 * sum_b2, qbc = sum_bc * sum_bc, qcc = nc * nc;
    if (!include_diagonal) {
        qbb -= sum_b4;
        qbc -= sum_b2c;
        qcc -= nc;
    }
    double num = 0.0, den = 0.0;
    for (std::size_t t = 0; t < truth.rate.size(); ++t) {
        const double P = truth.rate[t];
        const double L = det.members.empty() ? 0.0 : det.rate[t];
        num += L * (L * qbb - P * qbc) - P * (L * qbc - P * qcc);
        den += P * (P * qcc);
    }
    if (!(den > 0.0)) throw InvalidArgument("mapping_distance: truth has no positive planted expectation");
    return std::max(0.0, num) / den;
}

struct MappedPair {
    int detected = 0;            // index into the ranked list
    std::optional<int> truth;    // matched truth index or none
    double distance = 1.0;
};

struct ClusterMapping {
    std::vector<MappedPair> pairs; // in rank order
};

// Greedy mapping in rank order. A truth already claimed by a cluster from a
// different source counts as E = 1 for later clusters; min E >= 1 maps to none.
inline ClusterMapping map_clusters(std::span<const DetectedProfile> ranked, std::span<const TruthProfile> truths,
                                   bool include_diagonal) {
    ClusterMapping out;
    std::vector<std::optional<int>> claimed_by(truths.size());
    for (std::size_t d = 0; d < ranked.size(); ++d) {
        MappedPair pair;
        pair.detected = static_cast<int>(d);
        double best = std::numeric_limits<double>::infinity();
        int arg = -1;
        for (std::size_t n = 0; n < truths.size(); ++n) {
            double e = mapping_distance(ranked[d], truths[n], include_diagonal);
            if (claimed_by[n] && *claimed_by[n] != ranked[d].source) e = std::max(e, 1.0);
            if (e < best) {
                best = e;
                arg = static_cast<int>(n);
            }
        }
        if (arg >= 0 && best < 1.0) {
            pair.truth = arg;
            if (!claimed_by[arg]) claimed_by[arg] = ranked[d].source;
        }
        pair.distance = arg >= 0 ? best : 1.0;
        out.pairs.push_back(pair);
    }
    return out;
}

struct PrfTriple {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

inline int intersection_size(std::span<const int> a, std::span<const int> b) {
    int n = 0;
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (*i < *j)
            ++i;
        else if (*j < *i)
            ++j;
        else {
            ++n;
            ++i;
            ++j;
        }
    }
    return n;
}

inline PrfTriple member_prf(std::span<const int> detected, std::span<const int> truth) {
    const double inter = intersection_size(detected, truth);
    PrfTriple r;
    r.precision = detected.empty() ? 0.0 : inter / static_cast<double>(detected.size());
    r.recall = truth.empty() ? 0.0 : inter / static_cast<double>(truth.size());
    r.f1 = f1_score(r.precision, r.recall);
    return r;
}

// Pooled over matched pairs: sum of intersections over sums of sizes.
inline PrfTriple pooled_member_prf(const ClusterMapping& mapping, std::span<const DetectedProfile> ranked,
                                   std::span<const TruthProfile> truths) {
    double inter = 0.0, det = 0.0, tru = 0.0;
    for (const auto& p : mapping.pairs) {
        if (!p.truth) continue;
        const auto& d = ranked[p.detected].members;
        const auto& c = truths[*p.truth].members;
        inter += intersection_size(d, c);
        det += static_cast<double>(d.size());
        tru += static_cast<double>(c.size());
    }
    PrfTriple r;
    r.precision = det > 0.0 ? inter / det : 0.0;
    r.recall = tru > 0.0 ? inter / tru : 0.0;
    r.f1 = f1_score(r.precision, r.recall);
    return r;
}

struct ClusterPrf {
    double recall = 0.0;    // P / N
    double precision = 0.0; // P / M
    double f1 = 0.0;
    int matched_truths = 0; // P
    bool precision_undefined = false; // M == 0
};

inline ClusterPrf cluster_prf(const ClusterMapping& mapping, int truth_count, int retained_count) {
    if (truth_count < 1) throw InvalidArgument("cluster_prf: at least one truth cluster required");
    if (retained_count < 0) throw InvalidArgument("cluster_prf: retained count must be >= 0");
    std::vector<int> seen;
    for (const auto& p : mapping.pairs)
        if (p.truth) seen.push_back(*p.truth);
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    ClusterPrf r;
    r.matched_truths = static_cast<int>(seen.size());
    r.recall = r.matched_truths / static_cast<double>(truth_count);
    if (retained_count == 0) {
        r.precision_undefined = true;
        r.precision = 0.0;
    } else {
        r.precision = r.matched_truths / static_cast<double>(retained_count);
    }
    r.f1 = f1_score(r.precision, r.recall);
    return r;
}

struct PrPoint {
    int k = 0;
    double precision = 0.0;
    double recall = 0.0;
};

inline std::vector<PrPoint> pr_curve(const ClusterMapping& mapping, std::span<const DetectedProfile> ranked,
                                     std::span<const TruthProfile> truths) {
    double truth_total = 0.0;
    for (const auto& c : truths) truth_total += static_cast<double>(c.members.size());
    std::vector<PrPoint> out;
    double inter = 0.0, det = 0.0;
    for (std::size_t k = 0; k < mapping.pairs.size(); ++k) {
        const auto& p = mapping.pairs[k];
        const auto& d = ranked[p.detected].members;
        det += static_cast<double>(d.size());
        if (p.truth) inter += intersection_size(d, truths[*p.truth].members);
        out.push_back({static_cast<int>(k) + 1, det > 0.0 ? inter / det : 0.0,
                       truth_total > 0.0 ? inter / truth_total : 0.0});
    }
    return out;
}

// Per-step F1 with detected steps as positives; both sets sorted.
inline double lifetime_f1(std::span<const int> detected, std::span<const int> truth) {
    if (truth.empty()) return detected.empty() ? 1.0 : 0.0;
    const double tp = intersection_size(detected, truth);
    const double p = detected.empty() ? 0.0 : tp / static_cast<double>(detected.size());
    const double r = tp / static_cast<double>(truth.size());
    return f1_score(p, r);
}

// Coarse steps of width w back to the fine steps they cover (clipped at fine_horizon).
inline std::vector<int> expand_steps(std::span<const int> coarse, int w, int fine_horizon) {
    if (w < 1) throw InvalidArgument("expand_steps: granularity must be >= 1");
    std::vector<int> out;
    for (int t : coarse)
        for (int f = t * w; f < std::min((t + 1) * w, fine_horizon); ++f) out.push_back(f);
    return out;
}

// sqrt of sum X_ijk^2 over ordered i, j in the cluster and steps with t_k > 0.
inline double cluster_norm(std::span<const int> members, const DynTensor& x, std::span<const double> time_loading) {
    if (static_cast<int>(time_loading.size()) != x.horizon())
        throw InvalidArgument("cluster_norm: time loading length must equal the horizon");
    std::vector<char> in(x.node_count(), 0);
    for (int m : members) in.at(m) = 1;
    double s = 0.0;
    for (const auto& e : x.entries())
        if (time_loading[e.t] > 0.0 && in[e.i] && in[e.j]) s += e.multiplicity() * e.value * e.value;
    return std::sqrt(s);
}

struct MetricsReport {
    PrfTriple member;
    ClusterPrf cluster;
    std::vector<PrPoint> pr;
    std::vector<double> lifetime_f1; // per matched pair, in rank order
    double mean_lifetime_f1 = 0.0;
    int retained = 0;
    int truth_count = 0;
};

// Full report over the retained ranked list. detected_lifetimes (fine resolution,
// one per ranked entry) may be empty to skip lifetime scoring.
inline MetricsReport evaluate_mapping(std::span<const DetectedProfile> ranked, std::span<const TruthProfile> truths,
                                      std::span<const std::vector<int>> truth_lifetimes, bool include_diagonal,
                                      std::span<const std::vector<int>> detected_lifetimes = {}) {
    MetricsReport r;
    r.truth_count = static_cast<int>(truths.size());
    for (const auto& d : ranked)
        if (!d.members.empty()) ++r.retained;
    const auto mapping = map_clusters(ranked, truths, include_diagonal);
    r.member = pooled_member_prf(mapping, ranked, truths);
    if (!truths.empty()) r.cluster = cluster_prf(mapping, r.truth_count, r.retained);
    r.pr = pr_curve(mapping, ranked, truths);
    if (!detected_lifetimes.empty()) {
        if (detected_lifetimes.size() != ranked.size())
            throw InvalidArgument("evaluate_mapping: one detected lifetime per ranked cluster required");
        for (const auto& p : mapping.pairs)
            if (p.truth) r.lifetime_f1.push_back(lifetime_f1(detected_lifetimes[p.detected], truth_lifetimes[*p.truth]));
        if (!r.lifetime_f1.empty()) {
            double s = 0.0;
            for (double v : r.lifetime_f1) s += v;
            r.mean_lifetime_f1 = s / static_cast<double>(r.lifetime_f1.size());
        }
    }
    return r;
}

} // namespace temponet

#endif // TEMPONET_EVAL_HPP
