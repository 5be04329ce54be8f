#ifndef TEMPONET_SYNTHGEN_HPP
#define TEMPONET_SYNTHGEN_HPP

// Synthetic dynamic networks with planted (optionally overlapping) clusters.
//
// Each cluster carries a rate program: a set of lifetime pieces with constant or
// linear rates, optionally gated by a square wave (periodic lifetime). Every
// unordered member pair receives Poisson(rate(t)) edges per step; every node
// pair additionally receives Poisson(e) background edges.

#include "temponet/error.hpp"
#include "temponet/random.hpp"
#include "temponet/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace temponet {

struct RatePiece {
    enum class Kind { Constant, Linear };
    int start = 0; // inclusive
    int end = 0;   // inclusive
    Kind kind = Kind::Constant;
    double v0 = 0.0;
    double v1 = 0.0; // end value for Linear

    double at(int t) const {
        if (kind == Kind::Constant || end == start) return v0;
        return v0 + (v1 - v0) * static_cast<double>(t - start) / static_cast<double>(end - start);
    }
};

struct GroundTruthCluster {
    std::vector<int> members; // sorted
    std::vector<RatePiece> pieces; // sorted, disjoint
    std::optional<int> period;
    int phase = 0;
    int on_length = 0; // active steps per period when periodic
    std::vector<int> true_lifetime; // steps with positive planted rate

    // Planted per-pair rate at t (0 outside the lifetime).
    double rate(int t) const {
        if (period) {
            const int p = *period;
            const int pos = ((t - phase) % p + p) % p;
            if (pos >= on_length) return 0.0;
        }
        for (const auto& piece : pieces)
            if (t >= piece.start && t <= piece.end) return piece.at(t);
        return 0.0;
    }

    void refresh_lifetime(int horizon) {
        true_lifetime.clear();
        for (int t = 0; t < horizon; ++t)
            if (rate(t) > 0.0) true_lifetime.push_back(t);
    }
};

struct SynthSpec {
    int node_count = 100;
    int horizon = 1000;
    int cluster_count_min = 10;
    int cluster_count_max = 10;
    int cluster_size_min = 8;
    int cluster_size_max = 20;
    bool overlap_allowed = true;
    double overlap_fraction = 0.25; // share of clusters that borrow members
    double overlap_share = 0.5;     // at most this share of a borrowing cluster's members
    double periodic_fraction = 0.2;
    int period_min = 20;
    int period_max = 0;             // 0 means horizon / 2
    double duty_cycle = 0.5;
    double rate_min = 0.0015;
    double rate_max = 1.0;
    // When set, rates are drawn from [density_min / 2, density_max / 2] so the
    // lifetime-average cluster density lands in [density_min, density_max].
    std::optional<double> density_min;
    std::optional<double> density_max;
    double noise_max = 0.01;
    std::optional<double> noise_rate; // forces e instead of sampling [0, noise_max]
    double min_lifetime_fraction = 0.3;
    int pieces_min = 2;
    int pieces_max = 8;
    bool self_loops = false;
    std::uint64_t seed = 0;

    int effective_period_max() const { return period_max > 0 ? period_max : horizon / 2; }

    double effective_rate_min() const { return density_min ? *density_min / 2.0 : rate_min; }
    double effective_rate_max() const { return density_max ? *density_max / 2.0 : rate_max; }

    // Internal consistency; throws InvalidArgument naming the offending field.
    void validate() const {
        auto fail = [](const std::string& m) { throw InvalidArgument("synth spec: " + m); };
        if (node_count < 1) fail("node_count must be >= 1");
        if (horizon < 1) fail("horizon must be >= 1");
        if (cluster_count_min < 0 || cluster_count_max < cluster_count_min) fail("cluster_count range is empty");
        if (cluster_count_max > 0) {
            if (cluster_size_min < 1 || cluster_size_max < cluster_size_min) fail("cluster_size range is empty");
            if (cluster_size_max > node_count) fail("cluster_size_max exceeds node_count");
            if (!overlap_allowed && static_cast<long>(cluster_count_max) * cluster_size_min > node_count)
                fail("disjoint clusters cannot fit: cluster_count_max * cluster_size_min > node_count");
        }
        if (overlap_fraction < 0.0 || overlap_fraction > 1.0) fail("overlap_fraction must be in [0, 1]");
        if (overlap_share < 0.0 || overlap_share > 1.0) fail("overlap_share must be in [0, 1]");
        if (periodic_fraction < 0.0 || periodic_fraction > 1.0) fail("periodic_fraction must be in [0, 1]");
        if (periodic_fraction > 0.0) {
            if (period_min < 2) fail("period_min must be >= 2");
            if (effective_period_max() < period_min) fail("period range is empty");
        }
        if (!(duty_cycle > 0.0 && duty_cycle < 1.0)) fail("duty_cycle must be in (0, 1)");
        if (density_min.has_value() != density_max.has_value()) fail("density_min and density_max go together");
        const double lo = effective_rate_min(), hi = effective_rate_max();
        if (!(lo > 0.0) || !(hi >= lo)) fail("rate range must satisfy 0 < min <= max");
        if (!(noise_max >= 0.0)) fail("noise_max must be >= 0");
        if (noise_rate && !(*noise_rate >= 0.0)) fail("noise_rate must be >= 0");
        if (!(min_lifetime_fraction >= 0.0 && min_lifetime_fraction <= 1.0))
            fail("min_lifetime_fraction must be in [0, 1]");
        if (pieces_min < 1 || pieces_max < pieces_min) fail("pieces range is empty");
    }

    // Stricter check for the full-scale protocol ranges.
    void validate_paper_ranges() const {
        validate();
        auto fail = [](const std::string& m) { throw InvalidArgument("synth spec (paper ranges): " + m); };
        if (node_count < 100 || node_count > 500) fail("node_count must be in [100, 500]");
        if (horizon < 1000 || horizon > 4000) fail("horizon must be in [1000, 4000]");
        if (cluster_count_min < 10 || cluster_count_max > 40) fail("cluster_count must be within [10, 40]");
        if (cluster_size_min < 8 || cluster_size_max > 80) fail("cluster_size must be within [8, 80]");
        if (effective_rate_min() < 0.0015 || effective_rate_max() > 1.0) fail("rates must be within [0.0015, 1]");
        if (noise_max > 0.01) fail("noise_max must be <= 0.01");
        if (period_min < 20 || effective_period_max() > horizon / 2) fail("periods must be within [20, T/2]");
    }
};

// |V| = 100, T = 1000, K = 10; suitable for tests and quick experiments.
inline SynthSpec small_preset(std::uint64_t seed = 0) {
    SynthSpec s;
    s.seed = seed;
    return s;
}

// Full-scale ranges; network size and horizon are drawn from the seed.
inline SynthSpec paper_preset(std::uint64_t seed = 0) {
    Rng rng(derive_seed(seed, "paper-preset"));
    SynthSpec s;
    s.seed = seed;
    s.node_count = static_cast<int>(uniform_int(rng, 100, 500));
    s.horizon = static_cast<int>(uniform_int(rng, 1000, 4000));
    s.cluster_count_min = 10;
    s.cluster_count_max = 40;
    s.cluster_size_min = 8;
    s.cluster_size_max = 80;
    s.overlap_allowed = true;
    return s;
}

struct GroundTruth {
    std::vector<GroundTruthCluster> clusters;
    double noise_rate = 0.0;
    std::uint64_t seed = 0;
    int node_count = 0;
    int horizon = 0;
    bool self_loops = false;
    SynthSpec spec;
};

struct SynthNetwork {
    DynTensor tensor;
    GroundTruth truth;
};

// d_k(t) = 2 sum_{i,j in C} a_i a_j rate(t) / |C|^2 with unit memberships, i.e. 2 rate(t).
inline double density_of_cluster(const GroundTruthCluster& gt, int t) {
    if (gt.members.empty()) return 0.0;
    return 2.0 * gt.rate(t);
}

// Mean of d_k(t) over the cluster's true lifetime (0 when it never lives).
inline double average_density(const GroundTruthCluster& gt) {
    if (gt.true_lifetime.empty()) return 0.0;
    double s = 0.0;
    for (int t : gt.true_lifetime) s += density_of_cluster(gt, t);
    return s / static_cast<double>(gt.true_lifetime.size());
}

inline double network_density(const GroundTruth& truth) {
    if (truth.clusters.empty()) return 0.0;
    double s = 0.0;
    for (const auto& c : truth.clusters) s += average_density(c);
    return s / static_cast<double>(truth.clusters.size());
}

// Samples Poisson edges for fully specified clusters plus background noise.
inline DynTensor plant_edges(int node_count, int horizon, bool self_loops, const std::vector<GroundTruthCluster>& clusters,
                             double noise_rate, std::uint64_t seed) {
    if (node_count < 0 || horizon < 0) throw InvalidArgument("plant_edges: negative size");
    if (!(noise_rate >= 0.0)) throw InvalidArgument("plant_edges: noise_rate must be >= 0");
    std::vector<TensorEntry> cells;

    for (std::size_t k = 0; k < clusters.size(); ++k) {
        const auto& c = clusters[k];
        for (int m : c.members)
            if (m < 0 || m >= node_count) throw InvalidArgument("plant_edges: member id out of range");
        Rng rng(derive_seed(seed, "cluster-edges", k));
        for (int t = 0; t < horizon; ++t) {
            const double r = c.rate(t);
            if (r <= 0.0) continue;
            for (std::size_t a = 0; a < c.members.size(); ++a)
                for (std::size_t b = self_loops ? a : a + 1; b < c.members.size(); ++b) {
                    const auto n = poisson_small(rng, r);
                    if (n > 0) cells.push_back({c.members[a], c.members[b], t, static_cast<double>(n)});
                }
        }
    }

    if (noise_rate > 0.0 && node_count > 0 && horizon > 0) {
        // Skip directly between nonzero cells of the (pair, t) grid.
        Rng rng(derive_seed(seed, "background"));
        const std::uint64_t pairs = self_loops ? static_cast<std::uint64_t>(node_count) * (node_count + 1) / 2
                                               : static_cast<std::uint64_t>(node_count) * (node_count - 1) / 2;
        const std::uint64_t cells_total = pairs * static_cast<std::uint64_t>(horizon);
        const double p_nonzero = -std::expm1(-noise_rate);
        std::vector<std::pair<int, int>> pair_of;
        pair_of.reserve(pairs);
        for (int i = 0; i < node_count; ++i)
            for (int j = self_loops ? i : i + 1; j < node_count; ++j) pair_of.push_back({i, j});
        std::uint64_t pos = 0;
        while (true) {
            const std::uint64_t skip = geometric_skip(rng, p_nonzero);
            if (skip >= cells_total - pos) break;
            pos += skip;
            const auto t = static_cast<int>(pos / pairs);
            const auto& [i, j] = pair_of[pos % pairs];
            cells.push_back({i, j, t, static_cast<double>(poisson_positive(rng, noise_rate))});
            if (++pos >= cells_total) break;
        }
    }
    return DynTensor::from_cells(node_count, horizon, self_loops, std::move(cells));
}

namespace detail {

inline RatePiece random_piece(Rng& rng, int start, int end, double lo, double hi) {
    RatePiece p;
    p.start = start;
    p.end = end;
    if (bernoulli(rng, 0.5)) {
        p.kind = RatePiece::Kind::Constant;
        p.v0 = p.v1 = uniform_real(rng, lo, hi);
    } else {
        p.kind = RatePiece::Kind::Linear;
        p.v0 = uniform_real(rng, lo, hi);
        p.v1 = uniform_real(rng, lo, hi);
    }
    return p;
}

inline std::vector<int> sample_without_replacement(Rng& rng, std::vector<int> pool, int count) {
    count = std::min<int>(count, static_cast<int>(pool.size()));
    for (int k = 0; k < count; ++k) {
        const auto pick = uniform_int(rng, k, static_cast<std::int64_t>(pool.size()) - 1);
        std::swap(pool[k], pool[pick]);
    }
    pool.resize(count);
    return pool;
}

inline std::vector<std::vector<int>> sample_memberships(const SynthSpec& spec, Rng& rng, int k) {
    std::vector<std::vector<int>> out;
    std::vector<char> used(spec.node_count, 0);
    for (int c = 0; c < k; ++c) {
        int size_hi = spec.cluster_size_max;
        if (!spec.overlap_allowed) {
            const int free = static_cast<int>(std::count(used.begin(), used.end(), 0));
            size_hi = std::min(size_hi, free - (k - c - 1) * spec.cluster_size_min);
        }
        const int size = static_cast<int>(uniform_int(rng, spec.cluster_size_min, std::max(spec.cluster_size_min, size_hi)));

        std::vector<int> members;
        if (spec.overlap_allowed && c > 0 && bernoulli(rng, spec.overlap_fraction)) {
            const int max_shared = static_cast<int>(std::floor(spec.overlap_share * size));
            if (max_shared >= 1) {
                std::vector<int> pool;
                for (int i = 0; i < spec.node_count; ++i)
                    if (used[i]) pool.push_back(i);
                const int shared = static_cast<int>(uniform_int(rng, 1, max_shared));
                members = sample_without_replacement(rng, pool, shared);
            }
        }
        std::vector<char> in(spec.node_count, 0);
        for (int m : members) in[m] = 1;
        std::vector<int> fresh, any;
        for (int i = 0; i < spec.node_count; ++i) {
            if (in[i]) continue;
            (used[i] ? any : fresh).push_back(i);
        }
        const int need = size - static_cast<int>(members.size());
        auto picked = sample_without_replacement(rng, fresh, need);
        if (static_cast<int>(picked.size()) < need) {
            if (!spec.overlap_allowed) throw InvalidArgument("synth spec: not enough free nodes for disjoint clusters");
            auto extra = sample_without_replacement(rng, any, need - static_cast<int>(picked.size()));
            picked.insert(picked.end(), extra.begin(), extra.end());
        }
        members.insert(members.end(), picked.begin(), picked.end());
        std::sort(members.begin(), members.end());
        for (int m : members) used[m] = 1;
        out.push_back(std::move(members));
    }
    return out;
}

inline void sample_lifetime(const SynthSpec& spec, Rng& rng, GroundTruthCluster& gt) {
    const int T = spec.horizon;
    const double lo = spec.effective_rate_min(), hi = spec.effective_rate_max();
    const int floor_steps = static_cast<int>(std::ceil(spec.min_lifetime_fraction * T));

    if (spec.periodic_fraction > 0.0 && bernoulli(rng, spec.periodic_fraction) &&
        spec.effective_period_max() >= spec.period_min) {
        const int p = static_cast<int>(uniform_int(rng, spec.period_min, spec.effective_period_max()));
        gt.period = p;
        gt.on_length = std::clamp(static_cast<int>(std::lround(spec.duty_cycle * p)), 1, p - 1);
        gt.pieces = {random_piece(rng, 0, T - 1, lo, hi)};
        for (int attempt = 0; attempt < 100; ++attempt) {
            gt.phase = static_cast<int>(uniform_int(rng, 0, p - 1));
            gt.refresh_lifetime(T);
            if (static_cast<int>(gt.true_lifetime.size()) >= floor_steps) return;
        }
        throw InvalidArgument("synth spec: periodic lifetime cannot reach the minimum lifetime length");
    }

    const int pieces = std::min<int>(T, static_cast<int>(uniform_int(rng, spec.pieces_min, spec.pieces_max)));
    std::vector<int> cuts;
    {
        std::vector<int> pool(std::max(0, T - 1));
        std::iota(pool.begin(), pool.end(), 1);
        cuts = sample_without_replacement(rng, pool, pieces - 1);
        std::sort(cuts.begin(), cuts.end());
    }
    std::vector<std::pair<int, int>> ranges;
    int s = 0;
    for (int c : cuts) {
        ranges.push_back({s, c - 1});
        s = c;
    }
    ranges.push_back({s, T - 1});

    std::vector<int> order(ranges.size());
    std::iota(order.begin(), order.end(), 0);
    order = sample_without_replacement(rng, order, static_cast<int>(order.size())); // shuffle
    std::vector<char> chosen(ranges.size(), 0);
    int total = 0;
    for (int r : order)
        if (bernoulli(rng, 0.5)) {
            chosen[r] = 1;
            total += ranges[r].second - ranges[r].first + 1;
        }
    for (int r : order) {
        if (total >= floor_steps) break;
        if (!chosen[r]) {
            chosen[r] = 1;
            total += ranges[r].second - ranges[r].first + 1;
        }
    }
    gt.pieces.clear();
    for (std::size_t r = 0; r < ranges.size(); ++r)
        if (chosen[r]) gt.pieces.push_back(random_piece(rng, ranges[r].first, ranges[r].second, lo, hi));
    gt.refresh_lifetime(T);
}

} // namespace detail

inline SynthNetwork generate(const SynthSpec& spec) {
    spec.validate();
    Rng rng(derive_seed(spec.seed, "synth-structure"));
    const int k = static_cast<int>(uniform_int(rng, spec.cluster_count_min, spec.cluster_count_max));
    auto members = detail::sample_memberships(spec, rng, k);

    GroundTruth truth;
    truth.seed = spec.seed;
    truth.node_count = spec.node_count;
    truth.horizon = spec.horizon;
    truth.self_loops = spec.self_loops;
    truth.spec = spec;
    for (int c = 0; c < k; ++c) {
        GroundTruthCluster gt;
        gt.members = std::move(members[c]);
        detail::sample_lifetime(spec, rng, gt);
        truth.clusters.push_back(std::move(gt));
    }
    truth.noise_rate = spec.noise_rate ? *spec.noise_rate : uniform_real(rng, 0.0, spec.noise_max);

    SynthNetwork net;
    net.tensor = plant_edges(spec.node_count, spec.horizon, spec.self_loops, truth.clusters, truth.noise_rate,
                             derive_seed(spec.seed, "synth-edges"));
    net.truth = std::move(truth);
    return net;
}

// Ground truth for explicitly planted clusters (fixtures); lifetimes are refreshed.
inline SynthNetwork plant(int node_count, int horizon, std::vector<GroundTruthCluster> clusters, double noise_rate,
                          std::uint64_t seed, bool self_loops = false) {
    SynthNetwork net;
    for (auto& c : clusters) {
        std::sort(c.members.begin(), c.members.end());
        c.refresh_lifetime(horizon);
    }
    net.tensor = plant_edges(node_count, horizon, self_loops, clusters, noise_rate, derive_seed(seed, "synth-edges"));
    net.truth.clusters = std::move(clusters);
    net.truth.noise_rate = noise_rate;
    net.truth.seed = seed;
    net.truth.node_count = node_count;
    net.truth.horizon = horizon;
    net.truth.self_loops = self_loops;
    net.truth.spec.node_count = node_count;
    net.truth.spec.horizon = horizon;
    net.truth.spec.seed = seed;
    net.truth.spec.self_loops = self_loops;
    return net;
}

} // namespace temponet

#endif // TEMPONET_SYNTHGEN_HPP
