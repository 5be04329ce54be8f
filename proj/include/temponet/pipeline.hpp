#ifndef TEMPONET_PIPELINE_HPP
#define TEMPONET_PIPELINE_HPP

// End-to-end TC run: decompose -> normalize -> cluster -> rank/filter ->
// segment rates -> lifetimes, plus the per-method evaluation glue used by
// experiments.

#include "temponet/baselines.hpp"
#include "temponet/clustering.hpp"
#include "temponet/cp_decomp.hpp"
#include "temponet/error.hpp"
#include "temponet/eval.hpp"
#include "temponet/lifetime.hpp"
#include "temponet/synthgen.hpp"
#include "temponet/tensor.hpp"

#include <span>
#include <string>
#include <vector>

namespace temponet {

struct TcOptions {
    CpOptions cp = [] {
        CpOptions o;
        o.n_starts = 3;
        return o;
    }();
    ClusterOptions cluster;
    int window = 3;
};

struct TcResult {
    CpModel model;
    std::vector<GenerativeModel> models;
    std::vector<ClusterRecord> clusters; // ranked, filtered ones included and flagged
    std::vector<PiecewiseRate> rates;    // one per generative model
    std::vector<double> threshold;       // network-average rate per step
    std::vector<LifetimeSet> lifetimes;  // one per retained cluster, in rank order
};

template <class F>
auto run_stage(const char* stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(stage, e.what());
    }
}

inline TcResult run_tc(const DynTensor& x, int rank, const TcOptions& opts) {
    TcResult r;
    if (x.is_zero()) {
        r.threshold.assign(x.horizon(), 0.0);
        return r;
    }
    r.model = run_stage("decompose", [&] { return cp_als(x, rank, opts.cp); });
    r.models = run_stage("normalize", [&] { return normalize_components(r.model); });
    r.clusters = run_stage("cluster", [&] { return cluster_models(r.models, opts.cluster); });
    run_stage("segment", [&] {
        for (const auto& gm : r.models) r.rates.push_back(fit_rate(gm, opts.window));
        return 0;
    });
    run_stage("lifetimes", [&] {
        r.threshold = network_threshold(x, opts.window);
        for (const auto& c : r.clusters)
            if (!c.filtered)
                r.lifetimes.push_back(detect_lifetime(c, r.models[c.model_index], r.rates[c.model_index], r.threshold));
        return 0;
    });
    return r;
}

// Ground-truth side of an evaluation at granularity w.
struct TruthSet {
    std::vector<TruthProfile> profiles;
    std::vector<std::vector<int>> lifetimes; // fine resolution
    bool include_diagonal = false;
    int fine_horizon = 0;
    int granularity = 1;
};

inline TruthSet make_truth_set(const GroundTruth& truth, int w) {
    TruthSet s;
    s.include_diagonal = truth.self_loops;
    s.fine_horizon = truth.horizon;
    s.granularity = w;
    for (const auto& c : truth.clusters) {
        s.profiles.push_back(truth_profile(c, truth.horizon, w));
        s.lifetimes.push_back(c.true_lifetime);
    }
    return s;
}

inline MetricsReport evaluate_tc(const TcResult& r, const TruthSet& truth) {
    std::vector<DetectedProfile> det;
    std::vector<std::vector<int>> lives;
    std::size_t life_idx = 0;
    for (const auto& c : r.clusters) {
        if (c.filtered) continue;
        det.push_back(model_profile(c.members, r.models[c.model_index], &r.rates[c.model_index]));
        lives.push_back(expand_steps(r.lifetimes[life_idx++].active_steps, truth.granularity, truth.fine_horizon));
    }
    return evaluate_mapping(det, truth.profiles, truth.lifetimes, truth.include_diagonal, lives);
}

inline MetricsReport evaluate_bc(const CpModel& model, double threshold, const TruthSet& truth) {
    const auto models = normalize_components(model);
    std::vector<DetectedProfile> det;
    for (const auto& c : bc_ranked_list(model, threshold))
        det.push_back(model_profile(c.record.members, models[c.record.model_index]));
    return evaluate_mapping(det, truth.profiles, truth.lifetimes, truth.include_diagonal);
}

inline MetricsReport evaluate_ec(const std::vector<EcCluster>& clusters, const DynTensor& x, const TruthSet& truth) {
    std::vector<DetectedProfile> det;
    std::vector<std::vector<int>> lives;
    for (std::size_t k = 0; k < clusters.size(); ++k) {
        det.push_back(ec_profile(clusters[k], x, static_cast<int>(k)));
        lives.push_back(expand_steps(clusters[k].lifetime, truth.granularity, truth.fine_horizon));
    }
    return evaluate_mapping(det, truth.profiles, truth.lifetimes, truth.include_diagonal, lives);
}

} // namespace temponet

#endif // TEMPONET_PIPELINE_HPP
