#ifndef TEMPONET_RUNNER_HPP
#define TEMPONET_RUNNER_HPP

// Configuration-driven runs: the single-network pipeline (writing one file per
// stage) and synthetic experiments over methods, granularities and ranks.

#include "temponet/baselines.hpp"
#include "temponet/error.hpp"
#include "temponet/eval.hpp"
#include "temponet/io.hpp"
#include "temponet/pipeline.hpp"
#include "temponet/random.hpp"
#include "temponet/synthgen.hpp"
#include "temponet/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

namespace temponet {

namespace fs = std::filesystem;
using io::json;

// ---- shared option parsing -----------------------------------------------

struct BaselineOptions {
    bool bc = false;
    bool ec = false;
    double bc_threshold = 0.5;
    double ec_beta = 0.5;
    int ec_k = 0;            // 0: planted K when known, else Silhouette per snapshot
    int ec_max_retained = 0; // 0: 2 * k
    double ec_jaccard = 1.0;
};

inline void tc_options_from_json(const json& j, TcOptions& o) {
    if (j.contains("cp")) {
        const auto& c = j["cp"];
        o.cp.max_iters = c.value("max_iters", o.cp.max_iters);
        o.cp.tol = c.value("tol", o.cp.tol);
        o.cp.n_starts = c.value("n_starts", o.cp.n_starts);
    }
    if (j.contains("cluster")) {
        const auto& c = j["cluster"];
        o.cluster.k_max = c.value("k_max", o.cluster.k_max);
        o.cluster.drop_factor = c.value("drop_factor", o.cluster.drop_factor);
        o.cluster.collapse_negative = c.value("collapse_negative", o.cluster.collapse_negative);
    }
    o.window = j.value("window", o.window);
    if (o.window < 1 || o.window % 2 == 0) throw InvalidArgument("config: window must be an odd positive integer");
}

inline void baseline_options_from_json(const json& j, BaselineOptions& b) {
    if (!j.contains("baselines")) return;
    const auto& c = j["baselines"];
    b.bc = c.value("bc", b.bc);
    b.ec = c.value("ec", b.ec);
    b.bc_threshold = c.value("bc_threshold", b.bc_threshold);
    b.ec_beta = c.value("ec_beta", b.ec_beta);
    b.ec_k = c.value("ec_k", b.ec_k);
    b.ec_max_retained = c.value("ec_max_retained", b.ec_max_retained);
    b.ec_jaccard = c.value("ec_jaccard", b.ec_jaccard);
}

inline SynthSpec preset_spec(const std::string& name, std::uint64_t seed) {
    if (name == "small") return small_preset(seed);
    if (name == "paper") return paper_preset(seed);
    throw InvalidArgument("unknown preset \"" + name + "\" (expected small or paper)");
}

inline int worker_count(int configured) {
    if (const char* env = std::getenv("TEMPONET_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1) throw InvalidArgument("TEMPONET_WORKERS must be a positive integer");
        return static_cast<int>(v);
    }
    if (configured > 0) return configured;
    return std::max(1u, std::thread::hardware_concurrency());
}

// Runs task(i) for i in [0, count) on up to `workers` threads.
template <class F>
void parallel_for(int count, int workers, F&& task) {
    workers = std::max(1, std::min(workers, count));
    if (workers == 1) {
        for (int i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next++; i < count; i = next++) task(i);
        });
    for (auto& t : pool) t.join();
}

// ---- single-network pipeline ---------------------------------------------

struct PipelineConfig {
    std::optional<fs::path> edges;      // edge-event CSV input
    std::optional<SynthSpec> synth;     // or a synthetic network
    int node_count = 0;                 // 0: inferred from edges
    int horizon = 0;                    // 0: inferred from edges
    bool self_loops = false;            // for edge input
    int granularity = 1;
    int rank = 0;                       // 0: rank_fraction * planted K (synthetic input only)
    double rank_fraction = 1.0;
    TcOptions tc;
    BaselineOptions baselines;
    fs::path out_dir = "out";
    std::uint64_t seed = 0;
};

inline PipelineConfig pipeline_config_from_json(const json& j, const fs::path& base_dir = {}) {
    PipelineConfig c;
    try {
        c.seed = j.value("seed", c.seed);
        if (j.contains("input")) {
            const auto& in = j["input"];
            if (in.contains("edges")) {
                fs::path p = in["edges"].get<std::string>();
                c.edges = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
                c.node_count = in.value("node_count", 0);
                c.horizon = in.value("horizon", 0);
                c.self_loops = in.value("self_loops", false);
            } else if (in.contains("synth") || in.contains("preset")) {
                SynthSpec base = in.contains("preset") ? preset_spec(in["preset"].get<std::string>(), c.seed)
                                                       : small_preset(c.seed);
                base.seed = c.seed;
                c.synth = in.contains("synth") ? io::spec_from_json(in["synth"], base) : base;
            } else {
                throw InvalidArgument("config: input needs \"edges\", \"synth\" or \"preset\"");
            }
        }
        c.granularity = j.value("granularity", c.granularity);
        c.rank = j.value("rank", c.rank);
        c.rank_fraction = j.value("rank_fraction", c.rank_fraction);
        if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
        tc_options_from_json(j, c.tc);
        baseline_options_from_json(j, c.baselines);
        c.tc.cp.seed = derive_seed(c.seed, "decompose");
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("config: ") + e.what());
    }
    return c;
}

struct PipelineReport {
    int rank = 0;
    int retained_clusters = 0;
    std::vector<fs::path> written;
    std::optional<MetricsReport> metrics;
};

namespace detail {

inline json lifetimes_json(const TcResult& r) {
    json arr = json::array();
    std::size_t li = 0;
    for (const auto& c : r.clusters) {
        if (c.filtered) continue;
        arr.push_back(io::lifetime_to_json(r.lifetimes[li++], &r.rates[c.model_index]));
    }
    return arr;
}

inline void write_status(const fs::path& dir, bool complete, const std::string& stage = {},
                         const std::string& error = {}) {
    json s = {{"complete", complete}};
    if (!complete) {
        s["stage"] = stage;
        s["error"] = error;
    }
    io::write_json(dir / "status.json", s);
}

} // namespace detail

inline PipelineReport run_pipeline(const PipelineConfig& cfg) {
    PipelineReport rep;
    const fs::path dir = cfg.out_dir;
    std::string stage = "ingest";
    auto write = [&](const std::string& name, const std::string& text) {
        io::write_text(dir / name, text);
        rep.written.push_back(dir / name);
    };
    try {
        fs::create_directories(dir);
        DynTensor fine;
        std::optional<GroundTruth> truth;
        if (cfg.edges) {
            const auto events = io::read_edge_csv(*cfg.edges);
            int n = cfg.node_count, horizon = cfg.horizon;
            if (n == 0)
                for (const auto& e : events) n = std::max({n, e.src + 1, e.dst + 1});
            if (horizon == 0)
                for (const auto& e : events) horizon = std::max(horizon, e.t + 1);
            fine = from_edge_events(events, n, horizon, cfg.self_loops);
        } else if (cfg.synth) {
            auto net = generate(*cfg.synth);
            fine = std::move(net.tensor);
            truth = std::move(net.truth);
            write("ground_truth.json", io::ground_truth_to_json(*truth).dump(2) + "\n");
        } else {
            throw InvalidArgument("no input configured");
        }

        stage = "aggregate";
        if (cfg.granularity < 1) throw InvalidArgument("granularity must be >= 1");
        const DynTensor x = aggregate_granularity(fine, cfg.granularity);

        int rank = cfg.rank;
        if (rank <= 0) {
            if (!truth) throw InvalidArgument("rank is required for edge-file input");
            rank = std::max(1, static_cast<int>(std::lround(cfg.rank_fraction * truth->clusters.size())));
        }
        rank = std::min(rank, std::max(1, std::min(x.node_count(), x.horizon())));
        rep.rank = rank;

        TcOptions tc = cfg.tc;
        tc.cp.mask_diagonal = !x.self_loops_allowed();
        stage = "decompose";
        const TcResult r = run_tc(x, rank, tc);

        stage = "write";
        write("models.json", io::model_to_json(r.model).dump(2) + "\n");
        write("clusters.json", io::clusters_to_json(r.clusters).dump(2) + "\n");
        write("lifetimes.json", detail::lifetimes_json(r).dump(2) + "\n");
        write("rates.csv", io::rates_csv(r.models, r.rates, r.threshold));
        for (const auto& c : r.clusters) rep.retained_clusters += !c.filtered;

        std::optional<TruthSet> ts;
        if (truth && !truth->clusters.empty()) ts = make_truth_set(*truth, cfg.granularity);
        if (ts && !x.is_zero()) {
            rep.metrics = evaluate_tc(r, *ts);
            write("metrics.json", io::metrics_to_json(*rep.metrics).dump(2) + "\n");
            write("pr_curve.csv", io::pr_csv(rep.metrics->pr));
        }

        if (cfg.baselines.bc && !x.is_zero()) {
            stage = "bc";
            json arr = json::array();
            for (const auto& c : bc_ranked_list(r.model, cfg.baselines.bc_threshold)) {
                auto j = io::cluster_to_json(c.record);
                j["method"] = "BC";
                j["component_norm"] = c.component_norm;
                j["part"] = c.part;
                arr.push_back(std::move(j));
            }
            write("clusters_bc.json", arr.dump(2) + "\n");
            if (ts) write("metrics_bc.json", io::metrics_to_json(evaluate_bc(r.model, cfg.baselines.bc_threshold, *ts)).dump(2) + "\n");
        }
        if (cfg.baselines.ec && x.horizon() > 0) {
            stage = "ec";
            EcConfig ec;
            ec.beta = cfg.baselines.ec_beta;
            ec.k = cfg.baselines.ec_k > 0 ? cfg.baselines.ec_k : (truth ? static_cast<int>(truth->clusters.size()) : 0);
            ec.k = std::min(ec.k, x.node_count());
            ec.seed = derive_seed(cfg.seed, "ec");
            EcUnifyOptions u;
            u.jaccard_threshold = cfg.baselines.ec_jaccard;
            u.max_retained = cfg.baselines.ec_max_retained > 0 ? cfg.baselines.ec_max_retained : 2 * std::max(ec.k, 1);
            const auto clusters = ec_to_clusters(ec_clustering(x, ec), u);
            json arr = json::array();
            json lives = json::array();
            for (std::size_t k = 0; k < clusters.size(); ++k) {
                ClusterRecord rec;
                rec.model_index = -1;
                rec.members = clusters[k].members;
                rec.rank_position = static_cast<int>(k) + 1;
                auto j = io::cluster_to_json(rec);
                j["method"] = "EC";
                arr.push_back(std::move(j));
                LifetimeSet life;
                life.model_index = -1;
                life.members = clusters[k].members;
                life.active_steps = clusters[k].lifetime;
                life.intervals = intervals_from_steps(life.active_steps);
                lives.push_back(io::lifetime_to_json(life, nullptr, "EC"));
            }
            write("clusters_ec.json", arr.dump(2) + "\n");
            write("lifetimes_ec.json", lives.dump(2) + "\n");
            if (ts) write("metrics_ec.json", io::metrics_to_json(evaluate_ec(clusters, x, *ts)).dump(2) + "\n");
        }
        detail::write_status(dir, true);
    } catch (const StageError& e) {
        detail::write_status(dir, false, e.stage(), e.what());
        throw;
    } catch (const std::exception& e) {
        detail::write_status(dir, false, stage, e.what());
        throw StageError(stage, e.what());
    }
    return rep;
}

// ---- experiments -----------------------------------------------------------

struct ExperimentConfig {
    SynthSpec spec = small_preset();
    bool paper_ranges = false; // validate every network spec against the full-scale ranges
    int networks = 4;
    std::vector<std::string> methods = {"TC", "BC", "EC"};
    std::vector<int> granularities = {1, 2, 4, 8, 16, 32, 64, 128};
    std::vector<double> rank_fractions = {1.0};
    TcOptions tc;
    BaselineOptions baselines;
    int workers = 0;
    std::uint64_t seed = 0;
};

inline ExperimentConfig experiment_config_from_json(const json& j) {
    ExperimentConfig c;
    try {
        c.seed = j.value("seed", c.seed);
        if (j.contains("preset")) {
            const auto name = j["preset"].get<std::string>();
            c.spec = preset_spec(name, c.seed);
            c.paper_ranges = name == "paper";
        }
        if (j.contains("synth")) c.spec = io::spec_from_json(j["synth"], c.spec);
        c.networks = j.value("networks", c.networks);
        if (j.contains("methods")) c.methods = j["methods"].get<std::vector<std::string>>();
        if (j.contains("granularities")) c.granularities = j["granularities"].get<std::vector<int>>();
        if (j.contains("rank_fractions")) c.rank_fractions = j["rank_fractions"].get<std::vector<double>>();
        c.workers = j.value("workers", c.workers);
        tc_options_from_json(j, c.tc);
        baseline_options_from_json(j, c.baselines);
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("experiment config: ") + e.what());
    }
    return c;
}

inline int density_bucket(double density) {
    // Small epsilon keeps decade boundaries such as 0.3 in their own bucket.
    return std::clamp(static_cast<int>(std::floor(density * 10.0 + 1e-9)), 0, 9);
}

inline std::string bucket_label(int b) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "[%.1f,%.1f)", b * 0.1, (b + 1) * 0.1);
    return buf;
}

struct ExperimentRow {
    int network = 0;
    std::uint64_t seed = 0;
    double density = 0.0;
    int bucket = 0;
    std::string method;
    int granularity = 1;
    double rank_fraction = 0.0; // 0 for EC (rank-free)
    int rank = 0;
    MetricsReport metrics;
};

struct ExperimentResult {
    std::vector<ExperimentRow> rows; // ordered by network, then method, granularity, rank fraction
    std::vector<std::string> failures;
};

inline std::uint64_t network_seed(std::uint64_t root, int index) {
    return derive_seed(root, "network", static_cast<std::uint64_t>(index));
}

// All rows for one network.
inline std::vector<ExperimentRow> run_network(const ExperimentConfig& cfg, int index) {
    SynthSpec spec = cfg.spec;
    spec.seed = network_seed(cfg.seed, index);
    if (cfg.paper_ranges) {
        const SynthSpec drawn = paper_preset(spec.seed);
        spec.node_count = drawn.node_count;
        spec.horizon = drawn.horizon;
        spec.validate_paper_ranges();
    }
    const auto net = generate(spec);
    const double density = network_density(net.truth);
    const int k = static_cast<int>(net.truth.clusters.size());
    auto has = [&](const char* m) { return std::find(cfg.methods.begin(), cfg.methods.end(), m) != cfg.methods.end(); };

    std::vector<ExperimentRow> rows;
    auto row = [&](const std::string& method, int w, double rf, int rank, MetricsReport m) {
        rows.push_back({index, spec.seed, density, density_bucket(density), method, w, rf, rank, std::move(m)});
    };
    if (k == 0) return rows;
    for (int w : cfg.granularities) {
        const DynTensor x = aggregate_granularity(net.tensor, w);
        const TruthSet truth = make_truth_set(net.truth, w);
        if (has("TC") || has("BC")) {
            for (double rf : cfg.rank_fractions) {
                const int rank = std::clamp(static_cast<int>(std::lround(rf * k)), 1, std::min(x.node_count(), x.horizon()));
                TcOptions tc = cfg.tc;
                tc.cp.mask_diagonal = !x.self_loops_allowed();
                tc.cp.seed = derive_seed(spec.seed, "decompose", static_cast<std::uint64_t>(w) * 1000003u + rank);
                const TcResult r = run_tc(x, rank, tc);
                if (has("TC")) row("TC", w, rf, rank, evaluate_tc(r, truth));
                if (has("BC")) row("BC", w, rf, rank, evaluate_bc(r.model, cfg.baselines.bc_threshold, truth));
            }
        }
        if (has("EC")) {
            EcConfig ec;
            ec.beta = cfg.baselines.ec_beta;
            ec.k = std::min(cfg.baselines.ec_k > 0 ? cfg.baselines.ec_k : k, x.node_count());
            ec.seed = derive_seed(spec.seed, "ec", static_cast<std::uint64_t>(w));
            EcUnifyOptions u;
            u.jaccard_threshold = cfg.baselines.ec_jaccard;
            u.max_retained = cfg.baselines.ec_max_retained > 0 ? cfg.baselines.ec_max_retained : 2 * ec.k;
            const auto clusters = ec_to_clusters(ec_clustering(x, ec), u);
            row("EC", w, 0.0, 0, evaluate_ec(clusters, x, truth));
        }
    }
    std::stable_sort(rows.begin(), rows.end(), [](const ExperimentRow& a, const ExperimentRow& b) {
        return std::tie(a.method, a.granularity, a.rank_fraction) < std::tie(b.method, b.granularity, b.rank_fraction);
    });
    return rows;
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    if (cfg.methods.empty()) throw InvalidArgument("experiment: method list is empty");
    for (const auto& m : cfg.methods)
        if (m != "TC" && m != "BC" && m != "EC") throw InvalidArgument("experiment: unknown method " + m);
    if (cfg.networks < 1) throw InvalidArgument("experiment: networks must be >= 1");
    if (cfg.granularities.empty()) throw InvalidArgument("experiment: granularity list is empty");
    for (int w : cfg.granularities)
        if (w < 1) throw InvalidArgument("experiment: granularities must be >= 1");
    for (double rf : cfg.rank_fractions)
        if (!(rf > 0.0)) throw InvalidArgument("experiment: rank fractions must be > 0");
    cfg.spec.validate();

    std::vector<std::vector<ExperimentRow>> per(cfg.networks);
    std::vector<std::string> errors(cfg.networks);
    parallel_for(cfg.networks, worker_count(cfg.workers), [&](int i) {
        try {
            per[i] = run_network(cfg, i);
        } catch (const std::exception& e) {
            errors[i] = "network " + std::to_string(i) + ": " + e.what();
        }
    });
    ExperimentResult out;
    for (int i = 0; i < cfg.networks; ++i) {
        for (auto& r : per[i]) out.rows.push_back(std::move(r));
        if (!errors[i].empty()) out.failures.push_back(errors[i]);
    }
    return out;
}

struct SummaryCell {
    int count = 0;
    double member_f1 = 0.0;
    double cluster_f1 = 0.0;
    double lifetime_f1 = 0.0;
};

// Mean metrics per (method, granularity, rank fraction, bucket); bucket -1 pools all.
inline std::map<std::tuple<std::string, int, double, int>, SummaryCell> summarize(const ExperimentResult& res) {
    std::map<std::tuple<std::string, int, double, int>, SummaryCell> cells;
    for (const auto& r : res.rows)
        for (int b : {-1, r.bucket}) {
            auto& c = cells[{r.method, r.granularity, r.rank_fraction, b}];
            ++c.count;
            c.member_f1 += r.metrics.member.f1;
            c.cluster_f1 += r.metrics.cluster.f1;
            c.lifetime_f1 += r.metrics.mean_lifetime_f1;
        }
    for (auto& [key, c] : cells) {
        c.member_f1 /= c.count;
        c.cluster_f1 /= c.count;
        c.lifetime_f1 /= c.count;
    }
    return cells;
}

inline std::vector<fs::path> write_experiment(const ExperimentResult& res, const fs::path& dir) {
    std::vector<fs::path> written;
    auto put = [&](const std::string& name, const std::string& text) {
        io::write_text(dir / name, text);
        written.push_back(dir / name);
    };
    json rows = json::array();
    for (const auto& r : res.rows)
        rows.push_back({{"network", r.network},
                        {"seed", r.seed},
                        {"density", r.density},
                        {"density_bucket", bucket_label(r.bucket)},
                        {"method", r.method},
                        {"granularity", r.granularity},
                        {"rank_fraction", r.rank_fraction},
                        {"rank", r.rank},
                        {"metrics", io::metrics_to_json(r.metrics)}});
    const auto cells = summarize(res);
    json summary = json::array();
    std::string f1_csv = "method,rank_fraction,granularity,density_bucket,networks,member_f1,cluster_f1\n";
    std::string life_csv = "method,rank_fraction,granularity,density_bucket,networks,lifetime_f1\n";
    for (const auto& [key, c] : cells) {
        const auto& [method, w, rf, b] = key;
        const std::string label = b < 0 ? "all" : bucket_label(b);
        summary.push_back({{"method", method},
                           {"granularity", w},
                           {"rank_fraction", rf},
                           {"density_bucket", label},
                           {"networks", c.count},
                           {"member_f1", c.member_f1},
                           {"cluster_f1", c.cluster_f1},
                           {"lifetime_f1", c.lifetime_f1}});
        const std::string prefix = method + "," + io::format_double(rf) + "," + std::to_string(w) + "," + label + "," +
                                   std::to_string(c.count) + ",";
        f1_csv += prefix + io::format_double(c.member_f1) + "," + io::format_double(c.cluster_f1) + "\n";
        life_csv += prefix + io::format_double(c.lifetime_f1) + "\n";
    }
    std::string pr_csv = "method,rank_fraction,granularity,network,k,precision,recall\n";
    for (const auto& r : res.rows)
        for (const auto& p : r.metrics.pr)
            pr_csv += r.method + "," + io::format_double(r.rank_fraction) + "," + std::to_string(r.granularity) + "," +
                      std::to_string(r.network) + "," + std::to_string(p.k) + "," + io::format_double(p.precision) +
                      "," + io::format_double(p.recall) + "\n";
    json report = {{"rows", std::move(rows)},
                   {"summary", std::move(summary)},
                   {"failures", res.failures},
                   {"failure_count", res.failures.size()}};
    put("metrics.json", report.dump(2) + "\n");
    put("f1_vs_granularity.csv", f1_csv);
    put("pr_curves.csv", pr_csv);
    put("lifetime_f1.csv", life_csv);
    return written;
}

} // namespace temponet

#endif // TEMPONET_RUNNER_HPP
