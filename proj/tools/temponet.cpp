// temponet command-line driver.
//
//   temponet synth      --preset small --seed 7 --out-dir net/
//   temponet decompose  --input net/edges.csv --rank 10 --out-dir run/
//   temponet cluster    --models run/models.json --out-dir run/
//   temponet lifetimes  --input net/edges.csv --models run/models.json --clusters run/clusters.json --out-dir run/
//   temponet evaluate   --truth net/ground_truth.json --models run/models.json --clusters run/clusters.json
//                       --lifetimes run/lifetimes.json --out-dir run/
//   temponet pipeline   --config pipeline.json
//   temponet experiment --config experiment.json

#include "temponet/temponet.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace temponet;
using io::json;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "out";
    std::optional<int> rank;
    int granularity = 1;
    std::string preset;
};

void add_common(CLI::App* app, Common& c, bool with_rank = true) {
    app->add_option("--config", c.config, "JSON configuration file")->check(CLI::ExistingFile);
    app->add_option("--seed", c.seed, "root random seed");
    app->add_option("--out-dir", c.out_dir, "output directory");
    if (with_rank) app->add_option("--rank", c.rank, "CP rank R")->check(CLI::PositiveNumber);
    app->add_option("--granularity", c.granularity, "aggregation width w")->check(CLI::PositiveNumber);
    app->add_option("--preset", c.preset, "synthetic preset: small or paper");
}

json load_config(const Common& c) { return c.config.empty() ? json::object() : io::read_json(c.config); }

// Edge CSV or tensor JSON, aggregated to the requested granularity.
DynTensor load_tensor(const std::string& path, int nodes, int horizon, bool self_loops, int w) {
    DynTensor x;
    if (fs::path(path).extension() == ".json") {
        x = io::tensor_from_json(io::read_json(path));
    } else {
        const auto events = io::read_edge_csv(path);
        for (const auto& e : events) {
            if (nodes <= 0 || e.src >= nodes || e.dst >= nodes) nodes = std::max({nodes, e.src + 1, e.dst + 1});
            horizon = std::max(horizon, e.t + 1);
        }
        x = from_edge_events(events, std::max(nodes, 0), std::max(horizon, 0), self_loops);
    }
    return w > 1 ? aggregate_granularity(x, w) : x;
}

void report(const fs::path& p) { std::cout << "wrote " << p.string() << "\n"; }

std::vector<GenerativeModel> load_models(const std::string& path) {
    return normalize_components(io::model_from_json(io::read_json(path)));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Temporal cluster detection in dynamic networks via non-negative tensor decomposition"};
    app.require_subcommand(1);

    // synth
    Common synth_c;
    auto* synth = app.add_subcommand("synth", "generate a synthetic network with planted clusters");
    add_common(synth, synth_c, false);

    // decompose
    Common dec_c;
    std::string dec_input;
    int dec_nodes = 0, dec_horizon = 0;
    bool dec_loops = false;
    auto* dec = app.add_subcommand("decompose", "fit a non-negative symmetric CP model");
    add_common(dec, dec_c);
    dec->add_option("--input", dec_input, "edge CSV or tensor JSON")->required()->check(CLI::ExistingFile);
    dec->add_option("--nodes", dec_nodes, "node count (edge CSV; default max id + 1)");
    dec->add_option("--horizon", dec_horizon, "horizon (edge CSV; default max t + 1)");
    dec->add_flag("--self-loops", dec_loops, "allow self-loops");

    // cluster
    Common cl_c;
    std::string cl_models;
    auto* cl = app.add_subcommand("cluster", "cluster generative models and rank clusters");
    add_common(cl, cl_c, false);
    cl->add_option("--models", cl_models, "models.json")->required()->check(CLI::ExistingFile);

    // lifetimes
    Common lt_c;
    std::string lt_input, lt_models, lt_clusters;
    int lt_nodes = 0, lt_horizon = 0;
    bool lt_loops = false;
    auto* lt = app.add_subcommand("lifetimes", "segment rates and detect cluster lifetimes");
    add_common(lt, lt_c, false);
    lt->add_option("--input", lt_input, "edge CSV or tensor JSON")->required()->check(CLI::ExistingFile);
    lt->add_option("--models", lt_models, "models.json")->required()->check(CLI::ExistingFile);
    lt->add_option("--clusters", lt_clusters, "clusters.json")->required()->check(CLI::ExistingFile);
    lt->add_option("--nodes", lt_nodes, "node count (edge CSV)");
    lt->add_option("--horizon", lt_horizon, "horizon (edge CSV)");
    lt->add_flag("--self-loops", lt_loops, "allow self-loops");

    // evaluate
    Common ev_c;
    std::string ev_truth, ev_models, ev_clusters, ev_lifetimes;
    auto* ev = app.add_subcommand("evaluate", "score clusters against planted ground truth");
    add_common(ev, ev_c, false);
    ev->add_option("--truth", ev_truth, "ground_truth.json")->required()->check(CLI::ExistingFile);
    ev->add_option("--models", ev_models, "models.json")->required()->check(CLI::ExistingFile);
    ev->add_option("--clusters", ev_clusters, "clusters.json")->required()->check(CLI::ExistingFile);
    ev->add_option("--lifetimes", ev_lifetimes, "lifetimes.json")->required()->check(CLI::ExistingFile);

    // pipeline
    Common pl_c;
    auto* pl = app.add_subcommand("pipeline", "run the full pipeline on one network");
    add_common(pl, pl_c);

    // experiment
    Common ex_c;
    auto* ex = app.add_subcommand("experiment", "synthetic batch over methods, granularities and ranks");
    add_common(ex, ex_c, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            const json cfg = load_config(synth_c);
            const std::uint64_t seed = synth_c.seed.value_or(cfg.value("seed", std::uint64_t{0}));
            const std::string preset = !synth_c.preset.empty() ? synth_c.preset : cfg.value("preset", std::string("small"));
            SynthSpec spec = preset_spec(preset, seed);
            spec = io::spec_from_json(cfg.value("synth", json::object()), spec);
            spec.seed = seed;
            if (preset == "paper")
                spec.validate_paper_ranges();
            const auto net = generate(spec);
            const fs::path dir = synth_c.out_dir;
            io::write_text(dir / "edges.csv", io::edges_to_csv(net.tensor));
            report(dir / "edges.csv");
            const DynTensor x = synth_c.granularity > 1 ? aggregate_granularity(net.tensor, synth_c.granularity) : net.tensor;
            io::write_json(dir / "tensor.json", io::tensor_to_json(x));
            report(dir / "tensor.json");
            io::write_json(dir / "ground_truth.json", io::ground_truth_to_json(net.truth));
            report(dir / "ground_truth.json");
            return 0;
        }

        if (dec->parsed()) {
            const json cfg = load_config(dec_c);
            const DynTensor x = load_tensor(dec_input, dec_nodes, dec_horizon, dec_loops, dec_c.granularity);
            TcOptions tc;
            tc_options_from_json(cfg, tc);
            const std::uint64_t seed = dec_c.seed.value_or(cfg.value("seed", std::uint64_t{0}));
            tc.cp.seed = derive_seed(seed, "decompose");
            tc.cp.mask_diagonal = !x.self_loops_allowed();
            const int rank = dec_c.rank.value_or(cfg.value("rank", 0));
            if (rank < 1) throw InvalidArgument("decompose needs --rank");
            const auto model = cp_als(x, rank, tc.cp);
            io::write_json(fs::path(dec_c.out_dir) / "models.json", io::model_to_json(model));
            report(fs::path(dec_c.out_dir) / "models.json");
            const auto cc = core_consistency(x, model);
            std::cout << "relative fit " << relative_fit(model, x) << ", core consistency "
                      << (cc.score ? std::to_string(*cc.score) : std::string("undefined"))
                      << (cc.explanation.empty() ? "" : " (" + cc.explanation + ")") << "\n";
            return 0;
        }

        if (cl->parsed()) {
            const json cfg = load_config(cl_c);
            TcOptions tc;
            tc_options_from_json(cfg, tc);
            const auto models = load_models(cl_models);
            const auto clusters = cluster_models(models, tc.cluster);
            io::write_json(fs::path(cl_c.out_dir) / "clusters.json", io::clusters_to_json(clusters));
            report(fs::path(cl_c.out_dir) / "clusters.json");
            return 0;
        }

        if (lt->parsed()) {
            const json cfg = load_config(lt_c);
            TcOptions tc;
            tc_options_from_json(cfg, tc);
            const DynTensor x = load_tensor(lt_input, lt_nodes, lt_horizon, lt_loops, lt_c.granularity);
            const auto models = load_models(lt_models);
            const auto clusters = io::clusters_from_json(io::read_json(lt_clusters));
            std::vector<PiecewiseRate> rates;
            for (const auto& gm : models) rates.push_back(fit_rate(gm, tc.window));
            const auto threshold = network_threshold(x, tc.window);
            json arr = json::array();
            for (const auto& c : clusters) {
                if (c.filtered) continue;
                if (c.model_index < 0 || c.model_index >= static_cast<int>(models.size()))
                    throw InvalidArgument("cluster refers to model " + std::to_string(c.model_index) + " not in models file");
                const auto life = detect_lifetime(c, models[c.model_index], rates[c.model_index], threshold);
                arr.push_back(io::lifetime_to_json(life, &rates[c.model_index]));
            }
            const fs::path dir = lt_c.out_dir;
            io::write_json(dir / "lifetimes.json", arr);
            report(dir / "lifetimes.json");
            io::write_text(dir / "rates.csv", io::rates_csv(models, rates, threshold));
            report(dir / "rates.csv");
            return 0;
        }

        if (ev->parsed()) {
            const auto truth = io::ground_truth_from_json(io::read_json(ev_truth));
            if (truth.clusters.empty()) throw InvalidArgument("ground truth has no clusters");
            const auto models = load_models(ev_models);
            const auto clusters = io::clusters_from_json(io::read_json(ev_clusters));
            const auto lifetimes = io::read_json(ev_lifetimes);
            const TruthSet ts = make_truth_set(truth, ev_c.granularity);
            std::vector<DetectedProfile> det;
            std::vector<std::vector<int>> lives;
            std::size_t li = 0;
            for (const auto& c : clusters) {
                if (c.filtered) continue;
                if (li >= lifetimes.size()) throw InvalidArgument("lifetimes file has fewer entries than retained clusters");
                const auto& lj = lifetimes[li++];
                const auto rate = io::rate_from_segments_json(lj.at("segments"), c.model_index);
                det.push_back(model_profile(c.members, models.at(c.model_index), rate.segments.empty() ? nullptr : &rate));
                lives.push_back(expand_steps(io::lifetime_from_json(lj).active_steps, ev_c.granularity, truth.horizon));
            }
            const auto m = evaluate_mapping(det, ts.profiles, ts.lifetimes, ts.include_diagonal, lives);
            const fs::path dir = ev_c.out_dir;
            io::write_json(dir / "metrics.json", io::metrics_to_json(m));
            report(dir / "metrics.json");
            io::write_text(dir / "pr_curve.csv", io::pr_csv(m.pr));
            report(dir / "pr_curve.csv");
            std::printf("member F1 %.4f, cluster F1 %.4f, lifetime F1 %.4f\n", m.member.f1, m.cluster.f1,
                        m.mean_lifetime_f1);
            return 0;
        }

        if (pl->parsed()) {
            json cfg = load_config(pl_c);
            const fs::path base = pl_c.config.empty() ? fs::path() : fs::path(pl_c.config).parent_path();
            if (pl_c.seed) cfg["seed"] = *pl_c.seed;
            if (!pl_c.preset.empty()) cfg["input"] = {{"preset", pl_c.preset}};
            if (!cfg.contains("input")) cfg["input"] = {{"preset", "small"}};
            auto pc = pipeline_config_from_json(cfg, base);
            if (pc.synth && !pl_c.preset.empty() && pl_c.preset == "paper") pc.synth->validate_paper_ranges();
            if (pl_c.rank) pc.rank = *pl_c.rank;
            if (pl_c.granularity > 1 || !cfg.contains("granularity")) pc.granularity = std::max(pl_c.granularity, cfg.value("granularity", 1));
            if (pl->get_option("--out-dir")->count() > 0 || !cfg.contains("out_dir")) pc.out_dir = pl_c.out_dir;
            const auto rep = run_pipeline(pc);
            for (const auto& p : rep.written) report(p);
            std::cout << "rank " << rep.rank << ", retained clusters " << rep.retained_clusters << "\n";
            if (rep.metrics)
                std::printf("member F1 %.4f, cluster F1 %.4f\n", rep.metrics->member.f1, rep.metrics->cluster.f1);
            return 0;
        }

        if (ex->parsed()) {
            json cfg = load_config(ex_c);
            if (ex_c.seed) cfg["seed"] = *ex_c.seed;
            if (!ex_c.preset.empty()) cfg["preset"] = ex_c.preset;
            auto ec = experiment_config_from_json(cfg);
            if (ex->get_option("--granularity")->count() > 0) ec.granularities = {ex_c.granularity};
            const auto res = run_experiment(ec);
            const fs::path dir = ex->get_option("--out-dir")->count() > 0 ? fs::path(ex_c.out_dir)
                                                                          : fs::path(cfg.value("out_dir", ex_c.out_dir));
            for (const auto& p : write_experiment(res, dir)) report(p);
            for (const auto& f : res.failures) std::cerr << "failed: " << f << "\n";
            std::cout << res.rows.size() << " rows, " << res.failures.size() << " failed networks\n";
            return res.failures.empty() ? 0 : 3;
        }
    } catch (const StageError& e) {
        std::cerr << "error in stage " << e.stage() << ": " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
