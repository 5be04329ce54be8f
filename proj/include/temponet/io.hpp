#ifndef TEMPONET_IO_HPP
#define TEMPONET_IO_HPP

// File formats: edge-event CSV input and JSON/CSV dumps for every pipeline
// stage. JSON doubles are written with round-trip precision so dumps reload to
// identical values.

#include "temponet/baselines.hpp"
#include "temponet/clustering.hpp"
#include "temponet/cp_decomp.hpp"
#include "temponet/error.hpp"
#include "temponet/eval.hpp"
#include "temponet/lifetime.hpp"
#include "temponet/synthgen.hpp"
#include "temponet/tensor.hpp"

#include "json.hpp" // nlohmann::json, vendored

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

namespace temponet::io {

using json = nlohmann::json;

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgument("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidArgument("cannot write " + path.string());
    out << text;
    if (!out) throw InvalidArgument("write failed for " + path.string());
}

inline json read_json(const std::filesystem::path& path) {
    try {
        return json::parse(read_text(path));
    } catch (const json::parse_error& e) {
        throw InvalidArgument(path.string() + ": " + e.what());
    }
}

inline void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

// ---- edge events ---------------------------------------------------------

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(line);
    while (std::getline(ss, cur, ',')) out.push_back(trim(cur));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

} // namespace detail

// CSV with header `src,dst,t[,weight]`; `#` lines and blank lines are skipped.
inline std::vector<EdgeEvent> parse_edge_csv(std::istream& in, const std::string& source = "<input>") {
    std::vector<EdgeEvent> events;
    std::string line;
    int lineno = 0;
    bool header_seen = false;
    int weight_col = -1;
    while (std::getline(in, line)) {
        ++lineno;
        const auto t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto cols = detail::split_csv(t);
        if (!header_seen) {
            header_seen = true;
            if (cols.size() < 3 || cols[0] != "src" || cols[1] != "dst" || cols[2] != "t")
                throw InvalidArgument(source + ":" + std::to_string(lineno) + ": expected header src,dst,t[,weight]");
            if (cols.size() >= 4) {
                if (cols[3] != "weight") throw InvalidArgument(source + ":" + std::to_string(lineno) + ": unknown column " + cols[3]);
                weight_col = 3;
            }
            continue;
        }
        const std::size_t expect = weight_col < 0 ? 3 : 4;
        if (cols.size() != expect && !(weight_col >= 0 && cols.size() == 3))
            throw InvalidArgument(source + ":" + std::to_string(lineno) + ": expected " + std::to_string(expect) +
                                  " columns");
        try {
            std::size_t pos = 0;
            auto as_int = [&](const std::string& s) {
                const long v = std::stol(s, &pos);
                if (pos != s.size()) throw std::invalid_argument(s);
                return static_cast<int>(v);
            };
            EdgeEvent e;
            e.src = as_int(cols[0]);
            e.dst = as_int(cols[1]);
            e.t = as_int(cols[2]);
            if (weight_col >= 0 && cols.size() == 4 && !cols[3].empty()) {
                e.weight = std::stod(cols[3], &pos);
                if (pos != cols[3].size()) throw std::invalid_argument(cols[3]);
            }
            events.push_back(e);
        } catch (const std::logic_error&) {
            throw InvalidArgument(source + ":" + std::to_string(lineno) + ": malformed number in \"" + t + "\"");
        }
    }
    if (!header_seen) throw InvalidArgument(source + ": missing header src,dst,t[,weight]");
    return events;
}

inline std::vector<EdgeEvent> read_edge_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open " + path.string());
    return parse_edge_csv(in, path.string());
}

inline std::string edges_to_csv(const DynTensor& x) {
    std::string out = "src,dst,t,weight\n";
    for (const auto& e : x.entries())
        out += std::to_string(e.i) + "," + std::to_string(e.j) + "," + std::to_string(e.t) + "," +
               format_double(e.value) + "\n";
    return out;
}

// ---- tensor --------------------------------------------------------------

inline json tensor_to_json(const DynTensor& x) {
    json entries = json::array();
    for (const auto& e : x.entries()) entries.push_back({e.i, e.j, e.t, e.value});
    return {{"node_count", x.node_count()},
            {"horizon", x.horizon()},
            {"self_loops_allowed", x.self_loops_allowed()},
            {"granularity", x.granularity()},
            {"source_horizon", x.source_horizon()},
            {"entries", std::move(entries)}};
}

inline DynTensor tensor_from_json(const json& j) {
    try {
        std::vector<TensorEntry> cells;
        for (const auto& e : j.at("entries"))
            cells.push_back({e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<int>(), e.at(3).get<double>()});
        return DynTensor::from_cells(j.at("node_count").get<int>(), j.at("horizon").get<int>(),
                                     j.at("self_loops_allowed").get<bool>(), std::move(cells),
                                     j.value("granularity", 1), j.value("source_horizon", -1));
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("tensor JSON: ") + e.what());
    }
}

// ---- models --------------------------------------------------------------

inline json matrix_rows(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Eigen::MatrixXd matrix_from_rows(const json& rows, Eigen::Index cols) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (static_cast<Eigen::Index>(rows[i].size()) != cols) throw InvalidArgument("model JSON: ragged loading matrix");
        for (Eigen::Index c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(i), c) = rows[i][c].get<double>();
    }
    return m;
}

inline json model_to_json(const CpModel& m) {
    return {{"rank", m.rank},
            {"scales", m.scales},
            {"node_loadings", matrix_rows(m.node_loadings)},
            {"time_loadings", matrix_rows(m.time_loadings)},
            {"fit_error", m.fit_error},
            {"iterations", m.iterations},
            {"seed", m.options.seed},
            {"options",
             {{"max_iters", m.options.max_iters},
              {"tol", m.options.tol},
              {"mask_diagonal", m.options.mask_diagonal},
              {"n_starts", m.options.n_starts}}},
            {"objective_history", m.objective_history},
            {"degenerate_components", m.degenerate_components}};
}

inline CpModel model_from_json(const json& j) {
    try {
        CpModel m;
        m.rank = j.at("rank").get<int>();
        m.scales = j.at("scales").get<std::vector<double>>();
        m.node_loadings = matrix_from_rows(j.at("node_loadings"), m.rank);
        m.time_loadings = matrix_from_rows(j.at("time_loadings"), m.rank);
        m.fit_error = j.at("fit_error").get<double>();
        m.iterations = j.at("iterations").get<int>();
        m.options.seed = j.at("seed").get<std::uint64_t>();
        const auto& o = j.at("options");
        m.options.max_iters = o.at("max_iters").get<int>();
        m.options.tol = o.at("tol").get<double>();
        m.options.mask_diagonal = o.at("mask_diagonal").get<bool>();
        m.options.n_starts = o.value("n_starts", 1);
        m.objective_history = j.value("objective_history", std::vector<double>{});
        m.degenerate_components = j.value("degenerate_components", std::vector<int>{});
        if (static_cast<int>(m.scales.size()) != m.rank) throw InvalidArgument("model JSON: scales length != rank");
        return m;
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("model JSON: ") + e.what());
    }
}

// ---- clusters ------------------------------------------------------------

inline json cluster_to_json(const ClusterRecord& c) {
    return {{"model_index", c.model_index}, {"members", c.members},       {"so_score", c.so_score},
            {"rank_position", c.rank_position}, {"filtered", c.filtered}, {"mean_membership", c.mean_membership},
            {"degenerate", c.degenerate}};
}

inline json clusters_to_json(const std::vector<ClusterRecord>& clusters, const std::string& method = "TC") {
    json arr = json::array();
    for (const auto& c : clusters) {
        auto j = cluster_to_json(c);
        j["method"] = method;
        arr.push_back(std::move(j));
    }
    return arr;
}

inline std::vector<ClusterRecord> clusters_from_json(const json& arr) {
    std::vector<ClusterRecord> out;
    try {
        for (const auto& j : arr) {
            ClusterRecord c;
            c.model_index = j.at("model_index").get<int>();
            c.members = j.at("members").get<std::vector<int>>();
            c.so_score = j.at("so_score").get<double>();
            c.rank_position = j.at("rank_position").get<int>();
            c.filtered = j.at("filtered").get<bool>();
            c.mean_membership = j.value("mean_membership", 0.0);
            c.degenerate = j.value("degenerate", false);
            out.push_back(std::move(c));
        }
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("clusters JSON: ") + e.what());
    }
    return out;
}

// ---- rates and lifetimes -------------------------------------------------

inline json segments_to_json(const PiecewiseRate& rate) {
    json segs = json::array();
    for (const auto& s : rate.segments)
        segs.push_back({{"start", s.start}, {"end", s.end}, {"slope", s.slope}, {"intercept", s.intercept}});
    return segs;
}

inline json lifetime_to_json(const LifetimeSet& life, const PiecewiseRate* rate, const std::string& method = "TC") {
    json intervals = json::array();
    for (const auto& [s, e] : life.intervals) intervals.push_back({s, e});
    json j = {{"method", method},
              {"model_index", life.model_index},
              {"members", life.members},
              {"segments", rate ? segments_to_json(*rate) : json::array()},
              {"active_intervals", std::move(intervals)}};
    return j;
}

inline LifetimeSet lifetime_from_json(const json& j) {
    LifetimeSet life;
    life.model_index = j.at("model_index").get<int>();
    life.members = j.at("members").get<std::vector<int>>();
    for (const auto& iv : j.at("active_intervals")) {
        const int s = iv.at(0).get<int>(), e = iv.at(1).get<int>();
        life.intervals.push_back({s, e});
        for (int t = s; t <= e; ++t) life.active_steps.push_back(t);
    }
    return life;
}

inline PiecewiseRate rate_from_segments_json(const json& segs, int model_index) {
    PiecewiseRate r;
    r.source_model = model_index;
    for (const auto& s : segs)
        r.segments.push_back({s.at("start").get<int>(), s.at("end").get<int>(), s.at("slope").get<double>(),
                              s.at("intercept").get<double>()});
    return r;
}

inline std::string rates_csv(const std::vector<GenerativeModel>& models, const std::vector<PiecewiseRate>& rates,
                             const std::vector<double>& threshold) {
    std::string out = "t,model_index,rate_sample,fitted_rate,network_threshold\n";
    for (std::size_t r = 0; r < models.size(); ++r)
        for (int t = 0; t < models[r].horizon(); ++t)
            out += std::to_string(t) + "," + std::to_string(models[r].index) + "," +
                   format_double(models[r].rate_samples[t]) + "," + format_double(rates[r].evaluate(t)) + "," +
                   format_double(threshold.at(t)) + "\n";
    return out;
}

// ---- synthetic specs and ground truth ------------------------------------

inline json spec_to_json(const SynthSpec& s) {
    json j = {{"node_count", s.node_count},
              {"horizon", s.horizon},
              {"cluster_count_min", s.cluster_count_min},
              {"cluster_count_max", s.cluster_count_max},
              {"cluster_size_min", s.cluster_size_min},
              {"cluster_size_max", s.cluster_size_max},
              {"overlap_allowed", s.overlap_allowed},
              {"overlap_fraction", s.overlap_fraction},
              {"overlap_share", s.overlap_share},
              {"periodic_fraction", s.periodic_fraction},
              {"period_min", s.period_min},
              {"period_max", s.period_max},
              {"duty_cycle", s.duty_cycle},
              {"rate_min", s.rate_min},
              {"rate_max", s.rate_max},
              {"noise_max", s.noise_max},
              {"min_lifetime_fraction", s.min_lifetime_fraction},
              {"pieces_min", s.pieces_min},
              {"pieces_max", s.pieces_max},
              {"self_loops", s.self_loops},
              {"seed", s.seed}};
    j["density_min"] = s.density_min ? json(*s.density_min) : json(nullptr);
    j["density_max"] = s.density_max ? json(*s.density_max) : json(nullptr);
    j["noise_rate"] = s.noise_rate ? json(*s.noise_rate) : json(nullptr);
    return j;
}

// Missing keys keep the values of `base`.
inline SynthSpec spec_from_json(const json& j, SynthSpec base = {}) {
    try {
        auto get = [&](const char* key, auto& field) {
            if (j.contains(key) && !j[key].is_null()) field = j[key].get<std::decay_t<decltype(field)>>();
        };
        auto get_opt = [&](const char* key, std::optional<double>& field) {
            if (j.contains(key)) field = j[key].is_null() ? std::nullopt : std::optional<double>(j[key].get<double>());
        };
        get("node_count", base.node_count);
        get("horizon", base.horizon);
        get("cluster_count_min", base.cluster_count_min);
        get("cluster_count_max", base.cluster_count_max);
        get("cluster_size_min", base.cluster_size_min);
        get("cluster_size_max", base.cluster_size_max);
        get("overlap_allowed", base.overlap_allowed);
        get("overlap_fraction", base.overlap_fraction);
        get("overlap_share", base.overlap_share);
        get("periodic_fraction", base.periodic_fraction);
        get("period_min", base.period_min);
        get("period_max", base.period_max);
        get("duty_cycle", base.duty_cycle);
        get("rate_min", base.rate_min);
        get("rate_max", base.rate_max);
        get("noise_max", base.noise_max);
        get("min_lifetime_fraction", base.min_lifetime_fraction);
        get("pieces_min", base.pieces_min);
        get("pieces_max", base.pieces_max);
        get("self_loops", base.self_loops);
        get("seed", base.seed);
        get_opt("density_min", base.density_min);
        get_opt("density_max", base.density_max);
        get_opt("noise_rate", base.noise_rate);
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("synth spec JSON: ") + e.what());
    }
    return base;
}

inline json ground_truth_to_json(const GroundTruth& g) {
    json clusters = json::array();
    for (const auto& c : g.clusters) {
        json segs = json::array();
        for (const auto& p : c.pieces) {
            const bool lin = p.kind == RatePiece::Kind::Linear;
            segs.push_back({{"start", p.start},
                            {"end", p.end},
                            {"kind", lin ? "linear" : "constant"},
                            {"params", lin ? json::array({p.v0, p.v1}) : json::array({p.v0})}});
        }
        json intervals = json::array();
        for (const auto& [s, e] : intervals_from_steps(c.true_lifetime)) intervals.push_back({s, e});
        clusters.push_back({{"members", c.members},
                            {"segments", std::move(segs)},
                            {"period", c.period ? json(*c.period) : json(nullptr)},
                            {"phase", c.phase},
                            {"on_length", c.on_length},
                            {"true_lifetime_intervals", std::move(intervals)},
                            {"average_density", average_density(c)}});
    }
    return {{"clusters", std::move(clusters)},
            {"noise_rate", g.noise_rate},
            {"seed", g.seed},
            {"node_count", g.node_count},
            {"horizon", g.horizon},
            {"self_loops", g.self_loops},
            {"spec", spec_to_json(g.spec)}};
}

inline GroundTruth ground_truth_from_json(const json& j) {
    try {
        GroundTruth g;
        g.noise_rate = j.at("noise_rate").get<double>();
        g.seed = j.at("seed").get<std::uint64_t>();
        g.spec = spec_from_json(j.at("spec"));
        g.node_count = j.value("node_count", g.spec.node_count);
        g.horizon = j.value("horizon", g.spec.horizon);
        g.self_loops = j.value("self_loops", g.spec.self_loops);
        for (const auto& cj : j.at("clusters")) {
            GroundTruthCluster c;
            c.members = cj.at("members").get<std::vector<int>>();
            for (const auto& sj : cj.at("segments")) {
                RatePiece p;
                p.start = sj.at("start").get<int>();
                p.end = sj.at("end").get<int>();
                const auto kind = sj.at("kind").get<std::string>();
                const auto& params = sj.at("params");
                if (kind == "constant") {
                    p.kind = RatePiece::Kind::Constant;
                    p.v0 = p.v1 = params.at(0).get<double>();
                } else if (kind == "linear") {
                    p.kind = RatePiece::Kind::Linear;
                    p.v0 = params.at(0).get<double>();
                    p.v1 = params.at(1).get<double>();
                } else {
                    throw InvalidArgument("ground truth JSON: unknown segment kind " + kind);
                }
                c.pieces.push_back(p);
            }
            if (cj.contains("period") && !cj["period"].is_null()) c.period = cj["period"].get<int>();
            c.phase = cj.value("phase", 0);
            c.on_length = cj.value("on_length", 0);
            c.refresh_lifetime(g.horizon);
            g.clusters.push_back(std::move(c));
        }
        return g;
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("ground truth JSON: ") + e.what());
    }
}

// ---- metrics -------------------------------------------------------------

inline json metrics_to_json(const MetricsReport& m) {
    json pr = json::array();
    for (const auto& p : m.pr) pr.push_back({{"k", p.k}, {"precision", p.precision}, {"recall", p.recall}});
    return {{"member_precision", m.member.precision},
            {"member_recall", m.member.recall},
            {"member_f1", m.member.f1},
            {"cluster_recall", m.cluster.recall},
            {"cluster_precision", m.cluster.precision},
            {"cluster_f1", m.cluster.f1},
            {"cluster_precision_undefined", m.cluster.precision_undefined},
            {"matched_truths", m.cluster.matched_truths},
            {"retained", m.retained},
            {"truth_count", m.truth_count},
            {"pr_curve", std::move(pr)},
            {"lifetime_f1", m.lifetime_f1},
            {"mean_lifetime_f1", m.mean_lifetime_f1}};
}

inline std::string pr_csv(const std::vector<PrPoint>& pr) {
    std::string out = "k,precision,recall\n";
    for (const auto& p : pr)
        out += std::to_string(p.k) + "," + format_double(p.precision) + "," + format_double(p.recall) + "\n";
    return out;
}

} // namespace temponet::io

#endif // TEMPONET_IO_HPP
