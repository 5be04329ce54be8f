#ifndef TEMPONET_CP_DECOMP_HPP
#define TEMPONET_CP_DECOMP_HPP

// Non-negative symmetric CP (PARAFAC) decomposition of a DynTensor:
//
//     X_ijk ~ sum_r lambda_r * a_ir * a_jr * t_kr,   lambda, A, T >= 0
//
// fitted by alternating least squares. Each sweep
//   1. solves the node-mode normal equations row by row (NNLS) with the other
//      node factor held at the current A, then moves A toward that candidate
//      with a line search on the true objective (so the symmetric coupling
//      never increases the error);
//   2. solves the time mode exactly (row-wise NNLS) with A fixed.
// With mask_diagonal the (i,i,t) cells are excluded from the objective; the
// normal equations then see those cells filled with the current reconstruction
// (EM-style imputation), which majorizes the masked objective.

#include "temponet/error.hpp"
#include "temponet/nnls.hpp"
#include "temponet/random.hpp"
#include "temponet/tensor.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace temponet {

struct CpOptions {
    int max_iters = 500;
    double tol = 1e-6;
    std::uint64_t seed = 0;
    bool mask_diagonal = false;
    int n_starts = 1;
};

struct CpModel {
    int rank = 0;
    std::vector<double> scales;     // lambda_r, sorted descending
    Eigen::MatrixXd node_loadings;  // |V| x R, columns unit 2-norm (or zero)
    Eigen::MatrixXd time_loadings;  // T x R, columns unit 2-norm (or zero)
    double fit_error = 0.0;         // ||X - Xhat||_F over the fitted cells
    int iterations = 0;
    std::vector<double> objective_history; // entry 0 is the initial objective
    std::vector<int> degenerate_components;
    CpOptions options;

    int node_count() const { return static_cast<int>(node_loadings.rows()); }
    int horizon() const { return static_cast<int>(time_loadings.rows()); }
};

// One normalized component: memberships in [0,1] with max 1, rate samples >= 0.
struct GenerativeModel {
    int index = 0;
    std::vector<double> memberships;
    std::vector<double> rate_samples;

    bool is_zero() const {
        return std::all_of(memberships.begin(), memberships.end(), [](double a) { return a == 0.0; });
    }
    int node_count() const { return static_cast<int>(memberships.size()); }
    int horizon() const { return static_cast<int>(rate_samples.size()); }
};

// Dense |V| x |V| x T array; intended for desk-scale inputs only.
struct DenseTensor {
    int node_count = 0;
    int horizon = 0;
    std::vector<double> data; // index ((k * n) + i) * n + j

    double operator()(int i, int j, int k) const {
        return data[(static_cast<std::size_t>(k) * node_count + i) * node_count + j];
    }
    double& operator()(int i, int j, int k) {
        return data[(static_cast<std::size_t>(k) * node_count + i) * node_count + j];
    }
};

namespace detail {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class SymmetricCpSolver {
  public:
    SymmetricCpSolver(const DynTensor& x, int rank, const CpOptions& opts)
        : x_(x), rank_(rank), opts_(opts), n_(x.node_count()), horizon_(x.horizon()) {
        masked_ = opts.mask_diagonal;
        for (const auto& e : x_.entries()) {
            if (masked_ && e.is_diagonal()) continue;
            xnorm2_ += e.multiplicity() * e.value * e.value;
        }
    }

    double data_norm2() const { return xnorm2_; }

    struct Result {
        RowMatrix a;
        RowMatrix t;
        double objective = 0.0;
        int iterations = 0;
        std::vector<double> history;
    };

    Result run(std::uint64_t seed) {
        Rng rng(seed);
        RowMatrix a(n_, rank_), t(horizon_, rank_);
        for (int i = 0; i < n_; ++i)
            for (int r = 0; r < rank_; ++r) a(i, r) = uniform_open01(rng);
        for (int k = 0; k < horizon_; ++k)
            for (int r = 0; r < rank_; ++r) t(k, r) = uniform_open01(rng);

        Result res;
        // Optimal joint rescaling of the random start.
        const double cross0 = cross_term(a, t);
        const double model2 = model_norm2(a, t) - diag_penalty(a, t);
        if (!(cross0 > 0.0) || !(model2 > 0.0)) {
            res.a = RowMatrix::Zero(n_, rank_);
            res.t = RowMatrix::Zero(horizon_, rank_);
            res.objective = std::sqrt(std::max(xnorm2_, 0.0));
            res.history.push_back(res.objective);
            return res;
        }
        t *= cross0 / model2;

        double f2 = objective2(a, t, cross_term(a, t));
        res.history.push_back(std::sqrt(f2));

        int it = 0;
        for (it = 1; it <= opts_.max_iters; ++it) {
            const double f_prev = std::sqrt(f2);
            f2 = update_nodes(a, t, f2);
            f2 = update_time(a, t, f2);
            if (!a.allFinite() || !t.allFinite() || !std::isfinite(f2))
                throw NumericalError("CP-ALS produced non-finite values at iteration " + std::to_string(it));
            const double f = std::sqrt(f2);
            res.history.push_back(f);
            if (f <= 1e-14 * std::sqrt(xnorm2_)) break;
            if ((f_prev - f) / std::max(f_prev, std::numeric_limits<double>::min()) < opts_.tol) break;
        }
        res.a = std::move(a);
        res.t = std::move(t);
        res.objective = std::sqrt(f2);
        res.iterations = std::min(it, opts_.max_iters);
        return res;
    }

  private:
    bool skip(const TensorEntry& e) const { return masked_ && e.is_diagonal(); }

    // <X, [[A, A, T]]> over fitted cells.
    double cross_term(const RowMatrix& a, const RowMatrix& t) const {
        double s = 0.0;
        for (const auto& e : x_.entries()) {
            if (skip(e)) continue;
            double v = 0.0;
            for (int r = 0; r < rank_; ++r) v += a(e.i, r) * a(e.j, r) * t(e.t, r);
            s += e.multiplicity() * e.value * v;
        }
        return s;
    }

    double model_norm2(const RowMatrix& a, const RowMatrix& t) const {
        const Eigen::MatrixXd ga = a.transpose() * a;
        const Eigen::MatrixXd gt = t.transpose() * t;
        return (ga.cwiseProduct(ga).cwiseProduct(gt)).sum();
    }

    // sum_{i,k} Xhat_iik^2, the part of ||Xhat||^2 excluded under the mask.
    double diag_penalty(const RowMatrix& a, const RowMatrix& t) const {
        if (!masked_) return 0.0;
        const RowMatrix a2 = a.cwiseProduct(a);
        const RowMatrix d = a2 * t.transpose(); // n x T
        return d.squaredNorm();
    }

    double objective2(const RowMatrix& a, const RowMatrix& t, double cross) const {
        return std::max(0.0, xnorm2_ - 2.0 * cross + model_norm2(a, t) - diag_penalty(a, t));
    }

    // M_ir = sum_{j,k} X_ijk * b_jr * t_kr over fitted cells (ordered).
    RowMatrix mttkrp_nodes(const RowMatrix& b, const RowMatrix& t) const {
        RowMatrix m = RowMatrix::Zero(n_, rank_);
        for (const auto& e : x_.entries()) {
            if (skip(e)) continue;
            for (int r = 0; r < rank_; ++r) {
                const double tv = e.value * t(e.t, r);
                m(e.i, r) += tv * b(e.j, r);
                if (e.i != e.j) m(e.j, r) += tv * b(e.i, r);
            }
        }
        return m;
    }

    // sum over fitted cells of X_ijk * u_ir * u_jr * t_kr (ordered).
    double quadratic_cross(const RowMatrix& u, const RowMatrix& t) const { return cross_term(u, t); }

    double update_nodes(RowMatrix& a, const RowMatrix& t, double f2) {
        const RowMatrix m_off = mttkrp_nodes(a, t);
        RowMatrix m = m_off;
        if (masked_) {
            const RowMatrix d = a.cwiseProduct(a) * t.transpose(); // current diagonal reconstruction
            const RowMatrix dt = d * t;                             // n x R
            m += a.cwiseProduct(dt);
        }
        const Eigen::MatrixXd gram = (t.transpose() * t).cwiseProduct(a.transpose() * a);
        RowMatrix cand(n_, rank_);
        for (int i = 0; i < n_; ++i) cand.row(i) = nnls_gram(gram, m.row(i).transpose()).transpose();

        const RowMatrix delta = cand - a;
        const double c0 = a.cwiseProduct(m_off).sum();
        const double c1 = 2.0 * delta.cwiseProduct(m_off).sum();
        const double c2 = quadratic_cross(delta, t);

        double best_f2 = f2;
        double best_alpha = 0.0;
        for (double alpha = 1.0; alpha >= 1.0 / 64.0; alpha *= 0.5) {
            const RowMatrix trial = a + alpha * delta;
            const double cross = c0 + alpha * c1 + alpha * alpha * c2;
            const double ft = std::max(0.0, xnorm2_ - 2.0 * cross + model_norm2(trial, t) - diag_penalty(trial, t));
            if (ft < best_f2) {
                best_f2 = ft;
                best_alpha = alpha;
            }
            if (alpha == 1.0 && ft <= f2) break;
        }
        if (best_alpha > 0.0) {
            RowMatrix trial = (a + best_alpha * delta).cwiseMax(0.0);
            // Recompute directly so the recorded objective matches the accepted iterate.
            const double exact = objective2(trial, t, cross_term(trial, t));
            if (exact <= f2) {
                a = std::move(trial);
                return exact;
            }
        }
        return f2;
    }

    double update_time(const RowMatrix& a, RowMatrix& t, double f2) {
        RowMatrix n_off = RowMatrix::Zero(horizon_, rank_);
        for (const auto& e : x_.entries()) {
            if (skip(e)) continue;
            const double w = e.multiplicity() * e.value;
            for (int r = 0; r < rank_; ++r) n_off(e.t, r) += w * a(e.i, r) * a(e.j, r);
        }
        RowMatrix rhs = n_off;
        const RowMatrix a2 = a.cwiseProduct(a);
        if (masked_) {
            const RowMatrix d = a2 * t.transpose(); // n x T
            rhs += d.transpose() * a2;              // T x R
        }
        const Eigen::MatrixXd ga = a.transpose() * a;
        const Eigen::MatrixXd gram = ga.cwiseProduct(ga);
        RowMatrix cand(horizon_, rank_);
        for (int k = 0; k < horizon_; ++k) cand.row(k) = nnls_gram(gram, rhs.row(k).transpose()).transpose();

        const double cross = cand.cwiseProduct(n_off).sum();
        const double ft = std::max(0.0, xnorm2_ - 2.0 * cross + model_norm2(a, cand) - diag_penalty(a, cand));
        if (ft <= f2) {
            t = std::move(cand);
            return ft;
        }
        return f2;
    }

    const DynTensor& x_;
    int rank_;
    CpOptions opts_;
    int n_;
    int horizon_;
    bool masked_ = false;
    double xnorm2_ = 0.0;
};

} // namespace detail

inline CpModel cp_als(const DynTensor& x, int rank, const CpOptions& opts = {}) {
    const int n = x.node_count();
    const int horizon = x.horizon();
    if (rank < 1 || rank > std::min(n, horizon))
        throw InvalidArgument("rank " + std::to_string(rank) + " outside [1, min(|V|, T)] = [1, " +
                              std::to_string(std::min(n, horizon)) + "]");
    if (opts.max_iters < 1) throw InvalidArgument("max_iters must be >= 1");
    if (!(opts.tol > 0.0)) throw InvalidArgument("tol must be > 0");
    if (opts.n_starts < 1) throw InvalidArgument("n_starts must be >= 1");

    detail::SymmetricCpSolver solver(x, rank, opts);
    std::optional<detail::SymmetricCpSolver::Result> best;
    for (int s = 0; s < opts.n_starts; ++s) {
        const std::uint64_t seed = opts.n_starts == 1 ? opts.seed : derive_seed(opts.seed, "cp-start", s);
        auto res = solver.run(seed);
        if (!best || res.objective < best->objective) best = std::move(res);
    }

    CpModel model;
    model.rank = rank;
    model.options = opts;
    model.fit_error = best->objective;
    model.iterations = best->iterations;
    model.objective_history = std::move(best->history);

    struct Column {
        double scale;
        Eigen::VectorXd a;
        Eigen::VectorXd t;
        int original;
    };
    std::vector<Column> cols;
    for (int r = 0; r < rank; ++r) {
        Eigen::VectorXd a = best->a.col(r);
        Eigen::VectorXd t = best->t.col(r);
        const double na = a.norm();
        const double nt = t.norm();
        if (na > 0.0 && nt > 0.0) {
            cols.push_back({na * na * nt, a / na, t / nt, r});
        } else {
            cols.push_back({0.0, Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(horizon), r});
        }
    }
    std::stable_sort(cols.begin(), cols.end(), [](const Column& p, const Column& q) { return p.scale > q.scale; });

    model.node_loadings.resize(n, rank);
    model.time_loadings.resize(horizon, rank);
    for (int r = 0; r < rank; ++r) {
        model.scales.push_back(cols[r].scale);
        model.node_loadings.col(r) = cols[r].a;
        model.time_loadings.col(r) = cols[r].t;
        if (cols[r].scale == 0.0) model.degenerate_components.push_back(r);
    }
    return model;
}

inline void check_model_shape(const CpModel& model, int node_count, int horizon) {
    if (model.node_count() != node_count || model.horizon() != horizon)
        throw InvalidArgument("model dimensions (" + std::to_string(model.node_count()) + " nodes, " +
                              std::to_string(model.horizon()) + " steps) do not match tensor (" +
                              std::to_string(node_count) + ", " + std::to_string(horizon) + ")");
    if (static_cast<int>(model.scales.size()) != model.rank || model.node_loadings.cols() != model.rank ||
        model.time_loadings.cols() != model.rank)
        throw InvalidArgument("model rank is inconsistent with its loading matrices");
}

inline DenseTensor reconstruct(const CpModel& model) {
    const int n = model.node_count();
    const int horizon = model.horizon();
    if (static_cast<int>(model.scales.size()) != model.rank || model.node_loadings.cols() != model.rank ||
        model.time_loadings.cols() != model.rank)
        throw InvalidArgument("model rank is inconsistent with its loading matrices");
    DenseTensor out{n, horizon, std::vector<double>(static_cast<std::size_t>(n) * n * horizon, 0.0)};
    for (int k = 0; k < horizon; ++k) {
        Eigen::VectorXd w(model.rank);
        for (int r = 0; r < model.rank; ++r) w(r) = model.scales[r] * model.time_loadings(k, r);
        const Eigen::MatrixXd slice = model.node_loadings * w.asDiagonal() * model.node_loadings.transpose();
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) out(i, j, k) = out(j, i, k) = slice(i, j);
    }
    return out;
}

// ||X - Xhat||_F / ||X||_F over every cell; 0 for a zero tensor.
inline double relative_fit(const CpModel& model, const DynTensor& x) {
    check_model_shape(model, x.node_count(), x.horizon());
    const double xn2 = x.squared_norm();
    if (xn2 == 0.0) return 0.0;
    const int n = x.node_count();
    double err2 = 0.0;
    Eigen::VectorXd w(model.rank);
    for (int k = 0; k < x.horizon(); ++k) {
        for (int r = 0; r < model.rank; ++r) w(r) = model.scales[r] * model.time_loadings(k, r);
        Eigen::MatrixXd resid = -(model.node_loadings * w.asDiagonal() * model.node_loadings.transpose());
        for (const auto& e : x.slice(k)) {
            resid(e.i, e.j) += e.value;
            if (e.i != e.j) resid(e.j, e.i) += e.value;
        }
        err2 += resid.squaredNorm();
        (void)n;
    }
    return std::sqrt(err2 / xn2);
}

// Scale each component so its largest membership is 1 and fold the factor into
// the rate samples: rate_kr = lambda_r * t_kr * m^2, which leaves every
// reconstructed cell unchanged.
inline std::vector<GenerativeModel> normalize_components(const CpModel& model) {
    std::vector<GenerativeModel> out;
    out.reserve(model.rank);
    const int n = model.node_count();
    const int horizon = model.horizon();
    for (int r = 0; r < model.rank; ++r) {
        GenerativeModel gm;
        gm.index = r;
        gm.memberships.assign(n, 0.0);
        gm.rate_samples.assign(horizon, 0.0);
        double m = 0.0;
        for (int i = 0; i < n; ++i) m = std::max(m, model.node_loadings(i, r));
        if (m > 0.0 && model.scales[r] > 0.0) {
            for (int i = 0; i < n; ++i) gm.memberships[i] = model.node_loadings(i, r) / m;
            const double factor = model.scales[r] * m * m;
            for (int k = 0; k < horizon; ++k) gm.rate_samples[k] = factor * model.time_loadings(k, r);
        }
        out.push_back(std::move(gm));
    }
    return out;
}

struct CoreConsistency {
    std::optional<double> score;
    bool rank_deficient = false;
    std::string explanation;
};

// CORCONDIA: least-squares Tucker core for the fixed loadings compared with the
// superdiagonal identity core. Advisory only. Rank-deficient loadings (dead or
// duplicated components, typical when over-factoring) are solved with
// Moore-Penrose pseudo-inverses and flagged; the score is undefined only for an
// all-zero model.
inline CoreConsistency core_consistency(const DynTensor& x, const CpModel& model) {
    check_model_shape(model, x.node_count(), x.horizon());
    const int rank = model.rank;
    const int n = x.node_count();
    const int horizon = x.horizon();

    Eigen::MatrixXd c = model.time_loadings;
    for (int r = 0; r < rank; ++r) c.col(r) *= model.scales[r];
    if (std::all_of(model.scales.begin(), model.scales.end(), [](double v) { return v == 0.0; }))
        return {std::nullopt, true, "all components are zero; the Tucker core is not defined"};

    auto condition = [](const Eigen::MatrixXd& m) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
        const auto& s = svd.singularValues();
        if (s.size() == 0 || s(0) == 0.0) return std::numeric_limits<double>::infinity();
        return s(0) / s(s.size() - 1);
    };
    const double cond_a = condition(model.node_loadings);
    const double cond_c = condition(c);
    CoreConsistency out;
    if (!(cond_a < 1e10) || !(cond_c < 1e10)) {
        out.rank_deficient = true;
        out.explanation = "loading matrices are rank deficient (condition numbers " + std::to_string(cond_a) + ", " +
                          std::to_string(cond_c) + "); core solved with pseudo-inverses";
    }

    // Singular values below 1e-10 * sigma_max are treated as exact zeros.
    auto pinv = [](const Eigen::MatrixXd& m) -> Eigen::MatrixXd {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& s = svd.singularValues();
        const double cut = s.size() > 0 ? 1e-10 * s(0) : 0.0;
        Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
        for (Eigen::Index k = 0; k < s.size(); ++k)
            if (s(k) > cut) inv(k) = 1.0 / s(k);
        return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
    };
    const Eigen::MatrixXd pa = pinv(model.node_loadings); // R x n
    const Eigen::MatrixXd pc = pinv(c);                   // R x T

    std::vector<double> core(static_cast<std::size_t>(rank) * rank * rank, 0.0);
    auto at = [&](int d, int e, int f) -> double& { return core[(static_cast<std::size_t>(d) * rank + e) * rank + f]; };

    auto add_cell = [&](int i, int j, int k, double v) {
        for (int d = 0; d < rank; ++d) {
            const double pd = pa(d, i) * v;
            if (pd == 0.0) continue;
            for (int e = 0; e < rank; ++e) {
                const double pde = pd * pa(e, j);
                for (int f = 0; f < rank; ++f) at(d, e, f) += pde * pc(f, k);
            }
        }
    };
    for (const auto& e : x.entries()) {
        if (model.options.mask_diagonal && e.is_diagonal()) continue;
        add_cell(e.i, e.j, e.t, e.value);
        if (e.i != e.j) add_cell(e.j, e.i, e.t, e.value);
    }
    if (model.options.mask_diagonal) {
        // Masked cells are taken at their fitted values.
        for (int k = 0; k < horizon; ++k)
            for (int i = 0; i < n; ++i) {
                double v = 0.0;
                for (int r = 0; r < rank; ++r)
                    v += model.node_loadings(i, r) * model.node_loadings(i, r) * c(k, r);
                if (v != 0.0) add_cell(i, i, k, v);
            }
    }

    double dev = 0.0;
    for (int d = 0; d < rank; ++d)
        for (int e = 0; e < rank; ++e)
            for (int f = 0; f < rank; ++f) {
                const double ideal = (d == e && e == f) ? 1.0 : 0.0;
                const double diff = at(d, e, f) - ideal;
                dev += diff * diff;
            }
    const double score = 100.0 * (1.0 - dev / rank);
    if (!std::isfinite(score)) {
        out.explanation = "core computation produced non-finite values";
        return out;
    }
    out.score = score;
    return out;
}

} // namespace temponet

#endif // TEMPONET_CP_DECOMP_HPP
