#ifndef TEMPONET_LIFETIME_HPP
#define TEMPONET_LIFETIME_HPP

// Edge-generating rate reconstruction and cluster lifetimes.
//
// A component's rate samples are smoothed with a centered moving average; the
// smoothing residuals give a noise estimate (mean, std) and the segment error
// bound e_max = (mean + 3 std)^2. Bottom-up segmentation then merges adjacent
// segments (cheapest first) while the merged least-squares line keeps its
// per-point mean squared residual within e_max. A cluster is alive at t when
// its average pair rate strictly exceeds the network-average rate.

#include "temponet/clustering.hpp"
#include "temponet/cp_decomp.hpp"
#include "temponet/error.hpp"
#include "temponet/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace temponet {

struct RateSegment {
    int start = 0; // inclusive
    int end = 0;   // inclusive
    double slope = 0.0;
    double intercept = 0.0;

    double at(int t) const { return slope * t + intercept; }
    int length() const { return end - start + 1; }
};

struct PiecewiseRate {
    std::vector<RateSegment> segments;
    int source_model = -1;

    int horizon() const { return segments.empty() ? 0 : segments.back().end + 1; }
    int segment_count() const { return static_cast<int>(segments.size()); }

    // Fitted rate at t, clamped at 0.
    double evaluate(int t) const {
        if (segments.empty() || t < 0 || t > segments.back().end)
            throw InvalidArgument("PiecewiseRate::evaluate: t = " + std::to_string(t) + " outside the fitted range");
        auto it = std::upper_bound(segments.begin(), segments.end(), t,
                                   [](int v, const RateSegment& s) { return v < s.start; });
        return std::max(0.0, std::prev(it)->at(t));
    }

    std::vector<double> sample() const {
        std::vector<double> out(static_cast<std::size_t>(horizon()));
        for (const auto& s : segments)
            for (int t = s.start; t <= s.end; ++t) out[t] = std::max(0.0, s.at(t));
        return out;
    }
};

struct NoiseEstimate {
    double mean = 0.0;
    double std = 0.0;
    int window = 1;
};

struct LifetimeSet {
    int model_index = -1;
    std::vector<int> members;
    std::vector<int> active_steps;                // sorted
    std::vector<std::pair<int, int>> intervals;   // inclusive [start, end] runs
};

// Largest odd window <= min(window, length); at least 1.
inline int fit_window(int window, int length) {
    int w = std::min(window, length);
    if (w % 2 == 0) --w;
    return std::max(w, 1);
}

// Centered moving average; near the ends the window is truncated to the
// available samples (so [0, 3, 0] with window 3 gives [1.5, 1, 1.5]).
inline std::vector<double> sliding_window_filter(std::span<const double> series, int window) {
    const int n = static_cast<int>(series.size());
    if (window < 1 || window % 2 == 0) throw InvalidArgument("sliding window must be an odd positive integer");
    if (window > n) throw InvalidArgument("sliding window " + std::to_string(window) + " exceeds series length " +
                                          std::to_string(n));
    const int half = window / 2;
    std::vector<double> prefix(n + 1, 0.0);
    for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + series[i];
    std::vector<double> out(n);
    for (int t = 0; t < n; ++t) {
        const int lo = std::max(0, t - half);
        const int hi = std::min(n - 1, t + half);
        if (window == 1)
            out[t] = series[t];
        else
            out[t] = (prefix[hi + 1] - prefix[lo]) / (hi - lo + 1);
    }
    return out;
}

inline NoiseEstimate estimate_noise(std::span<const double> series, int window) {
    const int n = static_cast<int>(series.size());
    if (n < 2) throw InvalidArgument("estimate_noise needs at least two samples");
    const auto smooth = sliding_window_filter(series, window);
    double mean = 0.0;
    for (int j = 0; j < n; ++j) mean += smooth[j] - series[j];
    mean /= n;
    double var = 0.0;
    for (int j = 0; j < n; ++j) {
        const double d = (smooth[j] - series[j]) - mean;
        var += d * d;
    }
    var /= (n - 1);
    return {mean, std::sqrt(var), window};
}

inline double default_threshold(const NoiseEstimate& noise) {
    const double b = noise.mean + 3.0 * noise.std;
    return b * b;
}

namespace detail {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double mse = 0.0;
};

// Least-squares line over series[start..end] against the global index t.
inline LineFit fit_line(std::span<const double> y, int start, int end) {
    const int m = end - start + 1;
    double tm = 0.0, ym = 0.0;
    for (int t = start; t <= end; ++t) {
        tm += t;
        ym += y[t];
    }
    tm /= m;
    ym /= m;
    double sxx = 0.0, sxy = 0.0;
    for (int t = start; t <= end; ++t) {
        sxx += (t - tm) * (t - tm);
        sxy += (t - tm) * (y[t] - ym);
    }
    LineFit f;
    f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    f.intercept = ym - f.slope * tm;
    double sse = 0.0;
    for (int t = start; t <= end; ++t) {
        const double r = y[t] - (ym + f.slope * (t - tm));
        sse += r * r;
    }
    f.mse = sse / m;
    return f;
}

} // namespace detail

// Greedy bottom-up segmentation under a per-point MSE bound.
inline PiecewiseRate segment_series(std::span<const double> series, double e_max) {
    const int n = static_cast<int>(series.size());
    if (n < 2) throw InvalidArgument("segment_series needs at least two samples");
    if (!(e_max >= 0.0)) throw InvalidArgument("segment_series: e_max must be >= 0");

    // Rounding slack so exactly collinear pieces merge when e_max == 0.
    double energy = 0.0;
    for (double v : series) energy += v * v;
    const double slack = 1e-24 * (1.0 + energy / n);

    std::vector<std::pair<int, int>> segs;
    for (int s = 0; s + 1 < n; s += 2) segs.push_back({s, s + 1});
    if (n % 2 == 1) segs.back().second = n - 1;

    std::vector<double> merge_cost(segs.size() > 0 ? segs.size() - 1 : 0);
    auto cost_of = [&](std::size_t k) { return detail::fit_line(series, segs[k].first, segs[k + 1].second).mse; };
    for (std::size_t k = 0; k + 1 < segs.size(); ++k) merge_cost[k] = cost_of(k);

    while (segs.size() > 1) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < merge_cost.size(); ++k)
            if (merge_cost[k] < merge_cost[best]) best = k;
        if (!(merge_cost[best] <= e_max + slack)) break;
        segs[best].second = segs[best + 1].second;
        segs.erase(segs.begin() + static_cast<std::ptrdiff_t>(best) + 1);
        merge_cost.erase(merge_cost.begin() + static_cast<std::ptrdiff_t>(best));
        if (best < merge_cost.size()) merge_cost[best] = cost_of(best);
        if (best > 0) merge_cost[best - 1] = cost_of(best - 1);
    }

    PiecewiseRate out;
    for (const auto& [s, e] : segs) {
        const auto f = detail::fit_line(series, s, e);
        out.segments.push_back({s, e, f.slope, f.intercept});
    }
    return out;
}

// Smooth, estimate noise, and segment with the 3-sigma bound.
inline PiecewiseRate fit_rate(const GenerativeModel& gm, int window, NoiseEstimate* noise_out = nullptr) {
    const auto& y = gm.rate_samples;
    PiecewiseRate rate;
    if (y.size() < 2) {
        // Degenerate horizon: a single constant segment.
        rate.segments.push_back({0, static_cast<int>(y.size()) - 1, 0.0, y.empty() ? 0.0 : y.front()});
    } else {
        const auto noise = estimate_noise(y, fit_window(window, static_cast<int>(y.size())));
        if (noise_out) *noise_out = noise;
        rate = segment_series(y, default_threshold(noise));
    }
    rate.source_model = gm.index;
    return rate;
}

inline double mean_membership(std::span<const int> members, const GenerativeModel& gm) {
    if (members.empty()) return 0.0;
    double s = 0.0;
    for (int i : members) s += gm.memberships.at(i);
    return s / static_cast<double>(members.size());
}

// (1/|C|^2) sum_{i,j in C} a_i a_j f(t) = mean(a)^2 f(t).
inline double cluster_rate(const ClusterRecord& cluster, const GenerativeModel& gm, const PiecewiseRate& rate, int t) {
    const double m = mean_membership(cluster.members, gm);
    return m * m * rate.evaluate(t);
}

inline std::vector<double> network_threshold(const DynTensor& x, int window) {
    const auto series = empirical_rate_series(x);
    if (series.empty()) return series;
    return sliding_window_filter(series, fit_window(window, static_cast<int>(series.size())));
}

// Model-based network-average rate: (1/|V|^2) sum_r (sum_i a_ir)^2 f_r(t).
inline std::vector<double> model_threshold(std::span<const GenerativeModel> models, std::span<const PiecewiseRate> rates) {
    if (models.size() != rates.size()) throw InvalidArgument("model_threshold: one rate per model required");
    if (models.empty()) return {};
    const int horizon = models.front().horizon();
    const double n = models.front().node_count();
    std::vector<double> out(horizon, 0.0);
    for (std::size_t r = 0; r < models.size(); ++r) {
        double s = 0.0;
        for (double a : models[r].memberships) s += a;
        for (int t = 0; t < horizon; ++t) out[t] += s * s * rates[r].evaluate(t);
    }
    for (auto& v : out) v /= n * n;
    return out;
}

inline std::vector<std::pair<int, int>> intervals_from_steps(std::span<const int> steps) {
    std::vector<std::pair<int, int>> out;
    for (int t : steps) {
        if (!out.empty() && out.back().second + 1 == t)
            out.back().second = t;
        else
            out.push_back({t, t});
    }
    return out;
}

inline LifetimeSet detect_lifetime(const ClusterRecord& cluster, const GenerativeModel& gm, const PiecewiseRate& rate,
                                   std::span<const double> threshold) {
    const int horizon = gm.horizon();
    if (static_cast<int>(threshold.size()) != horizon)
        throw InvalidArgument("detect_lifetime: threshold length " + std::to_string(threshold.size()) +
                              " != horizon " + std::to_string(horizon));
    LifetimeSet out;
    out.model_index = cluster.model_index;
    out.members = cluster.members;
    const double m = mean_membership(cluster.members, gm);
    for (int t = 0; t < horizon; ++t)
        if (m * m * rate.evaluate(t) > threshold[t]) out.active_steps.push_back(t);
    out.intervals = intervals_from_steps(out.active_steps);
    return out;
}

} // namespace temponet

#endif // TEMPONET_LIFETIME_HPP
